#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "demfi/gradcheck.hpp"
#include "demfi/image_io.hpp"
#include "demfi/metrics.hpp"
#include "demfi/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Accepts "p/q" fractions or plain decimals, comma separated.
std::vector<double> parse_t_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto slash = item.find('/');
        std::size_t used = 0;
        double v;
        if (slash != std::string::npos) {
            const double num = std::stod(item.substr(0, slash), &used);
            if (used != slash) throw std::invalid_argument("bad t value '" + item + "'");
            const double den = std::stod(item.substr(slash + 1), &used);
            if (used != item.size() - slash - 1 || den == 0.0)
                throw std::invalid_argument("bad t value '" + item + "'");
            v = num / den;
        } else {
            v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument("bad t value '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty t list");
    return out;
}

demfi::Stage parse_stage(const std::string& s) {
    if (s == "bs") return demfi::Stage::Baseline;
    if (s == "rb") return demfi::Stage::Boosted;
    throw std::invalid_argument("unknown stage '" + s + "' (expected bs or rb)");
}

int run_synth_blur(const std::string& in_dir, const std::string& out_dir, int k, int tau) {
    demfi::DegradeSpec spec;
    spec.K = k;
    spec.tau = tau;
    spec.check();
    demfi::FrameSequence seq = demfi::read_sequence(in_dir);
    demfi::FrameSequence blurred = demfi::synth_blur(seq, spec);
    demfi::write_sequence(blurred, out_dir);
    std::cerr << "synth-blur: " << seq.frames.size() << " sharp -> " << blurred.frames.size()
              << " blurry frames\n";
    return kExitOk;
}

int run_init_weights(const std::string& arch, std::uint64_t seed, const std::string& out_path) {
    const demfi::Stage stage = parse_stage(arch);
    demfi::WeightStore ws = demfi::xavier_init(demfi::arch_params(stage), seed);
    demfi::save_weights(ws, out_path);
    std::cerr << "init-weights: " << ws.size() << " tensors, " << ws.parameter_count()
              << " parameters -> " << out_path << "\n";
    return kExitOk;
}

int run_infer(const std::string& weights_path, const std::string& in_dir,
              const std::string& out_dir, const std::string& t_list_text, int n_tst,
              const std::string& stage_text) {
    demfi::InferConfig config;
    config.t_list = t_list_text.empty() ? demfi::default_t_list() : parse_t_list(t_list_text);
    config.n_tst = n_tst;
    config.stage = parse_stage(stage_text);
    if (n_tst < 1) throw std::invalid_argument("--n-tst must be >= 1");

    demfi::WeightStore ws = demfi::load_weights(weights_path);
    demfi::FrameSequence seq = demfi::read_sequence(in_dir);
    if (seq.frames.size() != 4) {
        throw std::invalid_argument("infer: expected exactly 4 blurry input frames, got " +
                                    std::to_string(seq.frames.size()));
    }
    std::array<demfi::Tensor, 4> quad{seq.frames[0], seq.frames[1], seq.frames[2], seq.frames[3]};
    std::vector<demfi::Tensor> frames = demfi::infer_quadruple(quad, ws, config);
    demfi::FrameSequence out;
    out.frames = std::move(frames);
    out.fps = seq.fps;
    demfi::write_sequence(out, out_dir);
    std::cerr << "infer: wrote " << out.frames.size() << " frames (" << (out.frames.size() - 2)
              << " interpolated + 2 deblurred)\n";
    return kExitOk;
}

int run_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& metrics,
             const std::string& report_path) {
    bool want_psnr = false, want_ssim = false, want_tof = false;
    std::stringstream ss(metrics);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "psnr") want_psnr = true;
        else if (item == "ssim") want_ssim = true;
        else if (item == "tof") want_tof = true;
        else throw std::invalid_argument("unknown metric '" + item + "'");
    }
    if (!want_psnr && !want_ssim && !want_tof) throw std::invalid_argument("empty metric list");

    demfi::FrameSequence pred = demfi::read_sequence(pred_dir);
    demfi::FrameSequence gt = demfi::read_sequence(gt_dir);
    demfi::MetricReport r = demfi::evaluate_sequences(pred, gt, want_tof);

    std::ostringstream report;
    if (want_psnr) {
        for (std::size_t i = 0; i < r.psnr_per_frame.size(); ++i)
            report << "psnr\t" << i << "\t" << r.psnr_per_frame[i] << "\n";
        report << "psnr\tmean\t" << r.psnr << "\n";
    }
    if (want_ssim) {
        for (std::size_t i = 0; i < r.ssim_per_frame.size(); ++i)
            report << "ssim\t" << i << "\t" << r.ssim_per_frame[i] << "\n";
        report << "ssim\tmean\t" << r.ssim << "\n";
    }
    if (want_tof) report << "tof\tmean\t" << r.tof << "\n";

    if (report_path.empty() || report_path == "-") {
        std::cout << report.str();
    } else {
        std::ofstream f(report_path);
        if (!f) throw std::runtime_error("cannot open report file '" + report_path + "'");
        f << report.str();
        if (!f) throw std::runtime_error("failed writing report file '" + report_path + "'");
    }
    return kExitOk;
}

int run_gradcheck(const std::string& op, std::uint64_t seed, double tol) {
    demfi::GradCheckResult r;
    if (op == "warp") r = demfi::gradcheck_warp(seed);
    else if (op == "fac") r = demfi::gradcheck_fac(seed);
    else if (op == "fwb") r = demfi::gradcheck_fwb(seed);
    else throw std::invalid_argument("unknown op '" + op + "' (expected warp, fac or fwb)");

    std::cerr << "gradcheck " << op << ": max relative error " << r.max_rel_error
              << " (tolerance " << tol << ")";
    if (op != "fwb") std::cerr << ", blocked flow gradient " << r.max_blocked_flow_grad;
    std::cerr << "\n";
    if (r.max_rel_error >= tol) {
        std::cerr << "gradcheck " << op << ": FAILED\n";
        return kExitValidation;
    }
    if (op != "fwb" && r.max_blocked_flow_grad != 0.0) {
        std::cerr << "gradcheck " << op << ": blocked flow gradient is nonzero\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeMFI joint deblurring and multi-frame interpolation"};
    app.require_subcommand(1);

    std::string in_dir, out_dir, arch = "rb", weights_path, t_list_text, stage = "rb";
    std::string pred_dir, gt_dir, metrics = "psnr,ssim,tof", report_path, op;
    int k = 8, tau = 5, n_tst = 3;
    std::uint64_t seed = 0;
    double tol = 1e-4;

    auto* synth = app.add_subcommand("synth-blur", "Average sharp frames into blurry frames");
    synth->add_option("--in", in_dir, "Input sharp-frame directory")->required();
    synth->add_option("--out", out_dir, "Output blurry-frame directory")->required();
    synth->add_option("--k", k, "Frame-rate reduction factor");
    synth->add_option("--tau", tau, "Half exposure window");

    auto* init = app.add_subcommand("init-weights", "Write a randomly initialized weight file");
    init->add_option("--arch", arch, "Architecture: bs or rb")->required();
    init->add_option("--seed", seed, "RNG seed");
    init->add_option("--out", weights_path, "Output weight file")->required();

    auto* infer = app.add_subcommand("infer", "Joint deblurring + interpolation on a quadruple");
    infer->add_option("--weights", weights_path, "Weight file")->required();
    infer->add_option("--in", in_dir, "Directory with 4 blurry frames")->required();
    infer->add_option("--out", out_dir, "Output frame directory")->required();
    infer->add_option("--t-list", t_list_text, "Comma-separated t values (fractions allowed)");
    infer->add_option("--n-tst", n_tst, "Boosting iterations at test time");
    infer->add_option("--stage", stage, "Stage: bs or rb");

    auto* ev = app.add_subcommand("eval", "Score predictions against ground truth");
    ev->add_option("--pred", pred_dir, "Prediction directory")->required();
    ev->add_option("--gt", gt_dir, "Ground-truth directory")->required();
    ev->add_option("--metrics", metrics, "Comma-separated subset of psnr,ssim,tof");
    ev->add_option("--report", report_path, "Report file ('-' for stdout)");

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gc->add_option("--op", op, "Operation: warp, fac or fwb")->required();
    gc->add_option("--seed", seed, "RNG seed");
    gc->add_option("--tol", tol, "Relative-error tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (synth->parsed()) return run_synth_blur(in_dir, out_dir, k, tau);
        if (init->parsed()) return run_init_weights(arch, seed, weights_path);
        if (infer->parsed())
            return run_infer(weights_path, in_dir, out_dir, t_list_text, n_tst, stage);
        if (ev->parsed()) return run_eval(pred_dir, gt_dir, metrics, report_path);
        if (gc->parsed()) return run_gradcheck(op, seed, tol);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
