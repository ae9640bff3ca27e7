#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <vector>

#include "demfi/gradcheck.hpp"
#include "demfi/metrics.hpp"
#include "demfi/pipeline.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

demfi::Tensor to_tensor(const Array& a) {
    if (a.ndim() != 4) throw std::invalid_argument("expected a 4-D (N,C,H,W) array");
    demfi::Tensor t(a.shape(0), a.shape(1), a.shape(2), a.shape(3));
    std::copy(a.data(), a.data() + t.numel(), t.data.begin());
    return t;
}

Array to_array(const demfi::Tensor& t) {
    Array a({t.n(), t.c(), t.h(), t.w()});
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

demfi::FrameSequence to_sequence(const std::vector<Array>& frames) {
    demfi::FrameSequence seq;
    seq.fps = 30.0;
    for (const auto& f : frames) seq.frames.push_back(to_tensor(f));
    seq.check();
    return seq;
}

demfi::Stage parse_stage(const std::string& s) {
    if (s == "bs") return demfi::Stage::Baseline;
    if (s == "rb") return demfi::Stage::Boosted;
    throw std::invalid_argument("unknown stage '" + s + "' (expected bs or rb)");
}

}  // namespace

PYBIND11_MODULE(demfi_core, m) {
    m.doc() = "DeMFI joint deblurring and multi-frame interpolation operators";

    m.def("backward_warp",
          [](const Array& src, const Array& flow) {
              return to_array(demfi::backward_warp(to_tensor(src), to_tensor(flow)));
          },
          py::arg("src"), py::arg("flow"),
          "Bilinear backward warp of src by a 2-channel flow field");

    m.def("fwb",
          [](const Array& f0, const Array& f1, const Array& flow_t0, const Array& flow_t1,
             const Array& occ_logit, double t) {
              demfi::TriFlow tri;
              tri.flow_t0 = to_tensor(flow_t0);
              tri.flow_t1 = to_tensor(flow_t1);
              tri.occ_logit = to_tensor(occ_logit);
              return to_array(demfi::fwb(to_tensor(f0), to_tensor(f1), tri, t));
          },
          py::arg("f0"), py::arg("f1"), py::arg("flow_t0"), py::arg("flow_t1"),
          py::arg("occ_logit"), py::arg("t"),
          "Occlusion-weighted blend of the two backward-warped inputs");

    m.def("synth_blur",
          [](const std::vector<Array>& frames, int k, int tau) {
              demfi::DegradeSpec spec;
              spec.K = k;
              spec.tau = tau;
              spec.check();
              demfi::FrameSequence out = demfi::synth_blur(to_sequence(frames), spec);
              std::vector<Array> result;
              for (const auto& f : out.frames) result.push_back(to_array(f));
              return result;
          },
          py::arg("frames"), py::arg("k") = 8, py::arg("tau") = 5,
          "Average sharp frames into blurry frames (windows of 2*tau+1 at stride k)");

    m.def("init_weights",
          [](const std::string& arch, std::uint64_t seed, const std::string& path) {
              demfi::WeightStore ws =
                  demfi::xavier_init(demfi::arch_params(parse_stage(arch)), seed);
              demfi::save_weights(ws, path);
              return ws.parameter_count();
          },
          py::arg("arch"), py::arg("seed"), py::arg("path"),
          "Write a Xavier-initialized weight file; returns the parameter count");

    m.def("infer",
          [](const std::vector<Array>& frames, const std::string& weights_path,
             const std::vector<double>& t_list, int n_tst, const std::string& stage) {
              if (frames.size() != 4) throw std::invalid_argument("expected 4 blurry frames");
              demfi::InferConfig config;
              config.t_list = t_list.empty() ? demfi::default_t_list() : t_list;
              config.n_tst = n_tst;
              config.stage = parse_stage(stage);
              demfi::WeightStore ws = demfi::load_weights(weights_path);
              std::array<demfi::Tensor, 4> quad{to_tensor(frames[0]), to_tensor(frames[1]),
                                                to_tensor(frames[2]), to_tensor(frames[3])};
              std::vector<Array> result;
              for (const auto& f : demfi::infer_quadruple(quad, ws, config))
                  result.push_back(to_array(f));
              return result;
          },
          py::arg("frames"), py::arg("weights_path"),
          py::arg("t_list") = std::vector<double>{}, py::arg("n_tst") = 3,
          py::arg("stage") = "rb",
          "Joint deblurring + interpolation on one blurry quadruple");

    m.def("psnr",
          [](const Array& a, const Array& b) { return demfi::psnr(to_tensor(a), to_tensor(b)); },
          py::arg("a"), py::arg("b"));

    m.def("ssim",
          [](const Array& a, const Array& b) { return demfi::ssim(to_tensor(a), to_tensor(b)); },
          py::arg("a"), py::arg("b"));

    m.def("tof",
          [](const std::vector<Array>& pred, const std::vector<Array>& gt) {
              return demfi::tof(to_sequence(pred), to_sequence(gt));
          },
          py::arg("pred"), py::arg("gt"));

    m.def("gradcheck",
          [](const std::string& op, std::uint64_t seed) {
              demfi::GradCheckResult r;
              if (op == "warp") r = demfi::gradcheck_warp(seed);
              else if (op == "fac") r = demfi::gradcheck_fac(seed);
              else if (op == "fwb") r = demfi::gradcheck_fwb(seed);
              else throw std::invalid_argument("unknown op '" + op + "'");
              return py::make_tuple(r.max_rel_error, r.max_blocked_flow_grad);
          },
          py::arg("op"), py::arg("seed") = 0,
          "Finite-difference check; returns (max_rel_error, max_blocked_flow_grad)");
}
