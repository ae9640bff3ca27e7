#include "demfi/boosting.hpp"

#include "demfi/nn_blocks.hpp"

namespace demfi {

namespace {

Tensor concat_tri(const TriFlow& tri) {
    return concat_channels<float>({&tri.flow_t0, &tri.flow_t1, &tri.occ_logit});
}

TriFlow add_delta(const TriFlow& tri, const Tensor& delta) {
    if (delta.c() != 5) throw std::invalid_argument("boost: delta must have 5 channels, got " + delta.shape_str());
    TriFlow out;
    out.flow_t0 = add(tri.flow_t0, slice_channels(delta, 0, 2));
    out.flow_t1 = add(tri.flow_t1, slice_channels(delta, 2, 4));
    out.occ_logit = add(tri.occ_logit, slice_channels(delta, 4, 5));
    return out;
}

Tensor gru_pass(const Tensor& state, const Tensor& M, const ConvSpec& cz, const ConvSpec& cr,
                const ConvSpec& cc) {
    Tensor zin = concat_channels<float>({&state, &M});
    Tensor z = activate(conv2d(zin, cz), Activation::Sigmoid);
    Tensor r = activate(conv2d(zin, cr), Activation::Sigmoid);
    Tensor gated = state;
    for (std::size_t i = 0; i < gated.data.size(); ++i) gated.data[i] *= r.data[i];
    Tensor cin = concat_channels<float>({&gated, &M});
    Tensor cand = activate(conv2d(cin, cc), Activation::Tanh);
    Tensor out = state;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = (1.0f - z.data[i]) * state.data[i] + z.data[i] * cand.data[i];
    }
    return out;
}

}  // namespace

std::vector<ParamSpec> boost_params() {
    std::vector<ParamSpec> p;
    const std::int64_t C = kFeatureChannels;
    add_conv_param(p, "boost/rec_init", C, 3 * C, 1, 1);

    add_conv_param(p, "boost/mixer/agg1", C, kAgg2Channels, 7, 7);
    add_conv_param(p, "boost/mixer/agg2", C, C, 3, 3);
    add_conv_param(p, "boost/mixer/fp1", C, 5, 7, 7);
    add_conv_param(p, "boost/mixer/fp2", C, C, 3, 3);
    add_conv_param(p, "boost/mixer/fuse1", C, 2 * C, 3, 3);
    add_conv_param(p, "boost/mixer/fuse2", C, C, 3, 3);

    add_conv_param(p, "boost/gb/hz", C, 2 * C, 1, 5);
    add_conv_param(p, "boost/gb/hr", C, 2 * C, 1, 5);
    add_conv_param(p, "boost/gb/hc", C, 2 * C, 1, 5);
    add_conv_param(p, "boost/gb/vz", C, 2 * C, 5, 1);
    add_conv_param(p, "boost/gb/vr", C, 2 * C, 5, 1);
    add_conv_param(p, "boost/gb/vc", C, 2 * C, 5, 1);
    add_conv_param(p, "boost/gb/delta1", C, C, 3, 3);
    add_conv_param(p, "boost/gb/delta2", 5, C, 3, 3);

    add_conv_param(p, "boost/d2/in", C, kAgg3Channels, 3, 3);
    add_resb_stack_params(p, "boost/d2", C, 5);
    add_conv_param(p, "boost/d2/proj", 9, C, 3, 3);
    return p;
}

MixerWeights mixer_weights_from_store(const WeightStore& ws) {
    MixerWeights w;
    w.agg1 = conv_from_store(ws, "boost/mixer/agg1", 1, 3);
    w.agg2 = conv_from_store(ws, "boost/mixer/agg2", 1, 1);
    w.fp1 = conv_from_store(ws, "boost/mixer/fp1", 1, 3);
    w.fp2 = conv_from_store(ws, "boost/mixer/fp2", 1, 1);
    w.fuse1 = conv_from_store(ws, "boost/mixer/fuse1", 1, 1);
    w.fuse2 = conv_from_store(ws, "boost/mixer/fuse2", 1, 1);
    return w;
}

GbWeights gb_weights_from_store(const WeightStore& ws) {
    GbWeights w;
    w.hz = conv_from_store(ws, "boost/gb/hz");
    w.hr = conv_from_store(ws, "boost/gb/hr");
    w.hc = conv_from_store(ws, "boost/gb/hc");
    w.vz = conv_from_store(ws, "boost/gb/vz");
    w.vr = conv_from_store(ws, "boost/gb/vr");
    w.vc = conv_from_store(ws, "boost/gb/vc");
    w.delta1 = conv_from_store(ws, "boost/gb/delta1", 1, 1);
    w.delta2 = conv_from_store(ws, "boost/gb/delta2", 1, 1);
    return w;
}

Tensor mixer(const Tensor& agg2, const TriFlow& fP, const MixerWeights& w) {
    if (agg2.c() != w.agg1.c_in()) {
        throw std::invalid_argument("mixer: aggregate channels " + agg2.shape_str() +
                                    " do not match branch kernel " + w.agg1.kernel.shape_str());
    }
    fP.check();
    Tensor fp = concat_tri(fP);
    Tensor a = activate(conv2d(agg2, w.agg1), Activation::Relu);
    a = activate(conv2d(a, w.agg2), Activation::Relu);
    Tensor b = activate(conv2d(fp, w.fp1), Activation::Relu);
    b = activate(conv2d(b, w.fp2), Activation::Relu);
    Tensor fused = activate(conv2d(concat_channels<float>({&a, &b}), w.fuse1), Activation::Relu);
    return activate(conv2d(fused, w.fuse2), Activation::Relu);
}

std::pair<Tensor, Tensor> gru_booster_step(const Tensor& F_rec, const Tensor& M,
                                           const GbWeights& w) {
    require_same_spatial(F_rec, M, "gru_booster_step");
    Tensor horiz = gru_pass(F_rec, M, w.hz, w.hr, w.hc);
    Tensor next = gru_pass(horiz, M, w.vz, w.vr, w.vc);
    Tensor delta = conv2d(activate(conv2d(next, w.delta1), Activation::Relu), w.delta2);
    return {std::move(next), std::move(delta)};
}

BoostResult recursive_boost(const BaselineOut& base, const std::array<Tensor, 4>& frames, double t,
                            int n_tst, const WeightStore& ws) {
    if (n_tst < 1) throw std::invalid_argument("recursive_boost: N_tst must be >= 1");
    MixerWeights mw = mixer_weights_from_store(ws);
    GbWeights gw = gb_weights_from_store(ws);

    Tensor rec_seed = concat_channels<float>({&base.F0r, &base.Ftr, &base.F1r});
    Tensor F_rec = conv_layer(rec_seed, ws, "boost/rec_init", 1, 0);

    Tensor fF_planes = concat_tri(base.fF);
    Tensor agg2 = concat_channels<float>({&base.S0r, &base.Str, &base.S1r, &frames[0], &frames[1],
                                          &frames[2], &frames[3], &base.f01, &base.f10, &fF_planes});
    if (agg2.c() != kAgg2Channels) {
        throw std::logic_error("recursive_boost: Agg2 must have 30 channels, got " + agg2.shape_str());
    }

    BoostResult result;
    TriFlow fP = base.fF;  // f_P^0 = f_F
    for (int i = 1; i <= n_tst; ++i) {
        Tensor M = mixer(agg2, fP, mw);
        auto [next, delta] = gru_booster_step(F_rec, M, gw);
        F_rec = std::move(next);
        fP = add_delta(fP, delta);
        result.deltas.push_back(std::move(delta));

        Tensor Sti = pwb(base.S0r, base.S1r, fP, t);
        Tensor fP_planes = concat_tri(fP);
        Tensor agg3 = concat_channels<float>({&base.S0r, &Sti, &base.S1r, &frames[0], &frames[1],
                                              &frames[2], &frames[3], &fF_planes, &fP_planes,
                                              &F_rec});
        if (agg3.c() != kAgg3Channels) {
            throw std::logic_error("recursive_boost: Agg3 must have 95 channels, got " + agg3.shape_str());
        }
        Tensor h = resb_stack(conv_layer(agg3, ws, "boost/d2/in", 1, 1), ws, "boost/d2", 5);
        Tensor res = conv_layer(h, ws, "boost/d2/proj", 1, 1);
        std::array<Tensor, 3> out{add(base.S0r, slice_channels(res, 0, 3)),
                                  add(Sti, slice_channels(res, 3, 6)),
                                  add(base.S1r, slice_channels(res, 6, 9))};
        result.frames_per_iter.push_back(std::move(out));
    }
    result.fP = std::move(fP);
    result.F_rec = std::move(F_rec);
    return result;
}

namespace {

double mean_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "compute_losses");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        acc += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
    }
    return acc / static_cast<double>(a.data.size());
}

}  // namespace

LossReport compute_losses(const std::vector<std::array<Tensor, 3>>& per_iter,
                          const std::array<Tensor, 3>& baseline, const Tensor& gt0,
                          const Tensor& gtt, const Tensor& gt1, int n_trn) {
    if (n_trn < 0 || static_cast<std::size_t>(n_trn) > per_iter.size()) {
        throw std::invalid_argument("compute_losses: N_trn " + std::to_string(n_trn) +
                                    " exceeds available iterations " + std::to_string(per_iter.size()));
    }
    LossReport report;
    report.l_d1 =
        (mean_abs_diff(baseline[0], gt0) + mean_abs_diff(baseline[1], gtt) +
         mean_abs_diff(baseline[2], gt1)) / 3.0;
    report.total = report.l_d1;
    for (int i = 0; i < n_trn; ++i) {
        const double term = (mean_abs_diff(per_iter[i][0], gt0) + mean_abs_diff(per_iter[i][1], gtt) +
                             mean_abs_diff(per_iter[i][2], gt1)) / 3.0;
        report.l_d2_per_iter.push_back(term);
        report.total += term;
    }
    return report;
}

}  // namespace demfi
