#include "demfi/backbone.hpp"

#include <cstdio>

namespace demfi {

namespace {

constexpr std::int64_t kRdbGrowth = 32;
constexpr int kRdbCount = 12;
constexpr std::int64_t kInputChannels = 12;  // four RGB frames

std::string rdb_prefix(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "backbone/ffrdb/rdb%02d", i);
    return buf;
}

}  // namespace

std::vector<ParamSpec> baseline_params() {
    std::vector<ParamSpec> p;
    const std::int64_t C = kFeatureChannels;
    const int r = kShuffleFactor;

    // FF-RDB: head conv, shuffle down, fusion conv, twelve residual dense
    // blocks with hierarchical concatenation, global fusion, shuffle up, tail.
    add_conv_param(p, "backbone/ffrdb/head", C, kInputChannels, 3, 3);
    add_conv_param(p, "backbone/ffrdb/post_down", C, C * r * r, 3, 3);
    for (int i = 0; i < kRdbCount; ++i) add_rdb_params(p, rdb_prefix(i), C, kRdbGrowth);
    add_conv_param(p, "backbone/ffrdb/gff1", C, C * kRdbCount, 1, 1);
    add_conv_param(p, "backbone/ffrdb/gff3", C, C, 3, 3);
    add_conv_param(p, "backbone/ffrdb/pre_up", kBackboneOutChannels * r * r, C, 3, 3);
    add_conv_param(p, "backbone/ffrdb/tail", kBackboneOutChannels, kBackboneOutChannels, 3, 3);

    // FAC-FB: shared ResB^{x5} encoder, 1x1 projections, gate convs.
    add_resb_stack_params(p, "backbone/facfb/enc", C, 5);
    add_conv_param(p, "backbone/facfb/query", C, C, 1, 1);
    add_conv_param(p, "backbone/facfb/key", C, C, 1, 1);
    add_conv_param(p, "backbone/facfb/value", C, C, 1, 1);
    add_conv_param(p, "backbone/facfb/embed", C, C, 1, 1);
    add_conv_param(p, "backbone/facfb/gate1", C, 2 * C, 3, 3);
    add_conv_param(p, "backbone/facfb/gate2", 1, C, 3, 3);

    // Refine Module: 3-level U-Net, widths 64/128/256, NN upsampling.
    add_conv_param(p, "backbone/rm/enc0a", 64, kAgg1Channels, 3, 3);
    add_conv_param(p, "backbone/rm/enc0b", 64, 64, 3, 3);
    add_conv_param(p, "backbone/rm/down1", 128, 64, 3, 3);
    add_conv_param(p, "backbone/rm/enc1", 128, 128, 3, 3);
    add_conv_param(p, "backbone/rm/down2", 256, 128, 3, 3);
    add_conv_param(p, "backbone/rm/enc2", 256, 256, 3, 3);
    add_conv_param(p, "backbone/rm/dec1", 128, 256 + 128, 3, 3);
    add_conv_param(p, "backbone/rm/dec0", 64, 128 + 64, 3, 3);
    add_conv_param(p, "backbone/rm/out", kBackboneOutChannels, 64, 3, 3);

    // Decoder I, shared for all three features.
    add_resb_stack_params(p, "backbone/dec1", C, 5);
    add_conv_param(p, "backbone/dec1/proj", 3, C, 3, 3);
    return p;
}

FacWeights fac_weights_from_store(const WeightStore& ws) {
    FacWeights w;
    w.query = conv_from_store(ws, "backbone/facfb/query");
    w.key = conv_from_store(ws, "backbone/facfb/key");
    w.value = conv_from_store(ws, "backbone/facfb/value");
    w.embed = conv_from_store(ws, "backbone/facfb/embed");
    w.gate1 = conv_from_store(ws, "backbone/facfb/gate1", 1, 1);
    w.gate2 = conv_from_store(ws, "backbone/facfb/gate2", 1, 1);
    return w;
}

BackboneOut ff_rdb_forward(const std::array<Tensor, 4>& frames, const WeightStore& ws) {
    for (const auto& f : frames) {
        require_same_shape(frames[0], f, "ff_rdb_forward");
        if (f.c() != 3) throw std::invalid_argument("ff_rdb_forward: frames must be RGB, got " + f.shape_str());
    }
    if (frames[0].h() % kShuffleFactor != 0 || frames[0].w() % kShuffleFactor != 0) {
        throw std::invalid_argument("ff_rdb_forward: spatial size " + frames[0].shape_str() +
                                    " not divisible by shuffle factor");
    }
    Tensor x = concat_channels<float>({&frames[0], &frames[1], &frames[2], &frames[3]});
    Tensor head = conv_layer(x, ws, "backbone/ffrdb/head", 1, 1);
    Tensor down = pixel_shuffle_down(head, kShuffleFactor);
    Tensor f0 = conv_layer(down, ws, "backbone/ffrdb/post_down", 1, 1);

    std::vector<Tensor> blocks;
    blocks.reserve(kRdbCount);
    Tensor cur = f0;
    for (int i = 0; i < kRdbCount; ++i) {
        cur = residual_dense_block(cur, ws, rdb_prefix(i));
        blocks.push_back(cur);
    }
    std::vector<const Tensor*> parts;
    for (const auto& b : blocks) parts.push_back(&b);
    Tensor fused = conv_layer(conv_layer(concat_channels(parts), ws, "backbone/ffrdb/gff1", 1, 0),
                              ws, "backbone/ffrdb/gff3", 1, 1);
    Tensor global = add(f0, fused);
    Tensor up = pixel_shuffle_up(conv_layer(global, ws, "backbone/ffrdb/pre_up", 1, 1),
                                 kShuffleFactor);
    Tensor out = conv_layer(up, ws, "backbone/ffrdb/tail", 1, 1);
    if (out.c() != kBackboneOutChannels) {
        throw std::logic_error("ff_rdb_forward: expected 133 output channels, got " + out.shape_str());
    }
    const std::int64_t C = kFeatureChannels;
    BackboneOut bo;
    bo.F0p = activate(slice_channels(out, 0, C), Activation::Tanh);
    bo.F1p = activate(slice_channels(out, C, 2 * C), Activation::Tanh);
    bo.f01 = slice_channels(out, 2 * C, 2 * C + 2);
    bo.f10 = slice_channels(out, 2 * C + 2, 2 * C + 4);
    bo.occ_logit = slice_channels(out, 2 * C + 4, 2 * C + 5);
    return bo;
}

std::pair<Tensor, TriFlow> t_align(const BackboneOut& out, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("t_align: t outside [0,1]");
    auto [f0t, f1t] = approx_intermediate_flows(out.f01, out.f10, t);
    auto [ft0, ft1] = cfr_reverse(f0t, f1t, t);
    TriFlow tri{std::move(ft0), std::move(ft1), out.occ_logit};
    Tensor Ft = fwb(out.F0p, out.F1p, tri, t);
    return {std::move(Ft), std::move(tri)};
}

RefineOut refine_module(const Tensor& agg1, const WeightStore& ws) {
    if (agg1.c() != kAgg1Channels) {
        throw std::invalid_argument("refine_module: expected 201 channels, got " + agg1.shape_str());
    }
    Tensor e0 = activate(conv_layer(agg1, ws, "backbone/rm/enc0a", 1, 1), Activation::Relu);
    e0 = activate(conv_layer(e0, ws, "backbone/rm/enc0b", 1, 1), Activation::Relu);
    Tensor e1 = activate(conv_layer(e0, ws, "backbone/rm/down1", 2, 1), Activation::Relu);
    e1 = activate(conv_layer(e1, ws, "backbone/rm/enc1", 1, 1), Activation::Relu);
    Tensor e2 = activate(conv_layer(e1, ws, "backbone/rm/down2", 2, 1), Activation::Relu);
    e2 = activate(conv_layer(e2, ws, "backbone/rm/enc2", 1, 1), Activation::Relu);
    Tensor u1 = nn_upsample_to(e2, e1.h(), e1.w());
    Tensor d1 = activate(conv_layer(concat_channels<float>({&u1, &e1}), ws, "backbone/rm/dec1", 1, 1),
                         Activation::Relu);
    Tensor u0 = nn_upsample_to(d1, e0.h(), e0.w());
    Tensor d0 = activate(conv_layer(concat_channels<float>({&u0, &e0}), ws, "backbone/rm/dec0", 1, 1),
                         Activation::Relu);
    Tensor res = conv_layer(d0, ws, "backbone/rm/out", 1, 1);

    const std::int64_t C = kFeatureChannels;
    // Residual base is the [F0b, F1b, f_t0, f_t1, o] subset of agg1.
    Tensor F0b = slice_channels(agg1, 0, C);
    Tensor F1b = slice_channels(agg1, 2 * C, 3 * C);
    Tensor ft0 = slice_channels(agg1, 3 * C, 3 * C + 2);
    Tensor ft1 = slice_channels(agg1, 3 * C + 2, 3 * C + 4);
    Tensor occ = slice_channels(agg1, 3 * C + 4, 3 * C + 5);

    RefineOut r;
    r.F0r = add(F0b, slice_channels(res, 0, C));
    r.F1r = add(F1b, slice_channels(res, C, 2 * C));
    r.tri.flow_t0 = add(ft0, slice_channels(res, 2 * C, 2 * C + 2));
    r.tri.flow_t1 = add(ft1, slice_channels(res, 2 * C + 2, 2 * C + 4));
    r.tri.occ_logit = add(occ, slice_channels(res, 2 * C + 4, 2 * C + 5));
    return r;
}

Tensor decoder1(const Tensor& feature, const WeightStore& ws) {
    if (feature.c() != kFeatureChannels) {
        throw std::invalid_argument("decoder1: expected 64 channels, got " + feature.shape_str());
    }
    Tensor h = resb_stack(feature, ws, "backbone/dec1", 5);
    return conv_layer(h, ws, "backbone/dec1/proj", 1, 1);
}

BaselineCache baseline_precompute(const std::array<Tensor, 4>& frames, const WeightStore& ws) {
    BaselineCache cache;
    cache.bb = ff_rdb_forward(frames, ws);
    FacWeights fw = fac_weights_from_store(ws);
    auto [F0b, F1b] = fac_fb_forward(cache.bb.F0p, cache.bb.F1p, cache.bb.f01, cache.bb.f10, fw, ws,
                                     "backbone/facfb/enc");
    cache.F0b = std::move(F0b);
    cache.F1b = std::move(F1b);
    return cache;
}

BaselineOut baseline_at(const BaselineCache& cache, double t, const WeightStore& ws) {
    auto [Ft, tri] = t_align(cache.bb, t);
    Tensor agg1 = concat_channels<float>({&cache.F0b, &Ft, &cache.F1b, &tri.flow_t0, &tri.flow_t1,
                                          &tri.occ_logit, &cache.bb.f01, &cache.bb.f10});
    RefineOut r = refine_module(agg1, ws);
    Tensor Ftr = fwb(r.F0r, r.F1r, r.tri, t);

    BaselineOut out;
    out.S0r = decoder1(r.F0r, ws);
    out.Str = decoder1(Ftr, ws);
    out.S1r = decoder1(r.F1r, ws);
    out.fF = r.tri;
    out.F0r = std::move(r.F0r);
    out.Ftr = std::move(Ftr);
    out.F1r = std::move(r.F1r);
    out.f01 = cache.bb.f01;
    out.f10 = cache.bb.f10;
    return out;
}

BaselineOut baseline_forward(const std::array<Tensor, 4>& frames, double t, const WeightStore& ws) {
    return baseline_at(baseline_precompute(frames, ws), t, ws);
}

}  // namespace demfi
