#pragma once

#include <utility>

#include "demfi/flow.hpp"
#include "demfi/nn_blocks.hpp"
#include "demfi/ops.hpp"

namespace demfi {

// Projections for the attentive correlation (query/key/value, all 1x1), the
// 1x1 complement projection producing E, and the two 3x3 gate convolutions.
template <typename T>
struct FacWeightsT {
    ConvSpecT<T> query;  // 1x1
    ConvSpecT<T> key;    // 1x1
    ConvSpecT<T> value;  // 1x1
    ConvSpecT<T> embed;  // 1x1, correlation -> E
    ConvSpecT<T> gate1;  // 3x3, [E, F] -> hidden
    ConvSpecT<T> gate2;  // 3x3, hidden -> 1 channel

    template <typename U>
    FacWeightsT<U> cast() const {
        FacWeightsT<U> w;
        w.query = query.template cast<U>();
        w.key = key.template cast<U>();
        w.value = value.template cast<U>();
        w.embed = embed.template cast<U>();
        w.gate1 = gate1.template cast<U>();
        w.gate2 = gate2.template cast<U>();
        return w;
    }
};

using FacWeights = FacWeightsT<float>;
using FacWeights64 = FacWeightsT<double>;

namespace detail {

template <typename T>
struct FacCache {
    TensorT<T> f1w;      // warped counterpart
    TensorT<T> q, k, v;  // projections
    TensorT<T> corr;     // single-channel attention map
    TensorT<T> fac;      // corr broadcast times v
    TensorT<T> embedded; // E
    TensorT<T> gate_in;  // [E, F0]
    TensorT<T> gate_pre; // pre-ReLU hidden
    TensorT<T> gate_map; // sigmoid output, 1 channel
};

// The channel-wise sum is accumulated in 64-bit before broadcasting.
template <typename T>
TensorT<T> channel_sum_product(const TensorT<T>& a, const TensorT<T>& b) {
    require_same_shape(a, b, "channel_sum_product");
    TensorT<T> out(a.n(), 1, a.h(), a.w());
    for (std::int64_t n = 0; n < a.n(); ++n)
        for (std::int64_t y = 0; y < a.h(); ++y)
            for (std::int64_t x = 0; x < a.w(); ++x) {
                double acc = 0.0;
                for (std::int64_t c = 0; c < a.c(); ++c)
                    acc += static_cast<double>(a.at(n, c, y, x)) * static_cast<double>(b.at(n, c, y, x));
                out.at(n, 0, y, x) = static_cast<T>(acc);
            }
    return out;
}

template <typename T>
TensorT<T> broadcast_mul(const TensorT<T>& map1, const TensorT<T>& x) {
    TensorT<T> out = x;
    for (std::int64_t n = 0; n < x.n(); ++n)
        for (std::int64_t c = 0; c < x.c(); ++c)
            for (std::int64_t y = 0; y < x.h(); ++y)
                for (std::int64_t xx = 0; xx < x.w(); ++xx)
                    out.at(n, c, y, xx) *= map1.at(n, 0, y, xx);
    return out;
}

template <typename T>
FacCache<T> fac_correlate_cached(const TensorT<T>& F0, const TensorT<T>& F1,
                                 const TensorT<T>& f01, const FacWeightsT<T>& w) {
    require_same_shape(F0, F1, "fac_correlate");
    require_same_spatial(F0, f01, "fac_correlate");
    FacCache<T> c;
    c.f1w = backward_warp(F1, f01);
    c.q = conv2d(F0, w.query);
    c.k = conv2d(c.f1w, w.key);
    c.v = conv2d(c.f1w, w.value);
    c.corr = channel_sum_product(c.q, c.k);
    c.fac = broadcast_mul(c.corr, c.v);
    return c;
}

}  // namespace detail

// Eq.-style attentive correlation: [sum_cw Conv1(F0) . Conv1(W_b(F1,f01))]
// broadcast over channels times Conv1(W_b(F1,f01)).
template <typename T>
TensorT<T> fac_correlate(const TensorT<T>& F0, const TensorT<T>& F1, const TensorT<T>& f01,
                         const FacWeightsT<T>& w) {
    return detail::fac_correlate_cached(F0, F1, f01, w).fac;
}

// Convex gating of F0 with the correlation-derived complement E.
template <typename T>
TensorT<T> bolster(const TensorT<T>& F0, const TensorT<T>& fac01, const FacWeightsT<T>& w) {
    require_same_shape(F0, fac01, "bolster");
    TensorT<T> E = conv2d(fac01, w.embed);
    TensorT<T> gate_in = concat_channels<T>({&E, &F0});
    TensorT<T> hidden = activate(conv2d(gate_in, w.gate1), Activation::Relu);
    TensorT<T> gate = activate(conv2d(hidden, w.gate2), Activation::Sigmoid);
    if (gate.c() != 1) throw std::invalid_argument("bolster: gate conv must output 1 channel");
    TensorT<T> out = F0;
    for (std::int64_t n = 0; n < F0.n(); ++n)
        for (std::int64_t c = 0; c < F0.c(); ++c)
            for (std::int64_t y = 0; y < F0.h(); ++y)
                for (std::int64_t x = 0; x < F0.w(); ++x) {
                    const double g = gate.at(n, 0, y, x);
                    out.at(n, c, y, x) = static_cast<T>(g * F0.at(n, c, y, x) +
                                                        (1.0 - g) * E.at(n, c, y, x));
                }
    return out;
}

template <typename T>
struct FacGradients {
    TensorT<T> grad_f0;
    TensorT<T> grad_f1;
    TensorT<T> grad_flow;  // identically zero: backpropagation to flows is blocked
    FacWeightsT<T> grad_weights;
};

// Analytic gradients of bolster(F0, fac_correlate(F0, F1, f01, w), w).
template <typename T>
FacGradients<T> fac_backward(const TensorT<T>& F0, const TensorT<T>& F1, const TensorT<T>& f01,
                             const FacWeightsT<T>& w, const TensorT<T>& upstream) {
    require_same_shape(F0, upstream, "fac_backward");
    detail::FacCache<T> c = detail::fac_correlate_cached(F0, F1, f01, w);
    c.embedded = conv2d(c.fac, w.embed);
    c.gate_in = concat_channels<T>({&c.embedded, &F0});
    c.gate_pre = conv2d(c.gate_in, w.gate1);
    TensorT<T> hidden = activate(c.gate_pre, Activation::Relu);
    c.gate_map = activate(conv2d(hidden, w.gate2), Activation::Sigmoid);

    FacGradients<T> g;
    g.grad_f0 = TensorT<T>(F0.n(), F0.c(), F0.h(), F0.w());
    g.grad_flow = TensorT<T>(f01.n(), f01.c(), f01.h(), f01.w());

    // out = gate*F0 + (1-gate)*E
    TensorT<T> grad_E(F0.n(), F0.c(), F0.h(), F0.w());
    TensorT<T> grad_gate(F0.n(), 1, F0.h(), F0.w());
    for (std::int64_t n = 0; n < F0.n(); ++n)
        for (std::int64_t y = 0; y < F0.h(); ++y)
            for (std::int64_t x = 0; x < F0.w(); ++x) {
                const double gm = c.gate_map.at(n, 0, y, x);
                double dg = 0.0;
                for (std::int64_t ch = 0; ch < F0.c(); ++ch) {
                    const double up = upstream.at(n, ch, y, x);
                    g.grad_f0.at(n, ch, y, x) += static_cast<T>(up * gm);
                    grad_E.at(n, ch, y, x) += static_cast<T>(up * (1.0 - gm));
                    dg += up * (F0.at(n, ch, y, x) - c.embedded.at(n, ch, y, x));
                }
                grad_gate.at(n, 0, y, x) = static_cast<T>(dg * gm * (1.0 - gm));
            }

    TensorT<T> grad_hidden;
    conv2d_backward(hidden, w.gate2, grad_gate, grad_hidden, g.grad_weights.gate2);
    for (std::size_t i = 0; i < grad_hidden.data.size(); ++i)
        if (c.gate_pre.data[i] <= T(0)) grad_hidden.data[i] = T(0);

    TensorT<T> grad_gate_in;
    conv2d_backward(c.gate_in, w.gate1, grad_hidden, grad_gate_in, g.grad_weights.gate1);
    const std::int64_t C = F0.c();
    TensorT<T> grad_E2 = slice_channels(grad_gate_in, 0, C);
    grad_E = add(grad_E, grad_E2);
    g.grad_f0 = add(g.grad_f0, slice_channels(grad_gate_in, C, 2 * C));

    TensorT<T> grad_fac;
    conv2d_backward(c.fac, w.embed, grad_E, grad_fac, g.grad_weights.embed);

    // fac = corr (broadcast) * v
    TensorT<T> grad_corr = detail::channel_sum_product(grad_fac, c.v);
    TensorT<T> grad_v = detail::broadcast_mul(c.corr, grad_fac);

    // corr = sum_c q*k
    TensorT<T> grad_q = detail::broadcast_mul(grad_corr, c.k);
    TensorT<T> grad_k = detail::broadcast_mul(grad_corr, c.q);

    TensorT<T> grad_f0_from_q;
    conv2d_backward(F0, w.query, grad_q, grad_f0_from_q, g.grad_weights.query);
    g.grad_f0 = add(g.grad_f0, grad_f0_from_q);

    TensorT<T> grad_f1w_from_k, grad_f1w_from_v;
    conv2d_backward(c.f1w, w.key, grad_k, grad_f1w_from_k, g.grad_weights.key);
    conv2d_backward(c.f1w, w.value, grad_v, grad_f1w_from_v, g.grad_weights.value);
    TensorT<T> grad_f1w = add(grad_f1w_from_k, grad_f1w_from_v);

    auto [grad_f1, grad_flow] = warp_backward_grad(F1, f01, grad_f1w, /*block_flow_grad=*/true);
    g.grad_f1 = std::move(grad_f1);
    (void)grad_flow;  // stays zero by contract
    return g;
}

// Shared-encoder FAC-FB: F = ResB^{x5}(F') with one parameter path for both
// directions, then correlation and bolstering each way.
std::pair<Tensor, Tensor> fac_fb_forward(const Tensor& F0p, const Tensor& F1p, const Tensor& f01,
                                         const Tensor& f10, const FacWeights& w,
                                         const WeightStore& ws, const std::string& encoder_prefix);

}  // namespace demfi
