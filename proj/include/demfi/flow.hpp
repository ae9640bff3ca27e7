#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "demfi/ops.hpp"

namespace demfi {

// Two flow fields plus one occlusion-logit plane: [f_t0, f_t1, o_t0].
template <typename T>
struct TriFlowT {
    TensorT<T> flow_t0;   // C=2, (dx, dy) in pixels
    TensorT<T> flow_t1;   // C=2
    TensorT<T> occ_logit; // C=1, raw logit

    void check() const {
        if (flow_t0.c() != 2 || flow_t1.c() != 2 || occ_logit.c() != 1) {
            throw std::invalid_argument("triflow: channel layout must be 2/2/1");
        }
        require_same_spatial(flow_t0, flow_t1, "triflow");
        require_same_spatial(flow_t0, occ_logit, "triflow");
    }
};

using TriFlow = TriFlowT<float>;
using TriFlow64 = TriFlowT<double>;

constexpr double kBlendEps = 1e-8;
constexpr double kSplatWeightEps = 1e-6;

// f_0t = t * f_01, f_1t = (1 - t) * f_10.
template <typename T>
std::pair<TensorT<T>, TensorT<T>> approx_intermediate_flows(const TensorT<T>& f01,
                                                            const TensorT<T>& f10, double t) {
    require_same_shape(f01, f10, "approx_intermediate_flows");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("approx_intermediate_flows: t outside [0,1]");
    return {scale(f01, static_cast<T>(t)), scale(f10, static_cast<T>(1.0 - t))};
}

namespace detail {

// Forward-splat of `values` carried by `carrier_flow`: each source pixel
// deposits its value at x + carrier_flow(x) with bilinear weights.
template <typename T>
void bilinear_splat(const TensorT<T>& carrier_flow, const TensorT<T>& values,
                    TensorT<double>& acc, TensorT<double>& weight) {
    const std::int64_t H = carrier_flow.h(), W = carrier_flow.w();
    acc = TensorT<double>(values.n(), values.c(), H, W);
    weight = TensorT<double>(values.n(), 1, H, W);
    for (std::int64_t n = 0; n < values.n(); ++n) {
        for (std::int64_t y = 0; y < H; ++y) {
            for (std::int64_t x = 0; x < W; ++x) {
                const double px = x + static_cast<double>(carrier_flow.at(n, 0, y, x));
                const double py = y + static_cast<double>(carrier_flow.at(n, 1, y, x));
                const std::int64_t x0 = static_cast<std::int64_t>(std::floor(px));
                const std::int64_t y0 = static_cast<std::int64_t>(std::floor(py));
                const double fx = px - x0, fy = py - y0;
                const double w4[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
                const std::int64_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
                const std::int64_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
                for (int k = 0; k < 4; ++k) {
                    if (xs[k] < 0 || xs[k] >= W || ys[k] < 0 || ys[k] >= H || w4[k] <= 0.0) continue;
                    weight.at(n, 0, ys[k], xs[k]) += w4[k];
                    for (std::int64_t c = 0; c < values.c(); ++c) {
                        acc.at(n, c, ys[k], xs[k]) += w4[k] * static_cast<double>(values.at(n, c, y, x));
                    }
                }
            }
        }
    }
}

}  // namespace detail

// Complementary flow reversal: normalized bilinear splat of -f_0t onto the
// time-t grid, holes filled from the complementary reversal scaled by the
// linear-motion ratio.
template <typename T>
std::pair<TensorT<T>, TensorT<T>> cfr_reverse(const TensorT<T>& f0t, const TensorT<T>& f1t,
                                              double t) {
    require_same_shape(f0t, f1t, "cfr_reverse");
    if (f0t.c() != 2) throw std::invalid_argument("cfr_reverse: flows must have 2 channels");
    TensorT<double> acc0, w0, acc1, w1;
    detail::bilinear_splat(f0t, scale(f0t, T(-1)), acc0, w0);
    detail::bilinear_splat(f1t, scale(f1t, T(-1)), acc1, w1);

    TensorT<T> ft0(f0t.n(), 2, f0t.h(), f0t.w());
    TensorT<T> ft1(f0t.n(), 2, f0t.h(), f0t.w());
    const double ratio01 = (1.0 - t) > kSplatWeightEps ? t / (1.0 - t) : 0.0;
    const double ratio10 = t > kSplatWeightEps ? (1.0 - t) / t : 0.0;
    for (std::int64_t n = 0; n < f0t.n(); ++n) {
        for (std::int64_t y = 0; y < f0t.h(); ++y) {
            for (std::int64_t x = 0; x < f0t.w(); ++x) {
                const double wa = w0.at(n, 0, y, x);
                const double wb = w1.at(n, 0, y, x);
                for (std::int64_t c = 0; c < 2; ++c) {
                    const double va = wa >= kSplatWeightEps ? acc0.at(n, c, y, x) / wa : 0.0;
                    const double vb = wb >= kSplatWeightEps ? acc1.at(n, c, y, x) / wb : 0.0;
                    ft0.at(n, c, y, x) =
                        static_cast<T>(wa >= kSplatWeightEps ? va : -ratio01 * vb);
                    ft1.at(n, c, y, x) =
                        static_cast<T>(wb >= kSplatWeightEps ? vb : -ratio10 * va);
                }
            }
        }
    }
    return {std::move(ft0), std::move(ft1)};
}

// out(x) = bilinear sample of src at x + flow(x), border-clamped coordinates.
template <typename T>
TensorT<T> backward_warp(const TensorT<T>& src, const TensorT<T>& flow) {
    require_same_spatial(src, flow, "backward_warp");
    if (flow.c() != 2) throw std::invalid_argument("backward_warp: flow must have 2 channels");
    const std::int64_t H = src.h(), W = src.w();
    TensorT<T> out(src.n(), src.c(), H, W);
    for (std::int64_t n = 0; n < src.n(); ++n) {
        for (std::int64_t y = 0; y < H; ++y) {
            for (std::int64_t x = 0; x < W; ++x) {
                double px = x + static_cast<double>(flow.at(n, 0, y, x));
                double py = y + static_cast<double>(flow.at(n, 1, y, x));
                px = std::clamp(px, 0.0, static_cast<double>(W - 1));
                py = std::clamp(py, 0.0, static_cast<double>(H - 1));
                const std::int64_t x0 = std::min<std::int64_t>(static_cast<std::int64_t>(px), W - 1);
                const std::int64_t y0 = std::min<std::int64_t>(static_cast<std::int64_t>(py), H - 1);
                const std::int64_t x1 = std::min<std::int64_t>(x0 + 1, W - 1);
                const std::int64_t y1 = std::min<std::int64_t>(y0 + 1, H - 1);
                const double fx = px - x0, fy = py - y0;
                for (std::int64_t c = 0; c < src.c(); ++c) {
                    const double v =
                        (1 - fx) * (1 - fy) * src.at(n, c, y0, x0) +
                        fx * (1 - fy) * src.at(n, c, y0, x1) +
                        (1 - fx) * fy * src.at(n, c, y1, x0) +
                        fx * fy * src.at(n, c, y1, x1);
                    out.at(n, c, y, x) = static_cast<T>(v);
                }
            }
        }
    }
    return out;
}

// Analytic gradients of backward_warp. With block_flow_grad set, grad_flow is
// identically zero. Samples clamped at the border get zero flow gradient.
template <typename T>
std::pair<TensorT<T>, TensorT<T>> warp_backward_grad(const TensorT<T>& src, const TensorT<T>& flow,
                                                     const TensorT<T>& upstream,
                                                     bool block_flow_grad = false) {
    require_same_spatial(src, flow, "warp_backward_grad");
    require_same_shape(src, upstream, "warp_backward_grad");
    const std::int64_t H = src.h(), W = src.w();
    TensorT<T> grad_src(src.n(), src.c(), H, W);
    TensorT<T> grad_flow(flow.n(), 2, H, W);
    for (std::int64_t n = 0; n < src.n(); ++n) {
        for (std::int64_t y = 0; y < H; ++y) {
            for (std::int64_t x = 0; x < W; ++x) {
                const double rx = x + static_cast<double>(flow.at(n, 0, y, x));
                const double ry = y + static_cast<double>(flow.at(n, 1, y, x));
                const bool clamped_x = rx < 0.0 || rx > static_cast<double>(W - 1);
                const bool clamped_y = ry < 0.0 || ry > static_cast<double>(H - 1);
                const double px = std::clamp(rx, 0.0, static_cast<double>(W - 1));
                const double py = std::clamp(ry, 0.0, static_cast<double>(H - 1));
                const std::int64_t x0 = std::min<std::int64_t>(static_cast<std::int64_t>(px), W - 1);
                const std::int64_t y0 = std::min<std::int64_t>(static_cast<std::int64_t>(py), H - 1);
                const std::int64_t x1 = std::min<std::int64_t>(x0 + 1, W - 1);
                const std::int64_t y1 = std::min<std::int64_t>(y0 + 1, H - 1);
                const double fx = px - x0, fy = py - y0;
                double gx = 0.0, gy = 0.0;
                for (std::int64_t c = 0; c < src.c(); ++c) {
                    const double up = static_cast<double>(upstream.at(n, c, y, x));
                    grad_src.at(n, c, y0, x0) += static_cast<T>(up * (1 - fx) * (1 - fy));
                    grad_src.at(n, c, y0, x1) += static_cast<T>(up * fx * (1 - fy));
                    grad_src.at(n, c, y1, x0) += static_cast<T>(up * (1 - fx) * fy);
                    grad_src.at(n, c, y1, x1) += static_cast<T>(up * fx * fy);
                    const double s00 = src.at(n, c, y0, x0), s01 = src.at(n, c, y0, x1);
                    const double s10 = src.at(n, c, y1, x0), s11 = src.at(n, c, y1, x1);
                    gx += up * ((1 - fy) * (s01 - s00) + fy * (s11 - s10));
                    gy += up * ((1 - fx) * (s10 - s00) + fx * (s11 - s01));
                }
                if (!block_flow_grad) {
                    grad_flow.at(n, 0, y, x) = clamped_x ? T(0) : static_cast<T>(gx);
                    grad_flow.at(n, 1, y, x) = clamped_y ? T(0) : static_cast<T>(gy);
                }
            }
        }
    }
    return {std::move(grad_src), std::move(grad_flow)};
}

// Occlusion-weighted blend of the two backward-warped inputs (feature domain).
// t=0 and t=1 collapse to the pure warped branch, exactly.
template <typename T>
TensorT<T> fwb(const TensorT<T>& F0, const TensorT<T>& F1, const TriFlowT<T>& tri, double t) {
    require_same_shape(F0, F1, "fwb");
    tri.check();
    require_same_spatial(F0, tri.flow_t0, "fwb");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("fwb: t outside [0,1]");
    if (t == 0.0) return backward_warp(F0, tri.flow_t0);
    if (t == 1.0) return backward_warp(F1, tri.flow_t1);
    TensorT<T> W0 = backward_warp(F0, tri.flow_t0);
    TensorT<T> W1 = backward_warp(F1, tri.flow_t1);
    TensorT<T> out(F0.n(), F0.c(), F0.h(), F0.w());
    for (std::int64_t n = 0; n < F0.n(); ++n) {
        for (std::int64_t y = 0; y < F0.h(); ++y) {
            for (std::int64_t x = 0; x < F0.w(); ++x) {
                const double o0 = sigmoid_scalar(static_cast<double>(tri.occ_logit.at(n, 0, y, x)));
                const double w0 = (1.0 - t) * o0;
                const double w1 = t * (1.0 - o0);
                const double denom = w0 + w1 + kBlendEps;
                for (std::int64_t c = 0; c < F0.c(); ++c) {
                    out.at(n, c, y, x) = static_cast<T>(
                        (w0 * W0.at(n, c, y, x) + w1 * W1.at(n, c, y, x)) / denom);
                }
            }
        }
    }
    return out;
}

// Pixel-domain variant of fwb, same contract.
template <typename T>
TensorT<T> pwb(const TensorT<T>& S0, const TensorT<T>& S1, const TriFlowT<T>& tri, double t) {
    return fwb(S0, S1, tri, t);
}

template <typename T>
struct FwbGradients {
    TensorT<T> grad_f0;
    TensorT<T> grad_f1;
    TensorT<T> grad_occ_logit;
};

// Analytic gradients of fwb with respect to the blended inputs and the
// occlusion logit (flows held fixed), for t in (0,1).
template <typename T>
FwbGradients<T> fwb_backward(const TensorT<T>& F0, const TensorT<T>& F1, const TriFlowT<T>& tri,
                             double t, const TensorT<T>& upstream) {
    require_same_shape(F0, upstream, "fwb_backward");
    if (t <= 0.0 || t >= 1.0) throw std::invalid_argument("fwb_backward: t must be in (0,1)");
    TensorT<T> W0 = backward_warp(F0, tri.flow_t0);
    TensorT<T> W1 = backward_warp(F1, tri.flow_t1);
    TensorT<T> up_w0(F0.n(), F0.c(), F0.h(), F0.w());
    TensorT<T> up_w1(F0.n(), F0.c(), F0.h(), F0.w());
    FwbGradients<T> g;
    g.grad_occ_logit = TensorT<T>(F0.n(), 1, F0.h(), F0.w());
    for (std::int64_t n = 0; n < F0.n(); ++n) {
        for (std::int64_t y = 0; y < F0.h(); ++y) {
            for (std::int64_t x = 0; x < F0.w(); ++x) {
                const double o0 = sigmoid_scalar(static_cast<double>(tri.occ_logit.at(n, 0, y, x)));
                const double w0 = (1.0 - t) * o0;
                const double w1 = t * (1.0 - o0);
                const double denom = w0 + w1 + kBlendEps;
                double docc = 0.0;
                for (std::int64_t c = 0; c < F0.c(); ++c) {
                    const double up = upstream.at(n, c, y, x);
                    const double out = (w0 * W0.at(n, c, y, x) + w1 * W1.at(n, c, y, x)) / denom;
                    up_w0.at(n, c, y, x) = static_cast<T>(up * w0 / denom);
                    up_w1.at(n, c, y, x) = static_cast<T>(up * w1 / denom);
                    docc += up * ((W0.at(n, c, y, x) - out) * (1.0 - t) -
                                  (W1.at(n, c, y, x) - out) * t) / denom;
                }
                g.grad_occ_logit.at(n, 0, y, x) = static_cast<T>(docc * o0 * (1.0 - o0));
            }
        }
    }
    g.grad_f0 = warp_backward_grad(F0, tri.flow_t0, up_w0, true).first;
    g.grad_f1 = warp_backward_grad(F1, tri.flow_t1, up_w1, true).first;
    return g;
}

}  // namespace demfi
