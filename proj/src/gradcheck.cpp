#include "demfi/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "demfi/fac.hpp"
#include "demfi/flow.hpp"

namespace demfi {

namespace {

constexpr double kFdStep = 1e-3;

Tensor64 random_tensor(std::mt19937_64& rng, std::int64_t n, std::int64_t c, std::int64_t h,
                       std::int64_t w, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor64 t(n, c, h, w);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

// Flow whose samples stay strictly interior and away from integer lattice
// kinks, keeping the warp differentiable at the instance.
Tensor64 interior_flow(std::mt19937_64& rng, std::int64_t h, std::int64_t w) {
    std::uniform_real_distribution<double> frac(0.2, 0.8);
    std::uniform_int_distribution<int> cell_x(0, static_cast<int>(w) - 2);
    std::uniform_int_distribution<int> cell_y(0, static_cast<int>(h) - 2);
    Tensor64 f(1, 2, h, w);
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            f.at(0, 0, y, x) = cell_x(rng) + frac(rng) - static_cast<double>(x);
            f.at(0, 1, y, x) = cell_y(rng) + frac(rng) - static_cast<double>(y);
        }
    return f;
}

double dot(const Tensor64& a, const Tensor64& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

// Compares an analytic gradient against central differences of `loss` taken
// over every element of `param`, tracking the shared normalization scale.
struct FdAccumulator {
    double max_abs_diff = 0.0;
    double max_fd_mag = 0.0;

    void compare(Tensor64& param, const Tensor64& analytic,
                 const std::function<double()>& loss) {
        for (std::size_t i = 0; i < param.data.size(); ++i) {
            const double saved = param.data[i];
            param.data[i] = saved + kFdStep;
            const double plus = loss();
            param.data[i] = saved - kFdStep;
            const double minus = loss();
            param.data[i] = saved;
            const double fd = (plus - minus) / (2.0 * kFdStep);
            max_abs_diff = std::max(max_abs_diff, std::abs(fd - analytic.data[i]));
            max_fd_mag = std::max(max_fd_mag, std::abs(fd));
        }
    }

    double rel_error() const { return max_fd_mag > 0.0 ? max_abs_diff / max_fd_mag : max_abs_diff; }
};

double max_abs(const Tensor64& t) {
    double m = 0.0;
    for (const auto& v : t.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

GradCheckResult gradcheck_warp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tensor64 src = random_tensor(rng, 1, 3, 6, 6);
    Tensor64 flow = interior_flow(rng, 6, 6);
    Tensor64 upstream = random_tensor(rng, 1, 3, 6, 6);

    auto [grad_src, grad_flow] = warp_backward_grad(src, flow, upstream);
    auto loss = [&] { return dot(backward_warp(src, flow), upstream); };

    FdAccumulator acc;
    acc.compare(src, grad_src, loss);
    acc.compare(flow, grad_flow, loss);

    // Blocked variant must zero the flow gradient without touching grad_src.
    auto blocked = warp_backward_grad(src, flow, upstream, true);
    GradCheckResult result;
    result.max_rel_error = acc.rel_error();
    result.max_blocked_flow_grad = max_abs(blocked.second);
    return result;
}

GradCheckResult gradcheck_fac(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::int64_t C = 5, H = 5, W = 5;
    Tensor64 F0, F1, flow, upstream;
    FacWeights64 w;
    auto mk = [&](std::int64_t co, std::int64_t ci, std::int64_t k, int pad) {
        ConvSpec64 s;
        s.kernel = random_tensor(rng, co, ci, k, k, -0.5, 0.5);
        Tensor64 b = random_tensor(rng, co, 1, 1, 1, -0.2, 0.2);
        s.bias.assign(b.data.begin(), b.data.end());
        s.set_padding(pad);
        return s;
    };
    // Resample until the gate's ReLU pre-activations are clear of zero, so
    // central differences stay on one linear piece.
    for (;;) {
        F0 = random_tensor(rng, 1, C, H, W);
        F1 = random_tensor(rng, 1, C, H, W);
        flow = interior_flow(rng, H, W);
        upstream = random_tensor(rng, 1, C, H, W);
        w.query = mk(C, C, 1, 0);
        w.key = mk(C, C, 1, 0);
        w.value = mk(C, C, 1, 0);
        w.embed = mk(C, C, 1, 0);
        w.gate1 = mk(C, 2 * C, 3, 1);
        w.gate2 = mk(1, C, 3, 1);
        Tensor64 fac = fac_correlate(F0, F1, flow, w);
        Tensor64 E = conv2d(fac, w.embed);
        Tensor64 gate_in = concat_channels<double>({&E, &F0});
        Tensor64 pre = conv2d(gate_in, w.gate1);
        double min_abs_pre = 1e30;
        for (const auto& v : pre.data) min_abs_pre = std::min(min_abs_pre, std::abs(v));
        if (min_abs_pre > 0.02) break;
    }

    auto loss = [&] {
        return dot(bolster(F0, fac_correlate(F0, F1, flow, w), w), upstream);
    };
    FacGradients<double> g = fac_backward(F0, F1, flow, w, upstream);

    FdAccumulator acc;
    acc.compare(F0, g.grad_f0, loss);
    acc.compare(F1, g.grad_f1, loss);
    acc.compare(w.query.kernel, g.grad_weights.query.kernel, loss);
    acc.compare(w.key.kernel, g.grad_weights.key.kernel, loss);
    acc.compare(w.value.kernel, g.grad_weights.value.kernel, loss);
    acc.compare(w.embed.kernel, g.grad_weights.embed.kernel, loss);
    acc.compare(w.gate1.kernel, g.grad_weights.gate1.kernel, loss);
    acc.compare(w.gate2.kernel, g.grad_weights.gate2.kernel, loss);

    GradCheckResult result;
    result.max_rel_error = acc.rel_error();
    result.max_blocked_flow_grad = max_abs(g.grad_flow);
    return result;
}

GradCheckResult gradcheck_fwb(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::int64_t C = 4, H = 6, W = 6;
    Tensor64 F0 = random_tensor(rng, 1, C, H, W);
    Tensor64 F1 = random_tensor(rng, 1, C, H, W);
    TriFlow64 tri;
    tri.flow_t0 = interior_flow(rng, H, W);
    tri.flow_t1 = interior_flow(rng, H, W);
    tri.occ_logit = random_tensor(rng, 1, 1, H, W, -2.0, 2.0);
    Tensor64 upstream = random_tensor(rng, 1, C, H, W);
    std::uniform_real_distribution<double> tdist(0.2, 0.8);
    const double t = tdist(rng);

    auto loss = [&] { return dot(fwb(F0, F1, tri, t), upstream); };
    FwbGradients<double> g = fwb_backward(F0, F1, tri, t, upstream);

    FdAccumulator acc;
    acc.compare(F0, g.grad_f0, loss);
    acc.compare(F1, g.grad_f1, loss);
    acc.compare(tri.occ_logit, g.grad_occ_logit, loss);

    GradCheckResult result;
    result.max_rel_error = acc.rel_error();
    return result;
}

}  // namespace demfi
