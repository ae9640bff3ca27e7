#include "demfi/degrade.hpp"

#include <algorithm>
#include <cmath>

namespace demfi {

FrameSequence synth_blur(const FrameSequence& seq, const DegradeSpec& spec) {
    seq.check();
    spec.check();
    const std::int64_t n = static_cast<std::int64_t>(seq.frames.size());
    const std::int64_t window = 2 * static_cast<std::int64_t>(spec.tau) + 1;

    FrameSequence out;
    out.fps = seq.fps / spec.K;
    for (std::int64_t i = 0;; ++i) {
        const std::int64_t lo = i * spec.K - spec.tau;
        const std::int64_t hi = i * spec.K + spec.tau;
        if (hi >= n) break;
        if (lo < 0) continue;  // partial window, skipped
        const Tensor& first = seq.frames[static_cast<std::size_t>(lo)];
        Tensor64 acc(first.n(), first.c(), first.h(), first.w());
        for (std::int64_t j = lo; j <= hi; ++j) {
            const Tensor& f = seq.frames[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += f.data[k];
        }
        Tensor blurred(first.n(), first.c(), first.h(), first.w());
        for (std::size_t k = 0; k < acc.data.size(); ++k) {
            blurred.data[k] = static_cast<float>(acc.data[k] / static_cast<double>(window));
        }
        out.frames.push_back(std::move(blurred));
    }
    if (out.frames.empty()) {
        throw std::invalid_argument(
            "synth_blur: sequence of " + std::to_string(n) + " frames too short; at least " +
            std::to_string(spec.K + spec.tau + 1) + " frames are needed for one full window");
    }
    return out;
}

FrameSequence select_gt_frames(const FrameSequence& seq, const DegradeSpec& spec,
                               const std::vector<double>& t_list, int anchor) {
    seq.check();
    spec.check();
    FrameSequence out;
    out.fps = seq.fps;
    for (double t : t_list) {
        if (t < 0.0 || t > 1.0) throw std::invalid_argument("select_gt_frames: t outside [0,1]");
        const double scaled = t * spec.K;
        const double rounded = std::round(scaled);
        if (std::abs(scaled - rounded) > 1e-9) {
            throw std::invalid_argument("select_gt_frames: t=" + std::to_string(t) +
                                        " is not a multiple of 1/" + std::to_string(spec.K));
        }
        const std::int64_t idx = static_cast<std::int64_t>(anchor) * spec.K +
                                 static_cast<std::int64_t>(rounded);
        if (idx < 0 || idx >= static_cast<std::int64_t>(seq.frames.size())) {
            throw std::invalid_argument("select_gt_frames: sharp index " + std::to_string(idx) +
                                        " outside sequence of " + std::to_string(seq.frames.size()));
        }
        out.frames.push_back(seq.frames[static_cast<std::size_t>(idx)]);
    }
    return out;
}

namespace {

Tensor resize_frame(const Tensor& f, std::int64_t nh, std::int64_t nw) {
    if (nh == f.h() && nw == f.w()) return f;
    Tensor out(f.n(), f.c(), nh, nw);
    // Align-corners-free bilinear: sample at pixel centers of the source grid.
    const double sy = static_cast<double>(f.h()) / static_cast<double>(nh);
    const double sx = static_cast<double>(f.w()) / static_cast<double>(nw);
    for (std::int64_t n = 0; n < f.n(); ++n)
        for (std::int64_t c = 0; c < f.c(); ++c)
            for (std::int64_t y = 0; y < nh; ++y) {
                const double py = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(f.h() - 1));
                const std::int64_t y0 = static_cast<std::int64_t>(py);
                const std::int64_t y1 = std::min(y0 + 1, f.h() - 1);
                const double fy = py - y0;
                for (std::int64_t x = 0; x < nw; ++x) {
                    const double px = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(f.w() - 1));
                    const std::int64_t x0 = static_cast<std::int64_t>(px);
                    const std::int64_t x1 = std::min(x0 + 1, f.w() - 1);
                    const double fx = px - x0;
                    const double v = (1 - fx) * (1 - fy) * f.at(n, c, y0, x0) +
                                     fx * (1 - fy) * f.at(n, c, y0, x1) +
                                     (1 - fx) * fy * f.at(n, c, y1, x0) +
                                     fx * fy * f.at(n, c, y1, x1);
                    out.at(n, c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
    return out;
}

}  // namespace

FrameSequence resize_bilinear(const FrameSequence& seq, std::int64_t new_h, std::int64_t new_w) {
    seq.check();
    if (new_h < 1 || new_w < 1) throw std::invalid_argument("resize_bilinear: target size must be positive");
    FrameSequence out;
    out.fps = seq.fps;
    for (const auto& f : seq.frames) out.frames.push_back(resize_frame(f, new_h, new_w));
    return out;
}

}  // namespace demfi
