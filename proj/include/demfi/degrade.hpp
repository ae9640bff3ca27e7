#pragma once

#include <vector>

#include "demfi/tensor.hpp"

namespace demfi {

// Ordered list of 1x3xHxW image tensors with values in [0,1].
struct FrameSequence {
    std::vector<Tensor> frames;
    double fps = 0.0;

    void check() const {
        if (frames.empty()) throw std::invalid_argument("sequence: empty");
        for (const auto& f : frames) require_same_shape(frames[0], f, "sequence");
    }
};

// Window [iK - tau, iK + tau] of length 2*tau + 1, emitted at stride K.
struct DegradeSpec {
    int K = 8;
    int tau = 5;

    void check() const {
        if (K < 1) throw std::invalid_argument("degrade: K must be >= 1");
        if (tau < 0) throw std::invalid_argument("degrade: tau must be >= 0");
    }
};

// Arithmetic mean of each fully-covered window; partial boundary windows are
// skipped, never padded. Output fps = input fps / K.
FrameSequence synth_blur(const FrameSequence& seq, const DegradeSpec& spec);

// Sharp frames at indices (anchor + t) * K for t values that are multiples of
// 1/K in [0,1].
FrameSequence select_gt_frames(const FrameSequence& seq, const DegradeSpec& spec,
                               const std::vector<double>& t_list, int anchor = 0);

FrameSequence resize_bilinear(const FrameSequence& seq, std::int64_t new_h, std::int64_t new_w);

}  // namespace demfi
