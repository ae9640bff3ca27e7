#pragma once

#include <vector>

#include "demfi/degrade.hpp"
#include "demfi/tensor.hpp"

namespace demfi {

constexpr double kPsnrCap = 100.0;  // returned when MSE is zero

double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1 = 0.01,
// K2 = 0.03), averaged over channels. Inputs are expected in [0,1].
double ssim(const Tensor& a, const Tensor& b);

// Temporal consistency: motion fields are estimated on consecutive pairs of
// pred and of gt by a 3-level pyramidal block matcher (block 8, search radius
// 4 per level) and compared by mean absolute difference over the interior
// (one block-size margin cropped on each side).
double tof(const FrameSequence& pred, const FrameSequence& gt);

// Block-matching motion field between two frames; exposed for tests.
Tensor block_matching_flow(const Tensor& from, const Tensor& to);

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double tof = 0.0;
    std::vector<double> psnr_per_frame;
    std::vector<double> ssim_per_frame;
};

MetricReport evaluate_sequences(const FrameSequence& pred, const FrameSequence& gt,
                                bool with_tof = true);

}  // namespace demfi
