#pragma once

#include <array>
#include <utility>
#include <vector>

#include "demfi/backbone.hpp"
#include "demfi/flow.hpp"
#include "demfi/weights.hpp"

namespace demfi {

constexpr std::int64_t kAgg2Channels = 30;  // 3*3 + 3*4 + 2*2 + 5
constexpr std::int64_t kAgg3Channels = 95;  // 3*3 + 3*4 + 5 + 5 + 64

// Two parallel Conv7-ReLU-Conv3-ReLU branches (frame aggregate / pixel flow),
// concatenated and fused by Conv3-ReLU-Conv3-ReLU.
struct MixerWeights {
    ConvSpec agg1, agg2;  // aggregate branch
    ConvSpec fp1, fp2;    // pixel-flow branch
    ConvSpec fuse1, fuse2;
};

// Separable-conv GRU cell: horizontal (1x5) pass then vertical (5x1) pass,
// plus the Conv3-ReLU-Conv3 head producing the 5-channel flow increment.
struct GbWeights {
    ConvSpec hz, hr, hc;  // 1x5 gates and candidate
    ConvSpec vz, vr, vc;  // 5x1 gates and candidate
    ConvSpec delta1, delta2;
};

struct LossReport {
    double l_d1 = 0.0;
    std::vector<double> l_d2_per_iter;
    double total = 0.0;
};

struct BoostResult {
    std::vector<std::array<Tensor, 3>> frames_per_iter;  // (S0, St, S1) for i = 1..N
    std::vector<Tensor> deltas;                          // 5-channel increments
    TriFlow fP;                                          // final pixel flow
    Tensor F_rec;                                        // final hidden state
};

std::vector<ParamSpec> boost_params();
MixerWeights mixer_weights_from_store(const WeightStore& ws);
GbWeights gb_weights_from_store(const WeightStore& ws);

Tensor mixer(const Tensor& agg2, const TriFlow& fP, const MixerWeights& w);

std::pair<Tensor, Tensor> gru_booster_step(const Tensor& F_rec, const Tensor& M,
                                           const GbWeights& w);

BoostResult recursive_boost(const BaselineOut& base, const std::array<Tensor, 4>& frames, double t,
                            int n_tst, const WeightStore& ws);

LossReport compute_losses(const std::vector<std::array<Tensor, 3>>& per_iter,
                          const std::array<Tensor, 3>& baseline, const Tensor& gt0,
                          const Tensor& gtt, const Tensor& gt1, int n_trn);

}  // namespace demfi
