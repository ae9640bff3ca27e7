#pragma once

#include <array>
#include <utility>
#include <vector>

#include "demfi/fac.hpp"
#include "demfi/flow.hpp"
#include "demfi/nn_blocks.hpp"
#include "demfi/weights.hpp"

namespace demfi {

constexpr std::int64_t kFeatureChannels = 64;
constexpr int kShuffleFactor = 2;
constexpr std::int64_t kBackboneOutChannels = 133;  // 64*2 + 2*2 + 1
constexpr std::int64_t kAgg1Channels = 201;         // 64*3 + 2*4 + 1

struct BackboneOut {
    Tensor F0p, F1p;   // tanh-bounded 64-channel features
    Tensor f01, f10;   // bidirectional feature flows
    Tensor occ_logit;  // 1 channel
};

struct BaselineOut {
    Tensor S0r, Str, S1r;
    TriFlow fF;  // refined [f_t0^r, f_t1^r, o_t0^r]
    Tensor F0r, Ftr, F1r;
    Tensor f01, f10;
};

// Intermediate state shared by every time instance t for one input quadruple.
struct BaselineCache {
    BackboneOut bb;
    Tensor F0b, F1b;
};

std::vector<ParamSpec> baseline_params();

FacWeights fac_weights_from_store(const WeightStore& ws);

BackboneOut ff_rdb_forward(const std::array<Tensor, 4>& frames, const WeightStore& ws);

// (f_t0, f_t1, o_t0) via linear flow approximation + CFR, and the t-aligned
// feature from blending the backbone features.
std::pair<Tensor, TriFlow> t_align(const BackboneOut& out, double t);

// U-Net refinement plus residual add onto the [F0b, F1b, f_t0, f_t1, o] slice
// of the 201-channel aggregate. Returns (F0r, F1r, refined TriFlow).
struct RefineOut {
    Tensor F0r, F1r;
    TriFlow tri;
};
RefineOut refine_module(const Tensor& agg1, const WeightStore& ws);

// Shared ResB^{x5} decoder plus a 3x3 projection to RGB.
Tensor decoder1(const Tensor& feature, const WeightStore& ws);

BaselineCache baseline_precompute(const std::array<Tensor, 4>& frames, const WeightStore& ws);
BaselineOut baseline_at(const BaselineCache& cache, double t, const WeightStore& ws);
BaselineOut baseline_forward(const std::array<Tensor, 4>& frames, double t, const WeightStore& ws);

}  // namespace demfi
