#pragma once

#include <array>
#include <vector>

#include "demfi/backbone.hpp"
#include "demfi/boosting.hpp"

namespace demfi {

enum class Stage { Baseline, Boosted };

struct InferConfig {
    std::vector<double> t_list;  // strictly inside (0,1)
    int n_tst = 3;
    Stage stage = Stage::Boosted;
};

std::vector<double> default_t_list();  // the seven multiples of 1/8 in (0,1)

// Parameter layout of the two architecture variants.
std::vector<ParamSpec> arch_params(Stage stage);

// Full two-stage inference on one blurry quadruple: deblurred frame at t=0,
// one interpolated frame per t in t_list, deblurred frame at t=1, in temporal
// order. The deblurred pair is taken from the t closest to 1/2.
std::vector<Tensor> infer_quadruple(const std::array<Tensor, 4>& frames, const WeightStore& ws,
                                    const InferConfig& config);

}  // namespace demfi
