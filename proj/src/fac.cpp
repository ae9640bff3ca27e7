#include "demfi/fac.hpp"

namespace demfi {

std::pair<Tensor, Tensor> fac_fb_forward(const Tensor& F0p, const Tensor& F1p, const Tensor& f01,
                                         const Tensor& f10, const FacWeights& w,
                                         const WeightStore& ws, const std::string& encoder_prefix) {
    Tensor F0 = resb_stack(F0p, ws, encoder_prefix, 5);
    Tensor F1 = resb_stack(F1p, ws, encoder_prefix, 5);
    Tensor F0b = bolster(F0, fac_correlate(F0, F1, f01, w), w);
    Tensor F1b = bolster(F1, fac_correlate(F1, F0, f10, w), w);
    return {std::move(F0b), std::move(F1b)};
}

}  // namespace demfi
