#include "demfi/pipeline.hpp"

#include <cmath>

namespace demfi {

std::vector<double> default_t_list() {
    std::vector<double> t;
    for (int k = 1; k <= 7; ++k) t.push_back(k / 8.0);
    return t;
}

std::vector<ParamSpec> arch_params(Stage stage) {
    std::vector<ParamSpec> p = baseline_params();
    if (stage == Stage::Boosted) {
        std::vector<ParamSpec> b = boost_params();
        p.insert(p.end(), b.begin(), b.end());
    }
    return p;
}

std::vector<Tensor> infer_quadruple(const std::array<Tensor, 4>& frames, const WeightStore& ws,
                                    const InferConfig& config) {
    if (config.t_list.empty()) throw std::invalid_argument("infer: empty t list");
    for (double t : config.t_list) {
        if (t <= 0.0 || t >= 1.0) {
            throw std::invalid_argument("infer: t=" + std::to_string(t) + " outside (0,1)");
        }
    }
    std::size_t center = 0;
    for (std::size_t i = 1; i < config.t_list.size(); ++i) {
        if (std::abs(config.t_list[i] - 0.5) < std::abs(config.t_list[center] - 0.5)) center = i;
    }

    BaselineCache cache = baseline_precompute(frames, ws);
    Tensor deblurred0, deblurred1;
    std::vector<Tensor> interpolated;
    for (std::size_t i = 0; i < config.t_list.size(); ++i) {
        const double t = config.t_list[i];
        BaselineOut base = baseline_at(cache, t, ws);
        if (config.stage == Stage::Baseline) {
            if (i == center) {
                deblurred0 = base.S0r;
                deblurred1 = base.S1r;
            }
            interpolated.push_back(std::move(base.Str));
        } else {
            BoostResult boosted = recursive_boost(base, frames, t, config.n_tst, ws);
            std::array<Tensor, 3>& last = boosted.frames_per_iter.back();
            if (i == center) {
                deblurred0 = last[0];
                deblurred1 = last[2];
            }
            interpolated.push_back(std::move(last[1]));
        }
    }

    std::vector<Tensor> out;
    out.push_back(std::move(deblurred0));
    for (auto& f : interpolated) out.push_back(std::move(f));
    out.push_back(std::move(deblurred1));
    return out;
}

}  // namespace demfi
