#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "demfi/tensor.hpp"

namespace demfi {

// Named map from parameter path to tensor. Shared parameters (the shared
// decoder, the FAC-FB encoder, the boosting cell) live under exactly one path.
class WeightStore {
public:
    bool has(const std::string& path) const { return params_.count(path) != 0; }

    const Tensor& get(const std::string& path) const {
        auto it = params_.find(path);
        if (it == params_.end()) throw std::out_of_range("weights: missing parameter '" + path + "'");
        return it->second;
    }

    void put(const std::string& path, Tensor t) {
        if (!params_.emplace(path, std::move(t)).second) {
            throw std::invalid_argument("weights: duplicate parameter '" + path + "'");
        }
    }

    void set(const std::string& path, Tensor t) { params_[path] = std::move(t); }

    std::size_t size() const { return params_.size(); }
    std::int64_t parameter_count() const;

    const std::map<std::string, Tensor>& entries() const { return params_; }
    std::map<std::string, Tensor>& entries() { return params_; }

private:
    std::map<std::string, Tensor> params_;
};

struct ParamSpec {
    std::string path;                       // ".../kernel" or ".../bias"
    std::array<std::int64_t, 4> shape;      // bias stored as (C,1,1,1)
    bool is_bias = false;
};

// Convolution parameter pair under `prefix` ("<prefix>/kernel", "<prefix>/bias").
void add_conv_param(std::vector<ParamSpec>& out, const std::string& prefix,
                    std::int64_t c_out, std::int64_t c_in, std::int64_t kh, std::int64_t kw);

// Uniform Xavier draw in +-sqrt(6/(fan_in+fan_out)) for kernels, zero biases.
WeightStore xavier_init(const std::vector<ParamSpec>& specs, std::uint64_t seed);

// Little-endian container: magic "DMFI", u32 version, u64 count, then per entry
// u32 path length + path, u8 dtype (0 = f32), u8 rank, rank x u64 dims, payload.
void save_weights(const WeightStore& store, const std::string& path);
WeightStore load_weights(const std::string& path);

}  // namespace demfi
