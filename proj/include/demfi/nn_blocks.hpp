#pragma once

#include <string>
#include <vector>

#include "demfi/ops.hpp"
#include "demfi/weights.hpp"

namespace demfi {

// Build a ConvSpec from "<prefix>/kernel" and "<prefix>/bias" in the store.
// With padding = -1 the conv is padded to preserve spatial size at stride 1.
ConvSpec conv_from_store(const WeightStore& ws, const std::string& prefix, int stride = 1,
                         int padding = -1);

Tensor conv_layer(const Tensor& x, const WeightStore& ws, const std::string& prefix,
                  int stride = 1, int padding = -1);

// Residual dense block: four dense Conv3+ReLU layers (growth 32), Conv1 local
// fusion back to the block width, residual add.
Tensor residual_dense_block(const Tensor& x, const WeightStore& ws, const std::string& prefix);

// Parameter layout for one residual dense block of the given width.
void add_rdb_params(std::vector<ParamSpec>& out, const std::string& prefix, std::int64_t width,
                    std::int64_t growth);

// ResB: Conv3 -> ReLU -> Conv3 with residual add.
Tensor resb(const Tensor& x, const WeightStore& ws, const std::string& prefix);
Tensor resb_stack(const Tensor& x, const WeightStore& ws, const std::string& prefix, int n);
void add_resb_stack_params(std::vector<ParamSpec>& out, const std::string& prefix,
                           std::int64_t width, int n);

}  // namespace demfi
