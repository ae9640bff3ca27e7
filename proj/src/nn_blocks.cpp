#include "demfi/nn_blocks.hpp"

#include <cstdio>

namespace demfi {

namespace {

std::string rdb_layer_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "/conv%d", i);
    return buf;
}

std::string resb_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "/resb%02d", i);
    return buf;
}

}  // namespace

ConvSpec conv_from_store(const WeightStore& ws, const std::string& prefix, int stride, int padding) {
    ConvSpec spec;
    spec.kernel = ws.get(prefix + "/kernel");
    const Tensor& b = ws.get(prefix + "/bias");
    spec.bias.assign(b.data.begin(), b.data.end());
    spec.stride = stride;
    if (padding < 0) {
        spec.pad_h = static_cast<int>((spec.kernel.h() - 1) / 2);
        spec.pad_w = static_cast<int>((spec.kernel.w() - 1) / 2);
    } else {
        spec.set_padding(padding);
    }
    return spec;
}

Tensor conv_layer(const Tensor& x, const WeightStore& ws, const std::string& prefix, int stride,
                  int padding) {
    return conv2d(x, conv_from_store(ws, prefix, stride, padding));
}

Tensor residual_dense_block(const Tensor& x, const WeightStore& ws, const std::string& prefix) {
    std::vector<Tensor> grown;
    grown.reserve(4);
    std::vector<const Tensor*> dense{&x};
    for (int i = 0; i < 4; ++i) {
        Tensor in = dense.size() == 1 ? x : concat_channels(dense);
        grown.push_back(activate(conv_layer(in, ws, prefix + rdb_layer_name(i), 1, 1),
                                 Activation::Relu));
        dense.push_back(&grown.back());
    }
    Tensor fused = conv_layer(concat_channels(dense), ws, prefix + "/fuse", 1, 0);
    return add(x, fused);
}

void add_rdb_params(std::vector<ParamSpec>& out, const std::string& prefix, std::int64_t width,
                    std::int64_t growth) {
    for (int i = 0; i < 4; ++i) {
        add_conv_param(out, prefix + rdb_layer_name(i), growth, width + i * growth, 3, 3);
    }
    add_conv_param(out, prefix + "/fuse", width, width + 4 * growth, 1, 1);
}

Tensor resb(const Tensor& x, const WeightStore& ws, const std::string& prefix) {
    Tensor h = activate(conv_layer(x, ws, prefix + "/c1", 1, 1), Activation::Relu);
    return add(x, conv_layer(h, ws, prefix + "/c2", 1, 1));
}

Tensor resb_stack(const Tensor& x, const WeightStore& ws, const std::string& prefix, int n) {
    Tensor out = x;
    for (int i = 0; i < n; ++i) out = resb(out, ws, prefix + resb_name(i));
    return out;
}

void add_resb_stack_params(std::vector<ParamSpec>& out, const std::string& prefix,
                           std::int64_t width, int n) {
    for (int i = 0; i < n; ++i) {
        add_conv_param(out, prefix + resb_name(i) + "/c1", width, width, 3, 3);
        add_conv_param(out, prefix + resb_name(i) + "/c2", width, width, 3, 3);
    }
}

}  // namespace demfi
