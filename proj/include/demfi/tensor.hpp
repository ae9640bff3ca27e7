#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace demfi {

// Dense rank-4 array in NCHW order, W fastest. Tensor (float storage) is the
// carrier for frames, features and flows; Tensor64 exists for gradient checks.
template <typename T>
struct TensorT {
    std::array<std::int64_t, 4> shape{0, 0, 0, 0};
    std::vector<T> data;

    TensorT() = default;
    TensorT(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
        : shape{n, c, h, w} {
        if (n < 0 || c < 0 || h < 0 || w < 0) {
            throw std::invalid_argument("tensor: negative dimension");
        }
        data.assign(static_cast<std::size_t>(n * c * h * w), T(0));
    }

    std::int64_t n() const { return shape[0]; }
    std::int64_t c() const { return shape[1]; }
    std::int64_t h() const { return shape[2]; }
    std::int64_t w() const { return shape[3]; }
    std::int64_t numel() const { return shape[0] * shape[1] * shape[2] * shape[3]; }

    T& at(std::int64_t n_, std::int64_t c_, std::int64_t y, std::int64_t x) {
        return data[static_cast<std::size_t>(((n_ * shape[1] + c_) * shape[2] + y) * shape[3] + x)];
    }
    const T& at(std::int64_t n_, std::int64_t c_, std::int64_t y, std::int64_t x) const {
        return data[static_cast<std::size_t>(((n_ * shape[1] + c_) * shape[2] + y) * shape[3] + x)];
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "(" << shape[0] << "," << shape[1] << "," << shape[2] << "," << shape[3] << ")";
        return os.str();
    }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(shape[0], shape[1], shape[2], shape[3]);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    static TensorT full(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w, T v) {
        TensorT t(n, c, h, w);
        for (auto& e : t.data) e = v;
        return t;
    }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename T>
inline void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

template <typename T>
inline void require_same_spatial(const TensorT<T>& a, const TensorT<T>& b, const char* what) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
        throw std::invalid_argument(std::string(what) + ": spatial mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

}  // namespace demfi
