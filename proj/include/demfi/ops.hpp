#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "demfi/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace demfi {

// Kernel layout (C_out, C_in, k_h, k_w); cross-correlation with zero padding.
template <typename T>
struct ConvSpecT {
    TensorT<T> kernel;
    std::vector<T> bias;  // length C_out
    int stride = 1;
    int pad_h = 0;  // zero-padding rows
    int pad_w = 0;  // zero-padding columns

    std::int64_t c_out() const { return kernel.n(); }
    std::int64_t c_in() const { return kernel.c(); }

    void set_padding(int p) { pad_h = pad_w = p; }

    template <typename U>
    ConvSpecT<U> cast() const {
        ConvSpecT<U> s;
        s.kernel = kernel.template cast<U>();
        s.bias.assign(bias.begin(), bias.end());
        s.stride = stride;
        s.pad_h = pad_h;
        s.pad_w = pad_w;
        return s;
    }
};

using ConvSpec = ConvSpecT<float>;
using ConvSpec64 = ConvSpecT<double>;

template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const ConvSpecT<T>& spec) {
    if (x.c() != spec.c_in()) {
        throw std::invalid_argument("conv2d: input channels " + x.shape_str() +
                                    " do not match kernel " + spec.kernel.shape_str());
    }
    if (spec.stride < 1) throw std::invalid_argument("conv2d: stride must be positive");
    if (spec.pad_h < 0 || spec.pad_w < 0) throw std::invalid_argument("conv2d: negative padding");
    const std::int64_t kh = spec.kernel.h(), kw = spec.kernel.w();
    const std::int64_t oh = (x.h() + 2 * spec.pad_h - kh) / spec.stride + 1;
    const std::int64_t ow = (x.w() + 2 * spec.pad_w - kw) / spec.stride + 1;
    if (oh < 1 || ow < 1) {
        throw std::invalid_argument("conv2d: kernel " + spec.kernel.shape_str() +
                                    " larger than padded input " + x.shape_str());
    }
    TensorT<T> out(x.n(), spec.c_out(), oh, ow);
    const std::int64_t jobs = x.n() * spec.c_out();
    // Accumulates per output plane in (ci, ky, kx) order with branch-free inner
    // loops; the per-pixel summation order matches the naive triple loop, so
    // results are bit-identical and deterministic across thread counts.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t job = 0; job < jobs; ++job) {
        const std::int64_t n = job / spec.c_out();
        const std::int64_t co = job % spec.c_out();
        const std::int64_t s = spec.stride;
        std::vector<double> acc(static_cast<std::size_t>(oh * ow),
                                static_cast<double>(spec.bias[static_cast<std::size_t>(co)]));
        for (std::int64_t ci = 0; ci < x.c(); ++ci) {
            const T* xp = &x.at(n, ci, 0, 0);
            for (std::int64_t ky = 0; ky < kh; ++ky) {
                // Output rows whose input row iy = oy*s - pad_h + ky is in range.
                const std::int64_t ty = x.h() - 1 + spec.pad_h - ky;
                const std::int64_t oy_lo =
                    std::max<std::int64_t>(0, (spec.pad_h - ky + s - 1) / s);
                const std::int64_t oy_hi = ty < 0 ? 0 : std::min(oh, ty / s + 1);
                for (std::int64_t kx = 0; kx < kw; ++kx) {
                    const double w = static_cast<double>(spec.kernel.at(co, ci, ky, kx));
                    const std::int64_t tx = x.w() - 1 + spec.pad_w - kx;
                    const std::int64_t ox_lo =
                        std::max<std::int64_t>(0, (spec.pad_w - kx + s - 1) / s);
                    const std::int64_t ox_hi = tx < 0 ? 0 : std::min(ow, tx / s + 1);
                    for (std::int64_t oy = oy_lo; oy < oy_hi; ++oy) {
                        const std::int64_t iy = oy * s - spec.pad_h + ky;
                        double* ap = acc.data() + oy * ow;
                        const T* row = xp + iy * x.w() - spec.pad_w + kx;
                        if (s == 1) {
                            for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox)
                                ap[ox] += static_cast<double>(row[ox]) * w;
                        } else {
                            for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox)
                                ap[ox] += static_cast<double>(row[ox * s]) * w;
                        }
                    }
                }
            }
        }
        T* op = &out.at(n, co, 0, 0);
        for (std::int64_t i = 0; i < oh * ow; ++i)
            op[i] = static_cast<T>(acc[static_cast<std::size_t>(i)]);
    }
    return out;
}

// Gradients of conv2d for stride-1 specs; used by the manual backward paths.
template <typename T>
void conv2d_backward(const TensorT<T>& x, const ConvSpecT<T>& spec, const TensorT<T>& upstream,
                     TensorT<T>& grad_x, ConvSpecT<T>& grad_spec) {
    if (spec.stride != 1) throw std::invalid_argument("conv2d_backward: stride must be 1");
    const std::int64_t kh = spec.kernel.h(), kw = spec.kernel.w();
    const std::int64_t ph = spec.pad_h, pw = spec.pad_w;
    grad_x = TensorT<T>(x.n(), x.c(), x.h(), x.w());
    grad_spec.kernel = TensorT<T>(spec.kernel.n(), spec.kernel.c(), kh, kw);
    grad_spec.bias.assign(spec.bias.size(), T(0));
    grad_spec.stride = 1;
    grad_spec.pad_h = spec.pad_h;
    grad_spec.pad_w = spec.pad_w;
    for (std::int64_t n = 0; n < x.n(); ++n) {
        for (std::int64_t co = 0; co < spec.c_out(); ++co) {
            for (std::int64_t oy = 0; oy < upstream.h(); ++oy) {
                for (std::int64_t ox = 0; ox < upstream.w(); ++ox) {
                    const T up = upstream.at(n, co, oy, ox);
                    grad_spec.bias[static_cast<std::size_t>(co)] += up;
                    for (std::int64_t ci = 0; ci < x.c(); ++ci) {
                        for (std::int64_t ky = 0; ky < kh; ++ky) {
                            const std::int64_t iy = oy + ky - ph;
                            if (iy < 0 || iy >= x.h()) continue;
                            for (std::int64_t kx = 0; kx < kw; ++kx) {
                                const std::int64_t ix = ox + kx - pw;
                                if (ix < 0 || ix >= x.w()) continue;
                                grad_x.at(n, ci, iy, ix) += up * spec.kernel.at(co, ci, ky, kx);
                                grad_spec.kernel.at(co, ci, ky, kx) += up * x.at(n, ci, iy, ix);
                            }
                        }
                    }
                }
            }
        }
    }
}

enum class Activation { Relu, Tanh, Sigmoid };

template <typename T>
inline T sigmoid_scalar(T v) {
    return static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
}

template <typename T>
TensorT<T> activate(const TensorT<T>& x, Activation kind) {
    TensorT<T> out = x;
    switch (kind) {
        case Activation::Relu:
            for (auto& v : out.data) v = v > T(0) ? v : T(0);
            break;
        case Activation::Tanh:
            for (auto& v : out.data) v = static_cast<T>(std::tanh(static_cast<double>(v)));
            break;
        case Activation::Sigmoid:
            for (auto& v : out.data) v = sigmoid_scalar(v);
            break;
    }
    return out;
}

// DownShuffle: (N,C,H,W) -> (N,C*r^2,H/r,W/r). Output channel c*r*r + dy*r + dx
// holds sub-pixel (dy,dx) of input channel c.
template <typename T>
TensorT<T> pixel_shuffle_down(const TensorT<T>& x, int r) {
    if (r < 1) throw std::invalid_argument("pixel_shuffle_down: factor must be >= 1");
    if (x.h() % r != 0 || x.w() % r != 0) {
        throw std::invalid_argument("pixel_shuffle_down: spatial size " + x.shape_str() +
                                    " not divisible by " + std::to_string(r));
    }
    TensorT<T> out(x.n(), x.c() * r * r, x.h() / r, x.w() / r);
    for (std::int64_t n = 0; n < x.n(); ++n)
        for (std::int64_t c = 0; c < x.c(); ++c)
            for (std::int64_t y = 0; y < out.h(); ++y)
                for (std::int64_t xx = 0; xx < out.w(); ++xx)
                    for (int dy = 0; dy < r; ++dy)
                        for (int dx = 0; dx < r; ++dx)
                            out.at(n, c * r * r + dy * r + dx, y, xx) =
                                x.at(n, c, y * r + dy, xx * r + dx);
    return out;
}

template <typename T>
TensorT<T> pixel_shuffle_up(const TensorT<T>& x, int r) {
    if (r < 1) throw std::invalid_argument("pixel_shuffle_up: factor must be >= 1");
    if (x.c() % (static_cast<std::int64_t>(r) * r) != 0) {
        throw std::invalid_argument("pixel_shuffle_up: channels " + x.shape_str() +
                                    " not divisible by r^2 with r=" + std::to_string(r));
    }
    TensorT<T> out(x.n(), x.c() / (r * r), x.h() * r, x.w() * r);
    for (std::int64_t n = 0; n < out.n(); ++n)
        for (std::int64_t c = 0; c < out.c(); ++c)
            for (std::int64_t y = 0; y < x.h(); ++y)
                for (std::int64_t xx = 0; xx < x.w(); ++xx)
                    for (int dy = 0; dy < r; ++dy)
                        for (int dx = 0; dx < r; ++dx)
                            out.at(n, c, y * r + dy, xx * r + dx) =
                                x.at(n, c * r * r + dy * r + dx, y, xx);
    return out;
}

template <typename T>
TensorT<T> concat_channels(const std::vector<const TensorT<T>*>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
    std::int64_t c_total = 0;
    for (const auto* p : parts) {
        require_same_spatial(*parts[0], *p, "concat_channels");
        c_total += p->c();
    }
    TensorT<T> out(parts[0]->n(), c_total, parts[0]->h(), parts[0]->w());
    std::int64_t c_off = 0;
    for (const auto* p : parts) {
        for (std::int64_t n = 0; n < p->n(); ++n)
            for (std::int64_t c = 0; c < p->c(); ++c)
                for (std::int64_t y = 0; y < p->h(); ++y)
                    for (std::int64_t x = 0; x < p->w(); ++x)
                        out.at(n, c_off + c, y, x) = p->at(n, c, y, x);
        c_off += p->c();
    }
    return out;
}

template <typename T>
TensorT<T> slice_channels(const TensorT<T>& x, std::int64_t c_begin, std::int64_t c_end) {
    if (c_begin < 0 || c_end > x.c() || c_begin >= c_end) {
        throw std::invalid_argument("slice_channels: bad range [" + std::to_string(c_begin) +
                                    "," + std::to_string(c_end) + ") for " + x.shape_str());
    }
    TensorT<T> out(x.n(), c_end - c_begin, x.h(), x.w());
    for (std::int64_t n = 0; n < x.n(); ++n)
        for (std::int64_t c = c_begin; c < c_end; ++c)
            for (std::int64_t y = 0; y < x.h(); ++y)
                for (std::int64_t xx = 0; xx < x.w(); ++xx)
                    out.at(n, c - c_begin, y, xx) = x.at(n, c, y, xx);
    return out;
}

// Nearest-neighbour upsampling to an explicit target size.
template <typename T>
TensorT<T> nn_upsample_to(const TensorT<T>& x, std::int64_t th, std::int64_t tw) {
    if (th < x.h() || tw < x.w()) throw std::invalid_argument("nn_upsample_to: target smaller than input");
    TensorT<T> out(x.n(), x.c(), th, tw);
    for (std::int64_t n = 0; n < x.n(); ++n)
        for (std::int64_t c = 0; c < x.c(); ++c)
            for (std::int64_t y = 0; y < th; ++y) {
                const std::int64_t sy = std::min<std::int64_t>(y * x.h() / th, x.h() - 1);
                for (std::int64_t xx = 0; xx < tw; ++xx) {
                    const std::int64_t sx = std::min<std::int64_t>(xx * x.w() / tw, x.w() - 1);
                    out.at(n, c, y, xx) = x.at(n, c, sy, sx);
                }
            }
    return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    require_same_shape(a, b, "add");
    TensorT<T> out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T s) {
    TensorT<T> out = a;
    for (auto& v : out.data) v *= s;
    return out;
}

template <typename T>
bool all_finite(const TensorT<T>& a) {
    for (const auto& v : a.data)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

}  // namespace demfi
