#include "demfi/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace demfi {

double psnr(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Separable valid-region Gaussian filter of one channel plane.
std::vector<double> gauss_filter_plane(const Tensor& t, std::int64_t n, std::int64_t c,
                                       std::int64_t& oh, std::int64_t& ow) {
    static const std::vector<double> k = gaussian_kernel();
    const std::int64_t H = t.h(), W = t.w();
    oh = H - kSsimWindow + 1;
    ow = W - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(H * ow));
    for (std::int64_t y = 0; y < H; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) acc += k[static_cast<std::size_t>(i)] * t.at(n, c, y, x + i);
            rows[static_cast<std::size_t>(y * ow + x)] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(oh * ow));
    for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kSsimWindow; ++i)
                acc += k[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>((y + i) * ow + x)];
            out[static_cast<std::size_t>(y * ow + x)] = acc;
        }
    return out;
}

Tensor product(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "ssim");
    if (a.h() < kSsimWindow || a.w() < kSsimWindow) {
        throw std::invalid_argument("ssim: image " + a.shape_str() + " smaller than the 11x11 window");
    }
    const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
    const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
    Tensor aa = product(a, a), bb = product(b, b), ab = product(a, b);
    double total = 0.0;
    std::int64_t count = 0;
    for (std::int64_t n = 0; n < a.n(); ++n) {
        for (std::int64_t c = 0; c < a.c(); ++c) {
            std::int64_t oh, ow;
            const auto mu_a = gauss_filter_plane(a, n, c, oh, ow);
            const auto mu_b = gauss_filter_plane(b, n, c, oh, ow);
            const auto m_aa = gauss_filter_plane(aa, n, c, oh, ow);
            const auto m_bb = gauss_filter_plane(bb, n, c, oh, ow);
            const auto m_ab = gauss_filter_plane(ab, n, c, oh, ow);
            for (std::size_t i = 0; i < mu_a.size(); ++i) {
                const double ma = mu_a[i], mb = mu_b[i];
                const double va = m_aa[i] - ma * ma;
                const double vb = m_bb[i] - mb * mb;
                const double cov = m_ab[i] - ma * mb;
                const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
                const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
                total += num / den;
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

namespace {

constexpr int kBlock = 8;
constexpr int kSearch = 4;
constexpr int kLevels = 3;

Tensor to_gray(const Tensor& img) {
    Tensor out(img.n(), 1, img.h(), img.w());
    for (std::int64_t n = 0; n < img.n(); ++n)
        for (std::int64_t y = 0; y < img.h(); ++y)
            for (std::int64_t x = 0; x < img.w(); ++x) {
                double acc = 0.0;
                for (std::int64_t c = 0; c < img.c(); ++c) acc += img.at(n, c, y, x);
                out.at(n, 0, y, x) = static_cast<float>(acc / static_cast<double>(img.c()));
            }
    return out;
}

Tensor downsample2(const Tensor& img) {
    const std::int64_t oh = img.h() / 2, ow = img.w() / 2;
    Tensor out(img.n(), img.c(), oh, ow);
    for (std::int64_t n = 0; n < img.n(); ++n)
        for (std::int64_t c = 0; c < img.c(); ++c)
            for (std::int64_t y = 0; y < oh; ++y)
                for (std::int64_t x = 0; x < ow; ++x)
                    out.at(n, c, y, x) = 0.25f * (img.at(n, c, 2 * y, 2 * x) +
                                                  img.at(n, c, 2 * y, 2 * x + 1) +
                                                  img.at(n, c, 2 * y + 1, 2 * x) +
                                                  img.at(n, c, 2 * y + 1, 2 * x + 1));
    return out;
}

double block_sad(const Tensor& from, const Tensor& to, std::int64_t by, std::int64_t bx,
                 std::int64_t bh, std::int64_t bw, std::int64_t dy, std::int64_t dx) {
    double sad = 0.0;
    for (std::int64_t y = 0; y < bh; ++y)
        for (std::int64_t x = 0; x < bw; ++x) {
            const std::int64_t ty = std::clamp<std::int64_t>(by + y + dy, 0, to.h() - 1);
            const std::int64_t tx = std::clamp<std::int64_t>(bx + x + dx, 0, to.w() - 1);
            sad += std::abs(static_cast<double>(from.at(0, 0, by + y, bx + x)) -
                            static_cast<double>(to.at(0, 0, ty, tx)));
        }
    return sad;
}

// One level of block matching seeded by a coarser flow estimate.
Tensor match_level(const Tensor& from, const Tensor& to, const Tensor* seed) {
    Tensor flow(1, 2, from.h(), from.w());
    for (std::int64_t by = 0; by < from.h(); by += kBlock) {
        for (std::int64_t bx = 0; bx < from.w(); bx += kBlock) {
            const std::int64_t bh = std::min<std::int64_t>(kBlock, from.h() - by);
            const std::int64_t bw = std::min<std::int64_t>(kBlock, from.w() - bx);
            std::int64_t base_dx = 0, base_dy = 0;
            if (seed) {
                const std::int64_t sy = std::min(by / 2, seed->h() - 1);
                const std::int64_t sx = std::min(bx / 2, seed->w() - 1);
                base_dx = 2 * static_cast<std::int64_t>(std::lround(seed->at(0, 0, sy, sx)));
                base_dy = 2 * static_cast<std::int64_t>(std::lround(seed->at(0, 1, sy, sx)));
            }
            double best = 0.0;
            std::int64_t best_dx = base_dx, best_dy = base_dy;
            bool first = true;
            for (std::int64_t dy = base_dy - kSearch; dy <= base_dy + kSearch; ++dy) {
                for (std::int64_t dx = base_dx - kSearch; dx <= base_dx + kSearch; ++dx) {
                    const double sad = block_sad(from, to, by, bx, bh, bw, dy, dx);
                    if (first || sad < best) {
                        first = false;
                        best = sad;
                        best_dx = dx;
                        best_dy = dy;
                    }
                }
            }
            for (std::int64_t y = 0; y < bh; ++y)
                for (std::int64_t x = 0; x < bw; ++x) {
                    flow.at(0, 0, by + y, bx + x) = static_cast<float>(best_dx);
                    flow.at(0, 1, by + y, bx + x) = static_cast<float>(best_dy);
                }
        }
    }
    return flow;
}

}  // namespace

Tensor block_matching_flow(const Tensor& from, const Tensor& to) {
    require_same_shape(from, to, "block_matching_flow");
    Tensor f = to_gray(from), t = to_gray(to);
    std::vector<Tensor> pf{f}, pt{t};
    for (int l = 1; l < kLevels; ++l) {
        if (pf.back().h() < 2 * kBlock || pf.back().w() < 2 * kBlock) break;
        pf.push_back(downsample2(pf.back()));
        pt.push_back(downsample2(pt.back()));
    }
    Tensor flow;
    const Tensor* seed = nullptr;
    for (int l = static_cast<int>(pf.size()) - 1; l >= 0; --l) {
        flow = match_level(pf[static_cast<std::size_t>(l)], pt[static_cast<std::size_t>(l)], seed);
        seed = &flow;
    }
    return flow;
}

double tof(const FrameSequence& pred, const FrameSequence& gt) {
    pred.check();
    gt.check();
    if (pred.frames.size() != gt.frames.size()) {
        throw std::invalid_argument("tof: sequence lengths differ");
    }
    if (pred.frames.size() < 2) throw std::invalid_argument("tof: need at least 2 frames");
    require_same_shape(pred.frames[0], gt.frames[0], "tof");
    const std::int64_t H = pred.frames[0].h(), W = pred.frames[0].w();
    const std::int64_t margin = (H > 3 * kBlock && W > 3 * kBlock) ? kBlock : 0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pred.frames.size(); ++i) {
        Tensor fp = block_matching_flow(pred.frames[i], pred.frames[i + 1]);
        Tensor fg = block_matching_flow(gt.frames[i], gt.frames[i + 1]);
        double acc = 0.0;
        std::int64_t count = 0;
        for (std::int64_t y = margin; y < H - margin; ++y)
            for (std::int64_t x = margin; x < W - margin; ++x) {
                for (std::int64_t c = 0; c < 2; ++c)
                    acc += std::abs(static_cast<double>(fp.at(0, c, y, x)) -
                                    static_cast<double>(fg.at(0, c, y, x)));
                ++count;
            }
        total += acc / static_cast<double>(count);
    }
    return total / static_cast<double>(pred.frames.size() - 1);
}

MetricReport evaluate_sequences(const FrameSequence& pred, const FrameSequence& gt, bool with_tof) {
    pred.check();
    gt.check();
    if (pred.frames.size() != gt.frames.size()) {
        throw std::invalid_argument("evaluate: sequence lengths differ (" +
                                    std::to_string(pred.frames.size()) + " vs " +
                                    std::to_string(gt.frames.size()) + ")");
    }
    MetricReport report;
    for (std::size_t i = 0; i < pred.frames.size(); ++i) {
        report.psnr_per_frame.push_back(psnr(pred.frames[i], gt.frames[i]));
        report.ssim_per_frame.push_back(ssim(pred.frames[i], gt.frames[i]));
        report.psnr += report.psnr_per_frame.back();
        report.ssim += report.ssim_per_frame.back();
    }
    report.psnr /= static_cast<double>(pred.frames.size());
    report.ssim /= static_cast<double>(pred.frames.size());
    if (with_tof && pred.frames.size() >= 2) report.tof = tof(pred, gt);
    return report;
}

}  // namespace demfi
