#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "demfi/flow.hpp"
#include "demfi/gradcheck.hpp"
#include "oracles.hpp"

using namespace demfi;

TEST_CASE("backward_warp with zero flow is the identity") {
    std::mt19937_64 rng(3);
    Tensor src = oracle::random_tensor(rng, 1, 3, 6, 7);
    Tensor flow(1, 2, 6, 7);
    CHECK(backward_warp(src, flow).data == src.data);
}

TEST_CASE("backward_warp pinned half-pixel case") {
    Tensor src(1, 1, 1, 2);
    src.data = {0.0f, 1.0f};
    Tensor flow(1, 2, 1, 2);
    flow.at(0, 0, 0, 0) = 0.5f;
    flow.at(0, 0, 0, 1) = 0.5f;
    Tensor out = backward_warp(src, flow);
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(0.5));
    CHECK(out.at(0, 0, 0, 1) == doctest::Approx(1.0));  // clamped at the border
}

TEST_CASE("backward_warp with in-bounds integer flow is a pure gather") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        Tensor src = oracle::random_tensor(rng, 1, 2, 6, 6);
        Tensor flow(1, 2, 6, 6);
        std::uniform_int_distribution<int> pos(0, 5);
        for (std::int64_t y = 0; y < 6; ++y)
            for (std::int64_t x = 0; x < 6; ++x) {
                flow.at(0, 0, y, x) = static_cast<float>(pos(rng) - x);
                flow.at(0, 1, y, x) = static_cast<float>(pos(rng) - y);
            }
        Tensor out = backward_warp(src, flow);
        for (std::int64_t c = 0; c < 2; ++c)
            for (std::int64_t y = 0; y < 6; ++y)
                for (std::int64_t x = 0; x < 6; ++x) {
                    const std::int64_t sx = x + static_cast<std::int64_t>(flow.at(0, 0, y, x));
                    const std::int64_t sy = y + static_cast<std::int64_t>(flow.at(0, 1, y, x));
                    CHECK(out.at(0, c, y, x) == src.at(0, c, sy, sx));
                }
    }
}

TEST_CASE("backward_warp matches the scalar bilinear oracle") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        Tensor src = oracle::random_tensor(rng, 1, 3, 8, 8);
        Tensor flow = oracle::random_tensor(rng, 1, 2, 8, 8, -3.0f, 3.0f);
        CHECK(oracle::rel_err(backward_warp(src, flow), oracle::backward_warp(src, flow)) < 1e-6);
    }
}

TEST_CASE("approx_intermediate_flows scales linearly in t") {
    std::mt19937_64 rng(9);
    Tensor f01 = oracle::random_tensor(rng, 1, 2, 4, 4);
    Tensor f10 = oracle::random_tensor(rng, 1, 2, 4, 4);
    auto [f0t, f1t] = approx_intermediate_flows(f01, f10, 0.25);
    for (std::size_t i = 0; i < f01.data.size(); ++i) {
        CHECK(f0t.data[i] == 0.25f * f01.data[i]);
        CHECK(f1t.data[i] == 0.75f * f10.data[i]);
    }
    CHECK_THROWS_AS(approx_intermediate_flows(f01, f10, 1.5), std::invalid_argument);
}

TEST_CASE("cfr_reverse inverts a uniform integer translation") {
    // Uniform motion c = (2, 0): f_0t = t*c splats -t*c onto the t grid, so the
    // covered interior of f_t0 must equal -t*c; complementary fill elsewhere.
    const double t = 0.5;
    const float cx = 2.0f;
    Tensor f0t(1, 2, 8, 8), f1t(1, 2, 8, 8);
    for (auto i = 0u; i < 64; ++i) {
        f0t.data[i] = t * cx;            // x channel
        f1t.data[i] = -(1.0 - t) * cx;   // opposite direction
    }
    auto [ft0, ft1] = cfr_reverse(f0t, f1t, t);
    for (std::int64_t y = 0; y < 8; ++y)
        for (std::int64_t x = 1; x < 8; ++x) {  // x=0 is a splat hole for this motion
            CHECK(ft0.at(0, 0, y, x) == doctest::Approx(-t * cx));
            CHECK(ft0.at(0, 1, y, x) == doctest::Approx(0.0));
        }
    for (std::int64_t y = 0; y < 8; ++y)
        for (std::int64_t x = 0; x < 7; ++x) {
            CHECK(ft1.at(0, 0, y, x) == doctest::Approx((1.0 - t) * cx));
        }
    // Hole filling: uncovered ft0 pixels take -t/(1-t) times the complement.
    CHECK(ft0.at(0, 0, 0, 0) == doctest::Approx(-t / (1.0 - t) * ft1.at(0, 0, 0, 0)));
}

TEST_CASE("fwb is an exact endpoint selector and a convex blend") {
    std::mt19937_64 rng(11);
    Tensor F0 = oracle::random_tensor(rng, 1, 4, 6, 6);
    Tensor F1 = oracle::random_tensor(rng, 1, 4, 6, 6);
    TriFlow tri;
    tri.flow_t0 = Tensor(1, 2, 6, 6);
    tri.flow_t1 = Tensor(1, 2, 6, 6);
    tri.occ_logit = oracle::random_tensor(rng, 1, 1, 6, 6, -3.0f, 3.0f);

    // Zero flows: endpoints must return the inputs bit-exactly.
    CHECK(fwb(F0, F1, tri, 0.0).data == F0.data);
    CHECK(fwb(F0, F1, tri, 1.0).data == F1.data);

    for (double t : {0.2, 0.5, 0.9}) {
        Tensor out = fwb(F0, F1, tri, t);
        for (std::int64_t c = 0; c < 4; ++c)
            for (std::int64_t y = 0; y < 6; ++y)
                for (std::int64_t x = 0; x < 6; ++x) {
                    const float lo = std::min(F0.at(0, c, y, x), F1.at(0, c, y, x));
                    const float hi = std::max(F0.at(0, c, y, x), F1.at(0, c, y, x));
                    CHECK(out.at(0, c, y, x) >= lo - 1e-5f);
                    CHECK(out.at(0, c, y, x) <= hi + 1e-5f);
                }
    }
    CHECK_THROWS_AS(fwb(F0, F1, tri, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(fwb(F0, F1, tri, 1.1), std::invalid_argument);
}

TEST_CASE("occlusion weights are an exact partition of unity") {
    // By construction o_t1 = 1 - o_t0; verify through the blend: with F0 = F1
    // the output equals the common input up to the epsilon regularization.
    std::mt19937_64 rng(13);
    Tensor F = oracle::random_tensor(rng, 1, 3, 5, 5);
    TriFlow tri;
    tri.flow_t0 = Tensor(1, 2, 5, 5);
    tri.flow_t1 = Tensor(1, 2, 5, 5);
    tri.occ_logit = oracle::random_tensor(rng, 1, 1, 5, 5, -4.0f, 4.0f);
    Tensor out = fwb(F, F, tri, 0.37);
    CHECK(oracle::max_abs_diff(out, F) < 1e-5);
    // The logits' sigmoid and its complement sum to one exactly.
    for (const float v : tri.occ_logit.data) {
        const float o0 = sigmoid_scalar(v);
        CHECK(o0 + (1.0f - o0) == 1.0f);
    }
}

TEST_CASE("pwb shares the fwb contract") {
    std::mt19937_64 rng(17);
    Tensor S0 = oracle::random_tensor(rng, 1, 3, 4, 4, 0.0f, 1.0f);
    Tensor S1 = oracle::random_tensor(rng, 1, 3, 4, 4, 0.0f, 1.0f);
    TriFlow tri;
    tri.flow_t0 = oracle::random_tensor(rng, 1, 2, 4, 4, -1.0f, 1.0f);
    tri.flow_t1 = oracle::random_tensor(rng, 1, 2, 4, 4, -1.0f, 1.0f);
    tri.occ_logit = oracle::random_tensor(rng, 1, 1, 4, 4);
    CHECK(pwb(S0, S1, tri, 0.5).data == fwb(S0, S1, tri, 0.5).data);
}

TEST_CASE("warp gradients match finite differences over many instances") {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        GradCheckResult r = gradcheck_warp(seed);
        worst = std::max(worst, r.max_rel_error);
        CHECK(r.max_blocked_flow_grad == 0.0);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("fwb gradients match finite differences") {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        worst = std::max(worst, gradcheck_fwb(seed).max_rel_error);
    }
    CHECK(worst < 1e-4);
}
