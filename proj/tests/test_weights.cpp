#include <doctest.h>

#include <cmath>

#include "svtv/gradient.hpp"
#include "svtv/weights.hpp"
#include "util.hpp"

using namespace svtv;

TEST_CASE("flat x_tilde gives unit weights exactly") {
    const auto map = compute_weights(Image(10, 10, 0.4), {}, Boundary::forward, "gt");
    for (double w : map.w) CHECK(w == 1.0);
    CHECK(map.source == "gt");
    CHECK(weight_value(0.0, {1e-9, 0.1}) == 1.0);
}

TEST_CASE("hand evaluation: eta 1, p 0.5, magnitude sqrt(3)") {
    CHECK(weight_value(std::sqrt(3.0), {1.0, 0.5}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(weight_value(std::sqrt(3.0), {1.0, 0.5}) == doctest::Approx(0.707107).epsilon(1e-6));
}

TEST_CASE("large magnitudes decay toward zero") {
    for (double p : {0.1, 0.5, 0.9}) {
        const WeightParams wp{2e-5, p};
        CHECK(weight_value(1e6 * wp.eta, wp) < std::pow(10.0, -(1 - p) * 5));
    }
}

TEST_CASE("weights follow the per-pixel formula on a random image") {
    const auto img = testutil::random_image(12, 12, 6);
    const WeightParams wp{0.05, 0.3};
    const auto map = compute_weights(img, wp);
    const auto mag = gradient_magnitude(gradient(img));
    for (std::size_t i = 0; i < mag.size(); ++i) {
        const double ref = std::pow(wp.eta / std::sqrt(wp.eta * wp.eta + mag[i] * mag[i]), 1 - wp.p_exp);
        CHECK(map.w[i] == doctest::Approx(ref).epsilon(1e-14));
    }
    CHECK(weights_from_magnitude(mag, wp) == map.w);
}

TEST_CASE("range, boundary case and strict monotonicity") {
    Rng rng(12);
    const WeightParams wp{2e-5, 0.5};
    std::size_t bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const double w = weight_value(wp.eta * std::pow(10.0, rng.uniform(-4.0, 7.0)), wp);
        bad += !(w > 0.0 && w < 1.0);
    }
    CHECK(bad == 0);
    double last = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double w = weight_value(wp.eta * 0.1 * k, wp);
        CHECK(w < last);
        last = w;
    }
}

TEST_CASE("params are validated") {
    CHECK_THROWS_AS(WeightParams({0.0, 0.5}).validate(), Error);
    CHECK_THROWS_AS(WeightParams({-1.0, 0.5}).validate(), Error);
    CHECK_THROWS_AS(WeightParams({1.0, 0.0}).validate(), Error);
    CHECK_THROWS_AS(WeightParams({1.0, 1.0}).validate(), Error);
    CHECK_THROWS_AS(compute_weights(Image(4, 4), {0.0, 0.5}), Error);
}

TEST_CASE("derivative: zero at the origin, matches finite differences") {
    const WeightParams wp{1.0, 0.5};
    CHECK(weight_derivative(0.0, wp) == 0.0);
    for (double a : {0.1, 0.7, 1.0, 3.0, 40.0}) {
        const double h = 1e-6 * std::max(1.0, a);
        const double fd = (weight_value(a + h, wp) - weight_value(a - h, wp)) / (2 * h);
        CHECK(weight_derivative(a, wp) == doctest::Approx(fd).epsilon(1e-6));
    }
    // For p = 0.5 the maximiser of |f'| sits at eta / sqrt(1.5).
    const double amax = 1.0 / std::sqrt(1.5);
    CHECK(std::abs(weight_derivative(amax, wp)) >= std::abs(weight_derivative(amax * 1.01, wp)));
    CHECK(std::abs(weight_derivative(amax, wp)) >= std::abs(weight_derivative(amax * 0.99, wp)));
}

TEST_CASE("Lipschitz constant bounds random-pair ratios") {
    const WeightParams wp{1.0, 0.5};
    const double L = weight_lipschitz_constant(wp, 1e6);
    CHECK(L > 0.0);
    Rng rng(4);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(0.0, 10.0), b = rng.uniform(0.0, 10.0);
        if (a == b) continue;
        worst = std::max(worst, std::abs(weight_value(a, wp) - weight_value(b, wp)) / std::abs(a - b));
    }
    CHECK(worst <= L);
    // The grid maximum sits within the 1% inflation of the true one.
    const double exact = std::abs(weight_derivative(1.0 / std::sqrt(1.5), wp));
    CHECK(L >= exact);
    CHECK(L <= 1.0101 * exact);
}

TEST_CASE("Lipschitz constant scales as 1 / eta") {
    for (double eta : {2e-5, 1e-2, 1.0}) {
        const WeightParams a{eta, 0.5}, b{2 * eta, 0.5};
        const double la = weight_lipschitz_constant(a, 1e6 * eta);
        const double lb = weight_lipschitz_constant(b, 1e6 * 2 * eta);
        CHECK(lb == doctest::Approx(la / 2).epsilon(1e-3));
    }
}

TEST_CASE("weight maps are 1-norm Lipschitz in the gradient magnitudes") {
    const WeightParams wp{0.05, 0.5};
    const double L = weight_lipschitz_constant(wp, 10.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = testutil::random_image(10, 10, 300 + s);
        const auto b = testutil::random_image(10, 10, 400 + s);
        const auto ma = gradient_magnitude(gradient(a)), mb = gradient_magnitude(gradient(b));
        const auto wa = compute_weights(a, wp).w, wb = compute_weights(b, wp).w;
        CHECK(norm1(difference(wa, wb)) <= L * norm1(difference(ma, mb)) + 1e-9);
    }
}
