#include <doctest.h>

#include <cmath>

#include "ifadit/error.hpp"
#include "ifadit/metrics.hpp"
#include "ifadit/rng.hpp"
#include "test_support.hpp"

using namespace ifadit;

namespace {
Tensor random_image(std::size_t h, std::size_t w, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Tensor img({h * w});
    for (auto& v : img.data) v = rng.uniform(lo, hi);
    return img;
}
}  // namespace

TEST_CASE("ssim of an image with itself is exactly 1") {
    PrecisionGuard g(Precision::f64);
    Rng rng(31);
    const Tensor x = random_image(32, 32, rng);
    CHECK(ssim(x, x, 32, 32) == 1.0);
}

TEST_CASE("ssim is symmetric") {
    PrecisionGuard g(Precision::f64);
    Rng rng(32);
    const Tensor x = random_image(32, 32, rng);
    const Tensor y = random_image(32, 32, rng);
    CHECK(ssim(x, y, 32, 32) == ssim(y, x, 32, 32));
}

TEST_CASE("ssim of a mid-contrast image against its negative is low") {
    PrecisionGuard g(Precision::f64);
    Rng rng(33);
    const Tensor x = random_image(32, 32, rng, 0.2, 0.8);
    Tensor inv({32 * 32});
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 - x[i];
    CHECK(ssim(x, inv, 32, 32) < 0.2);
}

TEST_CASE("ssim rejects images smaller than the window") {
    PrecisionGuard g(Precision::f64);
    Tensor tiny({6 * 6}, 0.5);
    CHECK_THROWS_AS(ssim(tiny, tiny, 6, 6), ContractError);
}

TEST_CASE("cosine endpoints are exact") {
    PrecisionGuard g(Precision::f64);
    CHECK(cosine(Tensor({2}, {1.0, 0.0}), Tensor({2}, {0.0, 1.0})) == 0.0);

    Rng rng(34);
    const Tensor u = test_support::random_normal({16}, rng);
    Tensor nu({16});
    for (std::size_t i = 0; i < 16; ++i) nu[i] = -u[i];
    CHECK(cosine(u, u) == 1.0);
    CHECK(cosine(u, nu) == -1.0);
    CHECK(cosine(u, u) <= 1.0);

    CHECK_THROWS_AS(cosine(Tensor({3}, 0.0), u.shape == Shape{3} ? u : Tensor({3}, 1.0)),
                    ContractError);
}

TEST_CASE("mse and psnr follow the formula") {
    PrecisionGuard g(Precision::f64);
    Rng rng(35);
    const Tensor x = random_image(8, 8, rng, 0.1, 0.8);
    CHECK(mse(x, x) == 0.0);
    CHECK(psnr(x, x) == 100.0);

    Tensor y({64});
    for (std::size_t i = 0; i < 64; ++i) y[i] = x[i] + 0.1;
    CHECK(mse(x, y) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(mse(x, y) == mse(y, x));
    CHECK(psnr(x, y) == doctest::Approx(10.0 * std::log10(1.0 / mse(x, y))).epsilon(1e-12));
}

TEST_CASE("l1_distance is the mean absolute difference") {
    PrecisionGuard g(Precision::f64);
    const Tensor a({4}, {0.0, 1.0, 2.0, 3.0});
    const Tensor b({4}, {1.0, 1.0, 0.0, 3.0});
    CHECK(l1_distance(a, b) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(l1_distance(a, b) == l1_distance(b, a));
}

TEST_CASE("ssim gradient matches finite differences") {
    PrecisionGuard g(Precision::f64);
    Rng rng(36);
    Tensor x({2, 12 * 10});
    for (auto& v : x.data) v = rng.uniform(0.1, 0.9);
    Tensor y({2, 12 * 10});
    for (auto& v : y.data) v = rng.uniform(0.1, 0.9);
    CHECK(test_support::check_gradient(
              [&](const Var& v) { return ssim_graph(v, constant(y), 12, 10); }, x) < 1e-4);
}
