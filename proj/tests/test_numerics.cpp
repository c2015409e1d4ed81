/*
 *  Copyright 2026 The uclab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include "oracles.hpp"
#include "uclab/numerics.hpp"
#include "uclab/random.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <numbers>

using namespace uclab;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, const RngStream& s)
{
    return Matrix(r, c, sample_gaussian(s, r * c, 1.0));
}

} // namespace

TEST_SUITE("numerics") {

TEST_CASE("spectral norm of small hand cases")
{
    CHECK(spectral_norm(Matrix{{3, 0}, {0, -5}}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix{{2}}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix(3, 4, 0.0)) == 0.0);
    // top singular vector (1, -1) is orthogonal to the ones start
    CHECK(spectral_norm(Matrix{{1, -1}, {-1, 1}}) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(spectral_norm(Matrix{{1, 2, 3}}) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-12));
    CHECK_THROWS_AS(spectral_norm(Matrix{}), std::invalid_argument);
    CHECK_THROWS_AS(spectral_norm(Matrix{{1}}, 0.0), std::invalid_argument);
}

TEST_CASE("spectral norm matches the Jacobi SVD oracle")
{
    const RngStream root{2024, 1};
    for (std::uint64_t i = 0; i < 40; ++i) {
        RandomEngine shape(root.derive(1000 + i));
        const auto r = 1 + shape.uniform_index(30);
        const auto c = 1 + shape.uniform_index(30);
        const Matrix m = random_matrix(r, c, root.derive(i));
        CHECK(std::abs(spectral_norm(m) - oracle::top_singular_value(m)) <= 1e-6);
    }
}

TEST_CASE("spectral norm reports non-convergence with its estimate")
{
    const Matrix m = random_matrix(20, 20, RngStream{9, 9});
    try {
        spectral_norm(m, 1e-9, 2);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_estimate() > 0.0);
        CHECK(e.best_estimate() <= oracle::top_singular_value(m) * (1 + 1e-12));
    }
}

TEST_CASE("spectral norm is absolutely homogeneous and transpose invariant")
{
    const Matrix m = random_matrix(7, 4, RngStream{10, 0});
    const double s = spectral_norm(m);
    CHECK(spectral_norm(m * -3.0) == doctest::Approx(3.0 * s).epsilon(1e-8));
    CHECK(spectral_norm(m.transposed()) == doctest::Approx(s).epsilon(1e-8));
    CHECK(s <= frobenius_norm(m) * (1 + 1e-12));
}

TEST_CASE("frobenius and (2,1) norms")
{
    const Matrix m{{3, 0}, {4, 1}};
    CHECK(frobenius_norm(m) == doctest::Approx(std::sqrt(26.0)));
    CHECK(norm21(m) == doctest::Approx(6.0));
    CHECK(norm21(Matrix{{1, 1, 1}}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(norm21(Matrix{}), std::invalid_argument);
}

TEST_CASE("logsumexp analytic cases")
{
    const std::vector<double> two_zeros{0.0, 0.0};
    CHECK(std::abs(logsumexp(two_zeros) - std::numbers::ln2) <= 1e-12);
    const std::vector<double> big{1000.0, 1000.0};
    CHECK(std::abs(logsumexp(big) - (1000.0 + std::numbers::ln2)) <= 1e-12);
    const std::vector<double> small{-1000.0, -1000.0, -1000.0};
    CHECK(std::abs(logsumexp(small) - (-1000.0 + std::log(3.0))) <= 1e-12);
    const std::vector<double> mixed{0.0, std::log(3.0)};
    CHECK(std::abs(logsumexp(mixed) - std::log(4.0)) <= 1e-12);
    const std::vector<double> one{-7.25};
    CHECK(logsumexp(one) == -7.25);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> neg_inf{-inf, -inf};
    CHECK(logsumexp(neg_inf) == -inf);
    const std::vector<double> with_neg_inf{-inf, 2.0};
    CHECK(logsumexp(with_neg_inf) == 2.0);
    CHECK_THROWS_AS(logsumexp(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("logsumexp agrees with a long-double oracle where that cannot overflow")
{
    RandomEngine e(RngStream{11, 0});
    for (int t = 0; t < 50; ++t) {
        std::vector<double> xs(1 + e.uniform_index(20));
        for (double& x : xs) {
            x = 20.0 * e.normal();
        }
        CHECK(std::abs(logsumexp(xs) - oracle::naive_logsumexp(xs)) <= 1e-12 * std::max(1.0, std::abs(logsumexp(xs))));
    }
}

TEST_CASE("logsumexp shift property")
{
    RandomEngine e(RngStream{12, 0});
    for (int t = 0; t < 20; ++t) {
        std::vector<double> xs(5);
        for (double& x : xs) {
            x = e.normal();
        }
        auto shifted = xs;
        for (double& x : shifted) {
            x += 700.0;
        }
        CHECK(logsumexp(shifted) == doctest::Approx(logsumexp(xs) + 700.0).epsilon(1e-14));
        CHECK(logsumexp(xs) >= *std::max_element(xs.begin(), xs.end()));
    }
}

TEST_CASE("signed_log_diff")
{
    const auto a = signed_log_diff(std::log(5.0), std::log(3.0));
    CHECK(a.sign == 1);
    CHECK(a.log_magnitude == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const auto b = signed_log_diff(std::log(3.0), std::log(5.0));
    CHECK(b.sign == -1);
    CHECK(b.log_magnitude == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const auto c = signed_log_diff(800.0, 800.0);
    CHECK(c.sign == 0);
    CHECK(c.log_magnitude == -std::numeric_limits<double>::infinity());
    const auto d = signed_log_diff(1000.0, 999.0);
    CHECK(d.sign == 1);
    CHECK(d.log_magnitude == doctest::Approx(1000.0 + std::log1p(-std::exp(-1.0))).epsilon(1e-14));
    const auto e = signed_log_diff(5.0, -std::numeric_limits<double>::infinity());
    CHECK(e.sign == 1);
    CHECK(e.log_magnitude == 5.0);
}

TEST_CASE("fit_loglog_slope recovers power laws exactly")
{
    for (double a : {-0.43, 0.0, 0.5, 0.68, 2.0}) {
        std::vector<std::pair<double, double>> pts;
        for (int k = 6; k <= 12; ++k) {
            const double m = std::ldexp(1.0, k);
            pts.emplace_back(m, 3.5 * std::pow(m, a));
        }
        const auto fit = fit_loglog_slope(pts);
        CHECK(std::abs(fit.exponent - a) <= 1e-10);
        CHECK(std::abs(fit.intercept - std::log(3.5)) <= 1e-10);
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fit_loglog_slope preconditions and r squared")
{
    const std::vector<std::pair<double, double>> one{{2.0, 3.0}};
    CHECK_THROWS_AS(fit_loglog_slope(one), std::invalid_argument);
    const std::vector<std::pair<double, double>> nonpos{{1.0, 1.0}, {2.0, 0.0}};
    CHECK_THROWS_AS(fit_loglog_slope(nonpos), std::invalid_argument);
    const std::vector<std::pair<double, double>> same_m{{2.0, 1.0}, {2.0, 3.0}};
    CHECK_THROWS_AS(fit_loglog_slope(same_m), std::invalid_argument);
    const std::vector<std::pair<double, double>> noisy{{1, 1}, {2, 3}, {4, 2}, {8, 9}};
    const auto fit = fit_loglog_slope(noisy);
    CHECK(fit.r_squared > 0.0);
    CHECK(fit.r_squared < 1.0);
}

}
