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

#include "uclab/losses.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

using namespace uclab;

TEST_SUITE("losses") {

TEST_CASE("margin")
{
    CHECK(margin(std::vector<double>{3, 1}, 0) == 2.0);
    CHECK(margin(std::vector<double>{1, 1}, 0) == 0.0);
    CHECK(margin(std::vector<double>{0.2, 5.0, -1}, 1) == doctest::Approx(4.8).epsilon(1e-15));
    CHECK_THROWS_AS(margin(std::vector<double>{1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(margin(std::vector<double>{1, 2}, 2), std::invalid_argument);
}

TEST_CASE("ramp loss")
{
    CHECK(ramp_loss(0.5, +1, 1.0) == 0.5);
    CHECK(ramp_loss(-0.3, +1, 1.0) == 1.0);
    CHECK(ramp_loss(2.0, +1, 1.0) == 0.0);
    CHECK(ramp_loss(0.0, -1, 1.0) == 1.0);
    CHECK(ramp_loss(-0.25, -1, 1.0) == 0.75);
    CHECK(ramp_loss(1e-9, +1, 0.0) == 0.0);
    CHECK(ramp_loss(0.0, +1, 0.0) == 1.0);
}

TEST_CASE("strict and zero-one losses")
{
    CHECK(strict_loss(2.0, +1, 1.0) == 0.0);
    CHECK(strict_loss(0.5, +1, 1.0) == 1.0);
    CHECK(strict_loss(0.0, +1, 0.0) == 0.0);
    CHECK(strict_loss(1.0, +1, 1.0) == 0.0);
    CHECK(zero_one_loss(0.0, +1) == 1.0);
    CHECK(zero_one_loss(0.1, +1) == 0.0);
    CHECK(zero_one_loss(0.1, -1) == 1.0);
    CHECK_THROWS_AS(LossKind::ramp(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(LossKind::strict(std::nan("")), std::invalid_argument);
}

TEST_CASE("ordering: zero-one <= ramp <= strict")
{
    RandomEngine e(RngStream{3, 3});
    for (int i = 0; i < 2000; ++i) {
        const double out = 3.0 * e.normal();
        const int y = e.sign();
        const double gamma = e.uniform() * 2.0;
        const double z = zero_one_loss(out, y);
        const double r = ramp_loss(out, y, gamma);
        const double s = strict_loss(out, y, gamma);
        CHECK(z <= r);
        CHECK(r <= s);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("Dataset validation")
{
    Dataset d(2);
    d.add({{1.0, 2.0}, 1});
    CHECK(d.size() == 1);
    CHECK_THROWS_AS(d.add({{1.0}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(d.add({{1.0, std::numeric_limits<double>::infinity()}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(d.add({{std::nan(""), 0.0}, 1}), std::invalid_argument);
    CHECK(d.size() == 1);
}

TEST_CASE("empirical loss")
{
    Dataset d(1, {{{1.0}, 1}, {{2.0}, -1}, {{3.0}, 1}});
    const Predictor zero = [](std::span<const double>) { return 0.0; };
    CHECK(empirical_loss(zero, d, LossKind::ramp(1.0)) == 1.0);
    const Predictor perfect = [&](std::span<const double> x) {
        return x[0] == 2.0 ? -5.0 : 5.0;
    };
    CHECK(empirical_loss(perfect, d, LossKind::ramp(1.0)) == 0.0);
    // losses 1, 0, 0.5
    const Predictor mixed = [](std::span<const double> x) {
        return x[0] == 1.0 ? -1.0 : (x[0] == 2.0 ? -3.0 : 0.5);
    };
    CHECK(empirical_loss(mixed, d, LossKind::ramp(1.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(empirical_loss(zero, Dataset(1), LossKind::zero_one()), std::invalid_argument);
}

TEST_CASE("Monte Carlo expected loss")
{
    const ExampleSampler sampler = [](const RngStream& s) {
        RandomEngine e(s);
        return LabeledExample{{e.normal()}, e.sign()};
    };
    const Predictor undecided = [](std::span<const double>) { return 0.0; };
    const auto always_wrong = mc_expected_loss(undecided, sampler, 1000, LossKind::zero_one(), RngStream{1, 0});
    CHECK(always_wrong.estimate == 1.0);
    CHECK(always_wrong.std_err == 0.0);

    const ExampleSampler positive = [](const RngStream& s) {
        RandomEngine e(s);
        return LabeledExample{{e.normal()}, 1};
    };
    const Predictor confident = [](std::span<const double>) { return 10.0; };
    const auto always_right = mc_expected_loss(confident, positive, 1000, LossKind::ramp(1.0), RngStream{1, 0});
    CHECK(always_right.estimate == 0.0);
    CHECK(always_right.std_err == 0.0);

    // sign of an independent coordinate: a fair coin
    const Predictor coin = [](std::span<const double> x) { return x[0]; };
    const auto fair = mc_expected_loss(coin, sampler, 10000, LossKind::zero_one(), RngStream{2, 0});
    CHECK(std::abs(fair.estimate - 0.5) < 0.02);
    CHECK(fair.std_err == doctest::Approx(0.005).epsilon(0.01));

    const auto again = mc_expected_loss(coin, sampler, 10000, LossKind::zero_one(), RngStream{2, 0});
    CHECK(again.estimate == fair.estimate);
}

TEST_CASE("mean and standard error")
{
    const std::vector<double> v{1, 2, 3, 4};
    const auto r = mean_and_std_err(v);
    CHECK(r.estimate == 2.5);
    CHECK(r.std_err == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
    const std::vector<double> one{7};
    CHECK(mean_and_std_err(one).estimate == 7.0);
    CHECK(mean_and_std_err(one).std_err == 0.0);
}

}
