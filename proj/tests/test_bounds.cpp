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
#include "uclab/bounds_audit.hpp"
#include "uclab/linear_example.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace uclab;
using namespace uclab::audit;

namespace {

relu::TwoLayerNet scalar_net(double w1, double w2)
{
    return relu::TwoLayerNet(Matrix(1, 1, w1), Matrix(2, 1, w2), false);
}

Matrix random_matrix(std::size_t r, std::size_t c, RandomEngine& e)
{
    Matrix m(r, c);
    for (auto& v : m.entries()) {
        v = e.normal();
    }
    return m;
}

double frob_diff(const Matrix& a, const Matrix& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a.entries()[i] - b.entries()[i]) * (a.entries()[i] - b.entries()[i]);
    }
    return std::sqrt(s);
}

double norm21_diff(const Matrix& a, const Matrix& b)
{
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double col = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            col += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
        }
        s += std::sqrt(col);
    }
    return s;
}

std::vector<TrialOutcome> constant_trials(std::size_t n, TrialOutcome t)
{
    return std::vector<TrialOutcome>(n, t);
}

} // namespace

TEST_SUITE("bounds") {

TEST_CASE("zero displacement gives zero distance bounds")
{
    const Matrix w(2, 2, 1.0);
    const LayerView layers[] = {{w, w}};
    const auto r = compute_bounds(layers, 1.0, 1.0, 1, 1);
    CHECK(r.bound_neyshabur18 == 0.0);
    CHECK(r.bound_bartlett17 == 0.0);
    CHECK_FALSE(r.bound_two_layer19.has_value());
}

TEST_CASE("single layer hand example")
{
    const Matrix w(1, 1, 2.0);
    const Matrix z(1, 1, 0.0);
    const LayerView layers[] = {{w, z}};
    const auto r = compute_bounds(layers, 1.0, 1.0, 1, 1);
    CHECK(r.bound_neyshabur18 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.bound_bartlett17 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.spectral_product == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two layer width-independent form")
{
    const Matrix w1(1, 1, 1.0);
    const Matrix w2(1, 1, 1.0);
    const Matrix z2(1, 1, 0.5);
    const LayerView layers[] = {{w1, w1}, {w2, z2}};
    const auto r = compute_bounds(layers, 1.0, 1.0, 1, 1);
    REQUIRE(r.bound_two_layer19.has_value());
    CHECK(*r.bound_two_layer19 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bounds agree with direct evaluation on small random nets")
{
    RandomEngine e(RngStream{20, 0});
    for (int t = 0; t < 12; ++t) {
        const std::size_t h = 1 + e.uniform_index(4);
        const std::size_t in = 1 + e.uniform_index(4);
        const std::size_t out = 1 + e.uniform_index(4);
        const Matrix w1 = random_matrix(h, in, e);
        const Matrix z1 = random_matrix(h, in, e);
        const Matrix w2 = random_matrix(out, h, e);
        const Matrix z2 = random_matrix(out, h, e);
        const double B = 0.5 + e.uniform();
        const double gamma = 0.5 + e.uniform();
        const std::size_t m = 1 + e.uniform_index(1000);
        const LayerView layers[] = {{w1, z1}, {w2, z2}};
        const auto r = compute_bounds(layers, B, gamma, m, h);

        const double s1 = oracle::top_singular_value(w1);
        const double s2 = oracle::top_singular_value(w2);
        const double f1 = frob_diff(w1, z1);
        const double f2 = frob_diff(w2, z2);
        const double d = 2.0;
        const double pre = B * d * std::sqrt(double(h)) / (gamma * std::sqrt(double(m))) * s1 * s2;
        const double ney = pre * std::sqrt(f1 * f1 / (s1 * s1) + f2 * f2 / (s2 * s2));
        const double inner = std::pow(norm21_diff(w1, z1) / s1, 2.0 / 3.0)
                             + std::pow(norm21_diff(w2, z2) / s2, 2.0 / 3.0);
        const double bart = pre / (d * std::sqrt(double(h))) * std::pow(inner, 1.5);
        const double two = frob_diff(w2, Matrix(out, h, 0.0)) * (f1 + oracle::top_singular_value(z1))
                               / (gamma * std::sqrt(double(m)))
                           + std::sqrt(double(h)) / std::sqrt(double(m));

        CHECK(r.bound_neyshabur18 == doctest::Approx(ney).epsilon(1e-8));
        CHECK(r.bound_bartlett17 == doctest::Approx(bart).epsilon(1e-8));
        CHECK(*r.bound_two_layer19 == doctest::Approx(two).epsilon(1e-8));
        CHECK(r.spectral_norms[0] == doctest::Approx(s1).epsilon(1e-9));
        CHECK(r.dist_from_init_per_layer[1] == doctest::Approx(f2).epsilon(1e-12));
        CHECK(r.norm21_values[0] == doctest::Approx(norm21_diff(w1, z1)).epsilon(1e-12));
    }
}

TEST_CASE("scaling the weights raises the spectral product")
{
    RandomEngine e(RngStream{21, 0});
    const Matrix z1 = random_matrix(4, 3, e);
    const Matrix z2 = random_matrix(2, 4, e);
    double previous = 0.0;
    for (double alpha : {1.0, 1.5, 2.0, 4.0}) {
        const Matrix w1 = z1 * alpha;
        const Matrix w2 = z2 * alpha;
        const LayerView layers[] = {{w1, z1}, {w2, z2}};
        const double p = compute_bounds(layers, 1.0, 1.0, 10, 4).spectral_product;
        CHECK(p > previous);
        previous = p;
    }
}

TEST_CASE("compute_bounds rejects bad input")
{
    const Matrix zero(2, 2, 0.0);
    const Matrix one(2, 2, 1.0);
    const LayerView zl[] = {{zero, one}};
    CHECK_THROWS_AS(compute_bounds(zl, 1.0, 1.0, 1, 1), std::invalid_argument);
    const LayerView ok[] = {{one, one}};
    CHECK_THROWS_AS(compute_bounds(ok, 1.0, 0.0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(compute_bounds(ok, 0.0, 1.0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(compute_bounds(ok, 1.0, 1.0, 0, 1), std::invalid_argument);
    const Matrix other(3, 2, 1.0);
    const LayerView mismatch[] = {{one, other}};
    CHECK_THROWS_AS(compute_bounds(mismatch, 1.0, 1.0, 1, 1), std::invalid_argument);
}

TEST_CASE("net overload matches the layer overload")
{
    auto net = relu::init_two_layer(5, 6, RngStream{22, 0}, 1.0, true);
    net.w1()(0, 0) += 0.3;
    const LayerView layers[] = {{net.w1(), net.z1()}, {net.w2(), net.z2()}};
    const auto a = compute_bounds(net, 2.0, 3.0, 50);
    const auto b = compute_bounds(layers, 2.0, 3.0, 50, 6);
    CHECK(a.bound_neyshabur18 == b.bound_neyshabur18);
    CHECK(a.bound_bartlett17 == b.bound_bartlett17);
    CHECK(*a.bound_two_layer19 == *b.bound_two_layer19);
    CHECK(a.dist_from_origin == doctest::Approx(std::sqrt(
        std::pow(frob_diff(net.w1(), Matrix(6, 6, 0.0)), 2) + std::pow(frob_diff(net.w2(), Matrix(2, 6, 0.0)), 2))));
}

TEST_CASE("input_norm_bound counts the bias coordinate")
{
    Dataset d(2, {{{3.0, 4.0}, 1}, {{1.0, 0.0}, -1}});
    const auto biased = relu::init_two_layer(2, 3, RngStream{}, 1.0, true);
    const auto plain = relu::init_two_layer(2, 3, RngStream{}, 1.0, false);
    CHECK(input_norm_bound(biased, d) == doctest::Approx(std::sqrt(26.0)));
    CHECK(input_norm_bound(plain, d) == 5.0);
}

TEST_CASE("trajectory diagnostics")
{
    const auto a = scalar_net(3.0, 1.0);
    const auto b = scalar_net(5.0, 1.0);
    CHECK(trajectory_diagnostics(a, b).dist_between_runs == doctest::Approx(2.0));
    CHECK(trajectory_diagnostics(a, a).dist_between_runs == 0.0);

    auto net = relu::init_two_layer(4, 5, RngStream{23, 0}, 1.0, true);
    const auto start = net;
    net.w2()(1, 2) += 0.7;
    net.w1()(0, 1) -= 0.2;
    const auto t = trajectory_diagnostics(net, start);
    CHECK(t.dist_between_runs == doctest::Approx(net.distance_from_init()).epsilon(1e-12));
    CHECK(t.dist_init_a == net.distance_from_init());
    CHECK(t.spectral_product_a == doctest::Approx(oracle::top_singular_value(net.w1())
                                                  * oracle::top_singular_value(net.w2())).epsilon(1e-9));
    const auto wider = relu::init_two_layer(4, 6, RngStream{}, 1.0, true);
    CHECK_THROWS_AS(trajectory_diagnostics(net, wider), std::invalid_argument);
}

TEST_CASE("quantile and margin statistics")
{
    const std::vector<double> ms{9.0, 1.0, 2.0};
    CHECK(quantile(ms, 0.5) == 2.0);
    CHECK(quantile(ms, 0.0) == 1.0);
    CHECK(quantile(ms, 1.0) == 9.0);
    CHECK(quantile(ms, 0.25) == doctest::Approx(1.5));
    const auto s = margin_stats(ms, ms);
    CHECK(s.median == 2.0);
    CHECK(s.pseudo_overfit_gap == 0.0);
    CHECK(s.percentile_1 <= s.median);
    CHECK(s.mean_train == doctest::Approx(4.0));
    CHECK_THROWS_AS(margin_stats(std::vector<double>{}, ms), std::invalid_argument);
    CHECK_THROWS_AS(quantile(ms, 1.5), std::invalid_argument);

    const relu::TwoLayerNet flat(Matrix(3, 2, 1.0), Matrix(2, 3, 0.5), false);
    Dataset d(2, {{{1.0, 2.0}, 1}, {{-1.0, 0.5}, -1}});
    const auto f = margin_stats(flat, d, d);
    CHECK(f.mean_train == 0.0);
    CHECK(f.pseudo_overfit_gap == 0.0);
}

TEST_CASE("estimate_eps on constructed inputs")
{
    const auto clean = constant_trials(20, {0.02, 0.0, 1.0, 0.001});
    const auto r = estimate_eps(clean, 0.1);
    CHECK(r.eps_gen_estimate == doctest::Approx(0.02));
    CHECK(r.eps_unif_alg_lower >= 0.98);
    CHECK(r.trials_used == 18);
    CHECK(r.std_err == 0.001);

    const auto no_witness = constant_trials(10, {0.3, 0.1, 0.3, 0.0});
    CHECK(estimate_eps(no_witness, 0.05).eps_unif_alg_lower == 0.0);
    CHECK(estimate_eps(no_witness, 0.0).trials_used == 10);

    // the worst-generalizing trial is dropped before the min is taken
    auto mixed = constant_trials(10, {0.0, 0.0, 1.0, 0.0});
    mixed[4] = {0.9, 0.0, 0.9, 0.0};
    const auto m = estimate_eps(mixed, 0.1);
    CHECK(m.eps_unif_alg_lower == 1.0);
    CHECK(m.eps_gen_estimate == 0.0);
    CHECK(estimate_eps(mixed, 0.0).eps_unif_alg_lower == 0.0);
    CHECK(estimate_eps(mixed, 0.0).eps_gen_estimate == 0.9);

    CHECK_THROWS_AS(estimate_eps(constant_trials(9, {}), 0.1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_eps(clean, 1.0), std::invalid_argument);
}

TEST_CASE("estimate_eps certifies a vacuous bound on the linear task")
{
    const std::size_t m = 8;
    const double eps = 0.1;
    const auto cfg = linear::LinearTaskConfig::make(m, linear::min_dimension(m, eps, eps), eps, eps);
    std::vector<TrialReport> trials;
    for (std::uint64_t s = 0; s < 10; ++s) {
        trials.push_back(linear::run_trial(cfg, 2000, 1.0, RngStream{24, s}));
    }
    const auto r = estimate_eps(trials, eps);
    CHECK(r.eps_unif_alg_lower >= 1.0 - r.eps_gen_estimate - 3.0 * r.std_err);
}

TEST_CASE("pb_det arithmetic")
{
    const double a = std::exp(-1.5);
    CHECK(pb_det_lower_bounds(1.0, 0.0, 0.0).type_a == doctest::Approx(0.22313016014842983).epsilon(1e-14));
    CHECK(std::abs(pb_det_lower_bounds(1.0, 0.0, 0.0).type_a - a) <= 1e-12);
    CHECK(pb_det_lower_bounds(0.0, 0.0, 0.0).type_a == 0.0);
    CHECK(pb_det_lower_bounds(0.0, 0.0, 0.0).type_b == 0.0);
    CHECK(pb_det_lower_bounds(0.95, 0.05, 0.0).type_a == doctest::Approx(0.17313016014842983).epsilon(1e-14));
    CHECK(pb_det_lower_bounds(1.0, 0.05, 0.0).type_b == doctest::Approx(0.82591554648309676).epsilon(1e-14));
    // negative certificates are reported raw
    CHECK(pb_det_lower_bounds(0.0, 0.5, 0.5).type_b < 0.0);

    const double ca[] = {a, -(1.0 - a), -(1.0 - a)};
    const double cb[] = {1.0, -(std::exp(1.5) - 1.0), -(std::exp(1.5) - 1.0)};
    const double base[] = {0.4, 0.1, 0.2};
    for (int arg = 0; arg < 3; ++arg) {
        for (double v : {0.0, 0.3, 0.9}) {
            double x[] = {base[0], base[1], base[2]};
            const auto at_base = pb_det_lower_bounds(x[0], x[1], x[2]);
            x[arg] = v;
            const auto moved = pb_det_lower_bounds(x[0], x[1], x[2]);
            CHECK(moved.type_a - at_base.type_a == doctest::Approx(ca[arg] * (v - base[arg])).epsilon(1e-12));
            CHECK(moved.type_b - at_base.type_b == doctest::Approx(cb[arg] * (v - base[arg])).epsilon(1e-12));
        }
    }
}

TEST_CASE("abstract memorizer")
{
    const Classifier h_star = [](std::span<const double> x) { return x[0] >= 0.0 ? 1 : -1; };
    Dataset train(2, {{{1.0, 2.0}, 1}, {{-0.5, 3.0}, -1}});
    const auto h = abstract_memorizer(h_star, train);
    const std::vector<double> fresh{0.7, -0.1};
    CHECK(h(fresh) == 1);
    const std::vector<double> neg0{-1.0, -2.0};
    const std::vector<double> neg1{0.5, -3.0};
    CHECK(h(neg0) == -h_star(neg0));
    CHECK(h(neg1) == -h_star(neg1));
    const std::vector<double> own{1.0, 2.0};
    CHECK(h(own) == 1);

    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto r = run_abstract_trial(20, 50, 20000, RngStream{25, s});
        CHECK(r.bad_set_error == 1.0);
        CHECK(r.test_error == 0.0);
        CHECK(r.train_error == 0.0);
        CHECK(r.witness == 1.0);
    }
    CHECK_THROWS_AS(run_abstract_trial(0, 5, 5, RngStream{}), std::invalid_argument);
}

}
