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

#include "uclab/bounds_audit.hpp"
#include "uclab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace uclab::audit {

namespace {

double sq(double v) { return v * v; }

double sum_squared_diff(const Matrix& a, const Matrix& b)
{
    double s = 0.0;
    const auto ea = a.entries();
    const auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) {
        s += sq(ea[i] - eb[i]);
    }
    return s;
}

} // namespace

BoundReport compute_bounds(std::span<const LayerView> layers, double B, double gamma, std::size_t m,
                           std::size_t h)
{
    if (!(gamma > 0.0) || !(B > 0.0) || m == 0 || h == 0) {
        throw std::invalid_argument("compute_bounds: need gamma > 0, B > 0, m >= 1, h >= 1");
    }
    if (layers.empty()) {
        throw std::invalid_argument("compute_bounds: no layers");
    }
    BoundReport r;
    r.gamma_used = gamma;
    r.B_used = B;
    r.m = m;
    const auto d = static_cast<double>(layers.size());
    double origin_sq = 0.0;
    double ney_sum = 0.0;
    double bart_sum = 0.0;
    r.spectral_product = 1.0;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& w = layers[k].weight;
        const auto& z = layers[k].init;
        if (!w.same_shape(z)) {
            throw std::invalid_argument("compute_bounds: layer " + std::to_string(k)
                                        + " snapshot shape mismatch");
        }
        const double spec = spectral_norm(w);
        if (spec == 0.0) {
            throw std::invalid_argument("compute_bounds: layer " + std::to_string(k)
                                        + " has zero spectral norm");
        }
        const Matrix disp = w - z;
        const double dist = frobenius_norm(disp);
        const double n21 = norm21(disp);
        const double fro = frobenius_norm(w);
        r.spectral_norms.push_back(spec);
        r.frobenius_norms.push_back(fro);
        r.dist_from_init_per_layer.push_back(dist);
        r.norm21_values.push_back(n21);
        r.spectral_product *= spec;
        origin_sq += fro * fro;
        ney_sum += sq(dist / spec);
        bart_sum += std::cbrt(sq(n21 / spec));
    }
    r.dist_from_origin = std::sqrt(origin_sq);
    const double sqrt_h = std::sqrt(static_cast<double>(h));
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    const double prefactor = B * d * sqrt_h / (gamma * sqrt_m) * r.spectral_product;
    r.bound_neyshabur18 = prefactor * std::sqrt(ney_sum);
    r.bound_bartlett17 = prefactor / (d * sqrt_h) * std::pow(bart_sum, 1.5);
    if (layers.size() == 2) {
        const double z1_spec = spectral_norm(layers[0].init);
        r.bound_two_layer19 = r.frobenius_norms[1] * (r.dist_from_init_per_layer[0] + z1_spec)
                                  / (gamma * sqrt_m)
                              + sqrt_h / sqrt_m;
    }
    return r;
}

BoundReport compute_bounds(const relu::TwoLayerNet& net, double B, double gamma, std::size_t m)
{
    const LayerView layers[] = {{net.w1(), net.z1()}, {net.w2(), net.z2()}};
    return compute_bounds(layers, B, gamma, m, net.width());
}

double input_norm_bound(const relu::TwoLayerNet& net, const Dataset& data)
{
    const double extra = net.has_bias() ? 1.0 : 0.0;
    double best = 0.0;
    for (const auto& e : data) {
        best = std::max(best, std::sqrt(squared_norm(e.x) + extra));
    }
    return best;
}

TrajectoryDiagnostics trajectory_diagnostics(const relu::TwoLayerNet& a, const relu::TwoLayerNet& b)
{
    if (!a.w1().same_shape(b.w1()) || !a.w2().same_shape(b.w2())) {
        throw std::invalid_argument("trajectory_diagnostics: shape mismatch");
    }
    TrajectoryDiagnostics t;
    t.dist_between_runs = std::sqrt(sum_squared_diff(a.w1(), b.w1()) + sum_squared_diff(a.w2(), b.w2()));
    t.spectral_product_a = spectral_norm(a.w1()) * spectral_norm(a.w2());
    t.dist_init_a = a.distance_from_init();
    return t;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile: p must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? values[lo] : values[lo] + frac * (values[hi] - values[lo]);
}

MarginStats margin_stats(std::span<const double> train_margins, std::span<const double> test_margins)
{
    if (train_margins.empty() || test_margins.empty()) {
        throw std::invalid_argument("margin_stats: empty margin list");
    }
    const std::vector<double> train(train_margins.begin(), train_margins.end());
    MarginStats s;
    s.percentile_1 = quantile(train, 0.01);
    s.median = quantile(train, 0.5);
    s.mean_train = mean_and_std_err(train_margins).estimate;
    s.mean_test = mean_and_std_err(test_margins).estimate;
    s.pseudo_overfit_gap = s.mean_train - s.mean_test;
    return s;
}

MarginStats margin_stats(const relu::TwoLayerNet& net, const Dataset& train, const Dataset& test)
{
    return margin_stats(relu::margins(net, train), relu::margins(net, test));
}

EpsReport estimate_eps(std::span<const TrialOutcome> trials, double delta)
{
    if (trials.size() < 10) {
        throw std::invalid_argument("estimate_eps: need at least 10 trials, got "
                                    + std::to_string(trials.size()));
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("estimate_eps: delta must lie in [0, 1)");
    }
    const auto n = trials.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    auto gap = [&](std::size_t i) { return trials[i].test_loss - trials[i].train_loss; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gap(a) < gap(b); });

    EpsReport r;
    const auto rank = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(n)));
    r.eps_gen_estimate = gap(order[std::clamp<std::size_t>(rank, 1, n) - 1]);

    const auto dropped = static_cast<std::size_t>(std::floor(delta * static_cast<double>(n)));
    r.trials_used = n - dropped;
    r.eps_unif_alg_lower = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.trials_used; ++k) {
        const auto& t = trials[order[k]];
        r.eps_unif_alg_lower = std::min(r.eps_unif_alg_lower, std::abs(t.test_loss - t.bad_set_loss));
    }
    for (const auto& t : trials) {
        r.std_err = std::max(r.std_err, t.test_std_err);
    }
    return r;
}

EpsReport estimate_eps(std::span<const TrialReport> trials, double delta)
{
    std::vector<TrialOutcome> outcomes;
    outcomes.reserve(trials.size());
    for (const auto& t : trials) {
        outcomes.push_back({t.test_loss, t.train_loss, t.bad_set_loss, t.test_std_err});
    }
    return estimate_eps(outcomes, delta);
}

PacBayesLowerBounds pb_det_lower_bounds(double eps_unif_alg, double eps_gen, double eps_hat)
{
    const double a = std::exp(-1.5);
    const double b = std::exp(1.5);
    return {a * eps_unif_alg - (1.0 - a) * (eps_hat + eps_gen),
            eps_unif_alg - (b - 1.0) * (eps_hat + eps_gen)};
}

Classifier abstract_memorizer(Classifier h_star, const Dataset& train)
{
    std::set<std::vector<double>> negated;
    for (const auto& e : train) {
        std::vector<double> x(e.x.size());
        std::transform(e.x.begin(), e.x.end(), x.begin(), [](double v) { return -v; });
        negated.insert(std::move(x));
    }
    return [h_star = std::move(h_star), negated = std::move(negated)](std::span<const double> x) {
        const int base = h_star(x);
        return negated.contains(std::vector<double>(x.begin(), x.end())) ? -base : base;
    };
}

TrialReport run_abstract_trial(std::size_t D, std::size_t m, std::size_t n_test, const RngStream& rng)
{
    if (D == 0 || m == 0 || n_test == 0) {
        throw std::invalid_argument("run_abstract_trial: D, m and n_test must be >= 1");
    }
    const Classifier h_star = [](std::span<const double> x) { return x[0] >= 0.0 ? 1 : -1; };
    auto draw = [&](const RngStream& s) {
        auto x = sample_gaussian(s, D, 1.0);
        const int y = h_star(x);
        return LabeledExample{std::move(x), y};
    };

    Dataset train(D);
    Dataset bad(D);
    const auto train_rng = rng.derive(1);
    for (std::size_t i = 0; i < m; ++i) {
        auto e = draw(train_rng.derive(i));
        std::vector<double> neg(D);
        std::transform(e.x.begin(), e.x.end(), neg.begin(), [](double v) { return -v; });
        const int y = h_star(neg);
        bad.add({std::move(neg), y});
        train.add(std::move(e));
    }
    const auto h_s = abstract_memorizer(h_star, train);
    const Predictor predict = [&](std::span<const double> x) { return static_cast<double>(h_s(x)); };
    const auto zero_one = LossKind::zero_one();

    TrialReport r;
    r.experiment = "abstract";
    r.m = m;
    r.input_dim = D;
    r.theorem_regime = true;
    r.train_loss = r.train_error = empirical_loss(predict, train, zero_one);
    r.bad_set_loss = r.bad_set_error = empirical_loss(predict, bad, zero_one);
    const auto test = mc_expected_loss(predict, draw, n_test, zero_one, rng.derive(2));
    r.test_loss = r.test_error = test.estimate;
    r.test_std_err = r.test_error_std_err = test.std_err;
    r.witness = std::abs(r.test_loss - r.bad_set_loss);
    return r;
}

} // namespace uclab::audit
