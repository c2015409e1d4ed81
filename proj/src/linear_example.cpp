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

#include "uclab/linear_example.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <string>

namespace uclab::linear {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;

void negate_noise_in_place(LabeledExample& ex, std::size_t K)
{
    for (std::size_t j = K; j < ex.x.size(); ++j) {
        ex.x[j] = -ex.x[j];
    }
}

void check_layout(const Dataset& data, const LinearTaskConfig& cfg, const char* who)
{
    if (data.dim() != cfg.input_dim()) {
        throw std::invalid_argument(std::string(who) + ": dataset dim "
                                    + std::to_string(data.dim()) + " does not match K + D = "
                                    + std::to_string(cfg.input_dim()));
    }
}

} // namespace

TheoremConstants TheoremConstants::linear_proof()
{
    return {1.0 / 32.0, 0.5, 1.5, std::sqrt(2.0)};
}

TheoremConstants TheoremConstants::lemma_section()
{
    return {1.0 / 2048.0, std::sqrt(15.0 / 16.0), std::sqrt(17.0 / 16.0), std::sqrt(2.0)};
}

void TheoremConstants::validate() const
{
    if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0 && c4 > 0.0)) {
        throw std::invalid_argument("TheoremConstants: all constants must be positive");
    }
}

LinearTaskConfig LinearTaskConfig::make(std::size_t m, std::size_t D, double epsilon,
                                        double delta, std::size_t K)
{
    LinearTaskConfig cfg;
    cfg.K = K;
    cfg.D = D;
    cfg.m = m;
    cfg.u.assign(K, 0.0);
    if (K > 0 && m > 0) {
        cfg.u[0] = 1.0 / std::sqrt(static_cast<double>(m));
    }
    cfg.noise_variance = D == 0 ? 0.0 : 32.0 / static_cast<double>(D);
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.validate();
    return cfg;
}

void LinearTaskConfig::validate() const
{
    if (K < 1) {
        throw std::invalid_argument("LinearTaskConfig: K must be >= 1");
    }
    if (m < 1) {
        throw std::invalid_argument("LinearTaskConfig: m must be >= 1");
    }
    if (u.size() != K) {
        throw std::invalid_argument("LinearTaskConfig: u must have length K");
    }
    const double target = 1.0 / std::sqrt(static_cast<double>(m));
    if (std::abs(norm2(u) - target) > 1e-9) {
        throw std::invalid_argument("LinearTaskConfig: ||u|| must equal 1/sqrt(m)");
    }
    const double expected_var = D == 0 ? 0.0 : 32.0 / static_cast<double>(D);
    if (noise_variance != expected_var) {
        throw std::invalid_argument("LinearTaskConfig: noise variance must be 32/D");
    }
}

double LinearParams::predict(std::span<const double> x) const
{
    if (x.size() != w1.size() + w2.size()) {
        throw std::invalid_argument("LinearParams::predict: input has wrong length");
    }
    return dot(w1, x.first(w1.size())) + dot(w2, x.subspan(w1.size()));
}

double LinearParams::norm() const { return std::sqrt(squared_norm(w1) + squared_norm(w2)); }

DimensionRequirement dimension_requirement(std::size_t m, double epsilon, double delta,
                                           const TheoremConstants& c)
{
    if (!(delta > 0.0 && delta < 0.25)) {
        throw std::invalid_argument("min_dimension: delta must lie in (0, 1/4)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("min_dimension: epsilon must be positive");
    }
    if (m < 1) {
        throw std::invalid_argument("min_dimension: m must be >= 1");
    }
    c.validate();
    const auto md = static_cast<double>(m);
    const double log_term = std::log(6.0 * md / delta);
    const double ratio = 4.0 * c.c4 * c.c3 / (c.c2 * c.c2);
    const double k = ratio * ratio;

    DimensionRequirement req;
    req.from_chi_square = log_term / c.c1;
    req.from_train_margin = md * k * log_term;
    req.from_test_error = md * k * 2.0 * std::log(2.0 / epsilon);
    const double need = std::max({req.from_chi_square, req.from_train_margin,
                                  req.from_test_error, 0.0});
    req.D = static_cast<std::size_t>(std::ceil(need));
    return req;
}

std::size_t min_dimension(std::size_t m, double epsilon, double delta, const TheoremConstants& c)
{
    return dimension_requirement(m, epsilon, delta, c).D;
}

std::size_t empirical_dimension(std::size_t m)
{
    const auto md = static_cast<double>(m);
    return static_cast<std::size_t>(std::ceil(20.0 * md * std::log(std::max(md, 2.0))));
}

LabeledExample sample_example(const LinearTaskConfig& cfg, const RngStream& rng)
{
    RandomEngine engine(rng);
    LabeledExample ex;
    ex.y = engine.sign();
    ex.x.resize(cfg.input_dim());
    for (std::size_t k = 0; k < cfg.K; ++k) {
        ex.x[k] = 2.0 * ex.y * cfg.u[k];
    }
    const double sd = std::sqrt(cfg.noise_variance);
    for (std::size_t j = cfg.K; j < ex.x.size(); ++j) {
        ex.x[j] = sd * engine.normal();
    }
    return ex;
}

Dataset sample_dataset(const LinearTaskConfig& cfg, const RngStream& rng)
{
    cfg.validate();
    Dataset data(cfg.input_dim());
    data.reserve(cfg.m);
    for (std::size_t i = 0; i < cfg.m; ++i) {
        data.add(sample_example(cfg, rng.derive(i)));
    }
    return data;
}

LinearParams train_closed_form(const Dataset& data, const LinearTaskConfig& cfg)
{
    check_layout(data, cfg, "train_closed_form");
    LinearParams p{Vector(cfg.K, 0.0), Vector(cfg.D, 0.0)};
    for (const auto& ex : data) {
        if (ex.y != 1 && ex.y != -1) {
            throw std::invalid_argument("train_closed_form: labels must be +-1");
        }
        for (std::size_t k = 0; k < cfg.K; ++k) {
            p.w1[k] += ex.y * ex.x[k];
        }
        for (std::size_t j = 0; j < cfg.D; ++j) {
            p.w2[j] += ex.y * ex.x[cfg.K + j];
        }
    }
    return p;
}

Dataset noise_negate(const Dataset& data, const LinearTaskConfig& cfg)
{
    check_layout(data, cfg, "noise_negate");
    Dataset out(data.dim());
    out.reserve(data.size());
    for (LabeledExample ex : data) {
        negate_noise_in_place(ex, cfg.K);
        out.add(std::move(ex));
    }
    return out;
}

namespace {

// Output on x and on its noise-negated copy: negating x2 flips the sign of
// w2 . x2 exactly, so both come from one pair of dot products.
std::pair<double, double> split_outputs(const LinearParams& p, std::span<const double> x)
{
    const double signal = dot(p.w1, x.first(p.w1.size()));
    const double noise = dot(p.w2, x.subspan(p.w1.size()));
    return {signal + noise, signal - noise};
}

} // namespace

TrialReport run_trial(const LinearTaskConfig& cfg, std::size_t n_test, double gamma,
                      const RngStream& rng, const TrialOptions& options)
{
    cfg.validate();
    if (n_test < 1000) {
        throw std::invalid_argument("run_trial: n_test must be >= 1000");
    }
    const LossKind loss = LossKind::ramp(gamma);
    const RngStream train_rng = rng.derive(kTrainStream);

    const bool stream = options.path == TrialOptions::Path::streaming
                        || (options.path == TrialOptions::Path::automatic
                            && cfg.m * cfg.input_dim() > options.materialize_limit);

    // Margins y*h on S and on the noise-negated S'.
    std::vector<double> train_out(cfg.m);
    std::vector<double> bad_out(cfg.m);
    std::vector<int> labels(cfg.m);
    LinearParams params;

    if (!stream) {
        const Dataset train = sample_dataset(cfg, train_rng);
        params = train_closed_form(train, cfg);
        for (std::size_t i = 0; i < cfg.m; ++i) {
            labels[i] = train[i].y;
            std::tie(train_out[i], bad_out[i]) = split_outputs(params, train[i].x);
        }
    } else {
        // Two passes over regenerated examples keep memory at O(K + D).
        params = LinearParams{Vector(cfg.K, 0.0), Vector(cfg.D, 0.0)};
        for (std::size_t i = 0; i < cfg.m; ++i) {
            const LabeledExample ex = sample_example(cfg, train_rng.derive(i));
            for (std::size_t k = 0; k < cfg.K; ++k) {
                params.w1[k] += ex.y * ex.x[k];
            }
            for (std::size_t j = 0; j < cfg.D; ++j) {
                params.w2[j] += ex.y * ex.x[cfg.K + j];
            }
        }
        for (std::size_t i = 0; i < cfg.m; ++i) {
            const LabeledExample ex = sample_example(cfg, train_rng.derive(i));
            labels[i] = ex.y;
            std::tie(train_out[i], bad_out[i]) = split_outputs(params, ex.x);
        }
    }

    TrialReport report;
    report.experiment = "linear";
    report.m = cfg.m;
    report.input_dim = cfg.input_dim();
    report.theorem_regime = cfg.theorem_regime;
    report.gamma = gamma;

    double min_train_margin = std::numeric_limits<double>::infinity();
    double max_bad_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.m; ++i) {
        report.train_loss += evaluate_loss(loss, train_out[i], labels[i]);
        report.bad_set_loss += evaluate_loss(loss, bad_out[i], labels[i]);
        report.train_error += zero_one_loss(train_out[i], labels[i]);
        report.bad_set_error += zero_one_loss(bad_out[i], labels[i]);
        min_train_margin = std::min(min_train_margin, labels[i] * train_out[i]);
        max_bad_margin = std::max(max_bad_margin, labels[i] * bad_out[i]);
    }
    const auto md = static_cast<double>(cfg.m);
    report.train_loss /= md;
    report.bad_set_loss /= md;
    report.train_error /= md;
    report.bad_set_error /= md;

    const bool projected
        = options.test_sampler == TrialOptions::TestSampler::projected
          || (options.test_sampler == TrialOptions::TestSampler::automatic
              && cfg.D * n_test > options.full_test_limit);

    // Test outputs y*h(z) for n_test fresh draws.
    const RngStream test_rng = rng.derive(kTestStream);
    std::vector<double> test_losses(n_test);
    std::vector<double> test_errors(n_test);
    const double w2_norm = norm2(params.w2);
    const double noise_sd = std::sqrt(cfg.noise_variance);
    for (std::size_t t = 0; t < n_test; ++t) {
        double out = 0.0;
        int y = 0;
        if (projected) {
            // z2 . w2 ~ N(0, (32/D) ||w2||^2) exactly, by rotation invariance.
            RandomEngine engine(test_rng.derive(t));
            y = engine.sign();
            double signal = 0.0;
            for (std::size_t k = 0; k < cfg.K; ++k) {
                signal += params.w1[k] * (2.0 * y * cfg.u[k]);
            }
            out = signal + w2_norm * noise_sd * engine.normal();
        } else {
            const LabeledExample ex = sample_example(cfg, test_rng.derive(t));
            y = ex.y;
            out = params.predict(ex.x);
        }
        test_losses[t] = evaluate_loss(loss, out, y);
        test_errors[t] = zero_one_loss(out, y);
    }
    const MonteCarloEstimate test = mean_and_std_err(test_losses);
    const MonteCarloEstimate test01 = mean_and_std_err(test_errors);
    report.test_loss = test.estimate;
    report.test_std_err = test.std_err;
    report.test_error = test01.estimate;
    report.test_error_std_err = test01.std_err;
    report.witness = std::abs(report.test_loss - report.bad_set_loss);

    report.set_extra("weight_norm", params.norm());
    report.set_extra("w1_norm", norm2(params.w1));
    report.set_extra("w2_norm", w2_norm);
    report.set_extra("min_train_margin", min_train_margin);
    report.set_extra("max_bad_margin", max_bad_margin);
    report.set_extra("streamed", stream ? 1.0 : 0.0);
    report.set_extra("projected_test", projected ? 1.0 : 0.0);
    return report;
}

} // namespace uclab::linear
