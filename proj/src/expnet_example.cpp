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

#include "uclab/expnet_example.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uclab::expnet {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;

std::size_t half_dim(const Dataset& data, const char* who)
{
    if (data.dim() % 2 != 0) {
        throw std::invalid_argument(std::string(who) + ": input dimension must be even");
    }
    return data.dim() / 2;
}

} // namespace

ExpTaskConfig ExpTaskConfig::make(std::size_t m, std::size_t D, double epsilon, double delta)
{
    ExpTaskConfig cfg;
    cfg.D = D;
    cfg.m = m;
    cfg.u.assign(D, 0.5);
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.validate();
    return cfg;
}

void ExpTaskConfig::validate() const
{
    if (D < 1 || m < 1) {
        throw std::invalid_argument("ExpTaskConfig: D and m must be >= 1");
    }
    if (u.size() != D) {
        throw std::invalid_argument("ExpTaskConfig: u must have length D");
    }
    if (std::abs(norm2(u) - std::sqrt(static_cast<double>(D)) / 2.0) > 1e-9) {
        throw std::invalid_argument("ExpTaskConfig: ||u|| must equal sqrt(D)/2");
    }
}

ExpNetModel::ExpNetModel(Dataset train_points) : points_(std::move(train_points))
{
    if (points_.empty()) {
        throw std::invalid_argument("ExpNetModel: no training points");
    }
    half_dim(points_, "ExpNetModel");
    for (const auto& ex : points_) {
        if (ex.y != 1 && ex.y != -1) {
            throw std::invalid_argument("ExpNetModel: labels must be +-1");
        }
    }
}

SignedLog predict_log_domain(const ExpNetModel& model, std::span<const double> z)
{
    if (z.size() != model.input_dim()) {
        throw std::invalid_argument("predict_log_domain: query has wrong dimension");
    }
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& ex : model.train_points()) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double v = z[j] + ex.x[j];
            s += v * v;
        }
        (ex.y > 0 ? pos : neg).push_back(0.25 * s);
    }
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    const double log_pos = pos.empty() ? neg_inf : logsumexp(pos);
    const double log_neg = neg.empty() ? neg_inf : logsumexp(neg);
    return signed_log_diff(log_pos, log_neg);
}

bool margin_at_least(const SignedLog& h, int y, double threshold)
{
    return h.sign * y > 0 && h.log_magnitude >= std::log(threshold);
}

ExpDimensionRequirement exp_dimension_requirement(std::size_t m, double epsilon, double delta,
                                                  const TheoremConstants& c)
{
    if (!(delta > 0.0 && delta < 0.25)) {
        throw std::invalid_argument("min_dimension_exp: delta must lie in (0, 1/4)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("min_dimension_exp: epsilon must be positive");
    }
    if (m < 1) {
        throw std::invalid_argument("min_dimension_exp: m must be >= 1");
    }
    c.validate();
    const auto md = static_cast<double>(m);
    const double spread = 16.0 * c.c3 * c.c4;
    const double k = std::max(1.0 / c.c2, spread * spread);

    ExpDimensionRequirement req;
    req.from_test_error = k * 2.0 * std::log(6.0 * md / epsilon);
    req.from_train_error = k * 2.0 * std::log(6.0 * md / delta);
    req.from_log_m = 6.0 * std::log(2.0 * md);
    req.min_samples = 8.0 * std::log(6.0 / delta);
    req.sample_condition_met = md > req.min_samples;
    const double need
        = std::max({req.from_test_error, req.from_train_error, req.from_log_m, 1.0});
    req.D = static_cast<std::size_t>(std::ceil(need));
    return req;
}

std::size_t min_dimension_exp(std::size_t m, double epsilon, double delta,
                              const TheoremConstants& c)
{
    const ExpDimensionRequirement req = exp_dimension_requirement(m, epsilon, delta, c);
    if (!req.sample_condition_met) {
        throw std::invalid_argument("min_dimension_exp: m = " + std::to_string(m)
                                    + " does not exceed 8 ln(6/delta) = "
                                    + std::to_string(req.min_samples));
    }
    return req.D;
}

LabeledExample sample_example_exp(const ExpTaskConfig& cfg, const RngStream& rng)
{
    RandomEngine engine(rng);
    LabeledExample ex;
    ex.y = engine.sign();
    ex.x.resize(cfg.input_dim());
    for (std::size_t j = 0; j < cfg.D; ++j) {
        ex.x[j] = ex.y * cfg.u[j];
    }
    for (std::size_t j = cfg.D; j < ex.x.size(); ++j) {
        ex.x[j] = engine.normal();
    }
    return ex;
}

Dataset sample_dataset_exp(const ExpTaskConfig& cfg, const RngStream& rng)
{
    cfg.validate();
    Dataset data(cfg.input_dim());
    data.reserve(cfg.m);
    for (std::size_t i = 0; i < cfg.m; ++i) {
        data.add(sample_example_exp(cfg, rng.derive(i)));
    }
    return data;
}

Dataset negate_all_but_noise(const Dataset& data)
{
    const std::size_t D = half_dim(data, "negate_all_but_noise");
    Dataset out(data.dim());
    out.reserve(data.size());
    for (LabeledExample ex : data) {
        for (std::size_t j = 0; j < D; ++j) {
            ex.x[j] = -ex.x[j];
        }
        ex.y = -ex.y;
        out.add(std::move(ex));
    }
    return out;
}

TrialReport run_trial_exp(const ExpTaskConfig& cfg, std::size_t n_test, const RngStream& rng)
{
    cfg.validate();
    if (n_test < 1) {
        throw std::invalid_argument("run_trial_exp: n_test must be >= 1");
    }
    const ExpNetModel model(sample_dataset_exp(cfg, rng.derive(kTrainStream)));
    const Dataset& train = model.train_points();
    const Dataset bad = negate_all_but_noise(train);

    TrialReport report;
    report.experiment = "expnet";
    report.m = cfg.m;
    report.input_dim = cfg.input_dim();
    report.theorem_regime = cfg.theorem_regime;
    report.gamma = 1.0;

    std::size_t non_finite = 0;
    auto check = [&non_finite](const SignedLog& h) {
        if (std::isnan(h.log_magnitude) || (h.sign != 0 && !std::isfinite(h.log_magnitude))) {
            ++non_finite;
        }
        return h;
    };

    std::size_t satisfied = 0;
    double min_log_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < train.size(); ++i) {
        const SignedLog h = check(predict_log_domain(model, train[i].x));
        if (margin_at_least(h, train[i].y, 1.0)) {
            ++satisfied;
        }
        if (h.sign * train[i].y <= 0) {
            report.train_error += 1.0;
            min_log_margin = -std::numeric_limits<double>::infinity();
        } else {
            min_log_margin = std::min(min_log_margin, h.log_magnitude);
        }

        const SignedLog hb = check(predict_log_domain(model, bad[i].x));
        if (hb.sign * bad[i].y <= 0) {
            report.bad_set_error += 1.0;
        }
        if (!margin_at_least(hb, bad[i].y, 1.0)) {
            report.bad_set_loss += 1.0;
        }
    }
    const auto md = static_cast<double>(train.size());
    report.train_error /= md;
    report.bad_set_error /= md;
    report.bad_set_loss /= md;
    report.train_loss = 1.0 - static_cast<double>(satisfied) / md;

    const RngStream test_rng = rng.derive(kTestStream);
    std::vector<double> errors(n_test);
    std::vector<double> losses(n_test);
    for (std::size_t t = 0; t < n_test; ++t) {
        const LabeledExample ex = sample_example_exp(cfg, test_rng.derive(t));
        const SignedLog h = check(predict_log_domain(model, ex.x));
        errors[t] = h.sign * ex.y <= 0 ? 1.0 : 0.0;
        losses[t] = margin_at_least(h, ex.y, 1.0) ? 0.0 : 1.0;
    }
    const MonteCarloEstimate test01 = mean_and_std_err(errors);
    const MonteCarloEstimate test = mean_and_std_err(losses);
    report.test_error = test01.estimate;
    report.test_error_std_err = test01.std_err;
    report.test_loss = test.estimate;
    report.test_std_err = test.std_err;
    report.witness = std::abs(report.test_loss - report.bad_set_loss);

    report.set_extra("train_margin_fraction", static_cast<double>(satisfied) / md);
    report.set_extra("min_train_log_margin", min_log_margin);
    report.set_extra("non_finite", static_cast<double>(non_finite));
    return report;
}

} // namespace uclab::expnet
