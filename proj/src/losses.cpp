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

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uclab {

Dataset::Dataset(std::size_t dim, std::vector<LabeledExample> examples) : dim_(dim)
{
    examples_.reserve(examples.size());
    for (auto& e : examples) {
        add(std::move(e));
    }
}

void Dataset::add(LabeledExample example)
{
    if (example.x.size() != dim_) {
        throw std::invalid_argument("Dataset::add: expected dim " + std::to_string(dim_)
                                    + ", got " + std::to_string(example.x.size()));
    }
    for (double v : example.x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Dataset::add: non-finite input");
        }
    }
    examples_.push_back(std::move(example));
}

LossKind LossKind::ramp(double gamma)
{
    if (!(gamma >= 0.0)) {
        throw std::invalid_argument("LossKind::ramp: gamma must be >= 0");
    }
    return {Kind::ramp, gamma};
}

LossKind LossKind::strict(double gamma)
{
    if (!(gamma >= 0.0)) {
        throw std::invalid_argument("LossKind::strict: gamma must be >= 0");
    }
    return {Kind::strict, gamma};
}

double margin(std::span<const double> logits, std::size_t y)
{
    if (logits.size() < 2) {
        throw std::invalid_argument("margin: need at least two logits");
    }
    if (y >= logits.size()) {
        throw std::invalid_argument("margin: class index out of range");
    }
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < logits.size(); ++k) {
        if (k != y && logits[k] > best_other) {
            best_other = logits[k];
        }
    }
    return logits[y] - best_other;
}

double ramp_loss(double y_out, int y, double gamma)
{
    const double yy = y * y_out;
    if (yy <= 0.0) {
        return 1.0;
    }
    if (yy >= gamma) {
        return 0.0;
    }
    return 1.0 - yy / gamma;
}

double strict_loss(double y_out, int y, double gamma) { return y * y_out >= gamma ? 0.0 : 1.0; }

double zero_one_loss(double y_out, int y) { return y * y_out <= 0.0 ? 1.0 : 0.0; }

double evaluate_loss(const LossKind& loss, double y_out, int y)
{
    switch (loss.kind) {
    case LossKind::Kind::ramp:
        return ramp_loss(y_out, y, loss.gamma);
    case LossKind::Kind::strict:
        return strict_loss(y_out, y, loss.gamma);
    case LossKind::Kind::zero_one:
        return zero_one_loss(y_out, y);
    }
    return 1.0;
}

double empirical_loss(const Predictor& predict, const Dataset& data, const LossKind& loss)
{
    if (data.empty()) {
        throw std::invalid_argument("empirical_loss: empty dataset");
    }
    double total = 0.0;
    for (const auto& ex : data) {
        total += evaluate_loss(loss, predict(ex.x), ex.y);
    }
    return total / static_cast<double>(data.size());
}

MonteCarloEstimate mean_and_std_err(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("mean_and_std_err: no values");
    }
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= n;
    if (values.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

MonteCarloEstimate mc_expected_loss(const Predictor& predict, const ExampleSampler& sampler,
                                    std::size_t n, const LossKind& loss, const RngStream& rng)
{
    if (n == 0) {
        throw std::invalid_argument("mc_expected_loss: n must be >= 1");
    }
    std::vector<double> losses(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LabeledExample ex = sampler(rng.derive(i));
        losses[i] = evaluate_loss(loss, predict(ex.x), ex.y);
    }
    return mean_and_std_err(losses);
}

} // namespace uclab
