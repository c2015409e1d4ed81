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

#pragma once

#include "uclab/random.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace uclab {

/// An input vector and its label. Binary tasks use label in {-1, +1};
/// multi-logit helpers interpret the label as a class index.
struct LabeledExample {
    std::vector<double> x;
    int y = 0;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Ordered collection of examples sharing one input dimension.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}
    Dataset(std::size_t dim, std::vector<LabeledExample> examples);

    /// Appends an example; throws std::invalid_argument on a dimension
    /// mismatch or non-finite input.
    void add(LabeledExample example);
    void reserve(std::size_t n) { examples_.reserve(n); }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }

    const LabeledExample& operator[](std::size_t i) const noexcept { return examples_[i]; }
    const std::vector<LabeledExample>& examples() const noexcept { return examples_; }

    auto begin() const noexcept { return examples_.begin(); }
    auto end() const noexcept { return examples_.end(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<LabeledExample> examples_;
};

/// Which margin loss to evaluate. gamma is ignored for zero_one.
struct LossKind {
    enum class Kind { ramp, strict, zero_one };

    Kind kind = Kind::zero_one;
    double gamma = 0.0;

    static LossKind ramp(double gamma);
    static LossKind strict(double gamma);
    static LossKind zero_one() { return {Kind::zero_one, 0.0}; }
};

/// f[y] - max_{y' != y} f[y'].
double margin(std::span<const double> logits, std::size_t y);

/// 1 if y*y_out <= 0, 1 - y*y_out/gamma inside (0, gamma), 0 beyond.
/// gamma == 0 gives the 0-1 error.
double ramp_loss(double y_out, int y, double gamma);

/// 0 if y*y_out >= gamma, 1 otherwise.
double strict_loss(double y_out, int y, double gamma);

double zero_one_loss(double y_out, int y);

double evaluate_loss(const LossKind& loss, double y_out, int y);

using Predictor = std::function<double(std::span<const double>)>;
using ExampleSampler = std::function<LabeledExample(const RngStream&)>;

/// Mean loss of `predict` over `data`. Throws on an empty dataset.
double empirical_loss(const Predictor& predict, const Dataset& data, const LossKind& loss);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_err = 0.0;
};

/// Sample mean and standard error of the loss over n fresh draws. Draw i is
/// generated from rng.derive(i), so the result does not depend on the order
/// in which draws are evaluated.
MonteCarloEstimate mc_expected_loss(const Predictor& predict, const ExampleSampler& sampler,
                                    std::size_t n, const LossKind& loss, const RngStream& rng);

/// Mean and standard error of a list of per-sample losses.
MonteCarloEstimate mean_and_std_err(std::span<const double> values);

} // namespace uclab
