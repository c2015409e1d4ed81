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

#include "uclab/linear_example.hpp"
#include "uclab/losses.hpp"
#include "uclab/numerics.hpp"
#include "uclab/random.hpp"
#include "uclab/report.hpp"

#include <cstddef>
#include <span>

namespace uclab::expnet {

using linear::TheoremConstants;

/// Inputs live in R^{2D}: the first D coordinates are y*u, the last D are
/// standard normal noise.
struct ExpTaskConfig {
    std::size_t D = 0;
    std::size_t m = 0;
    Vector u; // ||u|| = sqrt(D)/2
    double epsilon = 0.05;
    double delta = 0.05;
    bool theorem_regime = true;

    /// u = (1/2, ..., 1/2).
    static ExpTaskConfig make(std::size_t m, std::size_t D, double epsilon, double delta);

    std::size_t input_dim() const noexcept { return 2 * D; }
    void validate() const;
};

/// The function learned by one gradient step per training point on an
/// infinitely wide exponential-activation layer with zero-initialized
/// output weights:
///
///     h(z) = sum_i y_i exp(||(z + x_i) / 2||^2)
///
/// with the learning-rate normalization dropped (it is a positive factor and
/// leaves every sign and margin comparison against 1 in the proven regime
/// unchanged). Only the training points are stored.
class ExpNetModel {
public:
    /// Throws std::invalid_argument on an empty dataset, odd input dimension
    /// or labels outside {-1, +1}.
    explicit ExpNetModel(Dataset train_points);

    const Dataset& train_points() const noexcept { return points_; }
    std::size_t input_dim() const noexcept { return points_.dim(); }

private:
    Dataset points_;
};

/// sign(h(z)) and log|h(z)|, computed as logsumexp over the +1 points minus
/// logsumexp over the -1 points.
SignedLog predict_log_domain(const ExpNetModel& model, std::span<const double> z);

/// y * h >= threshold, decided in log space (threshold > 0).
bool margin_at_least(const SignedLog& h, int y, double threshold);

struct ExpDimensionRequirement {
    double from_test_error = 0.0;  // k * 2 ln(6m/epsilon)
    double from_train_error = 0.0; // k * 2 ln(6m/delta)
    double from_log_m = 0.0;       // 6 ln(2m)
    double min_samples = 0.0;      // m must exceed 8 ln(6/delta)
    bool sample_condition_met = false;
    std::size_t D = 0;
};

/// Requirements with k = max(1/c2, (16 c3 c4)^2). Does not reject small m;
/// see sample_condition_met.
ExpDimensionRequirement exp_dimension_requirement(std::size_t m, double epsilon, double delta,
                                                  const TheoremConstants& c
                                                  = TheoremConstants::lemma_section());

/// Smallest D meeting all three dimension conditions. Throws
/// std::invalid_argument when m <= 8 ln(6/delta) or delta is outside (0, 1/4).
std::size_t min_dimension_exp(std::size_t m, double epsilon, double delta,
                              const TheoremConstants& c = TheoremConstants::lemma_section());

LabeledExample sample_example_exp(const ExpTaskConfig& cfg, const RngStream& rng);

/// m examples; example i comes from rng.derive(i).
Dataset sample_dataset_exp(const ExpTaskConfig& cfg, const RngStream& rng);

/// ((x1, x2), y) -> ((-x1, x2), -y).
Dataset negate_all_but_noise(const Dataset& data);

/// Losses are the strict margin loss at threshold 1 (y*h >= 1 counts as
/// correct); the *_error fields are the 0-1 error.
/// Extras: "train_margin_fraction" (share of points with y*h >= 1),
/// "min_train_log_margin", "non_finite" (count of NaN/inf log magnitudes).
TrialReport run_trial_exp(const ExpTaskConfig& cfg, std::size_t n_test, const RngStream& rng);

} // namespace uclab::expnet
