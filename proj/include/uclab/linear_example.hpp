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

#include "uclab/losses.hpp"
#include "uclab/matrix.hpp"
#include "uclab/random.hpp"
#include "uclab/report.hpp"

#include <cstddef>
#include <span>

namespace uclab::linear {

/// Concentration constants used by the dimension requirements.
struct TheoremConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;

    /// c1 = 1/32, c2 = 1/2, c3 = 3/2, c4 = sqrt(2): the set used for the
    /// linear-classifier dimension requirement.
    static TheoremConstants linear_proof();
    /// c1 = 1/2048, c2 = sqrt(15/16), c3 = sqrt(17/16), c4 = sqrt(2): the set
    /// stated with the chi-square and Hoeffding lemmas.
    static TheoremConstants lemma_section();

    void validate() const;
};

/// Inputs are (x1, x2) with x1 in R^K carrying the class signal 2*y*u and
/// x2 in R^D holding N(0, 32/D) noise.
struct LinearTaskConfig {
    std::size_t K = 1;
    std::size_t D = 0;
    std::size_t m = 0;
    Vector u;                    // ||u|| = 1/sqrt(m)
    double noise_variance = 0.0; // 32 / D
    double epsilon = 0.05;
    double delta = 0.05;
    /// false when D was chosen below the proven requirement.
    bool theorem_regime = true;

    /// K = 1 and u = e_1 / sqrt(m) unless a different K is given.
    static LinearTaskConfig make(std::size_t m, std::size_t D, double epsilon, double delta,
                                 std::size_t K = 1);

    std::size_t input_dim() const noexcept { return K + D; }
    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;
};

struct LinearParams {
    Vector w1;
    Vector w2;

    double predict(std::span<const double> x) const;
    double norm() const;
};

/// The three lower bounds on D (real-valued) and the smallest integer D
/// meeting all of them.
struct DimensionRequirement {
    double from_chi_square = 0.0;   // ln(6m/delta) / c1
    double from_train_margin = 0.0; // m (4 c4 c3 / c2^2)^2 ln(6m/delta)
    double from_test_error = 0.0;   // m (4 c4 c3 / c2^2)^2 2 ln(2/epsilon)
    std::size_t D = 0;
};

DimensionRequirement dimension_requirement(std::size_t m, double epsilon, double delta,
                                           const TheoremConstants& c
                                           = TheoremConstants::linear_proof());

/// Smallest D satisfying all three requirements. Throws std::invalid_argument
/// unless 0 < delta < 1/4 and epsilon > 0.
std::size_t min_dimension(std::size_t m, double epsilon, double delta,
                          const TheoremConstants& c = TheoremConstants::linear_proof());

/// D = ceil(20 m ln m): a fast setting outside the proven regime.
std::size_t empirical_dimension(std::size_t m);

/// One example drawn from its own stream.
LabeledExample sample_example(const LinearTaskConfig& cfg, const RngStream& rng);

/// m examples; example i comes from rng.derive(i).
Dataset sample_dataset(const LinearTaskConfig& cfg, const RngStream& rng);

/// One unit-rate gradient step on y*h(x) per example from the origin:
/// w1 = sum y_i x1_i (= 2m u), w2 = sum y_i x2_i, summed in dataset order.
LinearParams train_closed_form(const Dataset& data, const LinearTaskConfig& cfg);

/// ((x1, x2), y) -> ((x1, -x2), y) for every example.
Dataset noise_negate(const Dataset& data, const LinearTaskConfig& cfg);

struct TrialOptions {
    enum class Path { automatic, materialized, streaming };
    enum class TestSampler { automatic, full, projected };

    Path path = Path::automatic;
    TestSampler test_sampler = TestSampler::automatic;
    /// Above this many stored doubles the training set is regenerated from
    /// its per-example streams instead of being held in memory.
    std::size_t materialize_limit = std::size_t{1} << 27;
    /// Above D * n_test the test inputs are drawn through the exact
    /// one-dimensional projection of x2 onto w2.
    std::size_t full_test_limit = std::size_t{1} << 26;
};

/// Trains on a fresh S, then reports the L^(gamma) losses on S, on test
/// draws and on the noise-negated S', plus weight norms.
///
/// Extras: "weight_norm" (||w||), "w2_norm", "w1_norm",
/// "min_train_margin", "max_bad_margin", "streamed" and "projected_test"
/// (0/1 flags).
TrialReport run_trial(const LinearTaskConfig& cfg, std::size_t n_test, double gamma,
                      const RngStream& rng, const TrialOptions& options = {});

} // namespace uclab::linear
