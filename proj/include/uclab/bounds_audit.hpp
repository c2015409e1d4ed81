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
#include "uclab/relu_lab.hpp"
#include "uclab/report.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace uclab::audit {

/// One layer's learned weights and their initialization.
struct LayerView {
    const Matrix& weight;
    const Matrix& init;
};

/// Norm diagnostics and the three norm-based bounds, all with leading
/// constant 1. The bounds are meant for comparing trends in m, not for
/// comparing values across families.
struct BoundReport {
    std::vector<double> dist_from_init_per_layer; // ||W_k - Z_k||_F
    double dist_from_origin = 0.0;                // sqrt(sum ||W_k||_F^2)
    std::vector<double> spectral_norms;
    std::vector<double> frobenius_norms;
    std::vector<double> norm21_values;             // ||W_k - Z_k||_{2,1}
    double spectral_product = 0.0;
    double bound_neyshabur18 = 0.0;
    double bound_bartlett17 = 0.0;
    /// Only defined for exactly two layers.
    std::optional<double> bound_two_layer19;
    double gamma_used = 0.0;
    double B_used = 0.0;
    std::size_t m = 0;
};

/// With d = layers.size() and prefactor P = B d sqrt(h) / (gamma sqrt(m)) prod ||W_k||_2:
///
///     neyshabur18 = P sqrt(sum ||W_k - Z_k||_F^2 / ||W_k||_2^2)
///     bartlett17  = P / (d sqrt(h)) (sum (||W_k - Z_k||_{2,1} / ||W_k||_2)^(2/3))^(3/2)
///     two_layer19 = ||W2||_F (||W1 - Z1||_F + ||Z1||_2) / (gamma sqrt(m)) + sqrt(h / m)
///
/// Throws std::invalid_argument for gamma <= 0, B <= 0, m == 0, h == 0, no
/// layers, mismatched snapshot shapes, or a layer with ||W_k||_2 == 0.
BoundReport compute_bounds(std::span<const LayerView> layers, double B, double gamma,
                           std::size_t m, std::size_t h);

/// Layers (W1 with its bias column, W2); h is the width.
BoundReport compute_bounds(const relu::TwoLayerNet& net, double B, double gamma, std::size_t m);

/// Largest norm of the inputs as the net sees them (bias coordinate included).
double input_norm_bound(const relu::TwoLayerNet& net, const Dataset& data);

struct TrajectoryDiagnostics {
    double dist_between_runs = 0.0;  // l2 distance of the concatenated parameters
    double spectral_product_a = 0.0; // prod_k ||W_k||_2 of net a
    double dist_init_a = 0.0;        // l2 distance of net a from its snapshots
};

/// Throws std::invalid_argument on a shape mismatch.
TrajectoryDiagnostics trajectory_diagnostics(const relu::TwoLayerNet& a, const relu::TwoLayerNet& b);

struct MarginStats {
    double percentile_1 = 0.0; // of the train margins
    double median = 0.0;       // of the train margins
    double mean_train = 0.0;
    double mean_test = 0.0;
    double pseudo_overfit_gap = 0.0; // mean_train - mean_test
};

/// Quantile with linear interpolation between order statistics
/// (position p (n-1) in the sorted sample). Throws on an empty sample.
double quantile(std::vector<double> values, double p);

/// Throws std::invalid_argument on an empty sample.
MarginStats margin_stats(std::span<const double> train_margins, std::span<const double> test_margins);
MarginStats margin_stats(const relu::TwoLayerNet& net, const Dataset& train, const Dataset& test);

struct TrialOutcome {
    double test_loss = 0.0;
    double train_loss = 0.0;
    double bad_set_loss = 0.0;
    double test_std_err = 0.0;
};

struct EpsReport {
    double eps_gen_estimate = 0.0;
    double eps_unif_alg_lower = 0.0;
    double std_err = 0.0;
    std::size_t trials_used = 0;
};

/// eps_gen_estimate: the ceil((1 - delta) n)-th smallest test - train gap.
/// eps_unif_alg_lower: drop the floor(delta n) trials with the largest gap,
/// then take the smallest |test - bad_set| among the rest.
/// std_err: the largest per-trial test_std_err.
/// Throws std::invalid_argument with fewer than 10 trials or delta outside [0, 1).
EpsReport estimate_eps(std::span<const TrialOutcome> trials, double delta);
EpsReport estimate_eps(std::span<const TrialReport> trials, double delta);

struct PacBayesLowerBounds {
    double type_a = 0.0;
    double type_b = 0.0;
};

/// type_a = e^{-3/2} u - (1 - e^{-3/2}) (eps_hat + g)
/// type_b = u - (e^{3/2} - 1) (eps_hat + g)
/// Negative values are returned as is.
PacBayesLowerBounds pb_det_lower_bounds(double eps_unif_alg, double eps_gen, double eps_hat);

using Classifier = std::function<int(std::span<const double>)>;

/// h_S(x) = -h*(x) if x is exactly the negation of a training input,
/// h*(x) otherwise.
Classifier abstract_memorizer(Classifier h_star, const Dataset& train);

/// Abstract demo: inputs ~ N(0, I_D), h*(x) = +1 iff x_0 >= 0, m training
/// points from rng.derive(1), n_test fresh points from rng.derive(2). The bad
/// set is the negated training inputs with their h* labels. Losses and
/// errors are 0-1.
TrialReport run_abstract_trial(std::size_t D, std::size_t m, std::size_t n_test, const RngStream& rng);

} // namespace uclab::audit
