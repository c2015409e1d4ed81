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

#include "uclab/matrix.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace uclab {

// ---------------------------------------------------------------------------
// Matrix norms
// ---------------------------------------------------------------------------

/// Thrown when an iterative method exhausts its budget. Carries the last
/// estimate so callers can decide whether it is usable.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate)
    {
    }
    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

struct PowerIterationOptions {
    double tol = 1e-9;
    std::size_t max_iter = 10000;
};

/// Largest singular value by power iteration on the smaller Gram matrix
/// (M^T M or M M^T). Starts from the normalized all-ones vector and then
/// repeats once from a fixed pseudo-random vector; the larger result wins.
/// This covers matrices whose top singular vector is orthogonal to ones.
/// Each run stops once ||M^T M v - s^2 v|| <= tol * s^2 for the current
/// estimate s; a run that exhausts max_iter raises ConvergenceError.
double spectral_norm(const Matrix& m, double tol = 1e-9, std::size_t max_iter = 10000);

double frobenius_norm(const Matrix& m);

/// (2,1)-norm: l2 norm of every column, summed over columns.
double norm21(const Matrix& m);

// ---------------------------------------------------------------------------
// Log-domain arithmetic
// ---------------------------------------------------------------------------

/// log(sum(exp(xs))). Throws std::invalid_argument on an empty input.
/// Returns -inf when every entry is -inf.
double logsumexp(std::span<const double> xs);

struct SignedLog {
    int sign = 0;          // -1, 0 or +1
    double log_magnitude;  // log|value|; -inf when sign == 0
};

/// Represents exp(log_a) - exp(log_b) without leaving log space.
SignedLog signed_log_diff(double log_a, double log_b);

// ---------------------------------------------------------------------------
// Power-law fitting
// ---------------------------------------------------------------------------

struct SlopeFit {
    double exponent = 0.0;   // slope in log-log space
    double intercept = 0.0;  // log-space intercept
    double r_squared = 0.0;  // in [0, 1]
};

/// Least-squares line through (ln m, ln v).
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

} // namespace uclab
