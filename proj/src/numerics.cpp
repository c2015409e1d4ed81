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

#include "uclab/numerics.hpp"
#include "uclab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uclab {

namespace {

struct PowerResult {
    double sigma = 0.0;
    bool converged = false;
};

// Power iteration on the symmetric Gram matrix G = M^T M. Stops on the
// eigen-residual ||G v - lambda v|| <= tol * lambda, lambda = v^T G v.
PowerResult power_iterate(const Matrix& gram, Vector v, double tol, std::size_t max_iter)
{
    double norm_v = norm2(v);
    for (double& x : v) {
        x /= norm_v;
    }
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Vector w = multiply(gram, v);
        lambda = dot(v, w);
        if (lambda <= 0.0) {
            // v lies in the null space; no information from this start.
            return {0.0, true};
        }
        double residual = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w[i] - lambda * v[i];
            residual += d * d;
        }
        residual = std::sqrt(residual);
        norm_v = norm2(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = w[i] / norm_v;
        }
        if (residual <= tol * lambda) {
            return {std::sqrt(lambda), true};
        }
    }
    return {std::sqrt(lambda), false};
}

Matrix gram_of_columns(const Matrix& m)
{
    const std::size_t n = m.cols();
    Matrix g(n, n, 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = row[i];
            if (a == 0.0) {
                continue;
            }
            auto out = g.row(i);
            for (std::size_t j = i; j < n; ++j) {
                out[j] += a * row[j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            g(i, j) = g(j, i);
        }
    }
    return g;
}

} // namespace

double spectral_norm(const Matrix& m, double tol, std::size_t max_iter)
{
    if (m.empty()) {
        throw std::invalid_argument("spectral_norm: empty matrix");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("spectral_norm: tol must be positive");
    }
    // Iterate over the shorter side.
    const Matrix* target = &m;
    Matrix transposed;
    if (m.rows() < m.cols()) {
        transposed = m.transposed();
        target = &transposed;
    }
    const std::size_t n = target->cols();
    const Matrix gram = gram_of_columns(*target);

    const PowerResult from_ones = power_iterate(gram, Vector(n, 1.0), tol, max_iter);

    Vector restart(n);
    RandomEngine engine(RngStream{0x5EEDu, 0x5EC7u});
    for (double& x : restart) {
        x = engine.normal();
    }
    const PowerResult from_random = power_iterate(gram, std::move(restart), tol, max_iter);

    const double best = std::max(from_ones.sigma, from_random.sigma);
    if (!from_ones.converged || !from_random.converged) {
        throw ConvergenceError("spectral_norm: no convergence after "
                                   + std::to_string(max_iter) + " iterations",
                               best);
    }
    return best;
}

double frobenius_norm(const Matrix& m) { return norm2(m.entries()); }

double norm21(const Matrix& m)
{
    if (m.empty()) {
        throw std::invalid_argument("norm21: empty matrix");
    }
    Vector col_sq(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            col_sq[c] += row[c] * row[c];
        }
    }
    double total = 0.0;
    for (double s : col_sq) {
        total += std::sqrt(s);
    }
    return total;
}

double logsumexp(std::span<const double> xs)
{
    if (xs.empty()) {
        throw std::invalid_argument("logsumexp: empty input");
    }
    const double top = *std::max_element(xs.begin(), xs.end());
    if (std::isinf(top)) {
        return top;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += std::exp(x - top);
    }
    return top + std::log(sum);
}

SignedLog signed_log_diff(double log_a, double log_b)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (log_a == log_b) {
        return {0, neg_inf};
    }
    if (log_a > log_b) {
        return {+1, log_a + std::log1p(-std::exp(log_b - log_a))};
    }
    return {-1, log_b + std::log1p(-std::exp(log_a - log_b))};
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 2) {
        throw std::invalid_argument("fit_loglog_slope: need at least 2 points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [m, v] : points) {
        if (!(m > 0.0) || !(v > 0.0)) {
            throw std::invalid_argument("fit_loglog_slope: coordinates must be positive");
        }
        mean_x += std::log(m);
        mean_y += std::log(v);
    }
    const auto n = static_cast<double>(points.size());
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [m, v] : points) {
        const double dx = std::log(m) - mean_x;
        const double dy = std::log(v) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_loglog_slope: all m values coincide");
    }
    SlopeFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = mean_y - fit.exponent * mean_x;
    if (syy == 0.0) {
        fit.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (const auto& [m, v] : points) {
            const double resid = std::log(v) - (fit.intercept + fit.exponent * std::log(m));
            ss_res += resid * resid;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

} // namespace uclab
