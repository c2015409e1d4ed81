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

// Finite-difference checks for the two-layer net, shared by the unit and
// acceptance binaries.
#pragma once

#include "uclab/relu_lab.hpp"

#include <algorithm>
#include <cmath>

namespace gradcheck {

using uclab::Dataset;
using uclab::Matrix;
using uclab::relu::Gradients;
using uclab::relu::TrainLoss;
using uclab::relu::TwoLayerNet;
using uclab::relu::loss_and_gradient;

inline bool near_kink(const TwoLayerNet& net, const Dataset& data)
{
    const auto dim = net.input_dim();
    for (const auto& e : data) {
        for (std::size_t j = 0; j < net.width(); ++j) {
            double a = net.has_bias() ? net.w1()(j, dim) : 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                a += net.w1()(j, k) * e.x[k];
            }
            if (std::abs(a) < 1e-3) {
                return true;
            }
        }
    }
    return false;
}

// Central differences over every weight.
inline Gradients finite_difference(const TwoLayerNet& net, const Dataset& data, TrainLoss loss)
{
    constexpr double h = 1e-6;
    Gradients g{Matrix(net.w1().rows(), net.w1().cols()), Matrix(net.w2().rows(), net.w2().cols())};
    auto probe = [&](bool first, std::size_t r, std::size_t c) {
        Matrix w1 = net.w1();
        Matrix w2 = net.w2();
        Matrix& w = first ? w1 : w2;
        const double orig = w(r, c);
        w(r, c) = orig + h;
        const double up = loss_and_gradient(TwoLayerNet(w1, w2, net.has_bias()), data, loss, nullptr);
        w(r, c) = orig - h;
        const double down = loss_and_gradient(TwoLayerNet(w1, w2, net.has_bias()), data, loss, nullptr);
        return (up - down) / (2.0 * h);
    };
    for (std::size_t r = 0; r < g.w1.rows(); ++r) {
        for (std::size_t c = 0; c < g.w1.cols(); ++c) {
            g.w1(r, c) = probe(true, r, c);
        }
    }
    for (std::size_t r = 0; r < g.w2.rows(); ++r) {
        for (std::size_t c = 0; c < g.w2.cols(); ++c) {
            g.w2(r, c) = probe(false, r, c);
        }
    }
    return g;
}

inline double relative_error(const Gradients& a, const Gradients& b)
{
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto* pair : {&a.w1, &a.w2}) {
        const Matrix& x = *pair;
        const Matrix& y = pair == &a.w1 ? b.w1 : b.w2;
        for (std::size_t i = 0; i < x.size(); ++i) {
            diff += (x.entries()[i] - y.entries()[i]) * (x.entries()[i] - y.entries()[i]);
            na += x.entries()[i] * x.entries()[i];
            nb += y.entries()[i] * y.entries()[i];
        }
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

} // namespace gradcheck
