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

#include "uclab/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace uclab {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: expected " + std::to_string(rows_ * cols_)
                                    + " entries, got " + std::to_string(data_.size()));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

bool Matrix::all_finite() const noexcept
{
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Matrix Matrix::transposed() const
{
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other)
{
    if (!same_shape(other)) {
        throw std::invalid_argument("Matrix +=: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other)
{
    if (!same_shape(other)) {
        throw std::invalid_argument("Matrix -=: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept
{
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Vector multiply(const Matrix& m, std::span<const double> x)
{
    if (x.size() != m.cols()) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    Vector y(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        y[r] = dot(m.row(r), x);
    }
    return y;
}

Vector multiply_transposed(const Matrix& m, std::span<const double> x)
{
    if (x.size() != m.rows()) {
        throw std::invalid_argument("multiply_transposed: dimension mismatch");
    }
    Vector y(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double xr = x[r];
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            y[c] += xr * row[c];
        }
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double squared_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

} // namespace uclab
