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

#include "uclab/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uclab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

RngStream RngStream::derive(std::uint64_t child) const noexcept
{
    return {seed, splitmix64(splitmix64(stream_id) ^ (child * 0xD1B54A32D192ED03ull + 1))};
}

RandomEngine::RandomEngine(const RngStream& stream) noexcept
    : key_{static_cast<std::uint32_t>(stream.seed), static_cast<std::uint32_t>(stream.seed >> 32)},
      stream_id_(stream.stream_id)
{
}

std::array<std::uint32_t, 4> RandomEngine::philox(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void RandomEngine::refill() noexcept
{
    buffer_ = philox({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(stream_id_),
                      static_cast<std::uint32_t>(stream_id_ >> 32)},
                     key_);
    ++block_;
    next_word_ = 0;
}

RandomEngine::result_type RandomEngine::operator()() noexcept
{
    if (next_word_ > 2) {
        refill();
    }
    const std::uint64_t lo = buffer_[next_word_];
    const std::uint64_t hi = buffer_[next_word_ + 1];
    next_word_ += 2;
    return (hi << 32) | lo;
}

double RandomEngine::uniform() noexcept
{
    // 53 random bits, shifted by half an ulp so 0 is never produced.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomEngine::normal() noexcept
{
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_normal_ = true;
    return radius * std::cos(angle);
}

std::uint64_t RandomEngine::uniform_index(std::uint64_t n) noexcept
{
    if (n <= 1) {
        return 0;
    }
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = max() - (max() % n + 1) % n;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x > limit);
    return x % n;
}

std::vector<double> sample_gaussian(RandomEngine& engine, std::size_t dim, double variance)
{
    if (!(variance >= 0.0)) {
        throw std::invalid_argument("sample_gaussian: variance must be non-negative");
    }
    std::vector<double> v(dim);
    const double sd = std::sqrt(variance);
    for (double& x : v) {
        x = sd * engine.normal();
    }
    return v;
}

std::vector<double> sample_gaussian(const RngStream& rng, std::size_t dim, double variance)
{
    RandomEngine engine(rng);
    return sample_gaussian(engine, dim, variance);
}

} // namespace uclab
