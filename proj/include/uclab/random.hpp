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

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace uclab {

/// Immutable descriptor of an independent random stream.
///
/// A stream is a (seed, stream_id) pair. Equal pairs replay the same sequence.
/// Streams sharing a seed but differing in stream_id occupy disjoint counter
/// ranges of the same Philox key, so their outputs are independent.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Child stream, e.g. one per trial or per sample. Child ids are hashed
    /// from (stream_id, child) with splitmix64.
    RngStream derive(std::uint64_t child) const noexcept;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Philox4x32-10 counter-based generator bound to one RngStream.
///
/// Key: the 64-bit seed. Counter: (block index, stream_id). Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class RandomEngine {
public:
    using result_type = std::uint64_t;

    explicit RandomEngine(const RngStream& stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform double in the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via Box-Muller (pairs are cached).
    double normal() noexcept;
    /// +1 or -1 with equal probability.
    int sign() noexcept { return ((*this)() >> 63) != 0 ? 1 : -1; }
    /// Uniform integer in [0, n), unbiased (rejection sampling).
    std::uint64_t uniform_index(std::uint64_t n) noexcept;

    /// Raw Philox4x32-10 block function; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_id_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned next_word_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Fisher-Yates shuffle driven by RandomEngine::uniform_index, so the
/// permutation does not depend on the standard library implementation.
template <typename T>
void shuffle(std::vector<T>& items, RandomEngine& engine)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(engine.uniform_index(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// `dim` i.i.d. N(0, variance) draws. Throws std::invalid_argument on
/// negative variance.
std::vector<double> sample_gaussian(const RngStream& rng, std::size_t dim, double variance);

/// Same as above but continuing an existing engine.
std::vector<double> sample_gaussian(RandomEngine& engine, std::size_t dim, double variance);

} // namespace uclab
