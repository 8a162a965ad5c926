// Copyright 2026 the qbal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace qbal {

/// SplitMix64 finalizer. Used to turn (base seed, stream index) into
/// decorrelated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` of a base seed: mix64(base + index). Per-read,
/// per-job and per-stage seeds are all derived this way, so parallel and
/// serial execution see the same streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(base + index);
}

/// Thin wrapper over mt19937_64. The distributions are implemented here
/// rather than through <random> so draws are identical across standard
/// library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling on the top of the range keeps this unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng::below.
template <typename Container>
void shuffle(Container& c, Rng& rng) {
    for (std::size_t i = c.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(c[i - 1], c[j]);
    }
}

/// Stage tags for fanning one global seed out across pipeline stages.
namespace stage {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t random_oversample = 2;
inline constexpr std::uint64_t smote = 3;
inline constexpr std::uint64_t qrbm_train = 4;
inline constexpr std::uint64_t qrbm_generate = 5;
inline constexpr std::uint64_t classifiers = 6;
inline constexpr std::uint64_t rbm_cd = 7;
inline constexpr std::uint64_t fixture = 8;
inline constexpr std::uint64_t decode = 9;
}  // namespace stage

}  // namespace qbal
