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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qbal/error.hpp"
#include "qbal/ising.hpp"
#include "qbal/random.hpp"

namespace qbal {

struct SamplerConfig {
    std::size_t num_reads = 100;
    std::uint64_t seed = 0;
    std::size_t sweeps = 1000;
    double beta_min = 0.1;
    double beta_max = 3.0;
    bool geometric = true;
    unsigned threads = 0;  // 0: hardware concurrency

    void check() const {
        if (num_reads < 1) throw ParameterError("num_reads must be >= 1");
        if (sweeps < 1) throw ParameterError("sweeps must be >= 1");
        if (!(beta_min > 0) || !(beta_min < beta_max))
            throw ParameterError("beta schedule needs 0 < beta_min < beta_max");
    }

    std::string schedule() const {
        std::ostringstream os;
        os << (geometric ? "geometric " : "linear ") << beta_min << "->" << beta_max << " x" << sweeps;
        return os.str();
    }
};

/// A sampler backend: problem and config in, validated SampleSet out.
using SampleFn = std::function<SampleSet(const IsingProblem&, const SamplerConfig&)>;

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

/// Collapses per-read states into samples in order of first appearance.
inline std::vector<SpinSample> aggregate_reads(const std::vector<std::vector<Spin>>& reads,
                                               const std::vector<double>& energies) {
    std::vector<SpinSample> out;
    std::map<std::vector<Spin>, std::size_t> seen;
    for (std::size_t r = 0; r < reads.size(); ++r) {
        auto [it, fresh] = seen.try_emplace(reads[r], out.size());
        if (fresh)
            out.push_back({reads[r], energies[r], 1});
        else
            ++out[it->second].occurrences;
    }
    return out;
}

/// Runs body(r) for r in [0, n) over `threads` workers with a static
/// interleaved partition. Results must be written per index.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t r = 0; r < n; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t r = t; r < n; r += workers) body(r);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// exact enumeration

inline constexpr std::size_t kMaxExactSpins = 22;

/// Boltzmann table at unit temperature. In state index x, bit i set means
/// variables[i] = +1.
struct IsingDistribution {
    std::vector<Qubit> variables;
    std::vector<double> energy;
    std::vector<double> prob;

    std::vector<Spin> spins(std::uint64_t x) const {
        std::vector<Spin> s(variables.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (x >> i) & 1u ? 1 : -1;
        return s;
    }
};

inline IsingDistribution exact_distribution(const IsingProblem& p) {
    const CompiledIsing c(p);
    const std::size_t n = c.size();
    if (n > kMaxExactSpins) {
        throw CapacityError("exact enumeration limited to " + std::to_string(kMaxExactSpins) + " spins, got " +
                            std::to_string(n));
    }
    IsingDistribution d;
    d.variables = c.variables;
    const std::uint64_t states = std::uint64_t{1} << n;
    d.energy.resize(states);
    std::vector<Spin> s(n);
    for (std::uint64_t x = 0; x < states; ++x) {
        for (std::size_t i = 0; i < n; ++i) s[i] = (x >> i) & 1u ? 1 : -1;
        d.energy[x] = c.energy(s.data());
    }
    const double e0 = *std::min_element(d.energy.begin(), d.energy.end());
    d.prob.resize(states);
    double z = 0.0;
    for (std::uint64_t x = 0; x < states; ++x) z += d.prob[x] = std::exp(-(d.energy[x] - e0));
    for (auto& q : d.prob) q /= z;
    return d;
}

/// i.i.d. reads from the exact Boltzmann distribution. Read r inverts the
/// CDF at one uniform from derive_seed(seed, r).
inline SampleSet exact_sample(const IsingProblem& p, const SamplerConfig& cfg) {
    cfg.check();
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = exact_distribution(p);
    std::vector<double> cdf(d.prob.size());
    double acc = 0.0;
    for (std::size_t x = 0; x < cdf.size(); ++x) cdf[x] = acc += d.prob[x];

    std::vector<std::vector<Spin>> reads(cfg.num_reads);
    std::vector<double> energies(cfg.num_reads);
    for (std::size_t r = 0; r < cfg.num_reads; ++r) {
        Rng rng(derive_seed(cfg.seed, r));
        const double u = rng.uniform() * acc;
        const auto x = static_cast<std::uint64_t>(
            std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                     static_cast<std::ptrdiff_t>(cdf.size()) - 1));
        reads[r] = d.spins(x);
        energies[r] = d.energy[x];
    }
    SampleSet ss;
    ss.variables = d.variables;
    ss.samples = detail::aggregate_reads(reads, energies);
    ss.total_reads = cfg.num_reads;
    ss.metadata = {"exact", cfg.seed, "enumeration", detail::elapsed_ms(t0)};
    return ss;
}

// ---------------------------------------------------------------------------
// simulated annealing

/// Inverse temperature of sweep t in [0, sweeps).
inline double beta_at(const SamplerConfig& cfg, std::size_t t) {
    if (cfg.sweeps == 1) return cfg.beta_max;
    const double f = static_cast<double>(t) / static_cast<double>(cfg.sweeps - 1);
    return cfg.geometric ? cfg.beta_min * std::pow(cfg.beta_max / cfg.beta_min, f)
                         : cfg.beta_min + f * (cfg.beta_max - cfg.beta_min);
}

/// Independent single-spin Metropolis restarts. Read r starts from uniform
/// random spins drawn from derive_seed(seed, r) and visits spins in index
/// order each sweep, so results do not depend on thread count.
inline SampleSet sa_sample(const IsingProblem& p, const SamplerConfig& cfg) {
    cfg.check();
    const auto t0 = std::chrono::steady_clock::now();
    const CompiledIsing c(p);
    const std::size_t n = c.size();
    std::vector<double> betas(cfg.sweeps);
    for (std::size_t t = 0; t < cfg.sweeps; ++t) betas[t] = beta_at(cfg, t);

    std::vector<std::vector<Spin>> reads(cfg.num_reads);
    std::vector<double> energies(cfg.num_reads);
    detail::parallel_for(cfg.num_reads, cfg.threads, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.seed, r));
        std::vector<Spin> s(n);
        for (auto& x : s) x = rng.bernoulli(0.5) ? 1 : -1;
        for (double beta : betas) {
            for (std::size_t i = 0; i < n; ++i) {
                const double delta = -2.0 * s[i] * c.field(i, s.data());
                if (delta <= 0.0 || rng.uniform() < std::exp(-beta * delta)) s[i] = static_cast<Spin>(-s[i]);
            }
        }
        energies[r] = c.energy(s.data());
        reads[r] = std::move(s);
    });
    SampleSet ss;
    ss.variables = c.variables;
    ss.samples = detail::aggregate_reads(reads, energies);
    ss.total_reads = cfg.num_reads;
    ss.metadata = {"sa", cfg.seed, cfg.schedule(), detail::elapsed_ms(t0)};
    return ss;
}

}  // namespace qbal
