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

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbal/embedding.hpp"
#include "qbal/error.hpp"
#include "qbal/random.hpp"
#include "qbal/rbm.hpp"

namespace qbal {

using Spin = std::int8_t;

/// Spin Hamiltonian E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset,
/// s_i in {-1, +1}. Negative J is ferromagnetic.
struct IsingProblem {
    std::map<Qubit, double> h;
    std::map<Coupler, double> J;  // keys normalized to (min, max)
    double offset = 0.0;

    /// Adds `value` to the coupling between a and b.
    void add_coupling(Qubit a, Qubit b, double value) {
        if (a == b) throw ParameterError("self-coupling on qubit " + std::to_string(a));
        J[{std::min(a, b), std::max(a, b)}] += value;
    }

    void add_bias(Qubit q, double value) { h[q] += value; }

    /// Sorted union of qubits appearing in h or J.
    std::vector<Qubit> variables() const {
        std::vector<Qubit> v;
        v.reserve(h.size() + 2 * J.size());
        for (const auto& [q, _] : h) v.push_back(q);
        for (const auto& [c, _] : J) {
            v.push_back(c.first);
            v.push_back(c.second);
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }
};

/// Dense-index form of an IsingProblem used by samplers: variables are
/// renumbered 0..n-1 in ascending qubit order, couplings stored as CSR.
struct CompiledIsing {
    std::vector<Qubit> variables;
    std::vector<double> h;
    std::vector<std::size_t> row;  // CSR offsets, size n+1
    std::vector<int> col;
    std::vector<double> val;
    double offset = 0.0;

    explicit CompiledIsing(const IsingProblem& p) : variables(p.variables()), offset(p.offset) {
        const std::size_t n = variables.size();
        auto index = [&](Qubit q) {
            return static_cast<int>(std::lower_bound(variables.begin(), variables.end(), q) - variables.begin());
        };
        h.assign(n, 0.0);
        for (const auto& [q, v] : p.h) h[index(q)] = v;
        row.assign(n + 1, 0);
        for (const auto& [c, _] : p.J) {
            ++row[index(c.first) + 1];
            ++row[index(c.second) + 1];
        }
        for (std::size_t i = 0; i < n; ++i) row[i + 1] += row[i];
        col.resize(row[n]);
        val.resize(row[n]);
        std::vector<std::size_t> fill(row.begin(), row.end() - 1);
        for (const auto& [c, v] : p.J) {
            const int a = index(c.first), b = index(c.second);
            col[fill[a]] = b;
            val[fill[a]++] = v;
            col[fill[b]] = a;
            val[fill[b]++] = v;
        }
    }

    std::size_t size() const { return variables.size(); }

    /// Local field h_i + sum_j J_ij s_j.
    double field(std::size_t i, const Spin* s) const {
        double f = h[i];
        for (std::size_t e = row[i]; e < row[i + 1]; ++e) f += val[e] * s[col[e]];
        return f;
    }

    double energy(const Spin* s) const {
        double e = offset;
        for (std::size_t i = 0; i < size(); ++i) {
            double pair = 0.0;
            for (std::size_t k = row[i]; k < row[i + 1]; ++k)
                if (static_cast<std::size_t>(col[k]) > i) pair += val[k] * s[col[k]];
            e += s[i] * (h[i] + pair);
        }
        return e;
    }
};

using SpinAssignment = std::map<Qubit, int>;

/// Energy of a full assignment. Every qubit of the problem must be
/// assigned, and every value must be -1 or +1.
inline double ising_energy(const IsingProblem& p, const SpinAssignment& s) {
    auto spin = [&](Qubit q) {
        auto it = s.find(q);
        if (it == s.end()) throw ParameterError("incomplete assignment: qubit " + std::to_string(q) + " has no spin");
        if (it->second != 1 && it->second != -1)
            throw ParameterError("spin of qubit " + std::to_string(q) + " is " + std::to_string(it->second) +
                                 ", expected -1 or +1");
        return it->second;
    };
    double e = p.offset;
    for (const auto& [q, v] : p.h) e += v * spin(q);
    for (const auto& [c, v] : p.J) e += v * spin(c.first) * spin(c.second);
    return e;
}

inline int spin_to_binary(int s) {
    if (s != 1 && s != -1) throw ParameterError("spin must be -1 or +1, got " + std::to_string(s));
    return (s + 1) / 2;
}

inline int binary_to_spin(int v) {
    if (v != 0 && v != 1) throw ParameterError("binary value must be 0 or 1, got " + std::to_string(v));
    return 2 * v - 1;
}

inline std::vector<int> spin_to_binary(const std::vector<int>& s) {
    std::vector<int> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = spin_to_binary(s[i]);
    return out;
}

inline std::vector<int> binary_to_spin(const std::vector<int>& v) {
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = binary_to_spin(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// sample sets

struct SpinSample {
    std::vector<Spin> spins;  // aligned with SampleSet::variables
    double energy = 0.0;
    std::size_t occurrences = 1;

    bool operator==(const SpinSample&) const = default;
};

struct SampleMetadata {
    std::string backend;
    std::uint64_t seed = 0;
    std::string schedule;
    double wall_ms = 0.0;
};

/// Reads of one sampling job.
struct SampleSet {
    std::vector<Qubit> variables;
    std::vector<SpinSample> samples;
    std::size_t total_reads = 0;
    SampleMetadata metadata;

    /// Same reads, ignoring metadata such as wall time.
    bool same_reads(const SampleSet& o) const {
        return variables == o.variables && samples == o.samples && total_reads == o.total_reads;
    }
};

/// Checks read counts, spin domains and stored energies against `p`.
/// Returns an empty string when the set is consistent.
inline std::string sampleset_violation(const IsingProblem& p, const SampleSet& ss, std::size_t expected_reads,
                                       double energy_tol) {
    std::size_t reads = 0;
    for (const auto& s : ss.samples) reads += s.occurrences;
    if (reads != ss.total_reads) return "occurrences sum to " + std::to_string(reads) + " but total_reads is " +
                                        std::to_string(ss.total_reads);
    if (ss.total_reads != expected_reads) {
        return "expected " + std::to_string(expected_reads) + " reads, got " + std::to_string(ss.total_reads);
    }
    if (!std::is_sorted(ss.variables.begin(), ss.variables.end())) return "variables not sorted";
    for (Qubit q : p.variables())
        if (!std::binary_search(ss.variables.begin(), ss.variables.end(), q))
            return "qubit " + std::to_string(q) + " missing from reads";
    for (std::size_t r = 0; r < ss.samples.size(); ++r) {
        const auto& s = ss.samples[r];
        if (s.spins.size() != ss.variables.size()) return "read " + std::to_string(r) + " has wrong width";
        SpinAssignment a;
        for (std::size_t i = 0; i < s.spins.size(); ++i) {
            if (s.spins[i] != 1 && s.spins[i] != -1) return "read " + std::to_string(r) + " has a non-spin value";
            a[ss.variables[i]] = s.spins[i];
        }
        const double e = ising_energy(p, a);
        if (!(std::abs(e - s.energy) <= energy_tol)) {
            std::ostringstream os;
            os.precision(17);
            os << "read " << r << " energy " << s.energy << " differs from recomputed " << e;
            return os.str();
        }
    }
    return {};
}

/// CSV form: header "q<idx>,...,energy,occurrences", one row per sample.
inline void write_sampleset_csv(const SampleSet& ss, std::ostream& os) {
    for (Qubit q : ss.variables) os << 'q' << q << ',';
    os << "energy,occurrences\n";
    os.precision(17);
    for (const auto& s : ss.samples) {
        for (Spin v : s.spins) os << static_cast<int>(v) << ',';
        os << s.energy << ',' << s.occurrences << '\n';
    }
}

inline nlohmann::ordered_json sampleset_sidecar(const SampleSet& ss) {
    nlohmann::ordered_json j;
    j["backend"] = ss.metadata.backend;
    j["seed"] = ss.metadata.seed;
    j["schedule"] = ss.metadata.schedule;
    j["total_reads"] = ss.total_reads;
    j["wall_ms"] = ss.metadata.wall_ms;
    return j;
}

inline SampleSet read_sampleset_csv(std::istream& is, const nlohmann::json& sidecar) {
    SampleSet ss;
    std::string line;
    if (!std::getline(is, line)) throw DataError("sample set file is empty");
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            if (cell == "energy" || cell == "occurrences") continue;
            if (cell.empty() || cell[0] != 'q') throw DataError("bad sample set column '" + cell + "'");
            ss.variables.push_back(std::stoi(cell.substr(1)));
        }
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        SpinSample s;
        for (std::size_t i = 0; i < ss.variables.size(); ++i) {
            if (!std::getline(rs, cell, ',')) throw DataError("short sample set row");
            s.spins.push_back(static_cast<Spin>(std::stoi(cell)));
        }
        if (!std::getline(rs, cell, ',')) throw DataError("sample set row lacks energy");
        s.energy = std::stod(cell);
        if (!std::getline(rs, cell, ',')) throw DataError("sample set row lacks occurrences");
        s.occurrences = std::stoull(cell);
        ss.samples.push_back(std::move(s));
    }
    ss.total_reads = sidecar.at("total_reads").get<std::size_t>();
    ss.metadata.backend = sidecar.value("backend", "");
    ss.metadata.seed = sidecar.value("seed", std::uint64_t{0});
    ss.metadata.schedule = sidecar.value("schedule", "");
    ss.metadata.wall_ms = sidecar.value("wall_ms", 0.0);
    return ss;
}

// ---------------------------------------------------------------------------
// RBM <-> Ising

/// Maps RBM parameters onto the embedded spin problem with v = (s+1)/2.
/// Logical fields h_v = -(b/2 + rowsum(W)/4), h_h = -(c/2 + colsum(W)/4)
/// and couplings -W/4 reproduce E_rbm up to the constant kept in `offset`.
/// Logical fields are split evenly over chain qubits, each logical coupling
/// sits on its inter-layer coupler, chain couplers get -chain_strength,
/// and everything is scaled by beta_eff.
inline IsingProblem rbm_to_ising(const RbmParams& params, const RbmEmbedding& emb, double chain_strength,
                                 double beta_eff) {
    params.check();
    if (!(chain_strength > 0)) throw ParameterError("chain_strength must be positive");
    if (!(beta_eff > 0)) throw ParameterError("beta_eff must be positive");
    if (params.n_visible() != emb.n_visible() || params.n_hidden() != emb.n_hidden()) {
        throw ParameterError("rbm is " + std::to_string(params.n_visible()) + "x" + std::to_string(params.n_hidden()) +
                             " but embedding is " + std::to_string(emb.n_visible()) + "x" +
                             std::to_string(emb.n_hidden()));
    }
    const Eigen::VectorXd row_sum = params.W.rowwise().sum();
    const Eigen::VectorXd col_sum = params.W.colwise().sum().transpose();

    IsingProblem p;
    for (int i = 0; i < emb.n_visible(); ++i) {
        const auto chain = emb.visible_chain(i);
        const double field = -(params.b[i] / 2.0 + row_sum[i] / 4.0) * beta_eff / chain.size();
        for (Qubit q : chain) p.h[q] += field;
    }
    for (int j = 0; j < emb.n_hidden(); ++j) {
        const auto chain = emb.hidden_chain(j);
        const double field = -(params.c[j] / 2.0 + col_sum[j] / 4.0) * beta_eff / chain.size();
        for (Qubit q : chain) p.h[q] += field;
    }
    const ChainIndex chains(emb);
    for (auto [a, b] : emb.interlayer_couplings) {
        const auto* ua = chains.find(a);
        const auto* ub = chains.find(b);
        if (!ua || !ub || ua->first == ub->first) {
            throw ValidationError("interlayer coupler (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") does not join a visible and a hidden chain");
        }
        const int i = ua->first == 0 ? ua->second : ub->second;
        const int j = ua->first == 0 ? ub->second : ua->second;
        p.add_coupling(a, b, -params.W(i, j) / 4.0 * beta_eff);
    }
    for (auto [a, b] : emb.chain_couplings) p.add_coupling(a, b, -chain_strength * beta_eff);
    p.offset = -(params.b.sum() / 2.0 + params.c.sum() / 2.0 + params.W.sum() / 4.0) * beta_eff;
    return p;
}

struct DecodedSamples {
    BinaryMatrix visible;
    BinaryMatrix hidden;
    double chain_break_rate = 0.0;
};

/// Majority-votes every chain of every read. Rows follow read order with
/// samples expanded by occurrences. A tied chain takes a coin flip from the
/// stream derive_seed(seed, expanded read index).
inline DecodedSamples decode_samples(const SampleSet& ss, const RbmEmbedding& emb, std::uint64_t seed) {
    auto column_of = [&](Qubit q) {
        auto it = std::lower_bound(ss.variables.begin(), ss.variables.end(), q);
        if (it == ss.variables.end() || *it != q)
            throw DataError("incomplete read: qubit " + std::to_string(q) + " missing from sample set");
        return static_cast<std::size_t>(it - ss.variables.begin());
    };
    auto columns = [&](const std::vector<Qubit>& starts, int len) {
        std::vector<std::vector<std::size_t>> out;
        for (Qubit s : starts) {
            std::vector<std::size_t> cols;
            for (int j = 0; j < len; ++j) cols.push_back(column_of(s + j));
            out.push_back(std::move(cols));
        }
        return out;
    };
    const auto vcols = columns(emb.visible_nodes, emb.visible_chain_length());
    const auto hcols = columns(emb.hidden_nodes, emb.hidden_chain_length());

    std::size_t rows = 0;
    for (const auto& s : ss.samples) rows += s.occurrences;
    DecodedSamples out;
    out.visible.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(vcols.size()));
    out.hidden.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(hcols.size()));

    std::size_t broken = 0, row = 0;
    for (const auto& s : ss.samples) {
        for (std::size_t rep = 0; rep < s.occurrences; ++rep, ++row) {
            Rng rng(derive_seed(seed, row));
            auto vote = [&](const std::vector<std::size_t>& cols) -> std::uint8_t {
                int sum = 0;
                for (auto c : cols) sum += s.spins[c];
                if (std::abs(sum) != static_cast<int>(cols.size())) ++broken;
                if (sum > 0) return 1;
                if (sum < 0) return 0;
                return rng.bernoulli(0.5) ? 1 : 0;
            };
            for (std::size_t i = 0; i < vcols.size(); ++i) out.visible(row, i) = vote(vcols[i]);
            for (std::size_t j = 0; j < hcols.size(); ++j) out.hidden(row, j) = vote(hcols[j]);
        }
    }
    const std::size_t pairs = rows * (vcols.size() + hcols.size());
    out.chain_break_rate = pairs ? static_cast<double>(broken) / static_cast<double>(pairs) : 0.0;
    return out;
}

}  // namespace qbal
