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
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbal/error.hpp"
#include "qbal/pegasus.hpp"

namespace qbal {

using Coupler = std::pair<Qubit, Qubit>;

/// Inputs of the parametric RBM placement. Visible chain starts are
/// startv + n_periodicity*x + z*periodicity_v and hidden chain starts are
/// starto + n_periodicity*x + z*periodicity_h, for segment z and slot x.
struct EmbeddingParams {
    int n_visible = 0;
    int n_hidden = 0;
    int periodicity_v = 0;
    int periodicity_h = 0;
    int n_periodicity = 1;
    int startv = 0;
    int starto = 0;

    /// Qubits per visible chain (one per hidden segment).
    int visible_chain_length() const { return n_periodicity > 0 ? n_hidden / n_periodicity : 0; }
    /// Qubits per hidden chain (one per visible segment).
    int hidden_chain_length() const { return n_periodicity > 0 ? n_visible / n_periodicity : 0; }

    void check() const {
        if (n_visible < 0 || n_hidden < 0) throw ParameterError("unit counts must be non-negative");
        if (n_periodicity < 1) throw ParameterError("n_periodicity must be >= 1");
        if (periodicity_v < 0 || periodicity_h < 0 || startv < 0 || starto < 0)
            throw ParameterError("strides and start indices must be non-negative");
        if (n_visible % n_periodicity != 0 || n_hidden % n_periodicity != 0) {
            throw ParameterError("n_periodicity=" + std::to_string(n_periodicity) + " must divide n_visible=" +
                                 std::to_string(n_visible) + " and n_hidden=" + std::to_string(n_hidden));
        }
    }

    bool operator==(const EmbeddingParams&) const = default;
};

/// Logical-to-physical placement of an RBM. Visible chain i occupies qubits
/// [visible_nodes[i], visible_nodes[i] + visible_chain_length()), likewise
/// for hidden chains.
struct RbmEmbedding {
    EmbeddingParams params;
    std::vector<Qubit> visible_nodes;
    std::vector<Qubit> hidden_nodes;
    std::vector<Coupler> chain_couplings;
    std::vector<Coupler> interlayer_couplings;

    int visible_chain_length() const { return params.visible_chain_length(); }
    int hidden_chain_length() const { return params.hidden_chain_length(); }
    int n_visible() const { return static_cast<int>(visible_nodes.size()); }
    int n_hidden() const { return static_cast<int>(hidden_nodes.size()); }

    std::vector<Qubit> visible_chain(int i) const { return run(visible_nodes.at(i), visible_chain_length()); }
    std::vector<Qubit> hidden_chain(int j) const { return run(hidden_nodes.at(j), hidden_chain_length()); }

    /// Sparse coupling matrix with -1 on every chain coupler.
    std::map<Coupler, double> coupling_matrix() const {
        std::map<Coupler, double> j;
        for (auto [a, b] : chain_couplings) j[{std::min(a, b), std::max(a, b)}] = -1.0;
        return j;
    }

    bool operator==(const RbmEmbedding&) const = default;

  private:
    static std::vector<Qubit> run(Qubit start, int len) {
        std::vector<Qubit> out(static_cast<std::size_t>(std::max(len, 0)));
        std::iota(out.begin(), out.end(), start);
        return out;
    }
};

namespace detail {
inline void check_index(std::int64_t q, std::size_t num_qubits) {
    if (q < 0 || static_cast<std::uint64_t>(q) >= num_qubits) {
        throw IndexError("embedding overflow: qubit index " + std::to_string(q) + " >= num_qubits " +
                         std::to_string(num_qubits));
    }
}
}  // namespace detail

/// Places an n_visible x n_hidden RBM as qubit chains. A literal
/// transcription of the placement loops: it emits couplers without
/// consulting the hardware graph (see validate_embedding).
inline RbmEmbedding generate_embedding(const EmbeddingParams& p, std::size_t num_qubits) {
    p.check();
    const int np = p.n_periodicity;
    const int hv = p.hidden_chain_length();   // H_V
    const int hh = p.visible_chain_length();  // H_H

    RbmEmbedding e;
    e.params = p;
    e.visible_nodes.reserve(p.n_visible);
    e.hidden_nodes.reserve(p.n_hidden);
    e.chain_couplings.reserve(static_cast<std::size_t>(p.n_visible) * std::max(hh - 1, 0) +
                              static_cast<std::size_t>(p.n_hidden) * std::max(hv - 1, 0));
    e.interlayer_couplings.reserve(static_cast<std::size_t>(p.n_visible) * p.n_hidden);

    for (int z = 0; z < hv; ++z) {
        for (int x = 0; x < np; ++x) {
            const std::int64_t n = std::int64_t{p.startv} + std::int64_t{np} * x + std::int64_t{z} * p.periodicity_v;
            detail::check_index(n + std::max(hh - 1, 0), num_qubits);
            e.visible_nodes.push_back(static_cast<Qubit>(n));
            for (int j = 0; j + 1 < hh; ++j)
                e.chain_couplings.emplace_back(static_cast<Qubit>(n + j), static_cast<Qubit>(n + j + 1));
        }
    }
    for (int z = 0; z < hh; ++z) {
        for (int x = 0; x < np; ++x) {
            const std::int64_t q = std::int64_t{p.starto} + std::int64_t{np} * x + std::int64_t{z} * p.periodicity_h;
            detail::check_index(q + std::max(hv - 1, 0), num_qubits);
            e.hidden_nodes.push_back(static_cast<Qubit>(q));
            for (int j = 0; j + 1 < hv; ++j)
                e.chain_couplings.emplace_back(static_cast<Qubit>(q + j), static_cast<Qubit>(q + j + 1));
        }
    }
    // x-th qubit of visible chain (segment y, slot t) meets the y-th qubit of
    // hidden chain (segment x, slot k)
    for (int x = 0; x < hh; ++x) {
        for (int y = 0; y < hv; ++y) {
            for (int t = 0; t < np; ++t) {
                const std::int64_t n = std::int64_t{p.startv} + std::int64_t{np} * t +
                                       std::int64_t{y} * p.periodicity_v + x;
                for (int k = 0; k < np; ++k) {
                    const std::int64_t q = std::int64_t{p.starto} + std::int64_t{np} * k +
                                           std::int64_t{x} * p.periodicity_h + y;
                    e.interlayer_couplings.emplace_back(static_cast<Qubit>(n), static_cast<Qubit>(q));
                }
            }
        }
    }
    return e;
}

inline RbmEmbedding generate_embedding(const EmbeddingParams& p, const PegasusGraph& g) {
    return generate_embedding(p, g.num_qubits());
}

/// Maps each physical qubit to its (layer, logical unit). Layer 0 is visible.
struct ChainIndex {
    std::map<Qubit, std::pair<int, int>> owner;
    std::vector<std::pair<Qubit, std::pair<std::pair<int, int>, std::pair<int, int>>>> overlaps;

    explicit ChainIndex(const RbmEmbedding& e) {
        auto claim = [&](Qubit q, int layer, int unit) {
            auto [it, fresh] = owner.emplace(q, std::make_pair(layer, unit));
            if (!fresh) overlaps.push_back({q, {it->second, {layer, unit}}});
        };
        for (int i = 0; i < e.n_visible(); ++i)
            for (Qubit q : e.visible_chain(i)) claim(q, 0, i);
        for (int j = 0; j < e.n_hidden(); ++j)
            for (Qubit q : e.hidden_chain(j)) claim(q, 1, j);
    }

    const std::pair<int, int>* find(Qubit q) const {
        auto it = owner.find(q);
        return it == owner.end() ? nullptr : &it->second;
    }
};

inline std::string unit_name(std::pair<int, int> u) { return (u.first == 0 ? "v" : "h") + std::to_string(u.second); }

struct BadCoupler {
    Coupler pair;
    std::string kind;  // "chain" or "interlayer"
};

struct ChainOverlap {
    Qubit qubit;
    std::string first;
    std::string second;
};

struct ValidationReport {
    std::vector<BadCoupler> bad_couplers;
    std::vector<ChainOverlap> chain_overlaps;
    std::vector<Qubit> defect_hits;
    std::vector<std::string> structure_errors;
    std::map<int, std::size_t> visible_chain_lengths;
    std::map<int, std::size_t> hidden_chain_lengths;
    bool valid = true;

    std::size_t violations() const {
        return bad_couplers.size() + chain_overlaps.size() + defect_hits.size() + structure_errors.size();
    }

    /// Short description of the first violation, empty when valid.
    std::string first_violation() const {
        if (!bad_couplers.empty()) {
            const auto& b = bad_couplers.front();
            return b.kind + " coupler (" + std::to_string(b.pair.first) + ", " + std::to_string(b.pair.second) +
                   ") is not a graph edge";
        }
        if (!chain_overlaps.empty()) {
            const auto& o = chain_overlaps.front();
            return "qubit " + std::to_string(o.qubit) + " shared by " + o.first + " and " + o.second;
        }
        if (!defect_hits.empty()) return "defective qubit " + std::to_string(defect_hits.front()) + " used";
        if (!structure_errors.empty()) return structure_errors.front();
        return {};
    }
};

/// Soundness gate for an embedding on a concrete graph: every coupler must
/// be a graph edge, chains must be disjoint, the chain/inter-layer coupler
/// sets must match the chain layout, and each logical (visible, hidden)
/// pair must have exactly one physical coupler. Indices outside the graph
/// are a hard IndexError rather than a reported violation.
inline ValidationReport validate_embedding(const PegasusGraph& g, const RbmEmbedding& e,
                                           const std::vector<Qubit>& defects = {}) {
    ValidationReport r;
    auto check_range = [&](Qubit q) {
        if (!g.contains(q)) {
            throw IndexError("embedding qubit " + std::to_string(q) + " outside graph of " +
                             std::to_string(g.num_qubits()) + " qubits");
        }
    };
    const int hh = e.visible_chain_length();
    const int hv = e.hidden_chain_length();
    for (Qubit s : e.visible_nodes) {
        check_range(s);
        if (hh > 0) check_range(s + hh - 1);
    }
    for (Qubit s : e.hidden_nodes) {
        check_range(s);
        if (hv > 0) check_range(s + hv - 1);
    }
    for (auto [a, b] : e.chain_couplings) {
        check_range(a);
        check_range(b);
    }
    for (auto [a, b] : e.interlayer_couplings) {
        check_range(a);
        check_range(b);
    }

    if (e.n_visible() != e.params.n_visible || e.n_hidden() != e.params.n_hidden) {
        r.structure_errors.push_back("chain count does not match n_visible/n_hidden");
    }
    if (!e.visible_nodes.empty()) r.visible_chain_lengths[hh] = e.visible_nodes.size();
    if (!e.hidden_nodes.empty()) r.hidden_chain_lengths[hv] = e.hidden_nodes.size();

    const ChainIndex chains(e);
    for (const auto& [q, units] : chains.overlaps)
        r.chain_overlaps.push_back({q, unit_name(units.first), unit_name(units.second)});

    std::set<Qubit> defect_set(defects.begin(), defects.end());
    for (const auto& [q, unit] : chains.owner)
        if (defect_set.count(q)) r.defect_hits.push_back(q);

    // chain couplers must be exactly the consecutive pairs of every chain
    std::set<Coupler> expected_chain;
    auto add_chain = [&](Qubit s, int len) {
        for (int j = 0; j + 1 < len; ++j) expected_chain.insert({s + j, s + j + 1});
    };
    for (Qubit s : e.visible_nodes) add_chain(s, hh);
    for (Qubit s : e.hidden_nodes) add_chain(s, hv);
    std::set<Coupler> seen_chain;
    for (auto c : e.chain_couplings) {
        const Coupler key{std::min(c.first, c.second), std::max(c.first, c.second)};
        if (!g.is_edge(c.first, c.second)) r.bad_couplers.push_back({c, "chain"});
        if (!expected_chain.count(key)) {
            r.structure_errors.push_back("chain coupler (" + std::to_string(c.first) + "," +
                                         std::to_string(c.second) + ") does not join consecutive chain qubits");
        }
        seen_chain.insert(key);
    }
    for (const auto& c : expected_chain) {
        if (!seen_chain.count(c)) {
            r.structure_errors.push_back("chain link (" + std::to_string(c.first) + "," + std::to_string(c.second) +
                                         ") missing from chain couplings");
        }
    }

    std::vector<int> pair_count(static_cast<std::size_t>(e.n_visible()) * e.n_hidden(), 0);
    for (auto c : e.interlayer_couplings) {
        if (!g.is_edge(c.first, c.second)) r.bad_couplers.push_back({c, "interlayer"});
        const auto* a = chains.find(c.first);
        const auto* b = chains.find(c.second);
        if (!a || !b || a->first != 0 || b->first != 1) {
            r.structure_errors.push_back("interlayer coupler (" + std::to_string(c.first) + "," +
                                         std::to_string(c.second) + ") does not join a visible and a hidden chain");
            continue;
        }
        ++pair_count[static_cast<std::size_t>(a->second) * e.n_hidden() + b->second];
    }
    std::size_t missing = 0, duplicated = 0;
    for (int n : pair_count) {
        missing += n == 0;
        duplicated += n > 1;
    }
    if (missing) r.structure_errors.push_back(std::to_string(missing) + " logical pairs have no coupler");
    if (duplicated) r.structure_errors.push_back(std::to_string(duplicated) + " logical pairs have several couplers");

    r.valid = r.violations() == 0;
    return r;
}

struct EmbeddingStats {
    std::size_t qubits_used = 0;
    int max_chain_length = 0;
    std::map<int, std::size_t> chain_length_histogram;

    std::size_t chains_longer_than(int t) const {
        std::size_t n = 0;
        for (auto [len, count] : chain_length_histogram)
            if (len > t) n += count;
        return n;
    }
};

inline EmbeddingStats embedding_stats(const RbmEmbedding& e) {
    EmbeddingStats s;
    std::set<Qubit> used;
    auto tally = [&](const std::vector<Qubit>& starts, int len) {
        for (Qubit q0 : starts) {
            for (int j = 0; j < len; ++j) used.insert(q0 + j);
            s.chain_length_histogram[len] += 1;
            s.max_chain_length = std::max(s.max_chain_length, len);
        }
    };
    tally(e.visible_nodes, e.visible_chain_length());
    tally(e.hidden_nodes, e.hidden_chain_length());
    s.qubits_used = used.size();
    return s;
}

// ---------------------------------------------------------------------------
// calibration

struct CalibrationStats {
    std::vector<int> n_periodicity_tried;
    std::vector<int> n_periodicity_skipped;
    std::uint64_t start_pairs = 0;
    std::uint64_t tuples_checked = 0;
    std::string search_order =
        "n_periodicity asc, startv asc over [0,num_qubits), starto asc over neighbors(startv), "
        "periodicity_v asc, periodicity_h asc";
};

struct Calibration {
    EmbeddingParams params;
    CalibrationStats stats;
};

class NoValidEmbedding : public CapacityError {
  public:
    NoValidEmbedding(const std::string& what, CalibrationStats stats)
        : CapacityError(what), stats_(std::move(stats)) {}
    const CalibrationStats& stats() const noexcept { return stats_; }

  private:
    CalibrationStats stats_;
};

namespace detail {

// Allocation-free soundness check used by the calibration search. Mirrors
// validate_embedding for embeddings produced by generate_embedding.
class PlacementChecker {
  public:
    PlacementChecker(const PegasusGraph& g, const std::vector<Qubit>& defects)
        : g_(g), n_(static_cast<std::int64_t>(g.num_qubits())), blocked_(g.num_qubits(), 0),
          stamp_(g.num_qubits(), 0) {
        for (Qubit q : defects)
            if (g.contains(q)) blocked_[q] = 1;
    }

    bool ok(const EmbeddingParams& p) {
        const int np = p.n_periodicity, hv = p.hidden_chain_length(), hh = p.visible_chain_length();
        if (++generation_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            generation_ = 1;
        }
        if (!layer_ok(p.startv, p.periodicity_v, hv, np, hh)) return false;
        if (!layer_ok(p.starto, p.periodicity_h, hh, np, hv)) return false;
        for (int x = 0; x < hh; ++x)
            for (int y = 0; y < hv; ++y)
                for (int t = 0; t < np; ++t) {
                    const std::int64_t a = std::int64_t{p.startv} + std::int64_t{np} * t +
                                           std::int64_t{y} * p.periodicity_v + x;
                    for (int k = 0; k < np; ++k) {
                        const std::int64_t b = std::int64_t{p.starto} + std::int64_t{np} * k +
                                               std::int64_t{x} * p.periodicity_h + y;
                        if (!g_.has_edge_unchecked(static_cast<Qubit>(a), static_cast<Qubit>(b))) return false;
                    }
                }
        return true;
    }

  private:
    // chains of one layer: in range, defect-free, linked by edges, disjoint
    bool layer_ok(int start, int stride, int segments, int np, int len) {
        for (int z = 0; z < segments; ++z)
            for (int x = 0; x < np; ++x) {
                const std::int64_t s = std::int64_t{start} + std::int64_t{np} * x + std::int64_t{z} * stride;
                if (s < 0 || s + len > n_) return false;
                for (int j = 0; j < len; ++j) {
                    const auto q = static_cast<std::size_t>(s + j);
                    if (blocked_[q] || stamp_[q] == generation_) return false;
                    stamp_[q] = generation_;
                    if (j > 0 && !g_.has_edge_unchecked(static_cast<Qubit>(q - 1), static_cast<Qubit>(q))) return false;
                }
            }
        return true;
    }

    const PegasusGraph& g_;
    std::int64_t n_;
    std::vector<char> blocked_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
};

}  // namespace detail

/// Searches for placement parameters whose generated embedding is sound on
/// `g` and avoids `defects`. The search is exhaustive over
/// (n_periodicity, startv, starto, periodicity_v, periodicity_h) in
/// ascending lexicographic order and returns the first hit. Candidate
/// sets for starto and the strides are narrowed with necessary conditions
/// only (the first couplers of the layout must be graph edges), so the
/// first hit equals that of a naive scan.
inline Calibration calibrate_params(const PegasusGraph& g, int n_visible, int n_hidden,
                                    std::vector<int> n_periodicity_candidates, const std::vector<Qubit>& defects = {}) {
    if (n_visible < 1 || n_hidden < 1) throw ParameterError("calibration needs at least one unit per layer");
    if (n_periodicity_candidates.empty()) {
        for (int d = 1; d <= std::min(n_visible, n_hidden); ++d)
            if (n_visible % d == 0 && n_hidden % d == 0) n_periodicity_candidates.push_back(d);
    }
    std::sort(n_periodicity_candidates.begin(), n_periodicity_candidates.end());
    n_periodicity_candidates.erase(std::unique(n_periodicity_candidates.begin(), n_periodicity_candidates.end()),
                                   n_periodicity_candidates.end());

    std::size_t max_degree = 0;
    for (std::size_t q = 0; q < g.num_qubits(); ++q) max_degree = std::max(max_degree, g.degree(static_cast<Qubit>(q)));

    CalibrationStats stats;
    detail::PlacementChecker checker(g, defects);
    const auto nq = static_cast<std::int64_t>(g.num_qubits());

    for (int np : n_periodicity_candidates) {
        if (np < 1 || n_visible % np || n_hidden % np) {
            stats.n_periodicity_skipped.push_back(np);
            continue;
        }
        const int hv = n_visible / np, hh = n_hidden / np;
        const std::int64_t qubits = std::int64_t{n_visible} * hh + std::int64_t{n_hidden} * hv;
        // every chain-end qubit carries np inter-layer couplers plus a chain link
        const std::size_t per_qubit = static_cast<std::size_t>(np) + ((hv > 1 || hh > 1) ? 1 : 0);
        if (qubits > nq || per_qubit > max_degree) {
            stats.n_periodicity_skipped.push_back(np);
            continue;
        }
        stats.n_periodicity_tried.push_back(np);

        std::vector<int> pv_set, ph_set;
        for (Qubit sv = 0; sv < nq; ++sv) {
            for (Qubit so : g.neighbors(sv)) {
                ++stats.start_pairs;
                pv_set.clear();
                ph_set.clear();
                if (hv == 1) {
                    pv_set.push_back(0);
                } else {
                    if (so + 1 >= nq) continue;
                    for (Qubit q : g.neighbors(so + 1))
                        if (q > sv) pv_set.push_back(q - sv);
                }
                if (hh == 1) {
                    ph_set.push_back(0);
                } else {
                    if (sv + 1 >= nq) continue;
                    for (Qubit q : g.neighbors(sv + 1))
                        if (q > so) ph_set.push_back(q - so);
                }
                for (int pv : pv_set)
                    for (int ph : ph_set) {
                        EmbeddingParams p{n_visible, n_hidden, pv, ph, np, sv, so};
                        ++stats.tuples_checked;
                        if (checker.ok(p)) return {p, stats};
                    }
            }
        }
    }
    std::ostringstream msg;
    msg << "no valid embedding for " << n_visible << "x" << n_hidden << " on P" << g.m() << ": tried n_periodicity {";
    for (std::size_t i = 0; i < stats.n_periodicity_tried.size(); ++i)
        msg << (i ? "," : "") << stats.n_periodicity_tried[i];
    msg << "}, skipped {";
    for (std::size_t i = 0; i < stats.n_periodicity_skipped.size(); ++i)
        msg << (i ? "," : "") << stats.n_periodicity_skipped[i];
    msg << "} (capacity/degree bound), " << stats.start_pairs << " start pairs, " << stats.tuples_checked
        << " tuples checked";
    throw NoValidEmbedding(msg.str(), stats);
}

// ---------------------------------------------------------------------------
// JSON interchange

inline nlohmann::ordered_json to_json(const EmbeddingParams& p) {
    nlohmann::ordered_json j;
    j["n_visible"] = p.n_visible;
    j["n_hidden"] = p.n_hidden;
    j["periodicity_v"] = p.periodicity_v;
    j["periodicity_h"] = p.periodicity_h;
    j["n_periodicity"] = p.n_periodicity;
    j["startv"] = p.startv;
    j["starto"] = p.starto;
    return j;
}

template <typename Json>
EmbeddingParams params_from_json(const Json& j) {
    try {
        EmbeddingParams p;
        p.n_visible = j.at("n_visible").template get<int>();
        p.n_hidden = j.at("n_hidden").template get<int>();
        p.periodicity_v = j.at("periodicity_v").template get<int>();
        p.periodicity_h = j.at("periodicity_h").template get<int>();
        p.n_periodicity = j.at("n_periodicity").template get<int>();
        p.startv = j.at("startv").template get<int>();
        p.starto = j.at("starto").template get<int>();
        return p;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("malformed embedding params: ") + ex.what());
    }
}

inline nlohmann::ordered_json to_json(const RbmEmbedding& e) {
    auto pairs = [](const std::vector<Coupler>& v) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (auto [x, y] : v) a.push_back({x, y});
        return a;
    };
    nlohmann::ordered_json j;
    j["params"] = to_json(e.params);
    j["visible_nodes"] = e.visible_nodes;
    j["hidden_nodes"] = e.hidden_nodes;
    j["chain_couplings"] = pairs(e.chain_couplings);
    j["interlayer_couplings"] = pairs(e.interlayer_couplings);
    return j;
}

template <typename Json>
RbmEmbedding embedding_from_json(const Json& j) {
    try {
        RbmEmbedding e;
        e.params = params_from_json(j.at("params"));
        e.visible_nodes = j.at("visible_nodes").template get<std::vector<Qubit>>();
        e.hidden_nodes = j.at("hidden_nodes").template get<std::vector<Qubit>>();
        auto pairs = [](const Json& a) {
            std::vector<Coupler> out;
            for (const auto& p : a) {
                if (!p.is_array() || p.size() != 2) throw ValidationError("coupler must be a pair of integers");
                out.emplace_back(p[0].template get<Qubit>(), p[1].template get<Qubit>());
            }
            return out;
        };
        e.chain_couplings = pairs(j.at("chain_couplings"));
        e.interlayer_couplings = pairs(j.at("interlayer_couplings"));
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("malformed embedding file: ") + ex.what());
    }
}

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
    nlohmann::ordered_json j;
    j["valid"] = r.valid;
    nlohmann::ordered_json bad = nlohmann::ordered_json::array();
    for (const auto& b : r.bad_couplers) bad.push_back({{"pair", {b.pair.first, b.pair.second}}, {"kind", b.kind}});
    j["bad_couplers"] = bad;
    nlohmann::ordered_json ov = nlohmann::ordered_json::array();
    for (const auto& o : r.chain_overlaps) ov.push_back({{"qubit", o.qubit}, {"first", o.first}, {"second", o.second}});
    j["chain_overlaps"] = ov;
    j["defect_hits"] = r.defect_hits;
    j["structure_errors"] = r.structure_errors;
    auto hist = [](const std::map<int, std::size_t>& h) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (auto [len, n] : h) o[std::to_string(len)] = n;
        return o;
    };
    j["visible_chain_lengths"] = hist(r.visible_chain_lengths);
    j["hidden_chain_lengths"] = hist(r.hidden_chain_lengths);
    return j;
}

}  // namespace qbal
