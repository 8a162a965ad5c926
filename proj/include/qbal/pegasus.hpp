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
#include <array>
#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbal/error.hpp"

namespace qbal {

using Qubit = int;

/// Pegasus coordinate (u, w, k, z): orientation, perpendicular tile offset,
/// qubit offset inside the tile, parallel tile offset.
struct PegasusCoord {
    int u = 0;
    int w = 0;
    int k = 0;
    int z = 0;

    auto operator<=>(const PegasusCoord&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const PegasusCoord& c) {
    return os << '(' << c.u << ',' << c.w << ',' << c.k << ',' << c.z << ')';
}

namespace detail {
// Standard Pegasus shift lists (offset index 0), vertical then horizontal.
inline constexpr std::array<int, 12> kVerticalOffsets{2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
inline constexpr std::array<int, 12> kHorizontalOffsets{6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};
}  // namespace detail

/// The nominal (defect-free) Pegasus graph P_m over linear qubit indices
/// [0, 24 m (m-1)). Immutable once built; adjacency is stored as sorted
/// CSR neighbor lists.
class PegasusGraph {
  public:
    explicit PegasusGraph(int m) : m_(m) {
        if (m < 2) throw ParameterError("pegasus size m must be >= 2, got " + std::to_string(m));
        const std::size_t n = num_qubits();

        std::vector<std::pair<Qubit, Qubit>> edges;
        const int m1 = m_ - 1;
        auto add = [&](PegasusCoord a, PegasusCoord b) {
            Qubit x = to_linear(a), y = to_linear(b);
            if (x > y) std::swap(x, y);
            edges.emplace_back(x, y);
        };
        // external couplers: along z inside one qubit line
        for (int u = 0; u < 2; ++u)
            for (int w = 0; w < m_; ++w)
                for (int k = 0; k < 12; ++k)
                    for (int z = 0; z + 1 < m1; ++z) add({u, w, k, z}, {u, w, k, z + 1});
        // odd couplers: k-parity pairs
        for (int u = 0; u < 2; ++u)
            for (int w = 0; w < m_; ++w)
                for (int k = 0; k < 12; k += 2)
                    for (int z = 0; z < m1; ++z) add({u, w, k, z}, {u, w, k + 1, z});
        // internal couplers between orientations
        for (int w = 0; w < m_; ++w)
            for (int kk = 0; kk < 12; ++kk)
                for (int k = 0; k < 12; ++k)
                    for (int z = 0; z < m1; ++z) {
                        const int w2 = w - (k < detail::kHorizontalOffsets[kk] ? 1 : 0);
                        if (w2 < 0 || w2 >= m1) continue;
                        const int z2 = z + (kk < detail::kVerticalOffsets[k] ? 1 : 0);
                        add({0, w, k, z}, {1, z2, kk, w2});
                    }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        num_edges_ = edges.size();

        offsets_.assign(n + 1, 0);
        for (auto [a, b] : edges) {
            ++offsets_[a + 1];
            ++offsets_[b + 1];
        }
        for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
        adjacency_.resize(offsets_[n]);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (auto [a, b] : edges) {
            adjacency_[fill[a]++] = b;
            adjacency_[fill[b]++] = a;
        }
        for (std::size_t q = 0; q < n; ++q)
            std::sort(adjacency_.begin() + offsets_[q], adjacency_.begin() + offsets_[q + 1]);
    }

    int m() const noexcept { return m_; }
    std::size_t num_qubits() const noexcept { return 24u * m_ * (m_ - 1); }
    std::size_t num_edges() const noexcept { return num_edges_; }

    bool contains(Qubit q) const noexcept { return q >= 0 && static_cast<std::size_t>(q) < num_qubits(); }

    Qubit to_linear(const PegasusCoord& c) const {
        if (c.u < 0 || c.u > 1 || c.w < 0 || c.w >= m_ || c.k < 0 || c.k >= 12 || c.z < 0 || c.z >= m_ - 1) {
            throw IndexError("pegasus coordinate out of range for m=" + std::to_string(m_));
        }
        return ((c.u * m_ + c.w) * 12 + c.k) * (m_ - 1) + c.z;
    }

    PegasusCoord from_linear(Qubit q) const {
        check(q);
        PegasusCoord c;
        c.z = q % (m_ - 1);
        q /= (m_ - 1);
        c.k = q % 12;
        q /= 12;
        c.w = q % m_;
        c.u = q / m_;
        return c;
    }

    std::span<const Qubit> neighbors(Qubit q) const {
        check(q);
        return {adjacency_.data() + offsets_[q], offsets_[q + 1] - offsets_[q]};
    }

    std::size_t degree(Qubit q) const { return neighbors(q).size(); }

    bool is_edge(Qubit a, Qubit b) const {
        check(b);
        const auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    /// Unchecked adjacency query for hot loops; both indices must be valid.
    bool has_edge_unchecked(Qubit a, Qubit b) const noexcept {
        const auto* first = adjacency_.data() + offsets_[a];
        const auto* last = adjacency_.data() + offsets_[a + 1];
        return std::binary_search(first, last, b);
    }

    /// All couplers as (a, b) with a < b, ascending.
    std::vector<std::pair<Qubit, Qubit>> edges() const {
        std::vector<std::pair<Qubit, Qubit>> out;
        out.reserve(num_edges_);
        for (std::size_t a = 0; a < num_qubits(); ++a)
            for (auto b : neighbors(static_cast<Qubit>(a)))
                if (b > static_cast<Qubit>(a)) out.emplace_back(static_cast<Qubit>(a), b);
        return out;
    }

    friend bool operator==(const PegasusGraph& x, const PegasusGraph& y) {
        return x.m_ == y.m_ && x.offsets_ == y.offsets_ && x.adjacency_ == y.adjacency_;
    }

  private:
    void check(Qubit q) const {
        if (!contains(q)) {
            throw IndexError("qubit " + std::to_string(q) + " out of range [0, " + std::to_string(num_qubits()) +
                             ")");
        }
    }

    int m_;
    std::size_t num_edges_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Qubit> adjacency_;
};

inline PegasusGraph build_pegasus(int m = 16) { return PegasusGraph(m); }

/// Writes one "a b" line per coupler, a < b, ascending.
inline void write_edge_list(const PegasusGraph& g, std::ostream& os) {
    for (auto [a, b] : g.edges()) os << a << ' ' << b << '\n';
}

}  // namespace qbal
