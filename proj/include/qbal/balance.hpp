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
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbal/data.hpp"
#include "qbal/embedding.hpp"
#include "qbal/error.hpp"
#include "qbal/pegasus.hpp"
#include "qbal/qrbm.hpp"
#include "qbal/random.hpp"
#include "qbal/rbm.hpp"
#include "qbal/samplers.hpp"

namespace qbal {

using ClassCounts = std::pair<std::size_t, std::size_t>;  // (class 0, class 1)

struct BalanceResult {
    TabularDataset dataset;
    std::string method;
    std::size_t synthetic = 0;
    ClassCounts before{};
    ClassCounts after{};
    double wall_ms = 0.0;
    // qrbm only
    double train_ms = 0.0;
    double generate_ms = 0.0;
    std::optional<RbmParams> model{};
    std::optional<TrainingLog> training_log{};
    double chain_break_rate = 0.0;
};

/// Rows the smaller class is short of the larger one.
inline std::size_t balance_deficit(std::size_t majority, std::size_t minority) {
    return majority > minority ? majority - minority : minority - majority;
}

namespace detail {

struct MinorityView {
    int cls = 1;
    std::vector<std::size_t> rows;
    std::size_t deficit = 0;
};

inline MinorityView minority_of(const TabularDataset& ds) {
    const auto [n0, n1] = ds.class_counts();
    if (n0 == 0 || n1 == 0) throw ParameterError("balancing needs rows of both classes");
    MinorityView m;
    m.cls = n1 <= n0 ? 1 : 0;
    for (std::size_t r = 0; r < ds.rows(); ++r)
        if (ds.binary_class(r) == m.cls) m.rows.push_back(r);
    m.deficit = balance_deficit(n0, n1);
    return m;
}

/// Most frequent original label among `rows`; ties go to the label seen first.
inline std::string dominant_label(const TabularDataset& ds, const std::vector<std::size_t>& rows) {
    std::map<std::string, std::size_t> count;
    std::string best;
    std::size_t best_n = 0;
    for (auto r : rows)
        if (++count[ds.labels[r]] > best_n) {
            best_n = count[ds.labels[r]];
            best = ds.labels[r];
        }
    return best;
}

inline void finish(BalanceResult& res, std::chrono::steady_clock::time_point t0) {
    res.after = res.dataset.class_counts();
    res.wall_ms = elapsed_ms(t0);
}

}  // namespace detail

/// Appends copies of minority rows drawn uniformly with replacement.
inline BalanceResult random_oversample(const TabularDataset& ds, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = detail::minority_of(ds);
    BalanceResult res{ds, "random_oversample", m.deficit, ds.class_counts()};
    Rng rng(seed);
    for (std::size_t i = 0; i < m.deficit; ++i) {
        const auto r = m.rows[rng.below(m.rows.size())];
        res.dataset.append_row(ds.row(r), ds.labels[r]);
    }
    detail::finish(res, t0);
    return res;
}

/// k nearest minority neighbours of every minority row, by Euclidean
/// distance on features min-max scaled over the whole dataset. Ties keep
/// the lower row index.
inline std::vector<std::vector<std::size_t>> minority_neighbors(const TabularDataset& ds,
                                                                const std::vector<std::size_t>& rows, int k) {
    std::vector<double> lo(ds.cols(), std::numeric_limits<double>::infinity());
    std::vector<double> span(ds.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < ds.rows(); ++r)
        for (std::size_t c = 0; c < ds.cols(); ++c) {
            lo[c] = std::min(lo[c], ds.at(r, c));
            span[c] = std::max(span[c], ds.at(r, c));
        }
    for (std::size_t c = 0; c < ds.cols(); ++c) span[c] = span[c] > lo[c] ? span[c] - lo[c] : 1.0;

    const std::size_t n = rows.size(), d = ds.cols();
    std::vector<double> z(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) z[i * d + c] = (ds.at(rows[i], c) - lo[c]) / span[c];

    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double t = z[i * d + c] - z[j * d + c];
                s += t * t;
            }
            dist[j] = {j == i ? std::numeric_limits<double>::infinity() : s, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int t = 0; t < k; ++t) out[i].push_back(dist[static_cast<std::size_t>(t)].second);
    }
    return out;
}

/// SMOTE: each synthetic row is x + lambda (x' - x) for a uniformly chosen
/// minority row x, one of its k nearest minority neighbours x' and
/// lambda uniform in (0, 1). The synthetic row takes x's label.
inline BalanceResult smote(const TabularDataset& ds, int k, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    if (k < 1) throw ParameterError("smote needs k >= 1");
    const auto m = detail::minority_of(ds);
    if (m.rows.size() <= static_cast<std::size_t>(k)) {
        throw ParameterError("smote needs more than k=" + std::to_string(k) + " minority rows, got " +
                             std::to_string(m.rows.size()) + "; use k <= " + std::to_string(m.rows.size() - 1));
    }
    BalanceResult res{ds, "smote", m.deficit, ds.class_counts()};
    if (m.deficit > 0) {
        const auto nn = minority_neighbors(ds, m.rows, k);
        Rng rng(seed);
        std::vector<double> v(ds.cols());
        for (std::size_t s = 0; s < m.deficit; ++s) {
            const auto i = rng.below(m.rows.size());
            const auto j = nn[i][rng.below(static_cast<std::uint64_t>(k))];
            double lambda = rng.uniform();
            while (lambda == 0.0) lambda = rng.uniform();
            const auto x = ds.row(m.rows[i]);
            const auto y = ds.row(m.rows[j]);
            for (std::size_t c = 0; c < v.size(); ++c) v[c] = x[c] + lambda * (y[c] - x[c]);
            res.dataset.append_row(v, ds.labels[m.rows[i]]);
        }
    }
    detail::finish(res, t0);
    return res;
}

struct QrbmBalanceConfig {
    QrbmTrainerConfig trainer;
    GenerationConfig generation;
    bool dither = true;  // decode scaled features with decode_row_dithered
};

namespace detail {
inline void require_codec_match(const TabularDataset& ds, const BitCodec& codec, const RbmEmbedding& emb) {
    if (ds.feature_names != codec.feature_names())
        throw ParameterError("dataset columns do not match the codec features");
    if (codec.total_bits() != emb.params.n_visible) {
        throw ParameterError("codec width " + std::to_string(codec.total_bits()) + " differs from " +
                             std::to_string(emb.params.n_visible) + " visible units");
    }
}
}  // namespace detail

/// Codec bits of the minority rows, in row order.
inline BinaryMatrix encode_minority(const TabularDataset& ds, const BitCodec& codec, std::size_t* clipped = nullptr) {
    const auto m = detail::minority_of(ds);
    BinaryMatrix bits(static_cast<Eigen::Index>(m.rows.size()), codec.total_bits());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        const auto enc = encode_row(codec, ds.row(m.rows[i]), clipped);
        for (std::size_t b = 0; b < enc.size(); ++b)
            bits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = enc[b];
    }
    return bits;
}

/// Generates the deficit from a trained model and appends the decoded rows
/// (clipped to each feature's codec range) under the minority's dominant
/// label. Dithering draws from derive_seed(generation seed, stage::decode).
inline BalanceResult qrbm_oversample(const TabularDataset& ds, const BitCodec& codec, const RbmEmbedding& emb,
                                     const PegasusGraph& graph, const RbmParams& model, const GenerationConfig& gen,
                                     bool dither = true, const SampleFn& sampler = sa_sample) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::require_codec_match(ds, codec, emb);
    const auto m = detail::minority_of(ds);
    BalanceResult res{ds, "qrbm", m.deficit, ds.class_counts()};
    if (m.deficit > 0) {
        const auto synth = generate_synthetic(model, emb, graph, gen, m.deficit, sampler);
        const std::string label = detail::dominant_label(ds, m.rows);
        std::vector<std::uint8_t> row(static_cast<std::size_t>(codec.total_bits()));
        Rng jitter(derive_seed(gen.sampler.seed, stage::decode));
        for (Eigen::Index r = 0; r < synth.visible.rows(); ++r) {
            for (std::size_t b = 0; b < row.size(); ++b) row[b] = synth.visible(r, static_cast<Eigen::Index>(b));
            res.dataset.append_row(dither ? decode_row_dithered(codec, row, jitter) : decode_row(codec, row), label);
        }
        res.chain_break_rate = synth.chain_break_rate;
    }
    res.model = model;
    detail::finish(res, t0);
    res.generate_ms = res.wall_ms;
    return res;
}

/// Encodes the minority rows, trains a QRBM on them and balances with
/// qrbm_oversample. The dataset columns must be exactly the codec features.
inline BalanceResult qrbm_balance(const TabularDataset& ds, const BitCodec& codec, const RbmEmbedding& emb,
                                  const PegasusGraph& graph, const QrbmBalanceConfig& cfg,
                                  const SampleFn& sampler = sa_sample) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::require_codec_match(ds, codec, emb);
    auto trained = train_qrbm(encode_minority(ds, codec), cfg.trainer, emb, graph, sampler);
    const double train_ms = detail::elapsed_ms(t0);
    auto res = qrbm_oversample(ds, codec, emb, graph, trained.params, cfg.generation, cfg.dither, sampler);
    res.train_ms = train_ms;
    res.training_log = std::move(trained.log);
    detail::finish(res, t0);
    return res;
}

/// Method, counts and timings. Timing fields are grouped under "timing".
inline nlohmann::ordered_json balance_summary(const BalanceResult& r) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["before"] = {{"class0", r.before.first}, {"class1", r.before.second}};
    j["after"] = {{"class0", r.after.first}, {"class1", r.after.second}};
    j["synthetic"] = r.synthetic;
    if (r.method == "qrbm") j["chain_break_rate"] = r.chain_break_rate;
    nlohmann::ordered_json t;
    t["wall_ms"] = r.wall_ms;
    if (r.method == "qrbm") {
        t["train_ms"] = r.train_ms;
        t["generate_ms"] = r.generate_ms;
    }
    j["timing"] = t;
    return j;
}

}  // namespace qbal
