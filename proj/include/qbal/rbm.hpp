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
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qbal/error.hpp"
#include "qbal/random.hpp"

namespace qbal {

/// Weights W (n_v x n_h), visible biases b and hidden biases c of
/// E(v,h) = -b.v - c.h - v^T W h.
struct RbmParams {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    Eigen::VectorXd c;

    RbmParams() = default;
    RbmParams(Eigen::MatrixXd w, Eigen::VectorXd vb, Eigen::VectorXd hb)
        : W(std::move(w)), b(std::move(vb)), c(std::move(hb)) {
        check();
    }
    static RbmParams zeros(int n_visible, int n_hidden) {
        return {Eigen::MatrixXd::Zero(n_visible, n_hidden), Eigen::VectorXd::Zero(n_visible),
                Eigen::VectorXd::Zero(n_hidden)};
    }
    /// W ~ uniform(-scale, scale) from `seed`, b = c = 0.
    static RbmParams random(int n_visible, int n_hidden, std::uint64_t seed, double scale = 0.1) {
        RbmParams p = zeros(n_visible, n_hidden);
        Rng rng(seed);
        for (int i = 0; i < n_visible; ++i)
            for (int j = 0; j < n_hidden; ++j) p.W(i, j) = rng.uniform(-scale, scale);
        return p;
    }

    int n_visible() const { return static_cast<int>(W.rows()); }
    int n_hidden() const { return static_cast<int>(W.cols()); }

    void check() const {
        if (b.size() != W.rows() || c.size() != W.cols())
            throw ParameterError("rbm parameter shapes disagree: W is " + std::to_string(W.rows()) + "x" +
                                 std::to_string(W.cols()) + ", b has " + std::to_string(b.size()) + ", c has " +
                                 std::to_string(c.size()));
        if (!W.allFinite() || !b.allFinite() || !c.allFinite()) throw ParameterError("rbm parameters must be finite");
    }

    bool operator==(const RbmParams& o) const { return W == o.W && b == o.b && c == o.c; }
};

/// Rows of 0/1 unit states.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double t) { return sigmoid(t); });
}

namespace detail {
inline void require_dim(Eigen::Index got, int want, const char* what) {
    if (got != want) {
        throw ParameterError(std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                             std::to_string(want));
    }
}
inline void require_binary(const Eigen::VectorXd& x, const char* what) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0 && x[i] != 1.0) throw ParameterError(std::string(what) + " must be binary");
}
}  // namespace detail

inline double rbm_energy(const RbmParams& p, const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    detail::require_dim(v.size(), p.n_visible(), "v");
    detail::require_dim(h.size(), p.n_hidden(), "h");
    return -p.b.dot(v) - p.c.dot(h) - v.dot(p.W * h);
}

/// P(h_j = 1 | v) = sigmoid(c_j + sum_i W_ij v_i)
inline Eigen::VectorXd prob_h_given_v(const RbmParams& p, const Eigen::VectorXd& v) {
    detail::require_dim(v.size(), p.n_visible(), "v");
    return sigmoid(p.c + p.W.transpose() * v);
}

/// P(v_i = 1 | h) = sigmoid(b_i + sum_j W_ij h_j)
inline Eigen::VectorXd prob_v_given_h(const RbmParams& p, const Eigen::VectorXd& h) {
    detail::require_dim(h.size(), p.n_hidden(), "h");
    return sigmoid(p.b + p.W * h);
}

/// One uniform per unit, in index order.
inline Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& probs, Rng& rng) {
    Eigen::VectorXd out(probs.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i) out[i] = rng.uniform() < probs[i] ? 1.0 : 0.0;
    return out;
}

/// k rounds of h ~ P(h|v), v ~ P(v|h) starting from v0. Returns v_k and
/// the hidden state that produced it.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gibbs_chain(const RbmParams& p, const Eigen::VectorXd& v0, int k,
                                                               Rng& rng) {
    if (k < 1) throw ParameterError("gibbs_chain needs k >= 1");
    detail::require_dim(v0.size(), p.n_visible(), "v0");
    detail::require_binary(v0, "v0");
    Eigen::VectorXd v = v0, h;
    for (int step = 0; step < k; ++step) {
        h = sample_bernoulli(prob_h_given_v(p, v), rng);
        v = sample_bernoulli(prob_v_given_h(p, h), rng);
    }
    return {v, h};
}

/// One CD-k step on a mini-batch. Positive statistics use P(h|v) of the
/// data rows; negative statistics use v_k from a k-step chain started at
/// each row (rows processed in order) and P(h|v_k).
inline RbmParams cd_update(const RbmParams& p, const BinaryMatrix& batch, int k, double learning_rate, Rng& rng) {
    if (batch.rows() == 0) throw ParameterError("cd_update needs a non-empty batch");
    if (!(learning_rate >= 0)) throw ParameterError("learning rate must be non-negative");
    detail::require_dim(batch.cols(), p.n_visible(), "batch row");
    const Eigen::MatrixXd V = batch.cast<double>();
    const auto m = static_cast<double>(batch.rows());

    Eigen::MatrixXd Vk(V.rows(), V.cols());
    for (Eigen::Index r = 0; r < V.rows(); ++r) Vk.row(r) = gibbs_chain(p, V.row(r).transpose(), k, rng).first;

    auto hidden_probs = [&](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd pre = X * p.W;
        pre.rowwise() += p.c.transpose();
        return pre.unaryExpr([](double t) { return sigmoid(t); }).eval();
    };
    const Eigen::MatrixXd H = hidden_probs(V);
    const Eigen::MatrixXd Hk = hidden_probs(Vk);

    RbmParams out = p;
    out.W += learning_rate * (V.transpose() * H - Vk.transpose() * Hk) / m;
    out.b += learning_rate * (V.colwise().sum() - Vk.colwise().sum()).transpose() / m;
    out.c += learning_rate * (H.colwise().sum() - Hk.colwise().sum()).transpose() / m;
    return out;
}

// ---------------------------------------------------------------------------
// brute-force oracles

inline constexpr int kMaxExactUnits = 20;

/// Exact joint table over (v, h). State index s encodes v_i in bit i and
/// h_j in bit n_v + j.
struct JointDistribution {
    int n_visible = 0;
    int n_hidden = 0;
    std::vector<double> prob;
    double log_z = 0.0;
};

inline Eigen::VectorXd state_bits(std::uint64_t s, int offset, int n) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>((s >> (offset + i)) & 1u);
    return x;
}

inline double log_sum_exp(const std::vector<double>& x) {
    double mx = -INFINITY;
    for (double t : x) mx = std::max(mx, t);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double t : x) s += std::exp(t - mx);
    return mx + std::log(s);
}

inline JointDistribution exact_distribution(const RbmParams& p) {
    p.check();
    const int nv = p.n_visible(), nh = p.n_hidden();
    if (nv + nh > kMaxExactUnits) {
        throw CapacityError("exact distribution limited to " + std::to_string(kMaxExactUnits) + " units, got " +
                            std::to_string(nv + nh));
    }
    const std::uint64_t states = std::uint64_t{1} << (nv + nh);
    std::vector<double> neg_energy(states);
    for (std::uint64_t s = 0; s < states; ++s)
        neg_energy[s] = -rbm_energy(p, state_bits(s, 0, nv), state_bits(s, nv, nh));
    JointDistribution d;
    d.n_visible = nv;
    d.n_hidden = nh;
    d.log_z = log_sum_exp(neg_energy);
    d.prob.resize(states);
    for (std::uint64_t s = 0; s < states; ++s) d.prob[s] = std::exp(neg_energy[s] - d.log_z);
    return d;
}

inline double partition_function(const RbmParams& p) { return std::exp(exact_distribution(p).log_z); }

/// Exact marginal P(v) over 2^n_v states via the free energy
/// F(v) = -b.v - sum_j log(1 + exp(c_j + (v^T W)_j)).
inline std::vector<double> visible_marginal(const RbmParams& p) {
    p.check();
    const int nv = p.n_visible();
    if (nv > kMaxExactUnits) {
        throw CapacityError("exact visible marginal limited to " + std::to_string(kMaxExactUnits) +
                            " visible units, got " + std::to_string(nv));
    }
    const std::uint64_t states = std::uint64_t{1} << nv;
    std::vector<double> logp(states);
    for (std::uint64_t s = 0; s < states; ++s) {
        const Eigen::VectorXd v = state_bits(s, 0, nv);
        const Eigen::VectorXd pre = p.c + p.W.transpose() * v;
        double lp = p.b.dot(v);
        for (Eigen::Index j = 0; j < pre.size(); ++j)
            lp += pre[j] > 0 ? pre[j] + std::log1p(std::exp(-pre[j])) : std::log1p(std::exp(pre[j]));
        logp[s] = lp;
    }
    const double lz = log_sum_exp(logp);
    for (auto& x : logp) x = std::exp(x - lz);
    return logp;
}

/// Empirical distribution of rows over 2^width states (bit i = column i).
inline std::vector<double> empirical_distribution(const BinaryMatrix& data) {
    const auto width = static_cast<int>(data.cols());
    if (width > kMaxExactUnits) throw CapacityError("empirical table limited to 20 columns");
    std::vector<double> d(std::size_t{1} << width, 0.0);
    if (data.rows() == 0) return d;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        std::uint64_t s = 0;
        for (int i = 0; i < width; ++i) s |= std::uint64_t{data(r, i) != 0} << i;
        d[s] += 1.0;
    }
    for (auto& x : d) x /= static_cast<double>(data.rows());
    return d;
}

inline constexpr double kKlSmoothing = 1e-9;

/// KL(data || model marginal over v). Both tables get additive smoothing
/// of 1e-9 per state and are renormalized, so unsupported states stay finite.
inline double kl_to_data(const RbmParams& p, const std::vector<double>& empirical) {
    const auto model = visible_marginal(p);
    if (empirical.size() != model.size()) {
        throw ParameterError("empirical table has " + std::to_string(empirical.size()) + " states, model has " +
                             std::to_string(model.size()));
    }
    const double norm = 1.0 + kKlSmoothing * static_cast<double>(model.size());
    double kl = 0.0;
    for (std::size_t s = 0; s < model.size(); ++s) {
        const double ps = (empirical[s] + kKlSmoothing) / norm;
        const double qs = (model[s] + kKlSmoothing) / norm;
        kl += ps * std::log(ps / qs);
    }
    return std::max(kl, 0.0);
}

/// Mean squared error between rows and their mean-field reconstruction
/// P(v | P(h|v)). Used as the training objective when exact marginals are
/// out of reach.
inline double reconstruction_error(const RbmParams& p, const BinaryMatrix& data) {
    if (data.rows() == 0) return 0.0;
    const Eigen::MatrixXd V = data.cast<double>();
    Eigen::MatrixXd H = V * p.W;
    H.rowwise() += p.c.transpose();
    H = H.unaryExpr([](double t) { return sigmoid(t); });
    Eigen::MatrixXd R = H * p.W.transpose();
    R.rowwise() += p.b.transpose();
    R = R.unaryExpr([](double t) { return sigmoid(t); });
    return (R - V).squaredNorm() / static_cast<double>(V.size());
}

struct Objective {
    double value = 0.0;
    std::string kind;  // "kl" or "reconstruction"
};

/// KL to the data when n_visible is small enough for exact marginals,
/// reconstruction error otherwise.
inline Objective training_objective(const RbmParams& p, const BinaryMatrix& data) {
    if (p.n_visible() <= 16) return {kl_to_data(p, empirical_distribution(data)), "kl"};
    return {reconstruction_error(p, data), "reconstruction"};
}

// ---------------------------------------------------------------------------
// classical CD training

struct CdConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    int k = 1;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double objective = 0.0;
    double chain_break_rate = 0.0;
    double wall_ms = 0.0;
};

struct TrainingLog {
    std::string objective_kind;
    std::vector<EpochRecord> epochs;
};

struct TrainingResult {
    RbmParams params;
    TrainingLog log;
};

/// Batches are consecutive slices of a per-epoch shuffle of the rows.
inline std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index rows, std::size_t batch_size, Rng& rng) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    shuffle(order, rng);
    std::vector<std::vector<Eigen::Index>> batches;
    for (std::size_t at = 0; at < order.size(); at += batch_size)
        batches.emplace_back(order.begin() + at, order.begin() + std::min(order.size(), at + batch_size));
    return batches;
}

inline BinaryMatrix gather_rows(const BinaryMatrix& data, const std::vector<Eigen::Index>& rows) {
    BinaryMatrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
    return out;
}

/// CD-k training from RbmParams::random(seed). Logs the objective after
/// every epoch.
inline TrainingResult train_cd(const BinaryMatrix& data, int n_hidden, const CdConfig& cfg,
                               std::optional<RbmParams> init = std::nullopt) {
    if (data.rows() == 0) throw ParameterError("training data is empty");
    if (cfg.batch_size < 1) throw ParameterError("batch_size must be >= 1");
    RbmParams p = init ? *init : RbmParams::random(static_cast<int>(data.cols()), n_hidden, derive_seed(cfg.seed, 0));
    Rng rng(derive_seed(cfg.seed, 1));
    TrainingResult out;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& rows : epoch_batches(data.rows(), cfg.batch_size, rng))
            p = cd_update(p, gather_rows(data, rows), cfg.k, cfg.learning_rate, rng);
        const auto obj = training_objective(p, data);
        out.log.objective_kind = obj.kind;
        out.log.epochs.push_back(
            {epoch, obj.value, 0.0,
             std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()});
    }
    out.params = std::move(p);
    return out;
}

// ---------------------------------------------------------------------------
// checkpoints

inline nlohmann::ordered_json to_json(const RbmParams& p, const nlohmann::ordered_json& metadata = {}) {
    nlohmann::ordered_json j;
    j["n_visible"] = p.n_visible();
    j["n_hidden"] = p.n_hidden();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(p.W.size()));
    for (int i = 0; i < p.n_visible(); ++i)
        for (int k = 0; k < p.n_hidden(); ++k) w.push_back(p.W(i, k));
    j["W"] = w;
    j["b"] = std::vector<double>(p.b.data(), p.b.data() + p.b.size());
    j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
    j["metadata"] = metadata.is_null() ? nlohmann::ordered_json::object() : metadata;
    return j;
}

template <typename Json>
RbmParams rbm_from_json(const Json& j) {
    try {
        const int nv = j.at("n_visible").template get<int>();
        const int nh = j.at("n_hidden").template get<int>();
        const auto w = j.at("W").template get<std::vector<double>>();
        const auto b = j.at("b").template get<std::vector<double>>();
        const auto c = j.at("c").template get<std::vector<double>>();
        if (w.size() != static_cast<std::size_t>(nv) * nh || b.size() != static_cast<std::size_t>(nv) ||
            c.size() != static_cast<std::size_t>(nh))
            throw DataError("checkpoint arrays do not match declared dimensions");
        RbmParams p = RbmParams::zeros(nv, nh);
        for (int i = 0; i < nv; ++i)
            for (int k = 0; k < nh; ++k) p.W(i, k) = w[static_cast<std::size_t>(i) * nh + k];
        for (int i = 0; i < nv; ++i) p.b[i] = b[i];
        for (int k = 0; k < nh; ++k) p.c[k] = c[k];
        p.check();
        return p;
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed checkpoint: ") + ex.what());
    }
}

}  // namespace qbal
