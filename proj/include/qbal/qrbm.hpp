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

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbal/embedding.hpp"
#include "qbal/error.hpp"
#include "qbal/ising.hpp"
#include "qbal/pegasus.hpp"
#include "qbal/random.hpp"
#include "qbal/rbm.hpp"
#include "qbal/samplers.hpp"

namespace qbal {

struct QrbmTrainerConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    std::size_t reads = 100;
    std::size_t epochs = 200;
    double chain_strength = 1.0;
    double beta_eff = 1.0;
    SamplerConfig sampler;  // num_reads and seed are set per job
    std::uint64_t seed = 0;
    /// Stop early once the objective improved by less than this over the
    /// last `plateau_window` epochs.
    std::optional<double> plateau_threshold;
    std::size_t plateau_window = 10;

    void check() const {
        if (!(learning_rate > 0)) throw ParameterError("learning rate must be positive");
        if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
        if (reads < 1) throw ParameterError("reads per job must be >= 1");
        if (!(chain_strength > 0)) throw ParameterError("chain_strength must be positive");
        if (!(beta_eff > 0)) throw ParameterError("beta_eff must be positive");
        if (plateau_threshold && plateau_window < 1) throw ParameterError("plateau_window must be >= 1");
    }
};

/// Sampler settings of generation job `job` for base seed `seed`.
inline SamplerConfig job_sampler_config(const SamplerConfig& base, std::size_t reads, std::uint64_t seed,
                                        std::size_t job) {
    SamplerConfig cfg = base;
    cfg.num_reads = reads;
    cfg.seed = derive_seed(derive_seed(seed, stage::qrbm_generate), job);
    return cfg;
}

inline std::uint64_t job_decode_seed(std::uint64_t seed, std::size_t job) {
    return derive_seed(derive_seed(seed, stage::decode), job);
}

struct QrbmStep {
    RbmParams params;
    double chain_break_rate = 0.0;
};

/// One annealing-based update on batch V:
///   H = sigmoid(c + V W), (V', H') decoded from m1 reads,
///   W += eps (V^T H / m - V'^T H' / m1), likewise for b and c.
inline QrbmStep qrbm_step(const RbmParams& p, const BinaryMatrix& batch, const RbmEmbedding& emb,
                          const QrbmTrainerConfig& cfg, const SampleFn& sampler, std::uint64_t sampler_seed,
                          std::uint64_t decode_seed) {
    if (batch.rows() == 0) throw ParameterError("qrbm_step needs a non-empty batch");
    detail::require_dim(batch.cols(), emb.params.n_visible, "batch row");
    const Eigen::MatrixXd V = batch.cast<double>();
    Eigen::MatrixXd H = V * p.W;
    H.rowwise() += p.c.transpose();
    H = H.unaryExpr([](double t) { return sigmoid(t); });

    const auto problem = rbm_to_ising(p, emb, cfg.chain_strength, cfg.beta_eff);
    SamplerConfig scfg = cfg.sampler;
    scfg.num_reads = cfg.reads;
    scfg.seed = sampler_seed;
    const auto ss = sampler(problem, scfg);
    if (auto why = sampleset_violation(problem, ss, cfg.reads, 1e-6); !why.empty())
        throw RejectedResponse("sampler returned an inconsistent sample set: " + why);
    const auto decoded = decode_samples(ss, emb, decode_seed);
    const Eigen::MatrixXd Vn = decoded.visible.cast<double>();
    const Eigen::MatrixXd Hn = decoded.hidden.cast<double>();

    const auto m = static_cast<double>(V.rows());
    const auto m1 = static_cast<double>(Vn.rows());
    QrbmStep out{p, decoded.chain_break_rate};
    out.params.W += cfg.learning_rate * (V.transpose() * H / m - Vn.transpose() * Hn / m1);
    out.params.b += cfg.learning_rate * (V.colwise().sum().transpose() / m - Vn.colwise().sum().transpose() / m1);
    out.params.c += cfg.learning_rate * (H.colwise().sum().transpose() / m - Hn.colwise().sum().transpose() / m1);
    return out;
}

/// Trains from RbmParams::random unless `init` is given. Job t (counted
/// across all epochs) samples with derive_seed(derive_seed(seed,
/// stage::qrbm_train), t) and decodes with derive_seed(derive_seed(seed,
/// stage::decode), t).
inline TrainingResult train_qrbm(const BinaryMatrix& data, const QrbmTrainerConfig& cfg, const RbmEmbedding& emb,
                                 const PegasusGraph& graph, const SampleFn& sampler = sa_sample,
                                 std::optional<RbmParams> init = std::nullopt) {
    cfg.check();
    if (data.rows() == 0) throw ParameterError("training data is empty");
    if (data.cols() != emb.params.n_visible) {
        throw ParameterError("data has " + std::to_string(data.cols()) + " columns but the embedding has " +
                             std::to_string(emb.params.n_visible) + " visible units");
    }
    if (const auto report = validate_embedding(graph, emb); !report.valid)
        throw ValidationError("embedding is not valid on the target graph: " + report.first_violation());

    RbmParams p = init ? *init
                       : RbmParams::random(emb.params.n_visible, emb.params.n_hidden, derive_seed(cfg.seed, 0));
    if (p.n_visible() != emb.params.n_visible || p.n_hidden() != emb.params.n_hidden)
        throw ParameterError("initial parameters do not match the embedding dimensions");
    Rng order_rng(derive_seed(cfg.seed, 1));
    const std::uint64_t sample_base = derive_seed(cfg.seed, stage::qrbm_train);
    const std::uint64_t decode_base = derive_seed(cfg.seed, stage::decode);

    TrainingResult out;
    std::size_t job = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double breaks = 0.0;
        std::size_t steps = 0;
        for (const auto& rows : epoch_batches(data.rows(), cfg.batch_size, order_rng)) {
            try {
                auto step = qrbm_step(p, gather_rows(data, rows), emb, cfg, sampler, derive_seed(sample_base, job),
                                      derive_seed(decode_base, job));
                p = std::move(step.params);
                breaks += step.chain_break_rate;
            } catch (const Error& e) {
                rethrow_with_context(e, "epoch " + std::to_string(epoch) + ", job " + std::to_string(job));
            }
            ++job;
            ++steps;
        }
        const auto obj = training_objective(p, data);
        out.log.objective_kind = obj.kind;
        out.log.epochs.push_back({epoch, obj.value, breaks / static_cast<double>(steps),
                                  std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                                      .count()});
        if (cfg.plateau_threshold && out.log.epochs.size() > cfg.plateau_window) {
            const auto& hist = out.log.epochs;
            const double then = hist[hist.size() - 1 - cfg.plateau_window].objective;
            if (then - obj.value < *cfg.plateau_threshold) break;
        }
    }
    out.params = std::move(p);
    return out;
}

/// Columns: epoch, objective, chain_break_rate, wall_ms.
inline void write_training_log_csv(const TrainingLog& log, std::ostream& os) {
    os << "epoch,objective,chain_break_rate,wall_ms\n";
    const auto old = os.precision(17);
    for (const auto& r : log.epochs)
        os << r.epoch << ',' << r.objective << ',' << r.chain_break_rate << ',' << r.wall_ms << '\n';
    os.precision(old);
}

// ---------------------------------------------------------------------------
// generation

struct SyntheticSamples {
    BinaryMatrix visible;
    std::vector<SampleSet> jobs;
    /// Source of each row: (job, sample index within that job's SampleSet).
    std::vector<std::pair<std::size_t, std::size_t>> lineage;
    double chain_break_rate = 0.0;
};

struct GenerationConfig {
    SamplerConfig sampler;  // num_reads is the job size
    double chain_strength = 1.0;
    double beta_eff = 1.0;
};

/// Runs ceil(n / num_reads) jobs and keeps the first n decoded visible
/// rows. Job j samples with job_sampler_config(..., j) and decodes with
/// job_decode_seed(seed, j).
inline SyntheticSamples generate_synthetic(const RbmParams& params, const RbmEmbedding& emb,
                                           const PegasusGraph& graph, const GenerationConfig& cfg,
                                           std::size_t n_samples, const SampleFn& sampler = sa_sample) {
    if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
    cfg.sampler.check();
    if (const auto report = validate_embedding(graph, emb); !report.valid)
        throw ValidationError("embedding is not valid on the target graph: " + report.first_violation());
    const auto problem = rbm_to_ising(params, emb, cfg.chain_strength, cfg.beta_eff);
    const std::size_t reads = cfg.sampler.num_reads;
    const std::size_t jobs = (n_samples + reads - 1) / reads;

    SyntheticSamples out;
    out.visible.resize(static_cast<Eigen::Index>(n_samples), emb.params.n_visible);
    Eigen::Index row = 0;
    double breaks = 0.0;
    for (std::size_t j = 0; j < jobs; ++j) {
        const auto jcfg = job_sampler_config(cfg.sampler, reads, cfg.sampler.seed, j);
        SampleSet ss;
        try {
            ss = sampler(problem, jcfg);
        } catch (const Error& e) {
            rethrow_with_context(e, "generation job " + std::to_string(j));
        }
        if (auto why = sampleset_violation(problem, ss, reads, 1e-6); !why.empty())
            throw RejectedResponse("generation job " + std::to_string(j) + ": " + why);
        const auto decoded = decode_samples(ss, emb, job_decode_seed(cfg.sampler.seed, j));
        breaks += decoded.chain_break_rate;
        Eigen::Index r = 0;
        for (std::size_t s = 0; s < ss.samples.size(); ++s)
            for (std::size_t k = 0; k < ss.samples[s].occurrences; ++k, ++r) {
                if (row == static_cast<Eigen::Index>(n_samples)) break;
                out.visible.row(row++) = decoded.visible.row(r);
                out.lineage.emplace_back(j, s);
            }
        out.jobs.push_back(std::move(ss));
    }
    out.chain_break_rate = breaks / static_cast<double>(jobs);
    return out;
}

}  // namespace qbal
