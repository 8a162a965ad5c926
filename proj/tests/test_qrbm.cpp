// Annealing-based RBM training and synthetic generation.

#include <gtest/gtest.h>

#include "qbal/qrbm.hpp"

using namespace qbal;

namespace {

const PegasusGraph& p16() {
    static const PegasusGraph g(16);
    return g;
}

const RbmEmbedding& emb4x4() {
    static const RbmEmbedding e = generate_embedding(calibrate_params(p16(), 4, 4, {1}).params, p16());
    return e;
}

BinaryMatrix two_mode_data(int rows) {
    BinaryMatrix d(rows, 4);
    for (int r = 0; r < rows; ++r) {
        if (r % 2 == 0)
            d.row(r) << 1, 1, 0, 0;
        else
            d.row(r) << 0, 0, 1, 1;
    }
    return d;
}

// A sampler that ignores the schedule and returns the given logical states
// (visible bits then hidden bits), one read each, with every chain intact.
SampleFn scripted(const RbmEmbedding& e, std::vector<std::vector<int>> states) {
    return [&e, states](const IsingProblem& p, const SamplerConfig& c) {
        const ChainIndex chains(e);
        SampleSet ss;
        ss.variables = p.variables();
        for (std::size_t r = 0; r < c.num_reads; ++r) {
            const auto& st = states[r % states.size()];
            SpinSample s;
            SpinAssignment a;
            for (Qubit q : ss.variables) {
                const auto* u = chains.find(q);
                const int bit = st[static_cast<std::size_t>(u->first * e.n_visible() + u->second)];
                s.spins.push_back(static_cast<Spin>(2 * bit - 1));
                a[q] = 2 * bit - 1;
            }
            s.energy = ising_energy(p, a);
            ss.samples.push_back(std::move(s));
        }
        ss.total_reads = c.num_reads;
        ss.metadata.backend = "scripted";
        return ss;
    };
}

QrbmTrainerConfig trainer(std::size_t reads) {
    QrbmTrainerConfig c;
    c.learning_rate = 0.1;
    c.reads = reads;
    c.chain_strength = 1.0;
    c.beta_eff = 1.0 / 3.0;
    c.sampler.sweeps = 100;
    return c;
}

}  // namespace

TEST(Qrbm, MatchedMomentsLeaveParamsUnchanged) {
    // saturated hidden biases make P(h|v) exactly {1, 0, 1, 0}; a sampler
    // that returns the batch with that hidden state matches both moments
    RbmParams p = RbmParams::zeros(4, 4);
    p.c << 50, -50, 50, -50;
    const auto batch = two_mode_data(4);
    const auto fn = scripted(emb4x4(), {{1, 1, 0, 0, 1, 0, 1, 0}, {0, 0, 1, 1, 1, 0, 1, 0}});
    const auto step = qrbm_step(p, batch, emb4x4(), trainer(4), fn, 1, 2);
    EXPECT_LT((step.params.W - p.W).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((step.params.b - p.b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((step.params.c - p.c).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(step.chain_break_rate, 0.0);
}

TEST(Qrbm, StepMatchesHandComputation) {
    const auto p = RbmParams::random(4, 4, 77, 0.5);
    const auto batch = two_mode_data(6);
    const std::vector<std::vector<int>> states{{1, 0, 1, 0, 0, 1, 1, 0}, {0, 1, 1, 1, 1, 1, 0, 0}};
    const auto cfg = trainer(3);
    const auto step = qrbm_step(p, batch, emb4x4(), cfg, scripted(emb4x4(), states), 1, 2);

    Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(4, 4);
    Eigen::VectorXd db = Eigen::VectorXd::Zero(4), dc = Eigen::VectorXd::Zero(4);
    for (int r = 0; r < 6; ++r) {
        const Eigen::VectorXd v = batch.row(r).cast<double>().transpose();
        const Eigen::VectorXd h = prob_h_given_v(p, v);
        dW += v * h.transpose() / 6.0;
        db += v / 6.0;
        dc += h / 6.0;
    }
    for (int r = 0; r < 3; ++r) {
        const auto& st = states[static_cast<std::size_t>(r % 2)];
        Eigen::VectorXd v(4), h(4);
        for (int i = 0; i < 4; ++i) v[i] = st[static_cast<std::size_t>(i)], h[i] = st[static_cast<std::size_t>(4 + i)];
        dW -= v * h.transpose() / 3.0;
        db -= v / 3.0;
        dc -= h / 3.0;
    }
    EXPECT_TRUE(step.params.W.isApprox(p.W + 0.1 * dW, 1e-12));
    EXPECT_TRUE(step.params.b.isApprox(p.b + 0.1 * db, 1e-12));
    EXPECT_TRUE(step.params.c.isApprox(p.c + 0.1 * dc, 1e-12));
}

TEST(Qrbm, InconsistentSamplerIsRejected) {
    const auto lying = [](const IsingProblem& p, const SamplerConfig& c) {
        auto ss = sa_sample(p, c);
        ss.samples.front().energy -= 1.0;
        return ss;
    };
    EXPECT_THROW(qrbm_step(RbmParams::zeros(4, 4), two_mode_data(4), emb4x4(), trainer(10), lying, 1, 2),
                 RejectedResponse);
}

TEST(Qrbm, TrainingIsDeterministic) {
    auto cfg = trainer(20);
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.seed = 4;
    const auto a = train_qrbm(two_mode_data(40), cfg, emb4x4(), p16());
    const auto b = train_qrbm(two_mode_data(40), cfg, emb4x4(), p16());
    EXPECT_EQ(a.params, b.params);
    ASSERT_EQ(a.log.epochs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.log.epochs[i].objective, b.log.epochs[i].objective);
}

TEST(Qrbm, InvalidEmbeddingIsRejected) {
    auto bad = emb4x4();
    bad.interlayer_couplings.front() = {bad.visible_nodes[0], bad.visible_nodes[0] + 2000};
    auto cfg = trainer(10);
    cfg.epochs = 1;
    EXPECT_THROW(train_qrbm(two_mode_data(8), cfg, bad, p16()), ValidationError);
    EXPECT_THROW(train_qrbm(BinaryMatrix(4, 3), cfg, emb4x4(), p16()), ParameterError);
}

TEST(Qrbm, PlateauStopsEarly) {
    auto cfg = trainer(10);
    cfg.epochs = 50;
    cfg.batch_size = 8;
    cfg.learning_rate = 1e-6;
    cfg.plateau_threshold = 1e-3;
    cfg.plateau_window = 2;
    const auto res = train_qrbm(two_mode_data(8), cfg, emb4x4(), p16());
    EXPECT_EQ(res.log.epochs.size(), 3u);
}

TEST(Qrbm, TrainingLogCsv) {
    TrainingLog log{"kl", {{1, 0.5, 0.25, 3.0}, {2, 0.4, 0.0, 2.0}}};
    std::ostringstream os;
    write_training_log_csv(log, os);
    EXPECT_EQ(os.str(), "epoch,objective,chain_break_rate,wall_ms\n1,0.5,0.25,3\n2,0.40000000000000002,0,2\n");
}

TEST(Qrbm, GenerationJobArithmetic) {
    GenerationConfig g;
    g.sampler.num_reads = 50;
    g.sampler.sweeps = 20;
    g.sampler.seed = 9;
    const auto p = RbmParams::random(4, 4, 1);
    EXPECT_EQ(generate_synthetic(p, emb4x4(), p16(), g, 100).jobs.size(), 2u);
    EXPECT_EQ(generate_synthetic(p, emb4x4(), p16(), g, 101).jobs.size(), 3u);
    const auto one = generate_synthetic(p, emb4x4(), p16(), g, 1);
    EXPECT_EQ(one.jobs.size(), 1u);
    EXPECT_EQ(one.visible.rows(), 1);
    EXPECT_THROW(generate_synthetic(p, emb4x4(), p16(), g, 0), ParameterError);
}

TEST(Qrbm, GenerationLineage) {
    GenerationConfig g;
    g.sampler.num_reads = 30;
    g.sampler.sweeps = 20;
    g.sampler.seed = 3;
    const auto p = RbmParams::random(4, 4, 2, 1.0);
    const auto out = generate_synthetic(p, emb4x4(), p16(), g, 75);
    ASSERT_EQ(out.lineage.size(), 75u);
    for (std::size_t r = 0; r < 75; ++r) {
        const auto [job, s] = out.lineage[r];
        EXPECT_EQ(job, r / 30);
        ASSERT_LT(s, out.jobs[job].samples.size());
        // untied chains decode to the majority of the source read
        const auto& ss = out.jobs[job];
        const auto& read = ss.samples[s];
        for (int i = 0; i < 4; ++i) {
            const auto chain = emb4x4().visible_chain(i);
            int up = 0;
            for (Qubit q : chain)
                up += read.spins[static_cast<std::size_t>(
                          std::lower_bound(ss.variables.begin(), ss.variables.end(), q) - ss.variables.begin())] > 0;
            if (2 * up != static_cast<int>(chain.size())) {
                EXPECT_EQ(out.visible(static_cast<Eigen::Index>(r), i), 2 * up > static_cast<int>(chain.size()))
                    << "row " << r << " unit " << i;
            }
        }
    }
    // reproducible from the per-job seeds alone
    const auto again = generate_synthetic(p, emb4x4(), p16(), g, 75);
    EXPECT_EQ(again.visible, out.visible);
    const auto job1 = sa_sample(rbm_to_ising(p, emb4x4(), g.chain_strength, g.beta_eff),
                                job_sampler_config(g.sampler, 30, 3, 1));
    EXPECT_TRUE(job1.same_reads(out.jobs[1]));
}

TEST(Qrbm, TwoModeModelGeneratesTheModes) {
    auto cfg = trainer(100);
    cfg.batch_size = 50;
    cfg.epochs = 300;
    cfg.seed = 3;
    cfg.chain_strength = 3.0;
    const auto data = two_mode_data(200);
    const auto res = train_qrbm(data, cfg, emb4x4(), p16(), sa_sample, RbmParams::random(4, 4, derive_seed(3, 0)));

    GenerationConfig g;
    g.sampler = cfg.sampler;
    g.sampler.num_reads = 100;
    g.sampler.seed = 11;
    g.chain_strength = cfg.chain_strength;
    g.beta_eff = cfg.beta_eff;
    const auto out = generate_synthetic(res.params, emb4x4(), p16(), g, 1000);
    int hits = 0;
    for (Eigen::Index r = 0; r < out.visible.rows(); ++r) {
        const auto row = out.visible.row(r);
        const bool a = row(0) == 1 && row(1) == 1 && row(2) == 0 && row(3) == 0;
        const bool b = row(0) == 0 && row(1) == 0 && row(2) == 1 && row(3) == 1;
        hits += a || b;
    }
    EXPECT_GE(hits, 800) << "final KL " << res.log.epochs.back().objective;
}
