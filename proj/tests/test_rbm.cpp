// Classical RBM: energy, conditionals, Gibbs chains, CD and the exact oracles.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qbal/rbm.hpp"

using namespace qbal;

namespace {

RbmParams random_params(int nv, int nh, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    RbmParams p = RbmParams::zeros(nv, nh);
    for (int i = 0; i < nv; ++i) {
        p.b[i] = u(rng);
        for (int j = 0; j < nh; ++j) p.W(i, j) = u(rng);
    }
    for (int j = 0; j < nh; ++j) p.c[j] = u(rng);
    return p;
}

double naive_energy(const RbmParams& p, const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    double e = 0.0;
    for (int i = 0; i < p.n_visible(); ++i) e -= p.b[i] * v[i];
    for (int j = 0; j < p.n_hidden(); ++j) e -= p.c[j] * h[j];
    for (int i = 0; i < p.n_visible(); ++i)
        for (int j = 0; j < p.n_hidden(); ++j) e -= v[i] * p.W(i, j) * h[j];
    return e;
}

Eigen::VectorXd vec(std::initializer_list<double> x) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double t : x) v[i++] = t;
    return v;
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

// Rows drawn from the exact visible marginal of p.
BinaryMatrix sample_marginal(const RbmParams& p, int rows, std::uint64_t seed) {
    const auto m = visible_marginal(p);
    std::discrete_distribution<std::uint64_t> pick(m.begin(), m.end());
    std::mt19937_64 rng(seed);
    BinaryMatrix d(rows, p.n_visible());
    for (int r = 0; r < rows; ++r) {
        const auto s = pick(rng);
        for (int i = 0; i < p.n_visible(); ++i) d(r, i) = static_cast<std::uint8_t>((s >> i) & 1u);
    }
    return d;
}

}  // namespace

TEST(Rbm, EnergyExamples) {
    std::mt19937_64 rng(1);
    const auto p = random_params(3, 2, rng);
    EXPECT_EQ(rbm_energy(p, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)), 0.0);

    RbmParams q = RbmParams::zeros(2, 1);
    q.b << 1.0, 0.0;
    EXPECT_EQ(rbm_energy(q, vec({1, 0}), vec({0})), -1.0);

    for (std::uint64_t s = 0; s < 32; ++s) {
        const auto v = state_bits(s, 0, 3), h = state_bits(s, 3, 2);
        EXPECT_NEAR(rbm_energy(p, v, h), naive_energy(p, v, h), 1e-12);
    }
    EXPECT_THROW(rbm_energy(p, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)), ParameterError);
}

TEST(Rbm, ConditionalExamples) {
    const auto z = RbmParams::zeros(3, 4);
    EXPECT_TRUE(prob_h_given_v(z, vec({1, 0, 1})).isApprox(Eigen::VectorXd::Constant(4, 0.5)));
    EXPECT_TRUE(prob_v_given_h(z, vec({1, 0, 1, 1})).isApprox(Eigen::VectorXd::Constant(3, 0.5)));

    RbmParams p = RbmParams::zeros(2, 1);
    p.c << 10.0;
    EXPECT_NEAR(prob_h_given_v(p, vec({0, 1}))[0], 0.9999546, 1e-7);
    EXPECT_THROW(prob_h_given_v(p, vec({0, 1, 1})), ParameterError);
    EXPECT_THROW(prob_v_given_h(p, vec({0, 1})), ParameterError);
}

TEST(Rbm, ConditionalsMatchExactJoint) {
    std::mt19937_64 rng(2);
    for (auto [nv, nh] : {std::pair{2, 2}, {3, 3}, {4, 2}}) {
        const auto p = random_params(nv, nh, rng);
        const auto d = exact_distribution(p);
        for (std::uint64_t vs = 0; vs < (1u << nv); ++vs) {
            double pv = 0.0;
            std::vector<double> on(nh, 0.0);
            for (std::uint64_t hs = 0; hs < (1u << nh); ++hs) {
                const double q = d.prob[vs | (hs << nv)];
                pv += q;
                for (int j = 0; j < nh; ++j)
                    if ((hs >> j) & 1u) on[j] += q;
            }
            const auto cond = prob_h_given_v(p, state_bits(vs, 0, nv));
            for (int j = 0; j < nh; ++j) EXPECT_NEAR(cond[j], on[j] / pv, 1e-9);
        }
        for (std::uint64_t hs = 0; hs < (1u << nh); ++hs) {
            double ph = 0.0;
            std::vector<double> on(nv, 0.0);
            for (std::uint64_t vs = 0; vs < (1u << nv); ++vs) {
                const double q = d.prob[vs | (hs << nv)];
                ph += q;
                for (int i = 0; i < nv; ++i)
                    if ((vs >> i) & 1u) on[i] += q;
            }
            const auto cond = prob_v_given_h(p, state_bits(hs, 0, nh));
            for (int i = 0; i < nv; ++i) EXPECT_NEAR(cond[i], on[i] / ph, 1e-9);
        }
    }
}

TEST(Rbm, PartitionFunctionExamples) {
    EXPECT_NEAR(partition_function(RbmParams::zeros(2, 1)), 8.0, 1e-12);
    RbmParams p = RbmParams::zeros(1, 1);
    p.b << std::log(3.0);
    EXPECT_NEAR(partition_function(p), 8.0, 1e-12);
    EXPECT_THROW(exact_distribution(RbmParams::zeros(12, 9)), CapacityError);
}

TEST(Rbm, ExactDistributionTable) {
    std::mt19937_64 rng(3);
    const auto p = random_params(3, 2, rng);
    const auto d = exact_distribution(p);
    const double z = partition_function(p);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < d.prob.size(); ++s) {
        sum += d.prob[s];
        EXPECT_NEAR(d.prob[s], std::exp(-naive_energy(p, state_bits(s, 0, 3), state_bits(s, 3, 2))) / z, 1e-12);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Rbm, NormalizationRandomSizes) {
    std::mt19937_64 rng(4);
    for (int nv = 1; nv <= 6; ++nv)
        for (int nh = 1; nv + nh <= 10; ++nh) {
            const auto d = exact_distribution(random_params(nv, nh, rng, 3.0));
            EXPECT_NEAR(std::accumulate(d.prob.begin(), d.prob.end(), 0.0), 1.0, 1e-12);
        }
}

TEST(Rbm, VisibleMarginalSumsJoint) {
    std::mt19937_64 rng(5);
    const auto p = random_params(3, 3, rng);
    const auto d = exact_distribution(p);
    const auto m = visible_marginal(p);
    for (std::uint64_t v = 0; v < 8; ++v) {
        double s = 0.0;
        for (std::uint64_t h = 0; h < 8; ++h) s += d.prob[v | (h << 3)];
        EXPECT_NEAR(m[v], s, 1e-12);
    }
}

TEST(Rbm, GibbsZeroParamsIsFairCoin) {
    const auto p = RbmParams::zeros(4, 3);
    Rng rng(6);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    double ones = 0.0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) {
        v = gibbs_chain(p, v, 1, rng).first;
        ones += v[0];
    }
    EXPECT_NEAR(ones / steps, 0.5, 0.01);
}

TEST(Rbm, GibbsStrongCouplingAgrees) {
    RbmParams p = RbmParams::zeros(1, 1);
    p.W << 8.0;
    p.b << -4.0;
    p.c << -4.0;
    Rng rng(7);
    Eigen::VectorXd v = vec({1});
    int agree = 0;
    const int steps = 20000;
    for (int t = 0; t < steps; ++t) {
        auto [vk, hk] = gibbs_chain(p, v, 1, rng);
        agree += vk[0] == hk[0];
        v = vk;
    }
    // exact: P(v = h) = 2 / (2 + 2 e^-4)
    EXPECT_NEAR(static_cast<double>(agree) / steps, 1.0 / (1.0 + std::exp(-4.0)), 0.01);
}

TEST(Rbm, GibbsIsSeededAndChecked) {
    std::mt19937_64 g(8);
    const auto p = random_params(3, 2, g);
    Rng a(99), b(99);
    const auto x = gibbs_chain(p, vec({1, 0, 1}), 5, a);
    const auto y = gibbs_chain(p, vec({1, 0, 1}), 5, b);
    EXPECT_EQ(x.first, y.first);
    EXPECT_EQ(x.second, y.second);
    EXPECT_THROW(gibbs_chain(p, vec({1, 0, 1}), 0, a), ParameterError);
    EXPECT_THROW(gibbs_chain(p, vec({1, 0.5, 1}), 1, a), ParameterError);
}

TEST(Rbm, CdStepThroughTwoByOne) {
    RbmParams p = RbmParams::zeros(2, 1);
    p.W << 0.5, -0.3;
    p.b << 0.1, -0.2;
    p.c << 0.05;
    BinaryMatrix batch(1, 2);
    batch << 1, 0;
    const double eps = 0.1;
    Rng rng(2024);
    const auto got = cd_update(p, batch, 1, eps, rng);

    // replay the same uniforms by hand: h then v, one draw per unit
    Rng replay(2024);
    const double ph0 = sigmoid(0.05 + 0.5 * 1 + -0.3 * 0);
    const double h = replay.uniform() < ph0 ? 1.0 : 0.0;
    const double pv0 = sigmoid(0.1 + 0.5 * h), pv1 = sigmoid(-0.2 + -0.3 * h);
    const double v0 = replay.uniform() < pv0 ? 1.0 : 0.0;
    const double v1 = replay.uniform() < pv1 ? 1.0 : 0.0;
    const double phk = sigmoid(0.05 + 0.5 * v0 - 0.3 * v1);

    EXPECT_NEAR(got.W(0, 0), 0.5 + eps * (1 * ph0 - v0 * phk), 1e-15);
    EXPECT_NEAR(got.W(1, 0), -0.3 + eps * (0 * ph0 - v1 * phk), 1e-15);
    EXPECT_NEAR(got.b[0], 0.1 + eps * (1 - v0), 1e-15);
    EXPECT_NEAR(got.b[1], -0.2 + eps * (0 - v1), 1e-15);
    EXPECT_NEAR(got.c[0], 0.05 + eps * (ph0 - phk), 1e-15);
}

TEST(Rbm, CdZeroRateIsIdentity) {
    std::mt19937_64 g(9);
    const auto p = random_params(4, 3, g);
    Rng rng(1);
    EXPECT_EQ(cd_update(p, two_mode_data(10), 1, 0.0, rng), p);
    BinaryMatrix empty(0, 4);
    EXPECT_THROW(cd_update(p, empty, 1, 0.1, rng), ParameterError);
}

TEST(Rbm, CdMatchedMoments) {
    std::mt19937_64 g(10);
    const auto p = random_params(4, 3, g);
    const auto batch = sample_marginal(p, 10000, 11);
    Rng rng(12);
    const auto q = cd_update(p, batch, 1, 1.0, rng);
    EXPECT_LT((q.W - p.W).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Rbm, CdAlignsWithExactGradient) {
    std::mt19937_64 g(13);
    int aligned = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto p = random_params(3, 3, g);
        const auto target = random_params(3, 3, g, 2.0);
        const auto data = sample_marginal(target, 1000, 100 + t);

        // exact gradient: data moments with P(h|v) minus exact model moments
        const Eigen::MatrixXd V = data.cast<double>();
        Eigen::MatrixXd H = V * p.W;
        H.rowwise() += p.c.transpose();
        H = H.unaryExpr([](double x) { return sigmoid(x); });
        Eigen::MatrixXd gW = V.transpose() * H / 1000.0;
        Eigen::VectorXd gb = V.colwise().mean().transpose();
        Eigen::VectorXd gc = H.colwise().mean().transpose();
        const auto d = exact_distribution(p);
        for (std::uint64_t s = 0; s < d.prob.size(); ++s) {
            const auto v = state_bits(s, 0, 3), h = state_bits(s, 3, 3);
            gW -= d.prob[s] * v * h.transpose();
            gb -= d.prob[s] * v;
            gc -= d.prob[s] * h;
        }
        Rng rng(200 + t);
        const auto q = cd_update(p, data, 5, 1.0, rng);
        const double dot = ((q.W - p.W).array() * gW.array()).sum() + (q.b - p.b).dot(gb) + (q.c - p.c).dot(gc);
        aligned += dot > 0;
    }
    EXPECT_GE(aligned, static_cast<int>(0.9 * trials));
}

TEST(Rbm, KlExamples) {
    const auto z = RbmParams::zeros(3, 2);
    EXPECT_NEAR(kl_to_data(z, std::vector<double>(8, 0.125)), 0.0, 1e-12);
    std::mt19937_64 g(14);
    const auto p = random_params(3, 2, g);
    EXPECT_NEAR(kl_to_data(p, visible_marginal(p)), 0.0, 1e-12);
    EXPECT_THROW(kl_to_data(p, std::vector<double>(4, 0.25)), ParameterError);
}

TEST(Rbm, KlGoldenUntrainedModel) {
    // two modes {1100, 0011} vs a zero-parameter model (uniform over 16):
    // KL = ln 8 up to smoothing
    const auto kl = kl_to_data(RbmParams::zeros(4, 4), empirical_distribution(two_mode_data(200)));
    EXPECT_NEAR(kl, std::log(8.0), 1e-6);
}

TEST(Rbm, CdHalvesKlOnTwoModeToy) {
    const auto data = two_mode_data(200);
    CdConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 50;
    cfg.epochs = 500;
    cfg.k = 1;
    cfg.seed = 3;
    const auto init = RbmParams::random(4, 4, derive_seed(3, 0));
    const double before = kl_to_data(init, empirical_distribution(data));
    const auto res = train_cd(data, 4, cfg, init);
    ASSERT_EQ(res.log.epochs.size(), 500u);
    EXPECT_EQ(res.log.objective_kind, "kl");
    EXPECT_LE(res.log.epochs.back().objective, 0.5 * before);
}

TEST(Rbm, TrainingIsDeterministic) {
    CdConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.seed = 5;
    EXPECT_EQ(train_cd(two_mode_data(64), 3, cfg).params, train_cd(two_mode_data(64), 3, cfg).params);
}

TEST(Rbm, ObjectiveSwitchesToReconstruction) {
    const BinaryMatrix wide = BinaryMatrix::Ones(10, 17);
    EXPECT_EQ(training_objective(RbmParams::zeros(17, 2), wide).kind, "reconstruction");
    EXPECT_NEAR(reconstruction_error(RbmParams::zeros(17, 2), wide), 0.25, 1e-12);
}

TEST(Rbm, CheckpointRoundTrip) {
    std::mt19937_64 g(15);
    const auto p = random_params(5, 3, g);
    const auto j = to_json(p, {{"seed", 4}, {"epoch", 10}});
    EXPECT_EQ(j.at("metadata").at("epoch"), 10);
    EXPECT_EQ(rbm_from_json(nlohmann::json::parse(j.dump())), p);
    auto bad = nlohmann::json::parse(j.dump());
    bad["b"].push_back(0.0);
    EXPECT_THROW(rbm_from_json(bad), DataError);
}

TEST(Rbm, ParamChecks) {
    EXPECT_THROW(RbmParams(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
                 ParameterError);
    RbmParams p = RbmParams::zeros(1, 1);
    p.W(0, 0) = std::nan("");
    EXPECT_THROW(p.check(), ParameterError);
}
