// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "qbal/cli.hpp"

using namespace qbal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

const PegasusGraph& p16() {
    static const PegasusGraph g(16);
    return g;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) t += std::abs(a[i] - b[i]);
    return t / 2.0;
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

// ---------------------------------------------------------------------------

Outcome embedding_validity() {
    Outcome o{true, ""};
    for (int n : {4, 60, 120}) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto cal = calibrate_params(p16(), n, n, {});
            const auto e = generate_embedding(cal.params, p16());
            const auto r = validate_embedding(p16(), e);
            const bool ok = r.valid && r.bad_couplers.empty() && r.chain_overlaps.empty();
            o.pass = o.pass && ok;
            o.detail += std::to_string(n) + "x" + std::to_string(n) + (ok ? " valid" : " invalid: " + r.first_violation()) +
                        " (np=" + std::to_string(cal.params.n_periodicity) + ", " + fmt(seconds_since(t0), 3) + " s); ";
        } catch (const NoValidEmbedding& e) {
            o.pass = false;
            o.detail += std::to_string(n) + "x" + std::to_string(n) + " no valid embedding after " +
                        std::to_string(e.stats().tuples_checked) + " tuples (" + fmt(seconds_since(t0), 3) + " s); ";
        }
    }
    return o;
}

EmbeddingParams table_120() { return {120, 120, 200, 200, 20, 0, 3000}; }

Outcome chain_claim() {
    const auto s = embedding_stats(generate_embedding(table_120(), p16()));
    const bool ok = s.max_chain_length == 6 && s.chains_longer_than(6) == 0;
    return {ok, "max chain length " + std::to_string(s.max_chain_length) + ", longer than 6: " +
                    std::to_string(s.chains_longer_than(6))};
}

Outcome timing_claim() {
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto e = generate_embedding(table_120(), p16());
        best = std::min(best, seconds_since(t0) * 1000.0);
        if (e.n_visible() != 120) return {false, "wrong size"};
    }
    return {best < 100.0, "generate_embedding 120x120 in " + fmt(best, 3) + " ms (limit 100)"};
}

// Collapses intact chains to one spin per unit: visible i -> i, hidden j -> 100 + j.
IsingProblem logical(const IsingProblem& p, const RbmEmbedding& e) {
    const ChainIndex chains(e);
    auto id = [&](Qubit q) {
        const auto* u = chains.find(q);
        return u->first == 0 ? u->second : 100 + u->second;
    };
    IsingProblem out;
    out.offset = p.offset;
    for (auto [q, v] : p.h) out.add_bias(id(q), v);
    for (auto [a, b] : e.interlayer_couplings) out.add_coupling(id(a), id(b), p.J.at({std::min(a, b), std::max(a, b)}));
    return out;
}

Outcome boltzmann_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst_sum = 0.0, worst_tv = 0.0;
    int cases = 0;
    for (int nv = 1; nv <= 7; ++nv)
        for (int nh = 1; nv + nh <= 8; ++nh)
            for (int trial = 0; trial < 5; ++trial, ++cases) {
                RbmParams p = RbmParams::zeros(nv, nh);
                for (int i = 0; i < nv; ++i) {
                    p.b[i] = u(rng);
                    for (int j = 0; j < nh; ++j) p.W(i, j) = u(rng);
                }
                for (int j = 0; j < nh; ++j) p.c[j] = u(rng);
                const auto joint = exact_distribution(p);
                worst_sum = std::max(worst_sum, std::abs(std::accumulate(joint.prob.begin(), joint.prob.end(), 0.0) - 1.0));

                const auto e = generate_embedding({nv, nh, 8, 8, 1, 0, 1000}, p16());
                const auto d = exact_distribution(logical(rbm_to_ising(p, e, 1.0, 1.0), e));
                std::vector<double> mapped(joint.prob.size(), 0.0);
                for (std::uint64_t x = 0; x < d.prob.size(); ++x) {
                    std::uint64_t s = 0;
                    for (std::size_t i = 0; i < d.variables.size(); ++i)
                        if ((x >> i) & 1u) {
                            const Qubit q = d.variables[i];
                            s |= std::uint64_t{1} << (q < 100 ? q : nv + (q - 100));
                        }
                    mapped[s] += d.prob[x];
                }
                worst_tv = std::max(worst_tv, tv(mapped, joint.prob));
            }
    const double secs = seconds_since(t0);
    const bool ok = worst_sum <= 1e-12 && worst_tv < 1e-9 && secs < 10.0;
    return {ok, std::to_string(cases) + " RBMs: |sum-1| <= " + fmt(worst_sum, 3) + ", TV <= " + fmt(worst_tv, 3) +
                    ", " + fmt(secs, 3) + " s"};
}

IsingProblem random_problem(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    IsingProblem p;
    for (Qubit q = 0; q < n; ++q) p.h[q] = u(rng);
    for (Qubit a = 0; a < n; ++a)
        for (Qubit b = a + 1; b < n; ++b)
            if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.4) p.add_coupling(a, b, u(rng));
    return p;
}

Outcome sampler_agreement() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(21);
    const auto p6 = random_problem(6, rng);
    const auto d = exact_distribution(p6);
    SamplerConfig c;
    c.num_reads = 100000;
    c.seed = 3;
    const auto ss = exact_sample(p6, c);
    std::vector<double> f(d.prob.size(), 0.0);
    for (const auto& s : ss.samples) {
        std::uint64_t x = 0;
        for (std::size_t i = 0; i < s.spins.size(); ++i) x |= std::uint64_t{s.spins[i] > 0} << i;
        f[x] += static_cast<double>(s.occurrences) / 1e5;
    }
    const double t = tv(f, d.prob);

    double worst = 1.0;
    std::mt19937_64 rng12(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_problem(12, rng12);
        const auto e = exact_distribution(p);
        const double e0 = *std::min_element(e.energy.begin(), e.energy.end());
        SamplerConfig sc;
        sc.num_reads = 200;
        sc.seed = static_cast<std::uint64_t>(trial);
        sc.sweeps = 1000;
        sc.beta_max = 30.0;  // cold enough that no excitation survives the last sweeps
        const auto out = sa_sample(p, sc);
        std::size_t hit = 0;
        for (const auto& s : out.samples)
            if (std::abs(s.energy - e0) < 1e-9) hit += s.occurrences;
        worst = std::min(worst, static_cast<double>(hit) / 200.0);
    }
    const double secs = seconds_since(t0);
    return {t < 0.02 && worst >= 0.9 && secs < 60.0,
            "exact TV " + fmt(t, 3) + " at 1e5 reads; SA ground-state share >= " + fmt(worst, 3) +
                " over 10 problems; " + fmt(secs, 3) + " s"};
}

Outcome learning_property() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = two_mode_data(200);
    const auto target = empirical_distribution(data);
    const std::uint64_t seed = 3;
    const auto init = RbmParams::random(4, 4, derive_seed(seed, 0));
    const double kl0 = kl_to_data(init, target);

    CdConfig cd;
    cd.learning_rate = 0.1;
    cd.batch_size = 50;
    cd.epochs = 500;
    cd.k = 1;
    cd.seed = seed;
    const double kl_cd = train_cd(data, 4, cd, init).log.epochs.back().objective;

    const auto emb = generate_embedding(calibrate_params(p16(), 4, 4, {1}).params, p16());
    QrbmTrainerConfig q;
    q.learning_rate = cd.learning_rate;
    q.batch_size = cd.batch_size;
    q.epochs = cd.epochs;
    q.reads = 100;
    q.chain_strength = 1.0;
    q.beta_eff = 1.0 / 3.0;
    q.sampler.sweeps = 100;
    q.seed = seed;
    const double kl_q = train_qrbm(data, q, emb, p16(), sa_sample, init).log.epochs.back().objective;

    const double secs = seconds_since(t0);
    const bool ok = kl_cd <= 0.5 * kl0 && kl_q <= 1.5 * kl_cd && secs < 300.0;
    return {ok, "KL initial " + fmt(kl0) + ", CD-1 " + fmt(kl_cd) + ", QRBM(SA) " + fmt(kl_q) + " (ratio " +
                    fmt(kl_q / kl_cd, 3) + "), " + fmt(secs, 3) + " s"};
}

Outcome codec_criterion() {
    bool ok = integer_bits(0, 255) == 8 && integer_bits(0, 256) == 9;
    std::string why = ok ? "" : "bit-width boundary wrong; ";

    TabularDataset ints;
    ints.feature_names = {"count"};
    for (int v = 0; v <= 1000; ++v) {
        const double x = v;
        ints.append_row(std::span<const double>(&x, 1), "BENIGN");
    }
    const auto ic = fit_codec(ints, {{"count", std::nullopt}}, 10);
    for (std::size_t r = 0; r < ints.rows(); ++r)
        if (decode_row(ic, encode_row(ic, ints.row(r)))[0] != ints.at(r, 0)) {
            ok = false;
            why += "integer round trip lost " + fmt(ints.at(r, 0)) + "; ";
            break;
        }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 120.0);
    TabularDataset cont;
    cont.feature_names = {"x"};
    for (int r = 0; r < 10000; ++r) {
        const double x = u(rng);
        cont.append_row(std::span<const double>(&x, 1), "BENIGN");
    }
    const auto cc = fit_codec(cont, {{"x", 8}}, 8);
    const double half = cc.features[0].quantization_step() / 2.0;
    double worst = 0.0;
    for (std::size_t r = 0; r < cont.rows(); ++r)
        worst = std::max(worst, std::abs(decode_row(cc, encode_row(cc, cont.row(r)))[0] - cont.at(r, 0)));
    if (worst > half + 1e-12) {
        ok = false;
        why += "continuous error above half a step; ";
    }
    return {ok, why + "integer_bits(0,255)=" + std::to_string(integer_bits(0, 255)) + ", integer_bits(0,256)=" +
                    std::to_string(integer_bits(0, 256)) + ", worst continuous error " + fmt(worst, 4) +
                    " <= half step " + fmt(half, 4)};
}

Outcome balancing_exactness() {
    auto ds = preprocess(make_desk_fixture({10000, 0.05, 0})).first;
    const std::vector<std::string> names{"flow_duration", "fwd_pkt_len_mean", "bwd_pkt_len_mean", "syn_flag_count"};
    ds = project(ds, names);
    std::vector<FeatureRequest> req;
    for (const auto& n : names) req.push_back({n, 3});
    const auto codec = fit_codec(ds, req, 12);
    const auto emb = generate_embedding(calibrate_params(p16(), 12, 8, {}).params, p16());
    QrbmBalanceConfig qc;
    qc.trainer.epochs = 3;
    qc.trainer.reads = 100;
    qc.trainer.chain_strength = 3.0;
    qc.trainer.beta_eff = 1.0 / 3.0;
    qc.trainer.sampler.sweeps = 100;
    qc.generation.sampler = qc.trainer.sampler;
    qc.generation.sampler.num_reads = 100;
    qc.generation.chain_strength = 3.0;
    qc.generation.beta_eff = 1.0 / 3.0;

    const std::vector<BalanceResult> results{random_oversample(ds, 1), smote(ds, 5, 1), qrbm_balance(ds, codec, emb, p16(), qc)};
    bool ok = balance_deficit(2104309, 420538) == 1683771;
    std::string detail = "before " + std::to_string(ds.class_counts().first) + ":" + std::to_string(ds.class_counts().second);
    for (const auto& r : results) {
        ok = ok && r.after.first == r.after.second && r.dataset.class_counts() == r.after;
        detail += ", " + r.method + " " + std::to_string(r.after.first) + ":" + std::to_string(r.after.second);
    }
    return {ok, detail + ", deficit(2104309, 420538) = " + std::to_string(balance_deficit(2104309, 420538))};
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"qbal"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), err);
    if (code != 0) std::cerr << err.str();
    return code;
}

fs::path config_path() { return fs::path(QBAL_SOURCE_DIR) / "config" / "run_desk.json"; }

struct PipelineRun {
    int code = -1;
    double seconds = 0.0;
    fs::path out;
};

PipelineRun pipeline(const std::string& tag) {
    PipelineRun r;
    r.out = fs::temp_directory_path() / ("qbal_acceptance_" + tag);
    fs::remove_all(r.out);
    const auto t0 = std::chrono::steady_clock::now();
    // progress and tables go to stdout; keep the acceptance output to one line per criterion
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    r.code = run_cli({"--config", config_path().string(), "--out", r.out.string(), "pipeline"});
    std::cout.rdbuf(old);
    r.seconds = seconds_since(t0);
    return r;
}

Outcome pipeline_improvement(const PipelineRun& run) {
    if (run.code != 0) return {false, "pipeline exited with " + std::to_string(run.code)};
    std::ifstream is(run.out / "report.csv");
    const auto rep = read_report_csv(is);
    bool ok = true;
    std::string detail;
    for (const std::string clf : {"knn", "decision_tree"}) {
        const auto& base = rep.cell("none", clf);
        detail += clf + ": none " + fmt(base.minority_recall, 3) + "/" + fmt(base.metrics.f1, 3);
        for (const std::string m : {"random_oversample", "smote", "qrbm"}) {
            const auto& c = rep.cell(m, clf);
            const bool better = c.minority_recall > base.minority_recall && c.metrics.f1 >= base.metrics.f1;
            ok = ok && better;
            detail += ", " + m + " " + fmt(c.minority_recall, 3) + "/" + fmt(c.metrics.f1, 3) + (better ? "" : " (!)");
        }
        detail += "; ";
    }
    return {ok, detail + "(minority recall/macro F1)"};
}

Outcome determinism(const PipelineRun& a) {
    if (a.code != 0) return {false, "first pipeline run failed"};
    const auto b = pipeline("second");
    if (b.code != 0) return {false, "second pipeline run exited with " + std::to_string(b.code)};
    std::vector<std::string> files{"report.csv"};
    for (const auto& e : fs::directory_iterator(a.out)) {
        const auto name = e.path().filename().string();
        if (name.rfind("balanced_", 0) == 0 && e.path().extension() == ".csv") files.push_back(name);
    }
    std::sort(files.begin() + 1, files.end());
    bool ok = files.size() >= 4;
    std::string mismatched;
    for (const auto& f : files)
        if (!fs::exists(b.out / f) || hash_file(a.out / f) != hash_file(b.out / f)) {
            ok = false;
            mismatched += " " + f;
        }
    ok = ok && a.seconds < 600.0 && b.seconds < 600.0;
    fs::remove_all(b.out);
    return {ok, std::to_string(files.size()) + " files compared" + (mismatched.empty() ? ", all hashes equal" : ", differ:" + mismatched) +
                    "; runs took " + fmt(a.seconds, 3) + " s and " + fmt(b.seconds, 3) + " s"};
}

Outcome guarded(const std::function<Outcome()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int n, const Outcome& o) {
        failures += !o.pass;
        std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    };
    report(1, guarded(embedding_validity));
    report(2, guarded(chain_claim));
    report(3, guarded(timing_claim));
    report(4, guarded(boltzmann_exactness));
    report(5, guarded(sampler_agreement));
    report(6, guarded(learning_property));
    report(7, guarded(codec_criterion));
    report(8, guarded(balancing_exactness));
    PipelineRun first;
    report(9, guarded([&] {
        first = pipeline("first");
        return pipeline_improvement(first);
    }));
    report(10, guarded([&] { return determinism(first); }));
    fs::remove_all(first.out);
    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
