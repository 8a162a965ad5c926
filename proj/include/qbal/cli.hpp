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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbal/balance.hpp"
#include "qbal/data.hpp"
#include "qbal/embedding.hpp"
#include "qbal/error.hpp"
#include "qbal/evalx.hpp"
#include "qbal/hash.hpp"
#include "qbal/pegasus.hpp"
#include "qbal/qrbm.hpp"
#include "qbal/random.hpp"
#include "qbal/rbm.hpp"
#include "qbal/remote.hpp"
#include "qbal/samplers.hpp"

namespace qbal::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum Exit : int {
    exit_ok = 0,
    exit_error = 1,
    exit_config = 2,
    exit_validation = 3,
    exit_capacity = 4,
    exit_prerequisite = 5,
    exit_data = 6,
};

inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::config:
        case ErrorKind::parameter: return exit_config;
        case ErrorKind::validation:
        case ErrorKind::rejected: return exit_validation;
        case ErrorKind::capacity: return exit_capacity;
        case ErrorKind::prerequisite: return exit_prerequisite;
        case ErrorKind::index:
        case ErrorKind::data: return exit_data;
        case ErrorKind::sampler: return exit_error;
    }
    return exit_error;
}

// ---------------------------------------------------------------------------
// config reading

/// A JSON value and its location, for path-of-error messages.
class Node {
  public:
    Node(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const nlohmann::json& json() const { return *j_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config " + (path_.empty() ? std::string("/") : path_) + ": " + what);
    }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key) && !j_->at(key).is_null(); }

    Node at(const std::string& key) const {
        if (!j_->is_object()) fail("expected an object");
        const auto it = j_->find(key);
        if (it == j_->end()) Node(*j_, path_ + "/" + key).fail("missing required field");
        return {*it, path_ + "/" + key};
    }

    std::optional<Node> find(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return at(key);
    }

    /// Unknown keys are errors so that typos do not pass silently.
    void only(std::initializer_list<std::string_view> allowed) const {
        if (!j_->is_object()) fail("expected an object");
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                Node(it.value(), path_ + "/" + it.key()).fail("unknown field");
    }

    double number() const {
        if (!j_->is_number()) fail("expected a number");
        return j_->get<double>();
    }

    double positive() const {
        const double x = number();
        if (!(x > 0)) fail("expected a positive number, got " + j_->dump());
        return x;
    }

    std::int64_t integer(std::int64_t min) const {
        if (!j_->is_number_integer()) fail("expected an integer");
        if (j_->is_number_unsigned() && j_->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
            fail("integer out of range");
        const auto x = j_->get<std::int64_t>();
        if (x < min) fail("expected an integer >= " + std::to_string(min) + ", got " + std::to_string(x));
        return x;
    }

    std::uint64_t seed() const {
        if (!j_->is_number_integer() || (!j_->is_number_unsigned() && j_->get<std::int64_t>() < 0))
            fail("expected a non-negative integer seed");
        return j_->get<std::uint64_t>();
    }

    std::string string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }

    bool boolean() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }

    std::vector<Node> items() const {
        if (!j_->is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "/" + std::to_string(i));
        return out;
    }

  private:
    const nlohmann::json* j_;
    std::string path_;
};

/// Everything a pipeline run needs. Stage seeds are fanned out from `seed`
/// by apply_seed.
struct RunConfig {
    std::uint64_t seed = 0;
    fs::path dataset;
    CsvSchema schema;
    double corr_threshold = 0.9;
    double train_fraction = 0.7;
    int total_bits = 0;
    int continuous_bits = 8;
    std::vector<FeatureRequest> features;  // empty: ranked by mutual information
    int pegasus_m = 16;
    std::optional<EmbeddingParams> embedding;  // empty: calibrate
    std::vector<int> n_periodicity;            // calibration candidates, empty: every common divisor
    int n_hidden = 8;
    QrbmTrainerConfig trainer;
    GenerationConfig generation;
    bool dither = true;
    SamplerSpec backend;
    CdConfig cd;
    std::vector<std::string> methods{"none", "random_oversample", "smote", "qrbm"};
    int smote_k = 5;
    std::vector<std::string> classifiers = classifier_names();
    fs::path output;
    nlohmann::json raw;

    bool uses_qrbm() const { return std::find(methods.begin(), methods.end(), "qrbm") != methods.end(); }
};

/// qrbm training, generation and classical CD each get their own stream.
inline void apply_seed(RunConfig& c, std::uint64_t seed) {
    c.seed = seed;
    c.trainer.seed = derive_seed(seed, stage::qrbm_train);
    c.generation.sampler.seed = derive_seed(seed, stage::qrbm_generate);
    c.cd.seed = derive_seed(seed, stage::rbm_cd);
}

/// Relative paths resolve against `base` (the config file's directory).
inline RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base = {}) {
    const Node root(j, "");
    root.only({"seed", "output", "dataset", "preprocess", "codec", "pegasus_m", "embedding", "calibration", "rbm",
               "trainer", "sampler", "generation", "cd", "balance", "classifiers"});
    RunConfig c;
    c.raw = j;
    const auto seed = root.at("seed").seed();
    c.output = base / root.at("output").string();

    const auto ds = root.at("dataset");
    ds.only({"path", "label_column", "benign_label", "drop_columns"});
    c.dataset = base / ds.at("path").string();
    if (auto n = ds.find("label_column")) c.schema.label_column = n->string();
    if (auto n = ds.find("benign_label")) c.schema.benign_label = n->string();
    if (auto n = ds.find("drop_columns"))
        for (const auto& d : n->items()) c.schema.drop_columns.push_back(d.string());

    if (auto pre = root.find("preprocess")) {
        pre->only({"corr_threshold", "train_fraction"});
        if (auto n = pre->find("corr_threshold")) {
            c.corr_threshold = n->number();
            if (!(c.corr_threshold > 0 && c.corr_threshold <= 1)) n->fail("expected a value in (0, 1]");
        }
        if (auto n = pre->find("train_fraction")) {
            c.train_fraction = n->number();
            if (!(c.train_fraction > 0 && c.train_fraction < 1)) n->fail("expected a value in (0, 1)");
        }
    }

    const auto codec = root.at("codec");
    codec.only({"total_bits", "continuous_bits", "features"});
    c.total_bits = static_cast<int>(codec.at("total_bits").integer(1));
    if (auto n = codec.find("continuous_bits")) c.continuous_bits = static_cast<int>(n->integer(1));
    if (auto n = codec.find("features")) {
        for (const auto& f : n->items()) {
            f.only({"name", "bits"});
            FeatureRequest r{f.at("name").string(), std::nullopt};
            if (auto b = f.find("bits")) r.bits = static_cast<int>(b->integer(1));
            c.features.push_back(std::move(r));
        }
        int sum = 0;
        bool all = true;
        for (const auto& r : c.features) {
            all = all && r.bits.has_value();
            sum += r.bits.value_or(0);
        }
        if (all && !c.features.empty() && sum != c.total_bits)
            codec.at("total_bits").fail("feature widths sum to " + std::to_string(sum) + ", not " +
                                        std::to_string(c.total_bits));
    }

    if (auto n = root.find("pegasus_m")) c.pegasus_m = static_cast<int>(n->integer(2));
    if (auto r = root.find("rbm")) {
        r->only({"n_hidden"});
        c.n_hidden = static_cast<int>(r->at("n_hidden").integer(1));
    }

    const auto emb = root.at("embedding");
    if (emb.json().is_string()) {
        if (emb.string() != "calibrate") emb.fail("expected \"calibrate\" or a parameter object");
    } else {
        emb.only({"n_visible", "n_hidden", "periodicity_v", "periodicity_h", "n_periodicity", "startv", "starto"});
        EmbeddingParams p;
        p.n_visible = static_cast<int>(emb.at("n_visible").integer(1));
        p.n_hidden = static_cast<int>(emb.at("n_hidden").integer(1));
        p.periodicity_v = static_cast<int>(emb.at("periodicity_v").integer(0));
        p.periodicity_h = static_cast<int>(emb.at("periodicity_h").integer(0));
        p.n_periodicity = static_cast<int>(emb.at("n_periodicity").integer(1));
        p.startv = static_cast<int>(emb.at("startv").integer(0));
        p.starto = static_cast<int>(emb.at("starto").integer(0));
        if (p.n_visible != c.total_bits)
            emb.at("n_visible").fail("must equal codec total_bits " + std::to_string(c.total_bits));
        if (p.n_hidden != c.n_hidden) emb.at("n_hidden").fail("must equal rbm n_hidden " + std::to_string(c.n_hidden));
        try {
            p.check();
        } catch (const ParameterError& e) {
            emb.fail(e.what());
        }
        c.embedding = p;
    }
    if (auto cal = root.find("calibration")) {
        cal->only({"n_periodicity"});
        if (auto n = cal->find("n_periodicity"))
            for (const auto& v : n->items()) c.n_periodicity.push_back(static_cast<int>(v.integer(1)));
    }

    if (auto t = root.find("trainer")) {
        t->only({"learning_rate", "batch_size", "reads", "epochs", "chain_strength", "beta_eff", "plateau_threshold",
                 "plateau_window"});
        if (auto n = t->find("learning_rate")) c.trainer.learning_rate = n->positive();
        if (auto n = t->find("batch_size")) c.trainer.batch_size = static_cast<std::size_t>(n->integer(1));
        if (auto n = t->find("reads")) c.trainer.reads = static_cast<std::size_t>(n->integer(1));
        if (auto n = t->find("epochs")) c.trainer.epochs = static_cast<std::size_t>(n->integer(1));
        if (auto n = t->find("chain_strength")) c.trainer.chain_strength = n->positive();
        if (auto n = t->find("beta_eff")) c.trainer.beta_eff = n->positive();
        if (auto n = t->find("plateau_threshold")) c.trainer.plateau_threshold = n->number();
        if (auto n = t->find("plateau_window")) c.trainer.plateau_window = static_cast<std::size_t>(n->integer(1));
    }

    SamplerConfig sc;
    if (auto s = root.find("sampler")) {
        s->only({"backend", "endpoint", "sweeps", "beta_min", "beta_max", "geometric", "threads"});
        if (auto n = s->find("backend")) {
            try {
                c.backend.backend = parse_backend(n->string());
            } catch (const ConfigError& e) {
                n->fail(e.what());
            }
        }
        if (auto n = s->find("endpoint")) c.backend.endpoint = n->string();
        if (auto n = s->find("sweeps")) sc.sweeps = static_cast<std::size_t>(n->integer(1));
        if (auto n = s->find("beta_min")) sc.beta_min = n->positive();
        if (auto n = s->find("beta_max")) sc.beta_max = n->positive();
        if (auto n = s->find("geometric")) sc.geometric = n->boolean();
        if (auto n = s->find("threads")) sc.threads = static_cast<unsigned>(n->integer(0));
        if (!(sc.beta_min < sc.beta_max)) s->fail("beta_min must be below beta_max");
        if (c.backend.backend == Backend::remote && c.backend.endpoint.empty())
            s->fail("the remote backend needs an endpoint");
    }
    c.trainer.sampler = sc;
    c.generation.sampler = sc;
    c.generation.sampler.num_reads = c.trainer.reads;
    if (auto g = root.find("generation")) {
        g->only({"reads_per_job", "dither"});
        if (auto n = g->find("reads_per_job")) c.generation.sampler.num_reads = static_cast<std::size_t>(n->integer(1));
        if (auto n = g->find("dither")) c.dither = n->boolean();
    }
    c.generation.chain_strength = c.trainer.chain_strength;
    c.generation.beta_eff = c.trainer.beta_eff;

    if (auto d = root.find("cd")) {
        d->only({"learning_rate", "batch_size", "epochs", "k"});
        if (auto n = d->find("learning_rate")) c.cd.learning_rate = n->positive();
        if (auto n = d->find("batch_size")) c.cd.batch_size = static_cast<std::size_t>(n->integer(1));
        if (auto n = d->find("epochs")) c.cd.epochs = static_cast<std::size_t>(n->integer(1));
        if (auto n = d->find("k")) c.cd.k = static_cast<int>(n->integer(1));
    }

    if (auto b = root.find("balance")) {
        b->only({"methods", "smote_k"});
        if (auto n = b->find("methods")) {
            c.methods.clear();
            for (const auto& m : n->items()) {
                const auto name = m.string();
                if (name != "none" && name != "random_oversample" && name != "smote" && name != "qrbm")
                    m.fail("unknown method '" + name + "' (none, random_oversample, smote, qrbm)");
                if (std::find(c.methods.begin(), c.methods.end(), name) != c.methods.end())
                    m.fail("duplicate method '" + name + "'");
                c.methods.push_back(name);
            }
            if (c.methods.empty()) n->fail("expected at least one method");
        }
        if (auto n = b->find("smote_k")) c.smote_k = static_cast<int>(n->integer(1));
    }
    if (auto n = root.find("classifiers")) {
        c.classifiers.clear();
        const auto& known = classifier_names();
        for (const auto& v : n->items()) {
            const auto name = v.string();
            if (std::find(known.begin(), known.end(), name) == known.end()) v.fail("unknown classifier '" + name + "'");
            c.classifiers.push_back(name);
        }
        if (c.classifiers.empty()) n->fail("expected at least one classifier");
    }
    apply_seed(c, seed);
    return c;
}

inline nlohmann::json read_json_file(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw DataError("cannot open '" + p.string() + "'");
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

inline RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' not found");
    nlohmann::json j;
    try {
        j = read_json_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// artifacts

inline void write_json_file(const fs::path& p, const Json& j) {
    std::ofstream os(p);
    if (!os) throw DataError("cannot write '" + p.string() + "'");
    os << j.dump(2) << '\n';
}

template <typename Fn>
void write_file(const fs::path& p, Fn&& body) {
    std::ofstream os(p);
    if (!os) throw DataError("cannot write '" + p.string() + "'");
    body(os);
}

/// Header b0..b{n-1}, one 0/1 row per line.
inline void write_bits_csv(const BinaryMatrix& m, std::ostream& os) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << 'b' << c;
    os << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << int(m(r, c));
        os << '\n';
    }
}

inline BinaryMatrix read_bits_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("bit file is empty");
    const auto width = detail::split_csv_line(detail::trim(line)).size();
    std::vector<std::uint8_t> cells;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        const auto row = detail::split_csv_line(t);
        if (row.size() != width)
            throw DataError("bit file line " + std::to_string(lineno) + " has " + std::to_string(row.size()) + " cells");
        for (const auto& v : row) {
            if (v != "0" && v != "1") throw DataError("bit file line " + std::to_string(lineno) + ": '" + v + "' is not 0/1");
            cells.push_back(static_cast<std::uint8_t>(v[0] - '0'));
        }
    }
    BinaryMatrix m(static_cast<Eigen::Index>(cells.size() / width), static_cast<Eigen::Index>(width));
    std::copy(cells.begin(), cells.end(), m.data());
    return m;
}

inline BinaryMatrix load_bits_csv(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw DataError("cannot open '" + p.string() + "'");
    return read_bits_csv(is);
}

inline RbmEmbedding load_embedding(const fs::path& p) {
    nlohmann::json j;
    try {
        j = read_json_file(p);
    } catch (const DataError& e) {
        throw ValidationError(e.what());
    }
    return embedding_from_json(j);
}

// ---------------------------------------------------------------------------
// command context

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string backend;
    bool force = false;
};

/// Shared state of one command: the parsed config (if any), the output
/// directory and the override flags.
class Context {
  public:
    explicit Context(const Options& o, std::ostream& log = std::cerr) : force_(o.force), log_(&log) {
        if (!o.config.empty()) {
            cfg_ = load_run_config(o.config);
            if (o.seed) apply_seed(*cfg_, *o.seed);
            if (!o.backend.empty()) cfg_->backend.backend = parse_backend(o.backend);
            if (cfg_->backend.backend == Backend::remote && cfg_->backend.endpoint.empty())
                throw ConfigError("config /sampler/endpoint: the remote backend needs an endpoint");
        } else if (!o.backend.empty()) {
            parse_backend(o.backend);
        }
        seed_ = o.seed ? o.seed : (cfg_ ? std::optional(cfg_->seed) : std::nullopt);
        out_ = !o.out.empty() ? fs::path(o.out) : cfg_ ? cfg_->output : fs::path("qbal_out");
        fs::create_directories(out_);
    }

    bool has_config() const { return cfg_.has_value(); }
    const RunConfig& config() const {
        if (!cfg_) throw ConfigError("this command needs --config");
        return *cfg_;
    }
    std::uint64_t seed() const {
        if (!seed_) throw ConfigError("a seed is mandatory: pass --seed or --config");
        return *seed_;
    }
    bool force() const { return force_; }
    std::ostream& log() const { return *log_; }
    const fs::path& out() const { return out_; }

    fs::path file(const std::string& name) const { return out_ / name; }

    /// Path of an artifact produced earlier by `producer`.
    fs::path need(const std::string& name, const std::string& producer) const {
        auto p = file(name);
        if (!fs::exists(p))
            throw MissingPrerequisite("missing " + p.string() + "; run `qbal " + producer + "` first");
        return p;
    }

    /// Fingerprint of the effective config, independent of the output directory.
    std::string config_fnv() const {
        if (!cfg_) return "";
        auto j = cfg_->raw;
        j.erase("output");
        j["seed"] = cfg_->seed;
        j["sampler"]["backend"] = to_string(cfg_->backend.backend);
        return hex64(hash_bytes(j.dump()));
    }

    CsvSchema artifact_schema() const {
        CsvSchema s;
        if (cfg_) {
            s.label_column = cfg_->schema.label_column;
            s.benign_label = cfg_->schema.benign_label;
        }
        return s;
    }

    SampleFn sampler() const { return make_sampler(config().backend); }

  private:
    std::optional<RunConfig> cfg_;
    std::optional<std::uint64_t> seed_;
    fs::path out_;
    bool force_ = false;
    std::ostream* log_;
};

/// Per-command record of inputs, outputs and their hashes. Everything but
/// the "timing" object is a function of the config and the inputs.
class Manifest {
  public:
    Manifest(const Context& ctx, std::string command)
        : ctx_(&ctx), command_(std::move(command)), t0_(std::chrono::steady_clock::now()) {}

    void input(const fs::path& p) { inputs_.push_back(entry(p)); }
    void output(const fs::path& p) { outputs_.push_back(entry(p)); }
    /// An output that records wall times: listed without a hash.
    void timing_output(const fs::path& p) { outputs_.push_back(Json{{"path", relative(p)}, {"timing", true}}); }
    Json& details() { return details_; }
    Json& timing() { return timing_; }

    void warn(const std::string& w) {
        warnings_.push_back(w);
        ctx_->log() << "warning: " << w << '\n';
    }

    /// Stops the command on warnings unless --force was given.
    void gate() const {
        if (warnings_.empty() || ctx_->force()) return;
        std::string msg = command_ + " stopped on " + std::to_string(warnings_.size()) + " warning(s):";
        for (const auto& w : warnings_) msg += " " + w + ";";
        throw ValidationError(msg + " rerun with --force to proceed");
    }

    fs::path write() {
        Json j;
        j["command"] = command_;
        if (ctx_->has_config()) {
            j["seed"] = ctx_->seed();
            j["config_fnv"] = ctx_->config_fnv();
        }
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        j["warnings"] = warnings_;
        j["forced"] = ctx_->force() && !warnings_.empty();
        j["details"] = details_.is_null() ? Json::object() : details_;
        timing_["wall_ms"] = detail::elapsed_ms(t0_);
        j["timing"] = timing_;
        fs::create_directories(ctx_->out() / "manifests");
        std::string name = command_;
        std::replace(name.begin(), name.end(), ' ', '_');
        const auto p = ctx_->out() / "manifests" / (name + ".json");
        write_json_file(p, j);
        return p;
    }

  private:
    std::string relative(const fs::path& p) const {
        const auto rel = p.lexically_relative(ctx_->out());
        const bool inside = !rel.empty() && *rel.begin() != "..";
        return inside ? rel.generic_string() : p.generic_string();
    }

    Json entry(const fs::path& p) const { return Json{{"path", relative(p)}, {"fnv", hex64(hash_file(p))}}; }

    const Context* ctx_;
    std::string command_;
    std::chrono::steady_clock::time_point t0_;
    Json inputs_ = Json::array();
    Json outputs_ = Json::array();
    Json details_;
    Json timing_ = Json::object();
    std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// commands

inline Json stats_json(const EmbeddingStats& s) {
    Json h = Json::object();
    for (auto [len, n] : s.chain_length_histogram) h[std::to_string(len)] = n;
    return {{"qubits_used", s.qubits_used}, {"max_chain_length", s.max_chain_length}, {"chain_length_histogram", h}};
}

inline Json calibration_json(const CalibrationStats& s) {
    return {{"n_periodicity_tried", s.n_periodicity_tried},
            {"n_periodicity_skipped", s.n_periodicity_skipped},
            {"start_pairs", s.start_pairs},
            {"tuples_checked", s.tuples_checked}};
}

inline void cmd_pegasus_info(const Context& ctx, std::optional<int> m_opt, bool edges) {
    Manifest man(ctx, "pegasus-info");
    const int m = m_opt ? *m_opt : ctx.has_config() ? ctx.config().pegasus_m : 16;
    const auto g = build_pegasus(m);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t q = 0; q < g.num_qubits(); ++q) {
        lo = std::min(lo, g.degree(static_cast<Qubit>(q)));
        hi = std::max(hi, g.degree(static_cast<Qubit>(q)));
    }
    Json info{{"m", m}, {"num_qubits", g.num_qubits()}, {"num_edges", g.num_edges()},
              {"min_degree", lo}, {"max_degree", hi}};
    write_json_file(ctx.file("pegasus.json"), info);
    man.output(ctx.file("pegasus.json"));
    if (edges) {
        write_file(ctx.file("pegasus_edges.txt"), [&](std::ostream& os) { write_edge_list(g, os); });
        man.output(ctx.file("pegasus_edges.txt"));
    }
    man.details() = info;
    man.write();
    std::cout << "P" << m << ": " << g.num_qubits() << " qubits, " << g.num_edges() << " couplers, degree " << lo
              << ".." << hi << '\n';
}

/// Writes {pegasus_m, params, calibration} to embedding_params.json.
inline EmbeddingParams cmd_embed_calibrate(const Context& ctx, std::optional<int> nv, std::optional<int> nh,
                                           std::vector<int> candidates) {
    Manifest man(ctx, "embed calibrate");
    int m = 16;
    if (ctx.has_config()) {
        const auto& c = ctx.config();
        m = c.pegasus_m;
        if (!nv) nv = c.total_bits;
        if (!nh) nh = c.n_hidden;
        if (candidates.empty()) candidates = c.n_periodicity;
    }
    if (!nv || !nh) throw ConfigError("embed calibrate needs --nv and --nh, or --config");
    const auto g = build_pegasus(m);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cal = calibrate_params(g, *nv, *nh, candidates);
    man.timing()["calibrate_ms"] = detail::elapsed_ms(t0);
    Json j{{"pegasus_m", m}, {"params", to_json(cal.params)}, {"calibration", calibration_json(cal.stats)}};
    write_json_file(ctx.file("embedding_params.json"), j);
    man.output(ctx.file("embedding_params.json"));
    man.details() = j;
    man.write();
    ctx.log() << "calibrated " << *nv << "x" << *nh << ": " << to_json(cal.params).dump() << '\n';
    return cal.params;
}

/// Params come from --params (an embedding_params.json-style file), the
/// config, or calibration when the config says "calibrate".
inline RbmEmbedding cmd_embed_gen(const Context& ctx, const std::string& params_file) {
    Manifest man(ctx, "embed gen");
    EmbeddingParams p;
    int m = ctx.has_config() ? ctx.config().pegasus_m : 16;
    if (!params_file.empty()) {
        if (!fs::exists(params_file)) throw MissingPrerequisite("params file '" + params_file + "' not found");
        const auto j = read_json_file(params_file);
        p = params_from_json(j.contains("params") ? j.at("params") : j);
        if (j.contains("pegasus_m")) m = j.at("pegasus_m").get<int>();
        man.input(params_file);
    } else {
        const auto& c = ctx.config();
        if (c.embedding) {
            p = *c.embedding;
        } else {
            const auto cal = calibrate_params(build_pegasus(m), c.total_bits, c.n_hidden, c.n_periodicity);
            p = cal.params;
            man.details()["calibration"] = calibration_json(cal.stats);
        }
    }
    p.check();
    const auto g = build_pegasus(m);
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = generate_embedding(p, g);
    man.timing()["generate_ms"] = detail::elapsed_ms(t0);
    auto j = to_json(e);
    j["pegasus_m"] = m;
    write_json_file(ctx.file("embedding.json"), j);
    man.output(ctx.file("embedding.json"));
    man.details()["params"] = to_json(p);
    man.details()["stats"] = stats_json(embedding_stats(e));
    man.write();
    ctx.log() << "embedding " << p.n_visible << "x" << p.n_hidden << " written to " << ctx.file("embedding.json")
              << '\n';
    return e;
}

/// Writes embedding_validation.json; an invalid embedding is a
/// ValidationError after the report is written.
inline ValidationReport cmd_embed_validate(const Context& ctx, const std::string& embedding_file,
                                           const std::string& defects_file) {
    Manifest man(ctx, "embed validate");
    const fs::path path = embedding_file.empty() ? ctx.need("embedding.json", "embed gen") : fs::path(embedding_file);
    if (!fs::exists(path)) throw MissingPrerequisite("embedding file '" + path.string() + "' not found; run `qbal embed gen`");
    man.input(path);
    const auto e = load_embedding(path);
    int m = ctx.has_config() ? ctx.config().pegasus_m : 16;
    if (const auto j = read_json_file(path); j.contains("pegasus_m")) m = j.at("pegasus_m").get<int>();
    std::vector<Qubit> defects;
    if (!defects_file.empty()) {
        defects = read_json_file(defects_file).get<std::vector<Qubit>>();
        man.input(defects_file);
    }
    const auto g = build_pegasus(m);
    ValidationReport r;
    try {
        r = validate_embedding(g, e, defects);
    } catch (const IndexError& ex) {
        throw ValidationError(std::string("embedding references qubits outside P") + std::to_string(m) + ": " + ex.what());
    }
    auto j = to_json(r);
    write_json_file(ctx.file("embedding_validation.json"), j);
    man.output(ctx.file("embedding_validation.json"));
    man.details() = {{"valid", r.valid}, {"violations", r.violations()}};
    man.write();
    std::cout << "valid=" << (r.valid ? "true" : "false") << " violations=" << r.violations() << '\n';
    if (!r.valid) throw ValidationError("embedding is invalid: " + r.first_violation());
    return r;
}

inline void cmd_data_fixture(const Context& ctx, std::size_t rows, double attack_fraction, const std::string& file) {
    Manifest man(ctx, "data fixture");
    FixtureConfig fc;
    fc.rows = rows;
    fc.attack_fraction = attack_fraction;
    fc.seed = ctx.seed();
    if (!(attack_fraction > 0 && attack_fraction < 1)) throw ParameterError("attack fraction must be in (0, 1)");
    const auto ds = make_desk_fixture(fc);
    const fs::path p = file.empty() ? ctx.file("desk_fixture.csv") : fs::path(file);
    save_csv(ds, p.string());
    man.output(p);
    const auto [b, a] = ds.class_counts();
    man.details() = {{"rows", ds.rows()}, {"benign", b}, {"attack", a}, {"seed", fc.seed}};
    man.write();
    ctx.log() << "fixture: " << b << " benign, " << a << " attack rows in " << p << '\n';
}

inline void cmd_data_preprocess(const Context& ctx) {
    Manifest man(ctx, "data preprocess");
    const auto& c = ctx.config();
    if (!fs::exists(c.dataset))
        throw ConfigError("config /dataset/path: file '" + c.dataset.string() + "' not found");
    man.input(c.dataset);
    const auto raw = load_csv(c.dataset.string(), c.schema);
    auto [ds, report] = preprocess(raw, c.corr_threshold);
    save_csv(ds, ctx.file("preprocessed.csv").string());
    write_json_file(ctx.file("preprocess_report.json"), to_json(report));
    man.output(ctx.file("preprocessed.csv"));
    man.output(ctx.file("preprocess_report.json"));
    man.details() = to_json(report);
    man.write();
    ctx.log() << "preprocess: " << report.rows_in << " -> " << report.final_rows << " rows, " << ds.cols()
              << " features\n";
}

inline void cmd_data_split(const Context& ctx) {
    Manifest man(ctx, "data split");
    const auto& c = ctx.config();
    const auto in = ctx.need("preprocessed.csv", "data preprocess");
    man.input(in);
    const auto ds = load_csv(in.string(), ctx.artifact_schema());
    const auto s = split(ds, c.train_fraction, derive_seed(c.seed, stage::split));
    save_csv(s.train, ctx.file("train.csv").string());
    save_csv(s.test, ctx.file("test.csv").string());
    man.output(ctx.file("train.csv"));
    man.output(ctx.file("test.csv"));
    const auto [t0, t1] = s.train.class_counts();
    const auto [e0, e1] = s.test.class_counts();
    man.details() = {{"train", {{"class0", t0}, {"class1", t1}}}, {"test", {{"class0", e0}, {"class1", e1}}}};
    man.write();
    ctx.log() << "split: train " << t0 << ":" << t1 << ", test " << e0 << ":" << e1 << '\n';
}

/// Fits the codec on the minority rows of train.csv and writes their bits.
inline void cmd_data_binarize(const Context& ctx) {
    Manifest man(ctx, "data binarize");
    const auto& c = ctx.config();
    const auto in = ctx.need("train.csv", "data split");
    man.input(in);
    const auto train = load_csv(in.string(), ctx.artifact_schema());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < train.rows(); ++r)
        if (train.binary_class(r) == 1) rows.push_back(r);
    const auto [n0, n1] = train.class_counts();
    if (n1 > n0) throw DataError("binarize expects the attack class to be the minority");
    const auto minority = train.select_rows(rows);
    const auto codec = c.features.empty() ? fit_codec_ranked(minority, c.total_bits, c.continuous_bits)
                                          : fit_codec(minority, c.features, c.total_bits, c.continuous_bits);
    std::size_t clipped = 0;
    const auto bits = encode_minority(project(train, codec.feature_names()), codec, &clipped);
    if (clipped) man.warn(std::to_string(clipped) + " values clipped while encoding");
    man.gate();
    write_json_file(ctx.file("codec.json"), to_json(codec));
    write_file(ctx.file("minority_bits.csv"), [&](std::ostream& os) { write_bits_csv(bits, os); });
    man.output(ctx.file("codec.json"));
    man.output(ctx.file("minority_bits.csv"));
    man.details() = {{"rows", bits.rows()}, {"total_bits", codec.total_bits()}, {"features", codec.feature_names()}};
    man.write();
    ctx.log() << "binarize: " << bits.rows() << " minority rows x " << codec.total_bits() << " bits\n";
}

inline void cmd_rbm_train_cd(const Context& ctx) {
    Manifest man(ctx, "rbm train-cd");
    const auto& c = ctx.config();
    const auto in = ctx.need("minority_bits.csv", "data binarize");
    man.input(in);
    const auto bits = load_bits_csv(in);
    const auto res = train_cd(bits, c.n_hidden, c.cd);
    write_json_file(ctx.file("rbm_cd.json"), to_json(res.params, {{"trainer", "cd"}, {"k", c.cd.k}, {"seed", c.cd.seed}}));
    write_file(ctx.file("rbm_cd_log.csv"), [&](std::ostream& os) { write_training_log_csv(res.log, os); });
    man.output(ctx.file("rbm_cd.json"));
    man.timing_output(ctx.file("rbm_cd_log.csv"));
    man.details() = {{"objective", res.log.objective_kind}, {"final", res.log.epochs.back().objective}};
    man.write();
    ctx.log() << "train-cd: final " << res.log.objective_kind << " " << res.log.epochs.back().objective << '\n';
}

/// Chain break rates above this are reported as a warning.
inline constexpr double kChainBreakWarning = 0.25;

inline void cmd_qrbm_train(const Context& ctx) {
    Manifest man(ctx, "qrbm train");
    const auto& c = ctx.config();
    const auto bits_path = ctx.need("minority_bits.csv", "data binarize");
    const auto emb_path = ctx.need("embedding.json", "embed gen");
    man.input(bits_path);
    man.input(emb_path);
    const auto bits = load_bits_csv(bits_path);
    const auto emb = load_embedding(emb_path);
    const auto g = build_pegasus(c.pegasus_m);
    const auto res = train_qrbm(bits, c.trainer, emb, g, ctx.sampler());
    const double cbr = res.log.epochs.back().chain_break_rate;
    if (cbr > kChainBreakWarning) man.warn("final chain break rate " + std::to_string(cbr) + " exceeds 0.25");
    man.gate();
    write_json_file(ctx.file("qrbm_model.json"),
                    to_json(res.params, {{"trainer", "qrbm"}, {"seed", c.trainer.seed},
                                         {"backend", to_string(c.backend.backend)},
                                         {"chain_strength", c.trainer.chain_strength},
                                         {"beta_eff", c.trainer.beta_eff}}));
    write_file(ctx.file("qrbm_training_log.csv"), [&](std::ostream& os) { write_training_log_csv(res.log, os); });
    man.output(ctx.file("qrbm_model.json"));
    man.timing_output(ctx.file("qrbm_training_log.csv"));
    man.details() = {{"epochs", res.log.epochs.size()}, {"objective", res.log.objective_kind},
                     {"final", res.log.epochs.back().objective}, {"chain_break_rate", cbr}};
    double ms = 0;
    for (const auto& e : res.log.epochs) ms += e.wall_ms;
    man.timing()["train_ms"] = ms;
    man.write();
    ctx.log() << "qrbm train: " << res.log.epochs.size() << " epochs, final " << res.log.objective_kind << " "
              << res.log.epochs.back().objective << ", chain breaks " << cbr << '\n';
}

/// Generates `n` rows (default: the train deficit) in the encoded space.
inline void cmd_qrbm_sample(const Context& ctx, std::optional<std::size_t> n) {
    Manifest man(ctx, "qrbm sample");
    const auto& c = ctx.config();
    const auto model_path = ctx.need("qrbm_model.json", "qrbm train");
    const auto emb_path = ctx.need("embedding.json", "embed gen");
    man.input(model_path);
    man.input(emb_path);
    if (!n) {
        const auto train_path = ctx.need("train.csv", "data split");
        man.input(train_path);
        const auto [n0, n1] = load_csv(train_path.string(), ctx.artifact_schema()).class_counts();
        n = balance_deficit(n0, n1);
    }
    const auto model = rbm_from_json(read_json_file(model_path));
    const auto emb = load_embedding(emb_path);
    const auto s = generate_synthetic(model, emb, build_pegasus(c.pegasus_m), c.generation, *n, ctx.sampler());
    write_file(ctx.file("synthetic_bits.csv"), [&](std::ostream& os) { write_bits_csv(s.visible, os); });
    write_file(ctx.file("synthetic_lineage.csv"), [&](std::ostream& os) {
        os << "row,job,sample\n";
        for (std::size_t r = 0; r < s.lineage.size(); ++r)
            os << r << ',' << s.lineage[r].first << ',' << s.lineage[r].second << '\n';
    });
    man.output(ctx.file("synthetic_bits.csv"));
    man.output(ctx.file("synthetic_lineage.csv"));
    man.details() = {{"rows", *n}, {"jobs", s.jobs.size()}, {"chain_break_rate", s.chain_break_rate}};
    man.write();
    ctx.log() << "qrbm sample: " << *n << " rows from " << s.jobs.size() << " jobs\n";
}

/// Writes balanced_<method>.csv for every configured method except "none".
inline void cmd_balance_run(const Context& ctx) {
    Manifest man(ctx, "balance run");
    const auto& c = ctx.config();
    const auto train_path = ctx.need("train.csv", "data split");
    man.input(train_path);
    const auto train = load_csv(train_path.string(), ctx.artifact_schema());
    if (const auto [n0, n1] = train.class_counts(); n0 == n1) man.warn("training set is already balanced");
    man.gate();
    Json summaries = Json::array();
    for (const auto& m : c.methods) {
        if (m == "none") continue;
        BalanceResult res;
        if (m == "qrbm") {
            const auto codec_path = ctx.need("codec.json", "data binarize");
            const auto emb_path = ctx.need("embedding.json", "embed gen");
            const auto model_path = ctx.need("qrbm_model.json", "qrbm train");
            man.input(codec_path);
            man.input(emb_path);
            man.input(model_path);
            const auto codec = codec_from_json(read_json_file(codec_path));
            const auto emb = load_embedding(emb_path);
            const auto model = rbm_from_json(read_json_file(model_path));
            if (train.feature_names != codec.feature_names())
                throw DataError("train.csv columns differ from codec.json features; rerun `qbal data binarize`");
            res = qrbm_oversample(train, codec, emb, build_pegasus(c.pegasus_m), model, c.generation, c.dither,
                                  ctx.sampler());
        } else {
            res = standard_method(m, c.smote_k).balance(train, method_seed(c.seed, m));
        }
        const auto out = ctx.file("balanced_" + m + ".csv");
        save_csv(res.dataset, out.string());
        man.output(out);
        auto s = balance_summary(res);
        man.timing()[m] = s["timing"];
        s.erase("timing");
        summaries.push_back(s);
        ctx.log() << "balance " << m << ": +" << res.synthetic << " rows -> " << res.after.first << ":"
                  << res.after.second << '\n';
    }
    write_json_file(ctx.file("balance_summary.json"), summaries);
    man.output(ctx.file("balance_summary.json"));
    man.details() = summaries;
    man.write();
}

/// Scores every classifier on every balanced training set; writes
/// report.csv (metrics only) and timings.csv.
inline ExperimentReport cmd_eval_run(const Context& ctx) {
    Manifest man(ctx, "eval run");
    const auto& c = ctx.config();
    const auto train_path = ctx.need("train.csv", "data split");
    const auto test_path = ctx.need("test.csv", "data split");
    man.input(train_path);
    man.input(test_path);
    const auto schema = ctx.artifact_schema();
    const auto train = load_csv(train_path.string(), schema);
    const auto test = load_csv(test_path.string(), schema);
    std::vector<MethodSpec> methods;
    for (const auto& m : c.methods) {
        if (m == "none") {
            methods.push_back(standard_method("none"));
            continue;
        }
        const auto p = ctx.need("balanced_" + m + ".csv", "balance run");
        man.input(p);
        auto ds = load_csv(p.string(), schema);
        methods.push_back({m, [m, ds = std::move(ds)](const TabularDataset& t, std::uint64_t) {
                               if (ds.feature_names != t.feature_names)
                                   throw DataError("balanced_" + m + ".csv columns differ from train.csv");
                               BalanceResult r;
                               r.dataset = ds;
                               r.method = m;
                               r.before = t.class_counts();
                               r.after = ds.class_counts();
                               r.synthetic = ds.rows() - t.rows();
                               return r;
                           }});
    }
    const auto rep = run_experiment(train, test, methods, c.classifiers, c.seed);
    write_file(ctx.file("report.csv"), [&](std::ostream& os) { write_report_csv(rep, os); });
    write_file(ctx.file("timings.csv"), [&](std::ostream& os) { write_timings_csv(rep, os); });
    man.output(ctx.file("report.csv"));
    man.timing_output(ctx.file("timings.csv"));
    man.details() = {{"cells", rep.cells.size()}, {"test_fnv", rep.test_hash}};
    man.write();
    ctx.log() << "eval: " << rep.cells.size() << " cells\n";
    return rep;
}

inline void cmd_report_render(const Context& ctx) {
    Manifest man(ctx, "report render");
    const auto in = ctx.need("report.csv", "eval run");
    man.input(in);
    std::ifstream is(in);
    const auto rep = read_report_csv(is);
    write_file(ctx.file("report.txt"), [&](std::ostream& os) { render_text_tables(rep, os); });
    man.output(ctx.file("report.txt"));
    for (const char* metric : {"precision", "recall", "f1", "minority_recall"}) {
        const auto p = ctx.file(std::string("report_") + metric + ".svg");
        write_file(p, [&](std::ostream& os) { render_svg(rep, metric, os); });
        man.output(p);
    }
    man.write();
    render_text_tables(rep, std::cout);
}

/// Every stage in order, all artifacts in the output directory.
inline void cmd_pipeline(const Context& ctx) {
    const auto& c = ctx.config();
    cmd_data_preprocess(ctx);
    cmd_data_split(ctx);
    if (c.uses_qrbm()) {
        cmd_data_binarize(ctx);
        cmd_embed_gen(ctx, "");
        cmd_embed_validate(ctx, "", "");
        cmd_qrbm_train(ctx);
    }
    cmd_balance_run(ctx);
    cmd_eval_run(ctx);
    cmd_report_render(ctx);
}

// ---------------------------------------------------------------------------
// entry point

/// Parses argv and runs one command. Errors are printed to `err` and turned
/// into exit codes.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"qbal: QRBM-based balancing of tabular data on a Pegasus-embedded RBM"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    app.add_option("--config", o.config, "run configuration (JSON)");
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", o.out, "output directory (default: the config's output)");
    app.add_option("--backend", o.backend, "sampler backend")->check(CLI::IsMember({"exact", "sa", "remote"}));
    app.add_flag("--force", o.force, "proceed past validation warnings (never past hard errors)");

    std::function<void(const Context&)> action;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        auto* s = parent->add_subcommand(name, help);
        s->fallthrough();
        return s;
    };
    auto group = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        s->require_subcommand(1);
        return s;
    };

    int m = 16;
    bool edges = false;
    auto* pinfo = leaf(&app, "pegasus-info", "size and degree of the Pegasus graph");
    auto* m_opt = pinfo->add_option("--m", m, "Pegasus size parameter");
    pinfo->add_flag("--edges", edges, "also write the edge list");
    pinfo->callback([&] { action = [&](const Context& c) { cmd_pegasus_info(c, m_opt->count() ? std::optional(m) : std::nullopt, edges); }; });

    auto* embed = group("embed", "RBM embeddings on Pegasus");
    std::string params_file, embedding_file, defects_file;
    int nv = 0, nh = 0;
    std::vector<int> np;
    auto* gen = leaf(embed, "gen", "generate embedding.json");
    gen->add_option("--params", params_file, "embedding params file (default: from the config)");
    gen->callback([&] { action = [&](const Context& c) { cmd_embed_gen(c, params_file); }; });
    auto* val = leaf(embed, "validate", "check an embedding against the graph");
    val->add_option("--embedding", embedding_file, "embedding file (default: <out>/embedding.json)");
    val->add_option("--defects", defects_file, "JSON array of unusable qubits");
    val->callback([&] { action = [&](const Context& c) { cmd_embed_validate(c, embedding_file, defects_file); }; });
    auto* cal = leaf(embed, "calibrate", "search placement parameters");
    auto* nv_opt = cal->add_option("--nv", nv, "visible units");
    auto* nh_opt = cal->add_option("--nh", nh, "hidden units");
    cal->add_option("--np", np, "n_periodicity candidates");
    cal->callback([&] {
        action = [&](const Context& c) {
            cmd_embed_calibrate(c, nv_opt->count() ? std::optional(nv) : std::nullopt,
                                nh_opt->count() ? std::optional(nh) : std::nullopt, np);
        };
    });

    auto* data = group("data", "dataset stages");
    std::size_t rows = 10000;
    double attack = 0.05;
    std::string fixture_file;
    auto* fx = leaf(data, "fixture", "write the synthetic desk fixture");
    fx->add_option("--rows", rows, "row count");
    fx->add_option("--attack-fraction", attack, "share of attack rows");
    fx->add_option("--file", fixture_file, "output CSV (default: <out>/desk_fixture.csv)");
    fx->callback([&] { action = [&](const Context& c) { cmd_data_fixture(c, rows, attack, fixture_file); }; });
    leaf(data, "preprocess", "clean, prune and deduplicate")->callback([&] { action = cmd_data_preprocess; });
    leaf(data, "split", "stratified train/test split")->callback([&] { action = cmd_data_split; });
    leaf(data, "binarize", "fit the codec and encode minority rows")->callback([&] { action = cmd_data_binarize; });

    auto* rbm = group("rbm", "classical RBM");
    leaf(rbm, "train-cd", "contrastive divergence baseline")->callback([&] { action = cmd_rbm_train_cd; });

    auto* qrbm = group("qrbm", "annealing-trained RBM");
    std::size_t n = 0;
    leaf(qrbm, "train", "train on minority_bits.csv")->callback([&] { action = cmd_qrbm_train; });
    auto* smp = leaf(qrbm, "sample", "generate encoded synthetic rows");
    auto* n_opt = smp->add_option("--n", n, "rows to generate (default: train deficit)");
    smp->callback([&] { action = [&](const Context& c) { cmd_qrbm_sample(c, n_opt->count() ? std::optional(n) : std::nullopt); }; });

    leaf(group("balance", "balancing"), "run", "write balanced training sets")->callback([&] { action = cmd_balance_run; });
    leaf(group("eval", "evaluation"), "run", "classifier grid")->callback([&] { action = [](const Context& c) { cmd_eval_run(c); }; });
    leaf(group("report", "reports"), "render", "text tables and SVG charts")->callback([&] { action = cmd_report_render; });
    leaf(&app, "pipeline", "every stage from preprocess to report")->callback([&] { action = cmd_pipeline; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, err);
        return code == 0 ? exit_ok : exit_config;
    }
    if (seed_opt->count()) o.seed = seed;
    try {
        const Context ctx(o, err);
        action(ctx);
        return exit_ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

}  // namespace qbal::cli
