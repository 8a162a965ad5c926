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

// HTTP sampler client and server glue. Kept apart from samplers.hpp so
// only code that talks to a remote annealer pulls in httplib.

#include <chrono>
#include <string>

#include "json.hpp"
#include "qbal/ising.hpp"
#include "qbal/samplers.hpp"

// after Eigen: <resolv.h> defines a `_res` macro that collides with Eigen internals
#include "httplib.h"

namespace qbal {

enum class Backend { exact, sa, remote };

inline std::string to_string(Backend b) {
    switch (b) {
        case Backend::exact: return "exact";
        case Backend::sa: return "sa";
        case Backend::remote: return "remote";
    }
    return "?";
}

inline Backend parse_backend(const std::string& s) {
    if (s == "exact") return Backend::exact;
    if (s == "sa") return Backend::sa;
    if (s == "remote") return Backend::remote;
    throw ConfigError("unknown backend '" + s + "' (expected exact, sa or remote)");
}

inline constexpr double kWireEnergyTolerance = 1e-6;

/// Request body for POST /sample.
inline nlohmann::json sample_request(const IsingProblem& p, const SamplerConfig& cfg) {
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [q, v] : p.h) h[std::to_string(q)] = v;
    nlohmann::json J = nlohmann::json::array();
    for (const auto& [c, v] : p.J) J.push_back({c.first, c.second, v});
    return {{"h", h}, {"J", J}, {"num_reads", cfg.num_reads}, {"seed", cfg.seed}};
}

/// Inverse of sample_request. The offset is not on the wire and comes
/// back as zero.
inline std::pair<IsingProblem, SamplerConfig> parse_sample_request(const nlohmann::json& j,
                                                                   SamplerConfig base = {}) {
    try {
        IsingProblem p;
        for (const auto& [k, v] : j.at("h").items()) p.add_bias(std::stoi(k), v.get<double>());
        for (const auto& t : j.at("J")) p.add_coupling(t.at(0).get<Qubit>(), t.at(1).get<Qubit>(), t.at(2).get<double>());
        base.num_reads = j.at("num_reads").get<std::size_t>();
        base.seed = j.at("seed").get<std::uint64_t>();
        return {p, base};
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed sample request: ") + ex.what());
    } catch (const std::logic_error& ex) {
        throw DataError(std::string("malformed sample request: ") + ex.what());
    }
}

inline nlohmann::json sample_response(const SampleSet& ss) {
    nlohmann::json reads = nlohmann::json::array();
    for (const auto& s : ss.samples) {
        nlohmann::json spins = nlohmann::json::object();
        for (std::size_t i = 0; i < ss.variables.size(); ++i) spins[std::to_string(ss.variables[i])] = s.spins[i];
        reads.push_back({{"spins", spins}, {"energy", s.energy}, {"occurrences", s.occurrences}});
    }
    return {{"reads", reads}, {"backend", ss.metadata.backend}};
}

/// Parses a response and checks it against the problem that was sent.
/// Wire energies exclude the problem offset; it is added back before the
/// energies are checked.
inline SampleSet parse_sample_response(const nlohmann::json& j, const IsingProblem& p, const SamplerConfig& cfg) {
    SampleSet ss;
    try {
        const auto& reads = j.at("reads");
        ss.variables = p.variables();
        for (const auto& r : reads) {
            const auto& spins = r.at("spins");
            if (spins.size() != ss.variables.size())
                throw RejectedResponse("read covers " + std::to_string(spins.size()) + " qubits, expected " +
                                       std::to_string(ss.variables.size()));
            SpinSample s;
            s.spins.resize(ss.variables.size());
            for (std::size_t i = 0; i < ss.variables.size(); ++i) {
                const auto it = spins.find(std::to_string(ss.variables[i]));
                if (it == spins.end())
                    throw RejectedResponse("read is missing qubit " + std::to_string(ss.variables[i]));
                s.spins[i] = static_cast<Spin>(it->get<int>());
            }
            s.energy = r.at("energy").get<double>() + p.offset;
            s.occurrences = r.at("occurrences").get<std::size_t>();
            ss.total_reads += s.occurrences;
            ss.samples.push_back(std::move(s));
        }
        ss.metadata.backend = j.value("backend", std::string("remote"));
    } catch (const nlohmann::json::exception& ex) {
        throw RejectedResponse(std::string("malformed sample response: ") + ex.what());
    }
    ss.metadata.seed = cfg.seed;
    if (auto why = sampleset_violation(p, ss, cfg.num_reads, kWireEnergyTolerance); !why.empty())
        throw RejectedResponse("remote sampler response rejected: " + why);
    return ss;
}

/// Runs one job on the sampler service at `endpoint`, e.g. "http://localhost:8080".
inline SampleSet remote_sample(const std::string& endpoint, const IsingProblem& p, const SamplerConfig& cfg) {
    cfg.check();
    const auto t0 = std::chrono::steady_clock::now();
    httplib::Client client(endpoint);
    client.set_read_timeout(600, 0);
    auto res = client.Post("/sample", sample_request(p, cfg).dump(), "application/json");
    if (!res) throw SamplerError("remote sampler at " + endpoint + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw SamplerError("remote sampler at " + endpoint + " answered HTTP " + std::to_string(res->status));
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& ex) {
        throw RejectedResponse(std::string("remote sampler sent invalid JSON: ") + ex.what());
    }
    auto ss = parse_sample_response(body, p, cfg);
    ss.metadata.schedule = "remote";
    ss.metadata.wall_ms = detail::elapsed_ms(t0);
    return ss;
}

/// Serves POST /sample on `server` by running `fn`. The offset is dropped
/// on the wire, so energies are reported without it.
inline void install_sample_endpoint(httplib::Server& server, SampleFn fn, SamplerConfig base = {}) {
    server.Post("/sample", [fn = std::move(fn), base](const httplib::Request& req, httplib::Response& res) {
        try {
            auto [p, cfg] = parse_sample_request(nlohmann::json::parse(req.body), base);
            res.set_content(sample_response(fn(p, cfg)).dump(), "application/json");
        } catch (const std::exception& ex) {
            res.status = 400;
            res.set_content(nlohmann::json{{"error", ex.what()}}.dump(), "application/json");
        }
    });
}

/// Backend selection shared by the trainer and the CLI.
struct SamplerSpec {
    Backend backend = Backend::sa;
    std::string endpoint;  // remote only
};

inline SampleFn make_sampler(const SamplerSpec& spec) {
    switch (spec.backend) {
        case Backend::exact: return exact_sample;
        case Backend::sa: return sa_sample;
        case Backend::remote:
            if (spec.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
            return [endpoint = spec.endpoint](const IsingProblem& p, const SamplerConfig& cfg) {
                return remote_sample(endpoint, p, cfg);
            };
    }
    throw ConfigError("unknown backend");
}

}  // namespace qbal
