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

#include <stdexcept>
#include <string>

namespace qbal {

/// Broad failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    parameter,   // bad argument value or shape
    index,       // out-of-range qubit, coordinate or column
    capacity,    // problem too large for an exact/brute-force routine
    validation,  // a produced or loaded artifact violates its contract
    config,      // run configuration is malformed
    data,        // malformed input data
    sampler,     // transport or backend failure
    rejected,    // a remote sampler answered with a contract violation
    prerequisite,  // an artifact a command depends on does not exist
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

#define QBAL_DEFINE_ERROR(Name, Kind)                                                      \
    class Name : public Error {                                                            \
      public:                                                                              \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}           \
    }

QBAL_DEFINE_ERROR(ParameterError, parameter);
QBAL_DEFINE_ERROR(IndexError, index);
QBAL_DEFINE_ERROR(CapacityError, capacity);
QBAL_DEFINE_ERROR(ValidationError, validation);
QBAL_DEFINE_ERROR(ConfigError, config);
QBAL_DEFINE_ERROR(DataError, data);
QBAL_DEFINE_ERROR(SamplerError, sampler);
QBAL_DEFINE_ERROR(RejectedResponse, rejected);
QBAL_DEFINE_ERROR(MissingPrerequisite, prerequisite);

#undef QBAL_DEFINE_ERROR

/// Rethrows `e` as the same concrete type with `context` prepended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
    const std::string what = context + ": " + e.what();
    switch (e.kind()) {
        case ErrorKind::parameter: throw ParameterError(what);
        case ErrorKind::index: throw IndexError(what);
        case ErrorKind::capacity: throw CapacityError(what);
        case ErrorKind::validation: throw ValidationError(what);
        case ErrorKind::config: throw ConfigError(what);
        case ErrorKind::data: throw DataError(what);
        case ErrorKind::sampler: throw SamplerError(what);
        case ErrorKind::rejected: throw RejectedResponse(what);
        case ErrorKind::prerequisite: throw MissingPrerequisite(what);
    }
    throw Error(e.kind(), what);
}

}  // namespace qbal
