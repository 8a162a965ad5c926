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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "qbal/data.hpp"
#include "qbal/error.hpp"

namespace qbal {

/// 64-bit FNV-1a. Content fingerprint only, not a cryptographic hash.
class Fnv1a {
  public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::uint64_t value() const { return h_; }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline std::uint64_t hash_bytes(std::string_view s) {
    Fnv1a h;
    h.update(s);
    return h.value();
}

inline std::uint64_t hash_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for hashing");
    Fnv1a h;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof buf);
        h.update(buf, static_cast<std::size_t>(is.gcount()));
    }
    return h.value();
}

/// Hash of names, labels and the raw bits of every value.
inline std::uint64_t hash_dataset(const TabularDataset& ds) {
    Fnv1a h;
    for (const auto& n : ds.feature_names) {
        h.update(n);
        h.update("\0", 1);
    }
    h.update(ds.label_name);
    h.update("\0", 1);
    h.update(ds.values.data(), ds.values.size() * sizeof(double));
    for (const auto& l : ds.labels) {
        h.update(l);
        h.update("\0", 1);
    }
    return h.value();
}

}  // namespace qbal
