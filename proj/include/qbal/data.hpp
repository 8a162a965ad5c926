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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbal/error.hpp"
#include "qbal/random.hpp"

namespace qbal {

enum class ColumnKind { numeric, label };

/// Numeric feature table with one string label per row. Values are stored
/// row-major. For balancing, labels collapse to two classes: rows whose
/// label equals `benign_label` are class 0, everything else class 1.
struct TabularDataset {
    std::vector<std::string> feature_names;
    std::vector<double> values;
    std::vector<std::string> labels;
    std::string label_name = "Label";
    std::string benign_label = "BENIGN";

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return feature_names.size(); }

    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }

    int binary_class(std::size_t r) const { return labels[r] == benign_label ? 0 : 1; }

    std::vector<int> binary_classes() const {
        std::vector<int> y(rows());
        for (std::size_t r = 0; r < rows(); ++r) y[r] = binary_class(r);
        return y;
    }

    /// Number of rows in class 0 and class 1.
    std::pair<std::size_t, std::size_t> class_counts() const {
        std::size_t attack = 0;
        for (std::size_t r = 0; r < rows(); ++r) attack += binary_class(r);
        return {rows() - attack, attack};
    }

    std::vector<ColumnKind> column_kinds() const {
        std::vector<ColumnKind> k(cols(), ColumnKind::numeric);
        k.push_back(ColumnKind::label);
        return k;
    }

    std::size_t feature_index(std::string_view name) const {
        const auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) throw DataError("no feature named '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - feature_names.begin());
    }

    void append_row(std::span<const double> v, std::string label) {
        if (v.size() != cols())
            throw DataError("row has " + std::to_string(v.size()) + " values, expected " + std::to_string(cols()));
        values.insert(values.end(), v.begin(), v.end());
        labels.push_back(std::move(label));
    }

    /// Same columns and label conventions, no rows.
    TabularDataset empty_like() const {
        TabularDataset d;
        d.feature_names = feature_names;
        d.label_name = label_name;
        d.benign_label = benign_label;
        return d;
    }

    TabularDataset select_rows(const std::vector<std::size_t>& idx) const {
        TabularDataset d = empty_like();
        d.values.reserve(idx.size() * cols());
        d.labels.reserve(idx.size());
        for (auto r : idx) d.append_row(row(r), labels[r]);
        return d;
    }

    bool operator==(const TabularDataset& o) const {
        if (feature_names != o.feature_names || labels != o.labels || label_name != o.label_name ||
            benign_label != o.benign_label || values.size() != o.values.size())
            return false;
        // bitwise, so NaN cells compare equal to themselves
        return values.empty() || std::memcmp(values.data(), o.values.data(), values.size() * sizeof(double)) == 0;
    }
};

// ---------------------------------------------------------------------------
// CSV

struct CsvSchema {
    std::string label_column = "Label";
    std::string benign_label = "BENIGN";
    std::vector<std::string> drop_columns;
};

namespace detail {

/// Splits one CSV record. Handles double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    out.push_back(std::move(cell));
    return out;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

/// Parses a numeric cell. "Infinity"/"inf" (optionally signed) map to
/// +-infinity and "NaN", "nan" or an empty cell map to NaN.
inline bool parse_number(std::string_view raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    const std::string l = lower(s);
    if (l == "nan") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (l == "infinity" || l == "+infinity" || l == "inf" || l == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (l == "-infinity" || l == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    const char* first = s.data() + (s[0] == '+' ? 1 : 0);
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline std::string format_number(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

}  // namespace detail

/// Reads a CSV with a header row. Headers are whitespace-trimmed. All
/// columns except the label column and `drop_columns` must be numeric.
inline TabularDataset read_csv(std::istream& is, const CsvSchema& schema = {}) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("csv has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    auto header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);

    TabularDataset ds;
    ds.label_name = schema.label_column;
    ds.benign_label = schema.benign_label;
    std::ptrdiff_t label_col = -1;
    std::vector<std::ptrdiff_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == schema.label_column) {
            label_col = static_cast<std::ptrdiff_t>(c);
        } else if (std::find(schema.drop_columns.begin(), schema.drop_columns.end(), header[c]) ==
                   schema.drop_columns.end()) {
            feature_cols.push_back(static_cast<std::ptrdiff_t>(c));
            ds.feature_names.push_back(header[c]);
        }
    }
    if (label_col < 0) throw DataError("csv header has no label column '" + schema.label_column + "'");

    std::vector<double> rowv(feature_cols.size());
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError("line " + std::to_string(lineno) + ": " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
        }
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const auto& cell = cells[static_cast<std::size_t>(feature_cols[k])];
            if (!detail::parse_number(cell, rowv[k])) {
                throw DataError("line " + std::to_string(lineno) + ", column '" + ds.feature_names[k] +
                                "': cannot parse '" + cell + "' as a number");
            }
        }
        ds.append_row(rowv, detail::trim(cells[static_cast<std::size_t>(label_col)]));
    }
    return ds;
}

inline TabularDataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    try {
        return read_csv(is, schema);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Writes features then the label column. Numbers use the shortest
/// round-trip representation.
inline void write_csv(const TabularDataset& ds, std::ostream& os) {
    for (const auto& n : ds.feature_names) os << detail::quote_csv(n) << ',';
    os << detail::quote_csv(ds.label_name) << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < ds.cols(); ++c) os << detail::format_number(ds.at(r, c)) << ',';
        os << detail::quote_csv(ds.labels[r]) << '\n';
    }
}

inline void save_csv(const TabularDataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write '" + path + "'");
    write_csv(ds, os);
}

// ---------------------------------------------------------------------------
// preprocessing

struct PreprocessReport {
    std::size_t rows_in = 0;
    std::size_t rows_dropped_nan = 0;
    std::size_t rows_dropped_inf = 0;  // rows with an infinite value and no NaN
    std::vector<std::string> features_dropped_corr;
    std::vector<std::string> features_dropped_zerovar;
    std::size_t duplicates_removed = 0;
    std::size_t final_rows = 0;
};

/// Drops rows containing NaN or infinite values.
inline std::pair<TabularDataset, PreprocessReport> clean(const TabularDataset& ds) {
    PreprocessReport rep;
    rep.rows_in = ds.rows();
    std::vector<std::size_t> keep;
    keep.reserve(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        bool nan = false, inf = false;
        for (double x : ds.row(r)) {
            nan |= std::isnan(x);
            inf |= std::isinf(x);
        }
        if (nan)
            ++rep.rows_dropped_nan;
        else if (inf)
            ++rep.rows_dropped_inf;
        else
            keep.push_back(r);
    }
    auto out = ds.select_rows(keep);
    rep.final_rows = out.rows();
    return {std::move(out), rep};
}

inline TabularDataset project(const TabularDataset& ds, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(ds.feature_index(n));
    TabularDataset d = ds.empty_like();
    d.feature_names = names;
    d.labels = ds.labels;
    d.values.reserve(ds.rows() * names.size());
    for (std::size_t r = 0; r < ds.rows(); ++r)
        for (auto c : idx) d.values.push_back(ds.at(r, c));
    return d;
}

inline std::vector<double> column(const TabularDataset& ds, std::size_t c) {
    std::vector<double> out(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) out[r] = ds.at(r, c);
    return out;
}

/// Pearson correlation; 0 when either column is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Removes constant features, then walks feature pairs (i, j), i < j, in
/// index order and drops j when both are still present and |r| >= threshold.
inline std::pair<TabularDataset, PreprocessReport> prune_features(const TabularDataset& ds,
                                                                  double corr_threshold = 0.9) {
    if (ds.rows() < 2) throw DataError("feature pruning needs at least 2 rows, got " + std::to_string(ds.rows()));
    PreprocessReport rep;
    rep.rows_in = ds.rows();
    std::vector<std::vector<double>> cols;
    std::vector<std::size_t> alive;
    for (std::size_t c = 0; c < ds.cols(); ++c) {
        auto col = column(ds, c);
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (*lo == *hi) {
            rep.features_dropped_zerovar.push_back(ds.feature_names[c]);
        } else {
            alive.push_back(c);
        }
        cols.push_back(std::move(col));
    }
    std::vector<bool> dropped(ds.cols(), false);
    for (std::size_t a = 0; a < alive.size(); ++a) {
        if (dropped[alive[a]]) continue;
        for (std::size_t b = a + 1; b < alive.size(); ++b) {
            if (dropped[alive[b]]) continue;
            if (std::abs(pearson(cols[alive[a]], cols[alive[b]])) >= corr_threshold) {
                dropped[alive[b]] = true;
                rep.features_dropped_corr.push_back(ds.feature_names[alive[b]]);
            }
        }
    }
    std::vector<std::string> keep;
    for (auto c : alive)
        if (!dropped[c]) keep.push_back(ds.feature_names[c]);
    auto out = project(ds, keep);
    rep.final_rows = out.rows();
    return {std::move(out), rep};
}

/// Removes exact duplicate rows (features and label), keeping the first.
inline std::pair<TabularDataset, std::size_t> dedup(const TabularDataset& ds) {
    std::unordered_set<std::string> seen;
    seen.reserve(ds.rows());
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        std::string key(ds.cols() * sizeof(double), '\0');
        for (std::size_t c = 0; c < ds.cols(); ++c) {
            const double x = ds.at(r, c) == 0.0 ? 0.0 : ds.at(r, c);  // fold -0 into +0
            std::memcpy(key.data() + c * sizeof(double), &x, sizeof(double));
        }
        key += ds.labels[r];
        if (seen.insert(std::move(key)).second) keep.push_back(r);
    }
    return {ds.select_rows(keep), ds.rows() - keep.size()};
}

/// clean, prune_features and dedup in that order.
inline std::pair<TabularDataset, PreprocessReport> preprocess(const TabularDataset& ds, double corr_threshold = 0.9) {
    auto [cleaned, rep] = clean(ds);
    auto [pruned, prep] = prune_features(cleaned, corr_threshold);
    auto [unique, dups] = dedup(pruned);
    rep.features_dropped_corr = std::move(prep.features_dropped_corr);
    rep.features_dropped_zerovar = std::move(prep.features_dropped_zerovar);
    rep.duplicates_removed = dups;
    rep.final_rows = unique.rows();
    return {std::move(unique), rep};
}

inline nlohmann::ordered_json to_json(const PreprocessReport& r) {
    nlohmann::ordered_json j;
    j["rows_in"] = r.rows_in;
    j["rows_dropped_nan"] = r.rows_dropped_nan;
    j["rows_dropped_inf"] = r.rows_dropped_inf;
    j["features_dropped_corr"] = r.features_dropped_corr;
    j["features_dropped_zerovar"] = r.features_dropped_zerovar;
    j["duplicates_removed"] = r.duplicates_removed;
    j["final_rows"] = r.final_rows;
    return j;
}

// ---------------------------------------------------------------------------
// splitting

/// Train rows per class: round-half-up of count * fraction.
inline std::size_t split_count(std::size_t class_rows, double train_fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(class_rows) * train_fraction + 0.5));
}

struct Split {
    TabularDataset train;
    TabularDataset test;
};

/// Stratified by binary class. Each class is shuffled with its own stream
/// of `seed`; both outputs keep the original row order.
inline Split split(const TabularDataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ParameterError("train fraction must be in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t r = 0; r < ds.rows(); ++r) by_class[ds.binary_class(r)].push_back(r);
    std::vector<std::size_t> train, test;
    for (int k = 0; k < 2; ++k) {
        auto idx = by_class[k];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        shuffle(idx, rng);
        const auto n = split_count(idx.size(), train_fraction);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
        test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {ds.select_rows(train), ds.select_rows(test)};
}

// ---------------------------------------------------------------------------
// feature ranking

/// Mutual information (nats) between a feature and the binary class. The
/// feature is discretized into at most `bins` equal-width bins.
inline double mutual_information(std::span<const double> x, const std::vector<int>& y, int bins = 16) {
    if (x.empty()) return 0.0;
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return 0.0;
    std::vector<double> joint(static_cast<std::size_t>(bins) * 2, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = static_cast<int>((x[i] - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        joint[static_cast<std::size_t>(b) * 2 + y[i]] += 1.0;
    }
    const auto n = static_cast<double>(x.size());
    double py[2] = {0, 0};
    std::vector<double> px(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b)
        for (int k = 0; k < 2; ++k) {
            px[b] += joint[b * 2 + k] / n;
            py[k] += joint[b * 2 + k] / n;
        }
    double mi = 0.0;
    for (int b = 0; b < bins; ++b)
        for (int k = 0; k < 2; ++k) {
            const double p = joint[b * 2 + k] / n;
            if (p > 0) mi += p * std::log(p / (px[b] * py[k]));
        }
    return mi;
}

/// Feature indices by decreasing mutual information with the class; ties
/// keep column order.
inline std::vector<std::size_t> rank_features(const TabularDataset& ds) {
    const auto y = ds.binary_classes();
    std::vector<double> mi(ds.cols());
    for (std::size_t c = 0; c < ds.cols(); ++c) mi[c] = mutual_information(column(ds, c), y);
    std::vector<std::size_t> order(ds.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mi[a] > mi[b]; });
    return order;
}

// ---------------------------------------------------------------------------
// bit codec

class AllocationError : public CapacityError {
  public:
    using CapacityError::CapacityError;
};

enum class QuantKind { integer, scaled };

inline std::string to_string(QuantKind k) { return k == QuantKind::integer ? "integer" : "scaled"; }

/// One feature's field. Integer features store x - min directly; scaled
/// features store round((x - min) / (max - min) * (2^n_bits - 1)).
struct FeatureCodec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int n_bits = 0;
    QuantKind kind = QuantKind::scaled;

    std::uint64_t levels() const { return (std::uint64_t{1} << n_bits) - 1; }

    /// Largest gap between a value and its decoded image.
    double quantization_step() const {
        if (kind == QuantKind::integer || max == min) return 1.0;
        return (max - min) / static_cast<double>(levels());
    }

    bool operator==(const FeatureCodec&) const = default;
};

/// Fixed-width layout: features in order, each field most significant bit first.
struct BitCodec {
    std::vector<FeatureCodec> features;

    int total_bits() const {
        int t = 0;
        for (const auto& f : features) t += f.n_bits;
        return t;
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> n;
        for (const auto& f : features) n.push_back(f.name);
        return n;
    }

    bool operator==(const BitCodec&) const = default;
};

/// Smallest n with max - min <= 2^n - 1, i.e. enough codes for every
/// integer in [min, max]. At least 1.
inline int integer_bits(double min, double max) {
    const double range = max - min;
    int n = 1;
    while (n < 63 && range > static_cast<double>((std::uint64_t{1} << n) - 1)) ++n;
    return n;
}

inline bool is_integer_column(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v) && v == std::floor(v); });
}

/// Requested feature for fit_codec. Without `bits`, integer features get
/// integer_bits(min, max) and other features `continuous_bits`.
struct FeatureRequest {
    std::string name;
    std::optional<int> bits;
};

namespace detail {
inline FeatureCodec fit_feature(const TabularDataset& ds, const std::string& name, std::optional<int> bits,
                                int continuous_bits) {
    const auto col = column(ds, ds.feature_index(name));
    FeatureCodec f;
    f.name = name;
    if (!col.empty()) {
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        f.min = *lo;
        f.max = *hi;
    }
    if (!std::isfinite(f.min) || !std::isfinite(f.max))
        throw DataError("feature '" + name + "' has non-finite values; clean the data first");
    f.kind = is_integer_column(col) ? QuantKind::integer : QuantKind::scaled;
    const int need = f.kind == QuantKind::integer ? integer_bits(f.min, f.max) : continuous_bits;
    f.n_bits = bits.value_or(need);
    if (f.n_bits < 1 || f.n_bits > 32)
        throw AllocationError("feature '" + name + "': bit width " + std::to_string(f.n_bits) + " outside [1, 32]");
    if (f.kind == QuantKind::integer && f.n_bits < need) {
        throw AllocationError("feature '" + name + "' spans " + std::to_string(f.max - f.min) + " and needs " +
                              std::to_string(need) + " bits, got " + std::to_string(f.n_bits));
    }
    return f;
}
}  // namespace detail

/// Fits a codec over the listed features. The widths must sum to
/// `total_bits`; otherwise the error lists every feature's demand.
inline BitCodec fit_codec(const TabularDataset& ds, const std::vector<FeatureRequest>& features, int total_bits,
                          int continuous_bits = 8) {
    BitCodec codec;
    for (const auto& r : features) codec.features.push_back(detail::fit_feature(ds, r.name, r.bits, continuous_bits));
    if (codec.total_bits() != total_bits) {
        std::string msg = "bit budget " + std::to_string(total_bits) + " does not match demand " +
                          std::to_string(codec.total_bits()) + ":";
        for (const auto& f : codec.features)
            msg += " " + f.name + "=" + std::to_string(f.n_bits) + "(" + to_string(f.kind) + ")";
        throw AllocationError(msg);
    }
    return codec;
}

/// Fits a codec without a feature list: features are taken in decreasing
/// mutual information with the class and added while their demand fits the
/// remaining budget. A scaled feature that does not fit whole is narrowed
/// to the remaining bits.
inline BitCodec fit_codec_ranked(const TabularDataset& ds, int total_bits, int continuous_bits = 8) {
    BitCodec codec;
    int remaining = total_bits;
    for (auto c : rank_features(ds)) {
        if (remaining == 0) break;
        auto f = detail::fit_feature(ds, ds.feature_names[c], std::nullopt, continuous_bits);
        if (f.max == f.min) continue;
        if (f.n_bits > remaining) {
            if (f.kind == QuantKind::integer) continue;
            f.n_bits = remaining;
        }
        remaining -= f.n_bits;
        codec.features.push_back(std::move(f));
    }
    if (remaining != 0) {
        throw AllocationError("could only allocate " + std::to_string(total_bits - remaining) + " of " +
                              std::to_string(total_bits) + " bits from " + std::to_string(ds.cols()) + " features");
    }
    return codec;
}

/// Encodes one row of codec features (codec order). Values outside
/// [min, max] are clipped and counted in `clipped`.
inline std::vector<std::uint8_t> encode_row(const BitCodec& codec, std::span<const double> row,
                                            std::size_t* clipped = nullptr) {
    if (row.size() != codec.features.size()) {
        throw DataError("row has " + std::to_string(row.size()) + " values, codec has " +
                        std::to_string(codec.features.size()) + " features");
    }
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(codec.total_bits()));
    for (std::size_t i = 0; i < row.size(); ++i) {
        const auto& f = codec.features[i];
        double x = row[i];
        if (x < f.min || x > f.max || std::isnan(x)) {
            if (clipped) ++*clipped;
            x = std::isnan(x) ? f.min : std::clamp(x, f.min, f.max);
        }
        std::uint64_t level = 0;
        if (f.max > f.min) {
            const double t = f.kind == QuantKind::integer ? x - f.min
                                                           : (x - f.min) / (f.max - f.min) * static_cast<double>(f.levels());
            level = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::llround(t)), f.levels());
        }
        for (int b = f.n_bits - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((level >> b) & 1u));
    }
    return bits;
}

/// Inverse of encode_row up to quantization. Decoded values are clipped
/// to [min, max].
inline std::vector<double> decode_row(const BitCodec& codec, std::span<const std::uint8_t> bits) {
    if (bits.size() != static_cast<std::size_t>(codec.total_bits())) {
        throw DataError("bit vector has width " + std::to_string(bits.size()) + ", codec expects " +
                        std::to_string(codec.total_bits()));
    }
    std::vector<double> row;
    row.reserve(codec.features.size());
    std::size_t at = 0;
    for (const auto& f : codec.features) {
        std::uint64_t level = 0;
        for (int b = 0; b < f.n_bits; ++b) level = (level << 1) | (bits[at++] & 1u);
        double x = f.min;
        if (f.max > f.min) {
            x = f.kind == QuantKind::integer
                    ? f.min + static_cast<double>(level)
                    : f.min + static_cast<double>(level) / static_cast<double>(f.levels()) * (f.max - f.min);
        }
        row.push_back(std::clamp(x, f.min, f.max));
    }
    return row;
}

/// decode_row with each scaled feature moved uniformly within its
/// quantization cell (+- half a step), so decoded values are continuous
/// rather than sitting on the level grid. Integer features decode exactly.
inline std::vector<double> decode_row_dithered(const BitCodec& codec, std::span<const std::uint8_t> bits, Rng& rng) {
    auto row = decode_row(codec, bits);
    for (std::size_t i = 0; i < row.size(); ++i) {
        const auto& f = codec.features[i];
        if (f.kind != QuantKind::scaled || f.max == f.min) continue;
        row[i] = std::clamp(row[i] + (rng.uniform() - 0.5) * f.quantization_step(), f.min, f.max);
    }
    return row;
}

inline nlohmann::ordered_json to_json(const BitCodec& codec) {
    nlohmann::ordered_json j;
    j["total_bits"] = codec.total_bits();
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : codec.features) {
        nlohmann::ordered_json e;
        e["name"] = f.name;
        e["min"] = f.min;
        e["max"] = f.max;
        e["n_bits"] = f.n_bits;
        e["kind"] = to_string(f.kind);
        j["features"].push_back(e);
    }
    return j;
}

template <typename Json>
BitCodec codec_from_json(const Json& j) {
    try {
        BitCodec codec;
        for (const auto& e : j.at("features")) {
            FeatureCodec f;
            f.name = e.at("name").template get<std::string>();
            f.min = e.at("min").template get<double>();
            f.max = e.at("max").template get<double>();
            f.n_bits = e.at("n_bits").template get<int>();
            const auto kind = e.at("kind").template get<std::string>();
            if (kind != "integer" && kind != "scaled") throw DataError("unknown quantization kind '" + kind + "'");
            f.kind = kind == "integer" ? QuantKind::integer : QuantKind::scaled;
            if (f.n_bits < 1 || f.n_bits > 32 || !(f.min <= f.max))
                throw DataError("codec entry for '" + f.name + "' is inconsistent");
            codec.features.push_back(std::move(f));
        }
        if (j.contains("total_bits") && j.at("total_bits").template get<int>() != codec.total_bits())
            throw DataError("codec total_bits disagrees with its features");
        return codec;
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed codec: ") + ex.what());
    }
}

// ---------------------------------------------------------------------------
// desk fixture

struct FixtureConfig {
    std::size_t rows = 10000;
    double attack_fraction = 0.05;
    std::uint64_t seed = 0;
};

namespace detail {
/// Standard normal via Box-Muller on Rng::uniform.
inline double normal(Rng& rng) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * rng.uniform());
}
}  // namespace detail

/// Two-class Gaussian table with CICIDS-like column texture. Benign rows are
/// N(0, I) on three continuous features, except a 10% look-alike share
/// centred next to the attack cluster (mean shifted by 0.3 on the first
/// feature). Attack rows sit at (2.5, -2.5, 2.5) with sd 0.6. A fourth
/// feature is an integer count that carries no class signal. Two columns
/// exist to be pruned: a near-copy of fwd_pkt_len_mean (r > 0.99) and a
/// constant. Labels are BENIGN and ATTACK.
inline TabularDataset make_desk_fixture(const FixtureConfig& cfg = {}) {
    TabularDataset ds;
    ds.feature_names = {"flow_duration", "fwd_pkt_len_mean", "bwd_pkt_len_mean",
                        "syn_flag_count", "fwd_pkt_len_mean_copy", "fin_flag_count"};
    const auto n_attack = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.rows) * cfg.attack_fraction));
    Rng rng(derive_seed(cfg.seed, stage::fixture));
    std::vector<std::uint8_t> attack(cfg.rows, 0);
    std::fill(attack.begin(), attack.begin() + static_cast<std::ptrdiff_t>(n_attack), 1);
    shuffle(attack, rng);
    constexpr double mu[3] = {2.5, -2.5, 2.5};
    constexpr double sd = 0.6, look_share = 0.1, look_shift = 0.3;
    std::vector<double> v(ds.cols());
    for (std::size_t r = 0; r < cfg.rows; ++r) {
        const bool a = attack[r] != 0;
        const bool look = !a && rng.uniform() < look_share;
        for (int k = 0; k < 3; ++k) {
            if (a)
                v[k] = mu[k] + sd * detail::normal(rng);
            else if (look)
                v[k] = mu[k] + (k == 0 ? look_shift : 0.0) + sd * detail::normal(rng);
            else
                v[k] = detail::normal(rng);
        }
        v[3] = std::clamp(std::round(2.0 + 1.2 * detail::normal(rng)), 0.0, 7.0);
        v[4] = v[1] + 0.05 * detail::normal(rng);
        v[5] = 0.0;
        ds.append_row(v, a ? "ATTACK" : "BENIGN");
    }
    return ds;
}

}  // namespace qbal
