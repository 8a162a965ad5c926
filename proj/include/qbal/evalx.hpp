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
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qbal/balance.hpp"
#include "qbal/data.hpp"
#include "qbal/error.hpp"
#include "qbal/hash.hpp"
#include "qbal/random.hpp"

namespace qbal {

// ---------------------------------------------------------------------------
// metrics

struct Metrics {
    double precision = 0.0;  // macro
    double recall = 0.0;     // macro
    double f1 = 0.0;         // macro
    std::vector<int> classes;
    std::vector<double> class_precision;
    std::vector<double> class_recall;
    std::vector<double> class_f1;
    bool zero_division = false;  // some ratio had a zero denominator and was set to 0

    double recall_of(int cls) const {
        const auto it = std::find(classes.begin(), classes.end(), cls);
        if (it == classes.end()) throw ParameterError("class " + std::to_string(cls) + " not in metrics");
        return class_recall[static_cast<std::size_t>(it - classes.begin())];
    }
};

/// Per-class precision, recall and F1 from the confusion matrix, averaged
/// without weights over `classes`.
inline Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                               const std::vector<int>& classes) {
    if (y_true.size() != y_pred.size()) {
        throw ParameterError("label vectors differ in length: " + std::to_string(y_true.size()) + " vs " +
                             std::to_string(y_pred.size()));
    }
    if (classes.empty()) throw ParameterError("class set is empty");
    auto slot = [&](int y) {
        const auto it = std::find(classes.begin(), classes.end(), y);
        if (it == classes.end()) throw ParameterError("label " + std::to_string(y) + " not in class set");
        return static_cast<std::size_t>(it - classes.begin());
    };
    const std::size_t k = classes.size();
    std::vector<std::size_t> tp(k, 0), pred(k, 0), actual(k, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto t = slot(y_true[i]), p = slot(y_pred[i]);
        ++actual[t];
        ++pred[p];
        if (t == p) ++tp[t];
    }
    Metrics m;
    m.classes = classes;
    auto ratio = [&](double a, double b) {
        if (b == 0) {
            m.zero_division = true;
            return 0.0;
        }
        return a / b;
    };
    for (std::size_t c = 0; c < k; ++c) {
        const double p = ratio(static_cast<double>(tp[c]), static_cast<double>(pred[c]));
        const double r = ratio(static_cast<double>(tp[c]), static_cast<double>(actual[c]));
        const double f = ratio(2 * p * r, p + r);
        m.class_precision.push_back(p);
        m.class_recall.push_back(r);
        m.class_f1.push_back(f);
    }
    const auto mean = [k](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / k; };
    m.precision = mean(m.class_precision);
    m.recall = mean(m.class_recall);
    m.f1 = mean(m.class_f1);
    return m;
}

// ---------------------------------------------------------------------------
// classifiers

/// Labels are small non-negative integers.
class Classifier {
  public:
    virtual ~Classifier() = default;
    virtual void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) = 0;
    virtual std::vector<int> predict(const Eigen::MatrixXd& X) const = 0;
    virtual std::string name() const = 0;
};

namespace detail {

inline void check_fit(const Eigen::MatrixXd& X, const std::vector<int>& y) {
    if (X.rows() == 0) throw ParameterError("cannot train on an empty set");
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ParameterError("feature and label counts differ");
    for (int v : y)
        if (v < 0) throw ParameterError("labels must be non-negative");
}

inline void check_width(const Eigen::MatrixXd& X, Eigen::Index width) {
    if (X.cols() != width) {
        throw ParameterError("rows have " + std::to_string(X.cols()) + " features, model was trained on " +
                             std::to_string(width));
    }
}

inline int num_classes(const std::vector<int>& y) { return *std::max_element(y.begin(), y.end()) + 1; }

/// Index of the largest count; ties go to the smaller label.
template <typename Counts>
int argmax(const Counts& c) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(c.size()); ++i)
        if (c[i] > c[best]) best = i;
    return best;
}

struct Standardizer {
    Eigen::RowVectorXd mean, scale;

    void fit(const Eigen::MatrixXd& X) {
        mean = X.colwise().mean();
        scale = ((X.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(X.rows())).sqrt();
        for (Eigen::Index c = 0; c < scale.size(); ++c)
            if (scale[c] == 0) scale[c] = 1;
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        return (X.rowwise() - mean).array().rowwise() / scale.array();
    }
};

}  // namespace detail

/// Multinomial logistic regression on standardized features, full-batch
/// gradient descent with an L2 penalty on the weights.
class LogisticRegression final : public Classifier {
  public:
    LogisticRegression(int iterations = 500, double rate = 0.5, double l2 = 1e-3)
        : iterations_(iterations), rate_(rate), l2_(l2) {}

    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) override {
        detail::check_fit(X, y);
        std_.fit(X);
        const Eigen::MatrixXd Z = std_.apply(X);
        const int k = detail::num_classes(y);
        const auto n = static_cast<double>(X.rows());
        Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), k);
        for (std::size_t i = 0; i < y.size(); ++i) Y(static_cast<Eigen::Index>(i), y[i]) = 1;
        W_ = Eigen::MatrixXd::Zero(X.cols(), k);
        b_ = Eigen::RowVectorXd::Zero(k);
        for (int it = 0; it < iterations_; ++it) {
            const Eigen::MatrixXd P = softmax(Z);
            const Eigen::MatrixXd G = (P - Y) / n;
            W_ -= rate_ * (Z.transpose() * G + l2_ * W_);
            b_ -= rate_ * G.colwise().sum();
        }
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        detail::check_width(X, W_.rows());
        const Eigen::MatrixXd P = softmax(std_.apply(X));
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            Eigen::Index j;
            P.row(i).maxCoeff(&j);
            out[static_cast<std::size_t>(i)] = static_cast<int>(j);
        }
        return out;
    }

    std::string name() const override { return "logistic_regression"; }

  private:
    Eigen::MatrixXd softmax(const Eigen::MatrixXd& Z) const {
        Eigen::MatrixXd S = (Z * W_).rowwise() + b_;
        for (Eigen::Index i = 0; i < S.rows(); ++i) {
            S.row(i).array() -= S.row(i).maxCoeff();
            S.row(i) = S.row(i).array().exp().matrix();
            S.row(i) /= S.row(i).sum();
        }
        return S;
    }

    int iterations_;
    double rate_, l2_;
    detail::Standardizer std_;
    Eigen::MatrixXd W_;
    Eigen::RowVectorXd b_;
};

/// Bernoulli naive Bayes. Each feature is binarized at its training mean
/// (x > mean); Laplace smoothing with alpha = 1.
class BernoulliNB final : public Classifier {
  public:
    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) override {
        detail::check_fit(X, y);
        threshold_ = X.colwise().mean();
        const int k = detail::num_classes(y);
        Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(k, X.cols());
        Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const int c = y[static_cast<std::size_t>(i)];
            count[c] += 1;
            for (Eigen::Index f = 0; f < X.cols(); ++f)
                if (X(i, f) > threshold_[f]) ones(c, f) += 1;
        }
        log_prior_ = Eigen::VectorXd(k);
        log_p1_ = Eigen::MatrixXd(k, X.cols());
        log_p0_ = Eigen::MatrixXd(k, X.cols());
        for (int c = 0; c < k; ++c) {
            // absent classes keep -inf prior and never win
            log_prior_[c] = count[c] > 0 ? std::log(count[c] / static_cast<double>(X.rows()))
                                         : -std::numeric_limits<double>::infinity();
            for (Eigen::Index f = 0; f < X.cols(); ++f) {
                const double p = (ones(c, f) + 1.0) / (count[c] + 2.0);
                log_p1_(c, f) = std::log(p);
                log_p0_(c, f) = std::log1p(-p);
            }
        }
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        detail::check_width(X, threshold_.size());
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        std::vector<double> score(static_cast<std::size_t>(log_prior_.size()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index c = 0; c < log_prior_.size(); ++c) {
                double s = log_prior_[c];
                for (Eigen::Index f = 0; f < X.cols(); ++f) s += X(i, f) > threshold_[f] ? log_p1_(c, f) : log_p0_(c, f);
                score[static_cast<std::size_t>(c)] = s;
            }
            out[static_cast<std::size_t>(i)] = detail::argmax(score);
        }
        return out;
    }

    std::string name() const override { return "bernoulli_nb"; }

  private:
    Eigen::RowVectorXd threshold_;
    Eigen::VectorXd log_prior_;
    Eigen::MatrixXd log_p1_, log_p0_;
};

/// k-nearest neighbours, Euclidean on standardized features. Distance ties
/// keep the lower training index; vote ties go to the smaller label.
class KNearestNeighbors final : public Classifier {
  public:
    explicit KNearestNeighbors(int k = 5) : k_(k) {
        if (k < 1) throw ParameterError("knn needs k >= 1");
    }

    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) override {
        detail::check_fit(X, y);
        std_.fit(X);
        Z_ = std_.apply(X);
        y_ = y;
        classes_ = detail::num_classes(y);
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        detail::check_width(X, Z_.cols());
        const Eigen::MatrixXd Q = std_.apply(X);
        const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(k_, Z_.rows()));
        std::vector<std::pair<double, std::size_t>> d(static_cast<std::size_t>(Z_.rows()));
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        std::vector<int> votes(static_cast<std::size_t>(classes_));
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            for (Eigen::Index j = 0; j < Z_.rows(); ++j)
                d[static_cast<std::size_t>(j)] = {(Z_.row(j) - Q.row(i)).squaredNorm(), static_cast<std::size_t>(j)};
            std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
            std::fill(votes.begin(), votes.end(), 0);
            for (std::size_t t = 0; t < k; ++t) ++votes[static_cast<std::size_t>(y_[d[t].second])];
            out[static_cast<std::size_t>(i)] = detail::argmax(votes);
        }
        return out;
    }

    std::string name() const override { return "knn"; }

  private:
    int k_;
    int classes_ = 0;
    detail::Standardizer std_;
    Eigen::MatrixXd Z_;
    std::vector<int> y_;
};

/// CART with Gini impurity. Rows with x[f] <= threshold go left. With
/// `max_features` > 0 each split considers that many features drawn from
/// the tree's own stream (random forest mode).
class DecisionTree final : public Classifier {
  public:
    explicit DecisionTree(int max_depth = 12, int max_features = 0, std::uint64_t seed = 0)
        : max_depth_(max_depth), max_features_(max_features), rng_(seed) {}

    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) override {
        std::vector<std::size_t> idx(y.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        fit_rows(X, y, idx);
    }

    /// Trains on a multiset of row indices (bootstrap samples).
    void fit_rows(const Eigen::MatrixXd& X, const std::vector<int>& y, std::vector<std::size_t> rows) {
        detail::check_fit(X, y);
        if (rows.empty()) throw ParameterError("cannot train on an empty set");
        width_ = X.cols();
        classes_ = detail::num_classes(y);
        nodes_.clear();
        build(X, y, rows, 0);
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        detail::check_width(X, width_);
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            std::size_t n = 0;
            while (nodes_[n].feature >= 0)
                n = X(i, nodes_[n].feature) <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
            out[static_cast<std::size_t>(i)] = nodes_[n].label;
        }
        return out;
    }

    std::string name() const override { return "decision_tree"; }

    std::size_t depth() const { return depth_; }

  private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        std::size_t left = 0, right = 0;
        int label = 0;
    };

    std::size_t build(const Eigen::MatrixXd& X, const std::vector<int>& y, std::vector<std::size_t>& rows,
                      int depth) {
        depth_ = std::max<std::size_t>(depth_, static_cast<std::size_t>(depth));
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        std::vector<double> counts(static_cast<std::size_t>(classes_), 0.0);
        for (auto r : rows) counts[static_cast<std::size_t>(y[r])] += 1;
        nodes_[id].label = detail::argmax(counts);
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        if (pure || depth >= max_depth_ || rows.size() < 2) return id;

        const auto split = best_split(X, y, rows, counts);
        if (split.feature < 0) return id;
        std::vector<std::size_t> left, right;
        for (auto r : rows) (X(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        nodes_[id].feature = split.feature;
        nodes_[id].threshold = split.threshold;
        const auto l = build(X, y, left, depth + 1);
        const auto r = build(X, y, right, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    struct Split {
        int feature = -1;
        double threshold = 0.0;
    };

    Split best_split(const Eigen::MatrixXd& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                     const std::vector<double>& total) {
        std::vector<int> features(static_cast<std::size_t>(width_));
        std::iota(features.begin(), features.end(), 0);
        if (max_features_ > 0 && max_features_ < width_) {
            for (int i = 0; i < max_features_; ++i) {
                const auto j = static_cast<std::size_t>(i) + rng_.below(features.size() - static_cast<std::size_t>(i));
                std::swap(features[static_cast<std::size_t>(i)], features[j]);
            }
            features.resize(static_cast<std::size_t>(max_features_));
        }
        const auto n = static_cast<double>(rows.size());
        double parent = 1.0;
        for (double v : total) parent -= (v / n) * (v / n);
        Split best;
        double best_score = parent - 1e-12;  // a split must strictly reduce impurity
        std::vector<std::pair<double, int>> col(rows.size());
        std::vector<double> left(total.size());
        for (int f : features) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                col[i] = {X(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]]};
            std::sort(col.begin(), col.end());
            std::fill(left.begin(), left.end(), 0.0);
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                left[static_cast<std::size_t>(col[i].second)] += 1;
                if (col[i].first == col[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                // weighted Gini: (nl - sum l^2 / nl + nr - sum r^2 / nr) / n
                double sl = 0.0, sr = 0.0;
                for (std::size_t c = 0; c < total.size(); ++c) {
                    sl += left[c] * left[c];
                    sr += (total[c] - left[c]) * (total[c] - left[c]);
                }
                const double score = (nl - sl / nl + nr - sr / nr) / n;
                if (score < best_score) {
                    best_score = score;
                    best.feature = f;
                    best.threshold = 0.5 * (col[i].first + col[i + 1].first);
                }
            }
        }
        return best;
    }

    int max_depth_;
    int max_features_;
    Rng rng_;
    Eigen::Index width_ = 0;
    int classes_ = 0;
    std::size_t depth_ = 0;
    std::vector<Node> nodes_;
};

/// Bagged CART trees with sqrt(d) features per split. Tree t draws its
/// bootstrap and feature subsets from derive_seed(seed, t).
class RandomForest final : public Classifier {
  public:
    RandomForest(int trees = 32, int max_depth = 12, std::uint64_t seed = 0)
        : trees_(trees), max_depth_(max_depth), seed_(seed) {}

    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y) override {
        detail::check_fit(X, y);
        classes_ = detail::num_classes(y);
        const int mf = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols())))));
        forest_.clear();
        for (int t = 0; t < trees_; ++t) {
            const auto s = derive_seed(seed_, static_cast<std::uint64_t>(t));
            Rng rng(s);
            std::vector<std::size_t> rows(y.size());
            for (auto& r : rows) r = rng.below(y.size());
            DecisionTree tree(max_depth_, mf, derive_seed(s, 1));
            tree.fit_rows(X, y, std::move(rows));
            forest_.push_back(std::move(tree));
        }
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        if (forest_.empty()) throw ParameterError("forest is not trained");
        std::vector<std::vector<int>> votes(static_cast<std::size_t>(X.rows()),
                                            std::vector<int>(static_cast<std::size_t>(classes_), 0));
        for (const auto& t : forest_) {
            const auto p = t.predict(X);
            for (std::size_t i = 0; i < p.size(); ++i) ++votes[i][static_cast<std::size_t>(p[i])];
        }
        std::vector<int> out(votes.size());
        for (std::size_t i = 0; i < votes.size(); ++i) out[i] = detail::argmax(votes[i]);
        return out;
    }

    std::string name() const override { return "random_forest"; }

  private:
    int trees_, max_depth_;
    std::uint64_t seed_;
    int classes_ = 0;
    std::vector<DecisionTree> forest_;
};

struct ClassifierOptions {
    int knn_k = 5;
    int tree_depth = 12;
    int forest_trees = 32;
    int lr_iterations = 500;
    double lr_rate = 0.5;
    double lr_l2 = 1e-3;
};

inline const std::vector<std::string>& classifier_names() {
    static const std::vector<std::string> names{"logistic_regression", "bernoulli_nb", "knn", "decision_tree",
                                                "random_forest"};
    return names;
}

inline std::unique_ptr<Classifier> make_classifier(const std::string& name, std::uint64_t seed,
                                                   const ClassifierOptions& o = {}) {
    if (name == "logistic_regression") return std::make_unique<LogisticRegression>(o.lr_iterations, o.lr_rate, o.lr_l2);
    if (name == "bernoulli_nb") return std::make_unique<BernoulliNB>();
    if (name == "knn") return std::make_unique<KNearestNeighbors>(o.knn_k);
    if (name == "decision_tree") return std::make_unique<DecisionTree>(o.tree_depth, 0, seed);
    if (name == "random_forest") return std::make_unique<RandomForest>(o.forest_trees, o.tree_depth, seed);
    throw ConfigError("unknown classifier '" + name + "'");
}

inline Eigen::MatrixXd feature_matrix(const TabularDataset& ds) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.rows()), static_cast<Eigen::Index>(ds.cols()));
    for (std::size_t r = 0; r < ds.rows(); ++r)
        for (std::size_t c = 0; c < ds.cols(); ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds.at(r, c);
    return X;
}

// ---------------------------------------------------------------------------
// experiments

/// Balances a training set. The seed is the experiment's per-method stream.
using Balancer = std::function<BalanceResult(const TabularDataset&, std::uint64_t)>;

struct MethodSpec {
    std::string name;
    Balancer balance;  // empty for the unbalanced baseline
};

/// Baseline ("none"), "random_oversample" and "smote".
inline MethodSpec standard_method(const std::string& name, int smote_k = 5) {
    if (name == "none") return {name, {}};
    if (name == "random_oversample")
        return {name, [](const TabularDataset& d, std::uint64_t s) { return random_oversample(d, s); }};
    if (name == "smote")
        return {name, [smote_k](const TabularDataset& d, std::uint64_t s) { return smote(d, smote_k, s); }};
    throw ConfigError("unknown balancing method '" + name + "'");
}

inline std::uint64_t method_seed(std::uint64_t seed, const std::string& method) {
    if (method == "random_oversample") return derive_seed(seed, stage::random_oversample);
    if (method == "smote") return derive_seed(seed, stage::smote);
    if (method == "qrbm") return derive_seed(seed, stage::qrbm_train);
    return derive_seed(seed, hash_bytes(method));
}

struct ExperimentCell {
    std::string method;
    std::string classifier;
    Metrics metrics{};
    double minority_recall = 0.0;  // recall of class 1
    double fit_ms = 0.0;
    double predict_ms = 0.0;
};

struct ExperimentReport {
    std::vector<std::string> methods;
    std::vector<std::string> classifiers;
    std::vector<ExperimentCell> cells;  // method-major grid order
    std::vector<BalanceResult> balances;  // one per method other than the baseline
    std::string test_hash;

    const ExperimentCell& cell(const std::string& method, const std::string& classifier) const {
        for (const auto& c : cells)
            if (c.method == method && c.classifier == classifier) return c;
        throw ParameterError("no report cell for " + method + " x " + classifier);
    }
};

/// Trains every classifier on every balanced version of `train` and scores
/// on `test`. `test` is never handed to a balancer; its hash is checked
/// after the run. Classifier j is seeded with
/// derive_seed(derive_seed(seed, stage::classifiers), j) for every method.
inline ExperimentReport run_experiment(const TabularDataset& train, const TabularDataset& test,
                                       const std::vector<MethodSpec>& methods,
                                       const std::vector<std::string>& classifiers, std::uint64_t seed,
                                       const ClassifierOptions& opts = {}) {
    if (train.feature_names != test.feature_names) throw ParameterError("train and test columns differ");
    const auto test_hash = hash_dataset(test);
    ExperimentReport rep;
    rep.classifiers = classifiers;
    rep.test_hash = hex64(test_hash);
    const Eigen::MatrixXd Xt = feature_matrix(test);
    const auto yt = test.binary_classes();
    const std::uint64_t clf_base = derive_seed(seed, stage::classifiers);

    for (const auto& m : methods) {
        rep.methods.push_back(m.name);
        TabularDataset balanced = train;
        if (m.balance) {
            auto res = m.balance(train, method_seed(seed, m.name));
            balanced = res.dataset;
            res.dataset = {};
            rep.balances.push_back(std::move(res));
        }
        const Eigen::MatrixXd X = feature_matrix(balanced);
        const auto y = balanced.binary_classes();
        for (std::size_t j = 0; j < classifiers.size(); ++j) {
            auto clf = make_classifier(classifiers[j], derive_seed(clf_base, j), opts);
            ExperimentCell cell{m.name, classifiers[j]};
            auto t0 = std::chrono::steady_clock::now();
            clf->fit(X, y);
            cell.fit_ms = detail::elapsed_ms(t0);
            t0 = std::chrono::steady_clock::now();
            const auto pred = clf->predict(Xt);
            cell.predict_ms = detail::elapsed_ms(t0);
            cell.metrics = compute_metrics(yt, pred, {0, 1});
            cell.minority_recall = cell.metrics.recall_of(1);
            rep.cells.push_back(std::move(cell));
        }
    }
    if (hash_dataset(test) != test_hash) throw ValidationError("test set changed during the experiment");
    return rep;
}

// ---------------------------------------------------------------------------
// report output

/// One row per grid cell, no timing columns, so equal runs give equal files.
inline void write_report_csv(const ExperimentReport& r, std::ostream& os) {
    os << "method,classifier,precision,recall,f1,minority_recall,zero_division\n";
    for (const auto& c : r.cells) {
        os << c.method << ',' << c.classifier << ',' << detail::format_number(c.metrics.precision) << ','
           << detail::format_number(c.metrics.recall) << ',' << detail::format_number(c.metrics.f1) << ','
           << detail::format_number(c.minority_recall) << ',' << (c.metrics.zero_division ? 1 : 0) << '\n';
    }
}

inline void write_timings_csv(const ExperimentReport& r, std::ostream& os) {
    os << "method,classifier,fit_ms,predict_ms\n";
    for (const auto& c : r.cells)
        os << c.method << ',' << c.classifier << ',' << c.fit_ms << ',' << c.predict_ms << '\n';
}

/// Reads what write_report_csv wrote. Per-class vectors are not stored and
/// come back empty.
inline ExperimentReport read_report_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "method,classifier,precision,recall,f1,minority_recall,zero_division")
        throw DataError("not a report file: unexpected header");
    ExperimentReport r;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(detail::trim(line));
        if (cells.size() != 7) throw DataError("report line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " cells");
        ExperimentCell c;
        c.method = cells[0];
        c.classifier = cells[1];
        double v[4];
        for (int k = 0; k < 4; ++k)
            if (!detail::parse_number(cells[2 + k], v[k]))
                throw DataError("report line " + std::to_string(lineno) + ": bad number '" + cells[2 + k] + "'");
        c.metrics.precision = v[0];
        c.metrics.recall = v[1];
        c.metrics.f1 = v[2];
        c.minority_recall = v[3];
        c.metrics.zero_division = cells[6] == "1";
        if (std::find(r.methods.begin(), r.methods.end(), c.method) == r.methods.end()) r.methods.push_back(c.method);
        if (std::find(r.classifiers.begin(), r.classifiers.end(), c.classifier) == r.classifiers.end())
            r.classifiers.push_back(c.classifier);
        r.cells.push_back(std::move(c));
    }
    return r;
}

inline std::string display_name(const std::string& id) {
    static const std::map<std::string, std::string> names{
        {"none", "No balancing"},          {"random_oversample", "Random oversampling"},
        {"smote", "SMOTE"},                {"qrbm", "QRBM"},
        {"logistic_regression", "Logistic Regression"}, {"bernoulli_nb", "Naive Bayes"},
        {"knn", "KNN"},                    {"decision_tree", "Decision Tree"},
        {"random_forest", "Random Forest"}};
    const auto it = names.find(id);
    return it == names.end() ? id : it->second;
}

/// One table per method: classifier rows with precision, recall and F1.
inline void render_text_tables(const ExperimentReport& r, std::ostream& os) {
    const auto old = os.flags();
    for (const auto& m : r.methods) {
        os << "Evaluation metrics: " << display_name(m) << "\n";
        os << std::left << std::setw(22) << "Classifier" << std::right << std::setw(11) << "Precision"
           << std::setw(11) << "Recall" << std::setw(11) << "F1-score" << std::setw(16) << "Minority recall" << "\n";
        os << std::string(71, '-') << "\n";
        for (const auto& c : r.cells) {
            if (c.method != m) continue;
            os << std::left << std::setw(22) << display_name(c.classifier) << std::right << std::fixed
               << std::setprecision(4) << std::setw(11) << c.metrics.precision << std::setw(11) << c.metrics.recall
               << std::setw(11) << c.metrics.f1 << std::setw(16) << c.minority_recall << "\n";
            os.flags(old);
        }
        os << "(precision, recall and F1 macro-averaged over 2 classes: benign, attack)\n\n";
    }
    os.flags(old);
}

/// Grouped bar chart of one metric ("precision", "recall", "f1" or
/// "minority_recall"): classifiers on the x axis, one bar per method.
inline void render_svg(const ExperimentReport& r, const std::string& metric, std::ostream& os) {
    auto value = [&](const ExperimentCell& c) {
        if (metric == "precision") return c.metrics.precision;
        if (metric == "recall") return c.metrics.recall;
        if (metric == "f1") return c.metrics.f1;
        if (metric == "minority_recall") return c.minority_recall;
        throw ParameterError("unknown metric '" + metric + "'");
    };
    static const char* colors[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
    const double W = 720, H = 360, left = 50, bottom = 300, top = 30;
    const double group = (W - left - 20) / static_cast<double>(std::max<std::size_t>(1, r.classifiers.size()));
    const double bar = group * 0.8 / static_cast<double>(std::max<std::size_t>(1, r.methods.size()));
    std::ostringstream s;
    s << std::fixed << std::setprecision(2);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << metric << " (macro over 2 classes)</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << W - 10 << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double y = bottom - (bottom - top) * t / 4.0;
        s << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << t / 4.0 << "</text>\n";
    }
    for (std::size_t ci = 0; ci < r.classifiers.size(); ++ci) {
        const double gx = left + group * static_cast<double>(ci) + group * 0.1;
        for (std::size_t mi = 0; mi < r.methods.size(); ++mi) {
            const double v = std::clamp(value(r.cell(r.methods[mi], r.classifiers[ci])), 0.0, 1.0);
            const double h = (bottom - top) * v;
            s << "<rect x=\"" << gx + bar * static_cast<double>(mi) << "\" y=\"" << bottom - h << "\" width=\"" << bar * 0.9
              << "\" height=\"" << h << "\" fill=\"" << colors[mi % 6] << "\"/>\n";
        }
        s << "<text x=\"" << gx + group * 0.4 << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">"
          << display_name(r.classifiers[ci]) << "</text>\n";
    }
    for (std::size_t mi = 0; mi < r.methods.size(); ++mi) {
        const double x = left + 150.0 * static_cast<double>(mi);
        s << "<rect x=\"" << x << "\" y=\"" << H - 30 << "\" width=\"10\" height=\"10\" fill=\"" << colors[mi % 6] << "\"/>";
        s << "<text x=\"" << x + 14 << "\" y=\"" << H - 21 << "\">" << display_name(r.methods[mi]) << "</text>\n";
    }
    s << "</svg>\n";
    os << s.str();
}

}  // namespace qbal
