#pragma once

// Balanced sampling, cross-validated metrics, the imbalanced precision@k
// protocol and information-gain feature ranking.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "shill/classifiers.hpp"
#include "shill/common.hpp"

namespace shill {

using ml::Dataset;

// ---------------------------------------------------------------------------
// Sampling

struct SampleOptions {
    /// Users that must not be drawn (e.g. a held-out test set).
    std::vector<std::string> exclude;
    /// Restrict the shill side to these users; all shills when unset.
    std::optional<std::vector<std::string>> shills;
};

/// Every selected shill plus as many benign users drawn uniformly without
/// replacement. Rows come back ordered by user id.
inline Dataset balanced_training_sample(const Dataset& pool, std::uint64_t seed, const SampleOptions& opt = {}) {
    const auto order = ml::canonical_order(pool);
    std::unordered_set<std::string> excluded(opt.exclude.begin(), opt.exclude.end());
    std::unordered_set<std::string> wanted;
    if (opt.shills) wanted.insert(opt.shills->begin(), opt.shills->end());

    std::vector<std::size_t> shills, benign;
    for (auto i : order) {
        if (excluded.count(pool.ids[i])) continue;
        if (pool.y[i] == 1) {
            if (!opt.shills || wanted.count(pool.ids[i])) shills.push_back(i);
        } else {
            benign.push_back(i);
        }
    }
    if (opt.shills && shills.size() != wanted.size())
        throw Error("sample.unknown_shill", "requested shill subset contains users that are not available shills");
    if (benign.size() < shills.size())
        throw Error("sample.insufficient_benign", "benign pool of " + std::to_string(benign.size()) +
                                                      " cannot match " + std::to_string(shills.size()) + " shills");
    Rng rng(seed);
    rng.shuffle(benign);
    benign.resize(shills.size());
    std::vector<std::size_t> rows = shills;
    rows.insert(rows.end(), benign.begin(), benign.end());
    std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return pool.ids[a] < pool.ids[b]; });
    return pool.subset(rows);
}

/// Fold membership as row indices. Each class is shuffled and dealt round
/// robin, the second class continuing where the first stopped, so both the
/// per-class and the total fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error("cv.folds", "need at least 2 folds");
    std::vector<std::size_t> by_class[2];
    for (auto i : ml::canonical_order(d)) by_class[d.y[i]].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < k)
            throw Error("cv.class_too_small", std::string(c ? "shill" : "benign") + " class has " +
                                                  std::to_string(by_class[c].size()) + " rows, fewer than " +
                                                  std::to_string(k) + " folds");
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& rows : by_class) {
        rng.shuffle(rows);
        for (auto i : rows) folds[next++ % k].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double tp_rate = 0, fp_rate = 0, precision = 0, f_measure = 0;
};

/// A row is predicted shill when its score is strictly above `threshold`.
inline ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                          double threshold = 0.5) {
    if (scores.size() != labels.size()) throw Error("metrics.length", "scores and labels differ in length");
    ConfusionMetrics m;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] > threshold;
        if (labels[i] == 1) (predicted ? m.tp : m.fn)++;
        else (predicted ? m.fp : m.tn)++;
    }
    auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
    m.tp_rate = ratio(m.tp, m.tp + m.fn);
    m.fp_rate = ratio(m.fp, m.fp + m.tn);
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.f_measure = ratio(2 * m.precision * m.tp_rate, m.precision + m.tp_rate);
    return m;
}

/// Area under the ROC curve from the Mann-Whitney statistic with averaged
/// ranks, so tied positive/negative pairs count one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error("metrics.length", "scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (labels[idx[t]] == 1) {
                pos += 1;
                rank_sum += avg;
            }
        i = j;
    }
    double neg = static_cast<double>(n) - pos;
    if (pos == 0 || neg == 0) throw Error("metrics.single_class", "AUC needs both positive and negative rows");
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

struct CvResult {
    ml::Algorithm algorithm;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    ConfusionMetrics metrics;
    double auc = 0;
    std::vector<double> scores; // out-of-fold, aligned with dataset rows
};

/// k-fold cross validation; metrics are computed on the pooled out-of-fold
/// scores. Each fold's model is trained with `seed`.
inline CvResult cross_validate(ml::Algorithm algorithm, const Dataset& d, const ml::Hyperparameters& hp,
                               std::size_t folds, std::uint64_t seed) {
    auto parts = stratified_kfold(d, folds, derive_seed(seed, "folds"));
    CvResult r{algorithm, folds, seed, {}, 0, std::vector<double>(d.rows(), 0.0)};
    std::vector<char> in_test(d.rows());
    for (const auto& test : parts) {
        std::fill(in_test.begin(), in_test.end(), 0);
        for (auto i : test) in_test[i] = 1;
        std::vector<std::size_t> train_rows;
        for (std::size_t i = 0; i < d.rows(); ++i)
            if (!in_test[i]) train_rows.push_back(i);
        auto model = ml::train(algorithm, d.subset(train_rows), hp, seed);
        for (auto i : test) r.scores[i] = ml::predict_score(model, d.row(i));
    }
    r.metrics = confusion_metrics(r.scores, d.y);
    r.auc = auc(r.scores, d.y);
    return r;
}

// ---------------------------------------------------------------------------
// Precision at k

/// Row indices by descending score; equal scores keep ascending user id.
inline std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::span<const std::string> ids) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    return idx;
}

/// Precision over the top-k ranked users for every k in `k_grid`. When k
/// exceeds the population the denominator is the population size.
inline std::vector<double> precision_curve(std::span<const double> scores, std::span<const int> labels,
                                           std::span<const std::string> ids, std::span<const std::size_t> k_grid) {
    auto order = rank_by_score(scores, ids);
    std::vector<std::size_t> hits(order.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) hits[i + 1] = hits[i] + (labels[order[i]] == 1);
    std::vector<double> out;
    out.reserve(k_grid.size());
    for (auto k : k_grid) {
        if (k == 0) throw Error("metrics.k", "k must be at least 1");
        std::size_t top = std::min(k, order.size());
        out.push_back(top ? static_cast<double>(hits[top]) / static_cast<double>(top) : 0.0);
    }
    return out;
}

inline double precision_at_k(std::span<const double> scores, std::span<const int> labels,
                             std::span<const std::string> ids, std::size_t k) {
    return precision_curve(scores, labels, ids, std::span<const std::size_t>(&k, 1))[0];
}

inline std::vector<std::size_t> default_k_grid(std::size_t max_k = 1000) {
    std::vector<std::size_t> g(max_k);
    std::iota(g.begin(), g.end(), std::size_t{1});
    return g;
}

struct ProtocolConfig {
    ml::Algorithm algorithm = ml::Algorithm::rotation_forest;
    ml::Hyperparameters hyper;
    std::vector<std::size_t> ratios{2, 5, 10, 20, 100}; // benign users per test shill
    std::size_t repetitions = 3;
    std::vector<std::size_t> k_grid = default_k_grid();
    double train_shill_fraction = 0.9;
    std::uint64_t seed = 1;
};

struct RepetitionRecord {
    std::uint64_t seed = 0;
    std::size_t train_rows = 0, test_shills = 0;
    std::vector<std::size_t> test_benign; // per ratio
};

struct ProtocolResult {
    std::vector<std::size_t> ratios, k_grid;
    std::vector<std::vector<double>> precision; // [ratio][k], averaged over repetitions
    std::vector<RepetitionRecord> repetitions;

    double at(std::size_t ratio, std::size_t k) const {
        auto r = std::find(ratios.begin(), ratios.end(), ratio);
        auto c = std::find(k_grid.begin(), k_grid.end(), k);
        if (r == ratios.end() || c == k_grid.end()) throw Error("protocol.lookup", "ratio or k not evaluated");
        return precision[static_cast<std::size_t>(r - ratios.begin())][static_cast<std::size_t>(c - k_grid.begin())];
    }
};

inline std::string ratio_name(std::size_t r) { return "1:" + std::to_string(r); }

/// Repeated held-out evaluation. Per repetition (seed + r): a random share of
/// the shills plus equally many benign users train the model; the remaining
/// shills face r benign users each. The benign test sets of one repetition
/// are prefixes of a single shuffle of the unused benign users, so a larger
/// ratio only adds benign users to a smaller one.
inline ProtocolResult imbalanced_protocol(const Dataset& corpus, const ProtocolConfig& cfg) {
    if (cfg.repetitions == 0) throw Error("protocol.repetitions", "need at least one repetition");
    if (cfg.ratios.empty() || cfg.k_grid.empty()) throw Error("protocol.grid", "ratios and k grid must be non-empty");
    const auto order = ml::canonical_order(corpus);
    std::vector<std::size_t> all_shills, all_benign;
    for (auto i : order) (corpus.y[i] == 1 ? all_shills : all_benign).push_back(i);
    const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_shill_fraction * static_cast<double>(all_shills.size())));
    if (n_train == 0 || n_train >= all_shills.size())
        throw Error("protocol.shills", "shill split leaves an empty training or test side");
    const std::size_t n_test = all_shills.size() - n_train;
    const std::size_t max_ratio = *std::max_element(cfg.ratios.begin(), cfg.ratios.end());

    ProtocolResult res{cfg.ratios, cfg.k_grid, {}, {}};
    res.precision.assign(cfg.ratios.size(), std::vector<double>(cfg.k_grid.size(), 0.0));
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t seed = cfg.seed + rep;
        auto shills = all_shills;
        Rng split(derive_seed(seed, "shill-split"));
        split.shuffle(shills);
        std::vector<std::string> train_shills, test_ids;
        for (std::size_t i = 0; i < shills.size(); ++i)
            (i < n_train ? train_shills : test_ids).push_back(corpus.ids[shills[i]]);

        SampleOptions so;
        so.exclude = test_ids;
        so.shills = train_shills;
        const Dataset train_set = balanced_training_sample(corpus, derive_seed(seed, "balanced"), so);

        std::unordered_set<std::string> used(train_set.ids.begin(), train_set.ids.end());
        std::vector<std::size_t> spare;
        for (auto i : all_benign)
            if (!used.count(corpus.ids[i])) spare.push_back(i);
        for (auto r : cfg.ratios)
            if (spare.size() < r * n_test)
                throw Error("protocol.insufficient_benign",
                            "ratio " + ratio_name(r) + " needs " + std::to_string(r * n_test) +
                                " benign test users but only " + std::to_string(spare.size()) + " remain");
        Rng pick(derive_seed(seed, "test-benign"));
        pick.shuffle(spare);
        spare.resize(max_ratio * n_test);

        std::vector<std::size_t> test_rows(shills.begin() + static_cast<std::ptrdiff_t>(n_train), shills.end());
        for (auto i : test_rows)
            if (used.count(corpus.ids[i])) throw Error("protocol.isolation", "test shill found in training set");
        for (auto i : spare)
            if (used.count(corpus.ids[i])) throw Error("protocol.isolation", "test benign user found in training set");

        auto model = ml::train(cfg.algorithm, train_set, cfg.hyper, seed);
        RepetitionRecord rec{seed, train_set.rows(), n_test, {}};
        std::vector<double> scores;
        std::vector<int> labels;
        std::vector<std::string> ids;
        auto add = [&](std::size_t i) {
            scores.push_back(ml::predict_score(model, corpus.row(i)));
            labels.push_back(corpus.y[i]);
            ids.push_back(corpus.ids[i]);
        };
        for (auto i : test_rows) add(i);
        std::size_t added = 0;
        std::vector<std::size_t> by_size(cfg.ratios.size());
        std::iota(by_size.begin(), by_size.end(), std::size_t{0});
        std::sort(by_size.begin(), by_size.end(), [&](auto a, auto b) { return cfg.ratios[a] < cfg.ratios[b]; });
        rec.test_benign.assign(cfg.ratios.size(), 0);
        for (auto ri : by_size) {
            const std::size_t want = cfg.ratios[ri] * n_test;
            for (; added < want; ++added) add(spare[added]);
            auto curve = precision_curve(scores, labels, ids, cfg.k_grid);
            for (std::size_t c = 0; c < curve.size(); ++c) res.precision[ri][c] += curve[c];
            rec.test_benign[ri] = want;
        }
        res.repetitions.push_back(std::move(rec));
    }
    for (auto& row : res.precision)
        for (auto& v : row) v /= static_cast<double>(cfg.repetitions);
    return res;
}

// ---------------------------------------------------------------------------
// Information gain

inline double entropy(std::span<const double> counts) {
    double total = std::accumulate(counts.begin(), counts.end(), 0.0), h = 0;
    for (double c : counts)
        if (c > 0) h -= c / total * std::log2(c / total);
    return h;
}

namespace detail {

struct LabeledValue {
    double value;
    int label;
};

/// Recursive entropy-minimizing split of sorted[lo, hi) with the
/// Fayyad-Irani MDL acceptance test.
inline void mdl_split(const std::vector<LabeledValue>& s, std::size_t lo, std::size_t hi, std::vector<double>& cuts) {
    const std::size_t n = hi - lo;
    if (n < 2) return;
    double all[2] = {0, 0};
    for (std::size_t i = lo; i < hi; ++i) all[s[i].label] += 1;
    const double h_all = entropy(all);
    double left[2] = {0, 0};
    double best_h = INFINITY;
    std::size_t best = 0;
    double best_l[2] = {0, 0};
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        left[s[i].label] += 1;
        if (s[i].value == s[i + 1].value) continue;
        double right[2] = {all[0] - left[0], all[1] - left[1]};
        double nl = left[0] + left[1], nr = right[0] + right[1];
        double h = (nl * entropy(left) + nr * entropy(right)) / static_cast<double>(n);
        if (h < best_h) {
            best_h = h;
            best = i + 1;
            best_l[0] = left[0];
            best_l[1] = left[1];
        }
    }
    if (best == 0) return;
    double best_r[2] = {all[0] - best_l[0], all[1] - best_l[1]};
    auto classes = [](const double* c) { return static_cast<double>((c[0] > 0) + (c[1] > 0)); };
    const double k = classes(all), k1 = classes(best_l), k2 = classes(best_r);
    const double N = static_cast<double>(n);
    const double gain = h_all - best_h;
    const double delta = std::log2(std::pow(3.0, k) - 2) - (k * h_all - k1 * entropy(best_l) - k2 * entropy(best_r));
    if (!(gain > (std::log2(N - 1) + delta) / N)) return;
    mdl_split(s, lo, best, cuts);
    cuts.push_back((s[best - 1].value + s[best].value) / 2);
    mdl_split(s, best, hi, cuts);
}

} // namespace detail

/// Supervised discretization cut points (ascending) for one numeric column.
inline std::vector<double> mdl_cut_points(std::span<const double> values, std::span<const int> labels) {
    std::vector<detail::LabeledValue> s(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) s[i] = {values[i], labels[i]};
    std::stable_sort(s.begin(), s.end(), [](auto a, auto b) { return a.value < b.value; });
    std::vector<double> cuts;
    detail::mdl_split(s, 0, s.size(), cuts);
    return cuts;
}

/// Cut points splitting the sorted column into `bins` groups of near-equal
/// size; equal values never straddle a cut.
inline std::vector<double> equal_frequency_cut_points(std::span<const double> values, std::size_t bins) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::vector<double> cuts;
    for (std::size_t b = 1; b < bins; ++b) {
        std::size_t at = b * v.size() / bins;
        if (at == 0 || at >= v.size() || v[at - 1] == v[at]) continue;
        double c = (v[at - 1] + v[at]) / 2;
        if (cuts.empty() || cuts.back() < c) cuts.push_back(c);
    }
    return cuts;
}

/// H(label) - H(label | bin), bins given by ascending cut points
/// (value < cut[i] lands in bin i).
inline double information_gain(std::span<const double> values, std::span<const int> labels,
                               std::span<const double> cuts) {
    std::vector<std::array<double, 2>> bins(cuts.size() + 1, {0, 0});
    double all[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto b = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
        bins[b][static_cast<std::size_t>(labels[i])] += 1;
        all[labels[i]] += 1;
    }
    const double n = static_cast<double>(values.size());
    double cond = 0;
    for (const auto& b : bins) cond += (b[0] + b[1]) / n * entropy(b);
    return std::max(0.0, entropy(all) - cond);
}

struct FeatureScore {
    std::size_t feature;
    double score;
    std::size_t bins;
};

struct IgOptions {
    /// Use 10 equal-frequency bins when the MDL rule accepts no cut.
    bool equal_frequency_fallback = false;
};

/// Features ranked by information gain, descending; ties keep feature order.
inline std::vector<FeatureScore> information_gain_ranking(const Dataset& d, const IgOptions& opt = {}) {
    std::vector<FeatureScore> out;
    std::vector<double> col(d.rows());
    for (std::size_t f = 0; f < d.n_features; ++f) {
        for (std::size_t i = 0; i < d.rows(); ++i) col[i] = d.at(i, f);
        std::vector<double> cuts;
        if (d.kinds[f] == ml::FeatureKind::categorical) {
            // one bin per distinct value
            std::vector<double> v = col;
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            for (std::size_t i = 1; i < v.size(); ++i) cuts.push_back((v[i - 1] + v[i]) / 2);
        } else {
            cuts = mdl_cut_points(col, d.y);
            if (cuts.empty() && opt.equal_frequency_fallback) cuts = equal_frequency_cut_points(col, 10);
        }
        out.push_back({f, information_gain(col, d.y, cuts), cuts.size() + 1});
    }
    std::stable_sort(out.begin(), out.end(), [](auto a, auto b) { return a.score > b.score; });
    return out;
}

// ---------------------------------------------------------------------------
// Reports

struct EvaluationReport {
    std::vector<CvResult> classifiers;
    std::optional<ProtocolResult> protocol;
    std::optional<ml::Algorithm> protocol_algorithm;
    std::uint64_t seed = 0;
};

inline nlohmann::ordered_json metrics_json(const CvResult& r) {
    return {{"algorithm", ml::to_string(r.algorithm)},
            {"folds", r.folds},
            {"seed", r.seed},
            {"tp_rate", r.metrics.tp_rate},
            {"fp_rate", r.metrics.fp_rate},
            {"f_measure", r.metrics.f_measure},
            {"auc", r.auc},
            {"confusion", {{"tp", r.metrics.tp}, {"fp", r.metrics.fp}, {"tn", r.metrics.tn}, {"fn", r.metrics.fn}}}};
}

inline nlohmann::ordered_json protocol_json(const ProtocolResult& p) {
    nlohmann::ordered_json curves = nlohmann::ordered_json::object();
    for (std::size_t r = 0; r < p.ratios.size(); ++r) curves[ratio_name(p.ratios[r])] = p.precision[r];
    nlohmann::ordered_json reps = nlohmann::ordered_json::array();
    for (const auto& rec : p.repetitions)
        reps.push_back({{"seed", rec.seed},
                        {"train_rows", rec.train_rows},
                        {"test_shills", rec.test_shills},
                        {"test_benign", rec.test_benign}});
    return {{"ratios", p.ratios}, {"k_grid", p.k_grid}, {"precision_at_k", curves}, {"repetitions", reps}};
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["classifiers"] = nlohmann::ordered_json::array();
    for (const auto& c : r.classifiers) j["classifiers"].push_back(metrics_json(c));
    if (r.protocol) {
        j["protocol"] = protocol_json(*r.protocol);
        if (r.protocol_algorithm) j["protocol"]["algorithm"] = ml::to_string(*r.protocol_algorithm);
    }
    return j;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<CvResult>& rs) {
    out << "algorithm,tp_rate,fp_rate,f_measure,auc\n";
    for (const auto& r : rs)
        out << ml::to_string(r.algorithm) << ',' << format_double(r.metrics.tp_rate) << ','
            << format_double(r.metrics.fp_rate) << ',' << format_double(r.metrics.f_measure) << ','
            << format_double(r.auc) << '\n';
}

inline void write_precision_csv(std::ostream& out, const ProtocolResult& p) {
    out << "k";
    for (auto r : p.ratios) out << ',' << ratio_name(r);
    out << '\n';
    for (std::size_t c = 0; c < p.k_grid.size(); ++c) {
        out << p.k_grid[c];
        for (std::size_t r = 0; r < p.ratios.size(); ++r) out << ',' << format_double(p.precision[r][c]);
        out << '\n';
    }
}

/// Line plot of precision@k, one polyline per ratio.
inline void write_precision_svg(std::ostream& out, const ProtocolResult& p) {
    constexpr double W = 640, H = 400, L = 60, R = 120, T = 20, B = 50;
    static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
    const double kmin = static_cast<double>(p.k_grid.front()), kmax = static_cast<double>(p.k_grid.back());
    auto px = [&](double k) { return L + (kmax > kmin ? (k - kmin) / (kmax - kmin) : 0.0) * (W - L - R); };
    auto py = [&](double v) { return T + (1.0 - v) * (H - T - B); };
    char buf[128];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, py(0), W - R, py(0));
    out << buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, py(0), L, py(1));
    out << buf;
    for (double v = 0; v <= 1.0001; v += 0.2) {
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.1f</text>\n", L - 6,
                      py(v) + 4, v);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\">%g</text>\n", L, H - B + 16, kmin);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%g</text>\n", W - R,
                  H - B + 16, kmax);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">k</text>\n",
                  (L + W - R) / 2, H - 12);
    out << buf;
    out << "<text x=\"14\" y=\"" << (H - B + T) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
        << (H - B + T) / 2 << ")\" text-anchor=\"middle\">precision@k</text>\n";
    for (std::size_t r = 0; r < p.ratios.size(); ++r) {
        const char* colour = colours[r % 7];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t c = 0; c < p.k_grid.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", c ? " " : "", px(static_cast<double>(p.k_grid[c])),
                          py(p.precision[r][c]));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"%s\">%s</text>\n", W - R + 10,
                      T + 16.0 * static_cast<double>(r + 1), colour, ratio_name(p.ratios[r]).c_str());
        out << buf;
    }
    out << "</svg>\n";
}

} // namespace shill
