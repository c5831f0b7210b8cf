#pragma once

// Single-model learners: OneR, Gaussian Naive Bayes and k-nearest neighbours.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "shill/classifiers/dataset.hpp"

namespace shill::ml {

// ---------------------------------------------------------------------------
// OneR

/// One-feature rule. Numeric features are cut into intervals at `breakpoints`
/// (value < breakpoints[i] falls in bucket i); categorical features map each
/// seen value to a bucket.
struct OneRModel {
    std::size_t feature = 0;
    bool categorical = false;
    std::vector<double> breakpoints;
    std::vector<double> values; // categorical bucket keys
    std::vector<double> bucket_positives, bucket_totals;
    double base_rate = 0.0;     // score for unseen categorical values
    std::size_t errors = 0;

    double score(std::span<const double> x) const {
        double v = x[feature];
        std::size_t b;
        if (categorical) {
            auto it = std::lower_bound(values.begin(), values.end(), v);
            if (it == values.end() || *it != v) return base_rate;
            b = static_cast<std::size_t>(it - values.begin());
        } else {
            b = static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), v) -
                                         breakpoints.begin());
        }
        return bucket_totals[b] > 0 ? bucket_positives[b] / bucket_totals[b] : base_rate;
    }
};

namespace detail {

struct Bucket {
    double pos = 0, total = 0;
    int majority() const { return 2 * pos > total ? 1 : 0; }
    double errors() const { return total - std::max(pos, total - pos); }
};

inline OneRModel one_r_numeric(const Dataset& d, std::size_t f, std::size_t min_bucket) {
    std::vector<std::size_t> order(d.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d.at(a, f) < d.at(b, f); });
    const std::size_t n = order.size();
    auto value = [&](std::size_t k) { return d.at(order[k], f); };
    auto label = [&](std::size_t k) { return d.y[order[k]]; };

    std::vector<Bucket> buckets;
    std::vector<double> cuts;
    std::size_t it = 0;
    while (it < n) {
        double counts[2] = {0, 0};
        int best = 0;
        do {
            counts[label(it)] += 1;
            ++it;
            best = counts[1] > counts[0] ? 1 : 0;
        } while (it < n && counts[best] < static_cast<double>(min_bucket));
        while (it < n && label(it) == best) counts[label(it++)] += 1;
        while (it < n && value(it) == value(it - 1)) counts[label(it++)] += 1;
        buckets.push_back({counts[1], counts[0] + counts[1]});
        if (it < n) cuts.push_back(value(it - 1) + (value(it) - value(it - 1)) / 2);
    }
    // Merge neighbours that predict the same class.
    OneRModel m;
    m.feature = f;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        if (b > 0 && Bucket{m.bucket_positives.back(), m.bucket_totals.back()}.majority() ==
                         buckets[b].majority()) {
            m.bucket_positives.back() += buckets[b].pos;
            m.bucket_totals.back() += buckets[b].total;
            continue;
        }
        if (b > 0) m.breakpoints.push_back(cuts[b - 1]);
        m.bucket_positives.push_back(buckets[b].pos);
        m.bucket_totals.push_back(buckets[b].total);
    }
    double errs = 0;
    for (std::size_t b = 0; b < m.bucket_totals.size(); ++b) errs += Bucket{m.bucket_positives[b], m.bucket_totals[b]}.errors();
    m.errors = static_cast<std::size_t>(errs);
    return m;
}

inline OneRModel one_r_categorical(const Dataset& d, std::size_t f) {
    std::map<double, Bucket> by_value;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        auto& b = by_value[d.at(i, f)];
        b.pos += d.y[i];
        b.total += 1;
    }
    OneRModel m;
    m.feature = f;
    m.categorical = true;
    double errs = 0;
    for (const auto& [v, b] : by_value) {
        m.values.push_back(v);
        m.bucket_positives.push_back(b.pos);
        m.bucket_totals.push_back(b.total);
        errs += b.errors();
    }
    m.errors = static_cast<std::size_t>(errs);
    return m;
}

} // namespace detail

/// Holte's 1R: per feature, buckets holding at least `min_bucket` rows of
/// their majority class; the feature with the fewest training errors wins
/// (lowest index on ties).
inline OneRModel train_one_r(const Dataset& d, std::size_t min_bucket = 6) {
    require_trainable(d);
    OneRModel best;
    bool have = false;
    for (std::size_t f = 0; f < d.n_features; ++f) {
        auto m = d.kinds[f] == FeatureKind::categorical ? detail::one_r_categorical(d, f)
                                                        : detail::one_r_numeric(d, f, min_bucket);
        if (!have || m.errors < best.errors) {
            best = std::move(m);
            have = true;
        }
    }
    best.base_rate = static_cast<double>(d.positives()) / static_cast<double>(d.rows());
    return best;
}

// ---------------------------------------------------------------------------
// Naive Bayes

/// Gaussian likelihoods for numeric features (maximum-likelihood variance with
/// a floor), Laplace-smoothed frequency tables for categorical ones, and class
/// priors from training frequencies.
struct NaiveBayesModel {
    double prior[2] = {0.5, 0.5};
    std::vector<double> mean[2], variance[2];
    // categorical: sorted value keys and per-class counts
    std::vector<std::vector<double>> cat_values;
    std::vector<std::vector<double>> cat_counts[2];
    double class_count[2] = {0, 0};
    std::vector<FeatureKind> kinds;

    double log_likelihood(int c, std::span<const double> x) const {
        constexpr double log_2pi = 1.8378770664093453;
        double ll = std::log(prior[c]);
        for (std::size_t f = 0; f < kinds.size(); ++f) {
            if (kinds[f] == FeatureKind::numeric) {
                double dx = x[f] - mean[c][f];
                ll += -0.5 * (log_2pi + std::log(variance[c][f])) - dx * dx / (2 * variance[c][f]);
            } else {
                const auto& vals = cat_values[f];
                auto it = std::lower_bound(vals.begin(), vals.end(), x[f]);
                double count = (it != vals.end() && *it == x[f])
                                   ? cat_counts[c][f][static_cast<std::size_t>(it - vals.begin())]
                                   : 0.0;
                double distinct = static_cast<double>(vals.size()) + 1.0; // +1 slot for unseen values
                ll += std::log((count + 1.0) / (class_count[c] + distinct));
            }
        }
        return ll;
    }

    /// P(shill | x).
    double score(std::span<const double> x) const {
        double l0 = log_likelihood(0, x), l1 = log_likelihood(1, x);
        return 1.0 / (1.0 + std::exp(l0 - l1));
    }
};

inline NaiveBayesModel train_naive_bayes(const Dataset& d, double variance_floor = 1e-9) {
    require_trainable(d);
    NaiveBayesModel m;
    m.kinds = d.kinds;
    const std::size_t F = d.n_features;
    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(F, 0.0);
        m.variance[c].assign(F, 0.0);
        m.cat_counts[c].assign(F, {});
    }
    m.cat_values.assign(F, {});
    for (std::size_t i = 0; i < d.rows(); ++i) {
        int c = d.y[i];
        m.class_count[c] += 1;
        for (std::size_t f = 0; f < F; ++f) m.mean[c][f] += d.at(i, f);
    }
    for (int c = 0; c < 2; ++c) {
        m.prior[c] = m.class_count[c] / static_cast<double>(d.rows());
        for (auto& v : m.mean[c]) v /= m.class_count[c];
    }
    for (std::size_t i = 0; i < d.rows(); ++i) {
        int c = d.y[i];
        for (std::size_t f = 0; f < F; ++f) {
            double dx = d.at(i, f) - m.mean[c][f];
            m.variance[c][f] += dx * dx;
        }
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.variance[c]) v = std::max(v / m.class_count[c], variance_floor);

    for (std::size_t f = 0; f < F; ++f) {
        if (d.kinds[f] != FeatureKind::categorical) continue;
        auto& vals = m.cat_values[f];
        for (std::size_t i = 0; i < d.rows(); ++i) vals.push_back(d.at(i, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (int c = 0; c < 2; ++c) m.cat_counts[c][f].assign(vals.size(), 0.0);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            auto k = static_cast<std::size_t>(std::lower_bound(vals.begin(), vals.end(), d.at(i, f)) - vals.begin());
            m.cat_counts[d.y[i]][f][k] += 1;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// k nearest neighbours

/// Stored training rows, z-scored with training statistics. Numeric features
/// contribute squared standardized differences; categorical ones add 1 on
/// mismatch. Equal distances resolve to the earlier (lower user id) row.
struct KnnModel {
    std::size_t k = 3;
    std::vector<FeatureKind> kinds;
    Standardizer scale;
    std::vector<double> rows; // standardized, row-major
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }

    /// Indices of the k nearest stored rows, nearest first.
    std::vector<std::size_t> neighbours(std::span<const double> x) const {
        const std::size_t F = kinds.size();
        std::vector<double> q(F);
        for (std::size_t f = 0; f < F; ++f)
            q[f] = kinds[f] == FeatureKind::numeric ? scale.apply(f, x[f]) : x[f];
        std::vector<std::pair<double, std::size_t>> dist(size());
        for (std::size_t i = 0; i < size(); ++i) {
            double s = 0;
            const double* r = rows.data() + i * F;
            for (std::size_t f = 0; f < F; ++f) {
                if (kinds[f] == FeatureKind::numeric) {
                    double dx = r[f] - q[f];
                    s += dx * dx;
                } else {
                    s += r[f] == q[f] ? 0.0 : 1.0;
                }
            }
            dist[i] = {s, i};
        }
        std::size_t kk = std::min(k, dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < kk; ++i) out.push_back(dist[i].second);
        return out;
    }

    double score(std::span<const double> x) const {
        auto nn = neighbours(x);
        double votes = 0;
        for (auto i : nn) votes += labels[i];
        return votes / static_cast<double>(nn.size());
    }
};

inline KnnModel train_knn(const Dataset& d, std::size_t k = 3) {
    require_trainable(d);
    if (d.rows() < k)
        throw Error("train.knn_too_small", "k-NN needs at least " + std::to_string(k) + " training rows");
    KnnModel m;
    m.k = k;
    m.kinds = d.kinds;
    m.scale = Standardizer::fit(d);
    m.rows.reserve(d.x.size());
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t f = 0; f < d.n_features; ++f)
            m.rows.push_back(d.kinds[f] == FeatureKind::numeric ? m.scale.apply(f, d.at(i, f)) : d.at(i, f));
    m.labels = d.y;
    return m;
}

} // namespace shill::ml
