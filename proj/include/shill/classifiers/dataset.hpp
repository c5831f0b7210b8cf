#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "shill/common.hpp"
#include "shill/features.hpp"

namespace shill::ml {

/// Numeric features are ordered; categorical ones (hashed State) only
/// support equality tests.
enum class FeatureKind { numeric, categorical };

/// Row-major labelled design matrix. Labels: 1 = shill, 0 = benign.
struct Dataset {
    std::size_t n_features = 0;
    std::vector<FeatureKind> kinds;
    std::vector<double> x;
    std::vector<int> y;
    std::vector<std::string> ids;
    std::string manifest_hash;

    std::size_t rows() const { return y.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
    double at(std::size_t i, std::size_t f) const { return x[i * n_features + f]; }

    std::size_t positives() const { return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)); }

    void push_back(std::span<const double> values, int label, std::string id) {
        if (values.size() != n_features) throw Error("dataset.width", "row width does not match dataset");
        x.insert(x.end(), values.begin(), values.end());
        y.push_back(label);
        ids.push_back(std::move(id));
    }

    Dataset subset(std::span<const std::size_t> indices) const {
        Dataset d{n_features, kinds, {}, {}, {}, manifest_hash};
        d.x.reserve(indices.size() * n_features);
        for (auto i : indices) d.push_back(row(i), y[i], ids[i]);
        return d;
    }
};

/// Dataset over all numeric features with synthetic ids "r0000", "r0001", ...
/// Handy for toy problems.
inline Dataset make_numeric_dataset(std::size_t n_features, const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels) {
    Dataset d;
    d.n_features = n_features;
    d.kinds.assign(n_features, FeatureKind::numeric);
    d.manifest_hash = "adhoc";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "r%04zu", i);
        d.push_back(rows[i], labels[i], id);
    }
    return d;
}

/// Dataset view of selected feature-matrix rows (all rows when `rows` is empty).
inline Dataset make_dataset(const FeatureMatrix& m, std::span<const std::size_t> rows = {}) {
    Dataset d;
    d.n_features = feature_count;
    d.kinds.assign(feature_count, FeatureKind::numeric);
    d.kinds[State] = FeatureKind::categorical;
    d.manifest_hash = feature_manifest_hash();
    auto add = [&](std::size_t i) { d.push_back(m.rows[i], m.labels[i], m.user_ids[i]); };
    if (rows.empty())
        for (std::size_t i = 0; i < m.size(); ++i) add(i);
    else
        for (auto i : rows) add(i);
    return d;
}

/// Row indices ordered by user id (ties by position). Every learner consumes
/// rows in this order, so training is invariant to input row order.
inline std::vector<std::size_t> canonical_order(const Dataset& d) {
    std::vector<std::size_t> idx(d.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return d.ids[a] < d.ids[b]; });
    return idx;
}

inline Dataset canonicalize(const Dataset& d) {
    auto idx = canonical_order(d);
    return d.subset(idx);
}

inline void require_trainable(const Dataset& d) {
    if (d.rows() == 0) throw Error("train.empty", "training set is empty");
    auto pos = d.positives();
    if (pos == 0 || pos == d.rows())
        throw Error("train.single_class", "training set must contain both shill and benign rows");
}

/// Per-feature mean and standard deviation (population), std 0 kept as 0.
struct Standardizer {
    std::vector<double> mean, stddev;

    static Standardizer fit(const Dataset& d) {
        Standardizer s;
        s.mean.assign(d.n_features, 0.0);
        s.stddev.assign(d.n_features, 0.0);
        const double n = static_cast<double>(d.rows());
        for (std::size_t i = 0; i < d.rows(); ++i)
            for (std::size_t f = 0; f < d.n_features; ++f) s.mean[f] += d.at(i, f);
        for (auto& m : s.mean) m /= n;
        for (std::size_t i = 0; i < d.rows(); ++i)
            for (std::size_t f = 0; f < d.n_features; ++f) {
                double dx = d.at(i, f) - s.mean[f];
                s.stddev[f] += dx * dx;
            }
        for (auto& v : s.stddev) v = std::sqrt(v / n);
        return s;
    }

    double apply(std::size_t f, double v) const {
        return stddev[f] > 0 ? (v - mean[f]) / stddev[f] : 0.0;
    }
};

} // namespace shill::ml
