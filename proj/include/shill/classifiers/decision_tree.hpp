#pragma once

// Binary decision trees in the C4.5 family: numeric features split on a
// threshold, categorical features on equality with one value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "shill/classifiers/dataset.hpp"

namespace shill::ml {

enum class SplitCriterion { gain_ratio, info_gain };

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::gain_ratio;
    std::size_t min_leaf = 2;
    /// Features examined per node; 0 means all of them.
    std::size_t features_per_split = 0;
    bool prune = true;
    /// C4.5 confidence factor for pessimistic error estimates.
    double confidence = 0.25;
};

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    bool categorical = false;
    double threshold = 0.0;    // numeric: x < threshold goes left; categorical: x == threshold goes left
    std::uint32_t left = 0, right = 0;
    double positives = 0.0, total = 0.0;
    double gain = 0.0;         // information gain of the split (internal nodes)

    bool is_leaf() const { return feature < 0; }
    double shill_fraction() const { return total > 0 ? positives / total : 0.0; }
    /// Majority class; ties resolve to benign.
    int majority() const { return 2.0 * positives > total ? 1 : 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    const TreeNode& leaf_for(std::span<const double> x) const {
        std::uint32_t i = 0;
        while (!nodes[i].is_leaf()) {
            const auto& n = nodes[i];
            double v = x[static_cast<std::size_t>(n.feature)];
            bool go_left = n.categorical ? v == n.threshold : v < n.threshold;
            i = go_left ? n.left : n.right;
        }
        return nodes[i];
    }

    double score(std::span<const double> x) const { return leaf_for(x).shill_fraction(); }
    int vote(std::span<const double> x) const { return leaf_for(x).majority(); }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
    }
    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (!nodes[i].is_leaf()) {
                stack.push_back({nodes[i].left, d + 1});
                stack.push_back({nodes[i].right, d + 1});
            }
        }
        return best;
    }
};

namespace detail {

inline double entropy2(double pos, double total) {
    if (total <= 0 || pos <= 0 || pos >= total) return 0.0;
    double p = pos / total, q = 1.0 - p;
    return -(p * std::log2(p) + q * std::log2(q));
}

inline double normal_quantile(double p) {
    double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Upper confidence bound on errors beyond the observed ones, as used by C4.5
/// pruning (normal approximation to the binomial).
inline double added_errors(double n, double e, double cf) {
    const double z = cf == 0.25 ? 0.6744897501960817 : normal_quantile(1.0 - cf);
    if (e < 1.0) {
        double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    double f = (e + 0.5) / n;
    double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
    return r * n - e;
}

struct SplitCandidate {
    std::int32_t feature = -1;
    bool categorical = false;
    double threshold = 0.0;
    double gain = 0.0;       // raw information gain
    double ranked_gain = 0.0; // gain after the numeric threshold-count penalty (gain-ratio mode)
    double split_info = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Dataset& d, const TreeParams& p, Rng* rng) : d_(d), p_(p), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        scratch_.resize(rows.size());
        grow(rows, 0, rows.size());
        if (p_.prune) {
            prune(0);
            compact();
        }
        return std::move(tree_);
    }

private:
    std::uint32_t grow(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end) {
        auto id = static_cast<std::uint32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double pos = 0;
        for (std::size_t i = begin; i < end; ++i) pos += d_.y[rows[i]];
        const double total = static_cast<double>(end - begin);
        tree_.nodes[id].positives = pos;
        tree_.nodes[id].total = total;
        if (pos == 0 || pos == total || end - begin < 2 * p_.min_leaf) return id;

        auto split = best_split(rows, begin, end, pos);
        if (split.feature < 0) return id;

        auto goes_left = [&](std::size_t r) {
            double v = d_.at(r, static_cast<std::size_t>(split.feature));
            return split.categorical ? v == split.threshold : v < split.threshold;
        };
        auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                         rows.begin() + static_cast<std::ptrdiff_t>(end), goes_left);
        auto m = static_cast<std::size_t>(mid - rows.begin());
        if (m == begin || m == end) return id;

        tree_.nodes[id].feature = split.feature;
        tree_.nodes[id].categorical = split.categorical;
        tree_.nodes[id].threshold = split.threshold;
        tree_.nodes[id].gain = split.gain;
        auto l = grow(rows, begin, m);
        auto r = grow(rows, m, end);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                              double pos) {
        std::vector<std::size_t> features(d_.n_features);
        std::iota(features.begin(), features.end(), std::size_t{0});
        std::size_t window = d_.n_features;
        if (p_.features_per_split > 0 && p_.features_per_split < d_.n_features && rng_) {
            rng_->shuffle(features);
            window = p_.features_per_split;
        }

        std::vector<SplitCandidate> found;
        for (std::size_t k = 0; k < features.size(); ++k) {
            // Beyond the sampled window, keep looking only until one useful split appears.
            if (k >= window && !found.empty()) break;
            auto c = evaluate(features[k], rows, begin, end, pos);
            if (c.feature >= 0) found.push_back(c);
        }
        if (found.empty()) return {};
        // Deterministic preference for lower feature index on ties.
        std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.feature < b.feature; });

        if (p_.criterion == SplitCriterion::info_gain) {
            SplitCandidate best = found.front();
            for (const auto& c : found)
                if (c.gain > best.gain) best = c;
            return best;
        }
        // C4.5: among splits with at least average gain, take the best gain ratio.
        double avg = 0;
        for (const auto& c : found) avg += c.ranked_gain;
        avg /= static_cast<double>(found.size());
        SplitCandidate best;
        double best_ratio = -1;
        for (const auto& c : found) {
            if (c.ranked_gain < avg - 1e-3) continue;
            double ratio = c.split_info > 0 ? c.ranked_gain / c.split_info : 0.0;
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = c;
            }
        }
        return best;
    }

    SplitCandidate evaluate(std::size_t f, const std::vector<std::size_t>& rows, std::size_t begin,
                            std::size_t end, double pos) {
        const double n = static_cast<double>(end - begin);
        const double parent = entropy2(pos, n);
        const double min_leaf = static_cast<double>(p_.min_leaf);
        SplitCandidate best;
        auto consider = [&](double lpos, double lcount, double threshold) {
            if (lcount < min_leaf || n - lcount < min_leaf) return;
            double gain = parent - (lcount / n) * entropy2(lpos, lcount) -
                          ((n - lcount) / n) * entropy2(pos - lpos, n - lcount);
            if (gain > best.gain + 1e-12) {
                double pl = lcount / n, pr = 1 - pl;
                best.feature = static_cast<std::int32_t>(f);
                best.threshold = threshold;
                best.gain = gain;
                best.split_info = -(pl * std::log2(pl) + pr * std::log2(pr));
            }
        };

        auto& vals = scratch_;
        std::size_t m = 0;
        for (std::size_t i = begin; i < end; ++i) vals[m++] = {d_.at(rows[i], f), d_.y[rows[i]]};
        std::stable_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(m),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        if (d_.kinds[f] == FeatureKind::categorical) {
            best.categorical = true;
            for (std::size_t i = 0; i < m;) {
                std::size_t j = i;
                double lpos = 0;
                while (j < m && vals[j].first == vals[i].first) lpos += vals[j++].second;
                consider(lpos, static_cast<double>(j - i), vals[i].first);
                i = j;
            }
            best.ranked_gain = best.gain;
            return best;
        }

        double lpos = 0;
        std::size_t candidates = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            lpos += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            ++candidates;
            double a = vals[i].first, b = vals[i + 1].first;
            double t = a + (b - a) / 2;
            if (!(t > a)) t = b;
            consider(lpos, static_cast<double>(i + 1), t);
        }
        best.ranked_gain = best.gain;
        if (best.feature >= 0 && p_.criterion == SplitCriterion::gain_ratio && candidates > 1) {
            best.ranked_gain = best.gain - std::log2(static_cast<double>(candidates)) / n;
            if (best.ranked_gain <= 0) return {};
        }
        return best;
    }

    // Subtree replacement with pessimistic error estimates; returns the
    // estimated error count of the (possibly pruned) subtree.
    double prune(std::uint32_t id) {
        auto& node = tree_.nodes[id];
        double errors_as_leaf = node.total - std::max(node.positives, node.total - node.positives);
        double leaf_estimate = errors_as_leaf + added_errors(node.total, errors_as_leaf, p_.confidence);
        if (node.is_leaf()) return leaf_estimate;
        double subtree = prune(node.left) + prune(node.right);
        auto& again = tree_.nodes[id];
        if (leaf_estimate <= subtree + 0.1) {
            again.feature = -1;
            again.gain = 0.0;
            return leaf_estimate;
        }
        return subtree;
    }

    void compact() {
        std::vector<TreeNode> out;
        out.reserve(tree_.nodes.size());
        auto copy = [&](auto&& self, std::uint32_t i) -> std::uint32_t {
            auto id = static_cast<std::uint32_t>(out.size());
            out.push_back(tree_.nodes[i]);
            if (!tree_.nodes[i].is_leaf()) {
                auto l = self(self, tree_.nodes[i].left);
                auto r = self(self, tree_.nodes[i].right);
                out[id].left = l;
                out[id].right = r;
            } else {
                out[id].left = out[id].right = 0;
            }
            return id;
        };
        copy(copy, 0);
        tree_.nodes = std::move(out);
    }

    const Dataset& d_;
    TreeParams p_;
    Rng* rng_;
    DecisionTree tree_;
    std::vector<std::pair<double, int>> scratch_;
};

} // namespace detail

/// Grows a tree on `rows` of `d` (all rows when empty). `rng` is needed only
/// when features_per_split samples a subset of features.
inline DecisionTree train_tree(const Dataset& d, const TreeParams& params, Rng* rng = nullptr,
                               std::vector<std::size_t> rows = {}) {
    if (rows.empty()) {
        rows.resize(d.rows());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    detail::TreeBuilder builder(d, params, rng);
    return builder.build(std::move(rows));
}

} // namespace shill::ml
