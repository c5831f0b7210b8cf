#pragma once

// Tree ensembles: bagging, random forest and rotation forest. Members are
// trained with seeds seed + member index over the canonical (user id) row
// order and predict by majority vote; the ensemble score is the fraction of
// members voting shill.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "shill/classifiers/dataset.hpp"
#include "shill/classifiers/decision_tree.hpp"
#include "shill/classifiers/pca.hpp"

namespace shill::ml {

struct TreeEnsemble {
    std::vector<DecisionTree> trees;

    double score(std::span<const double> x) const {
        if (trees.empty()) return 0.0;
        double votes = 0;
        for (const auto& t : trees) votes += t.vote(x);
        return votes / static_cast<double>(trees.size());
    }
};

inline std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    std::sort(rows.begin(), rows.end());
    return rows;
}

/// Bootstrap aggregation of unpruned gain-ratio trees.
inline TreeEnsemble train_bagging(const Dataset& d, std::size_t members, std::uint64_t seed,
                                  TreeParams params = {SplitCriterion::gain_ratio, 2, 0, false, 0.25}) {
    require_trainable(d);
    TreeEnsemble e;
    for (std::size_t m = 0; m < members; ++m) {
        Rng rng(seed + m);
        e.trees.push_back(train_tree(d, params, &rng, bootstrap_rows(d.rows(), rng)));
    }
    return e;
}

/// Default number of candidate features per split: floor(log2(F) + 1).
inline std::size_t random_forest_features(std::size_t n_features) {
    return static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n_features)) + 1.0));
}

/// Bootstrap samples, unpruned info-gain trees with minimum leaf 1 and a
/// random feature subset per node.
inline TreeEnsemble train_random_forest(const Dataset& d, std::size_t members, std::uint64_t seed,
                                        std::size_t features_per_split = 0) {
    require_trainable(d);
    if (features_per_split == 0) features_per_split = random_forest_features(d.n_features);
    TreeParams params{SplitCriterion::info_gain, 1, features_per_split, false, 0.25};
    TreeEnsemble e;
    for (std::size_t m = 0; m < members; ++m) {
        Rng rng(seed + m);
        auto rows = bootstrap_rows(d.rows(), rng);
        e.trees.push_back(train_tree(d, params, &rng, std::move(rows)));
    }
    return e;
}

// ---------------------------------------------------------------------------
// Rotation forest

struct RotationForestParams {
    std::size_t members = 10;
    std::size_t group_size = 3;
    /// Fraction of each class drawn (with replacement) for every group's PCA.
    double sample_fraction = 0.5;
    TreeParams tree{SplitCriterion::gain_ratio, 2, 0, true, 0.25};
};

struct RotationMember {
    std::vector<std::vector<std::size_t>> groups; // indices into the numeric feature list
    std::vector<SquareMatrix> bases;              // one per group, columns = axes
    DecisionTree tree;
};

/// Numeric features are z-scored, split into random groups, and each group is
/// rotated onto its principal axes; categorical features pass through
/// unrotated after the rotated block.
struct RotationForestModel {
    Standardizer scale;
    std::vector<std::size_t> numeric, categorical;
    std::vector<RotationMember> members;
    std::size_t degenerate_groups = 0;

    std::vector<double> rotate(const RotationMember& m, std::span<const double> x) const {
        std::vector<double> z(numeric.size());
        for (std::size_t k = 0; k < numeric.size(); ++k) z[k] = scale.apply(numeric[k], x[numeric[k]]);
        std::vector<double> out;
        for (std::size_t g = 0; g < m.groups.size(); ++g) {
            const auto& grp = m.groups[g];
            const auto& b = m.bases[g];
            for (std::size_t j = 0; j < grp.size(); ++j) {
                double s = 0;
                for (std::size_t k = 0; k < grp.size(); ++k) s += b(k, j) * z[grp[k]];
                out.push_back(s);
            }
        }
        for (auto f : categorical) out.push_back(x[f]);
        return out;
    }

    double score(std::span<const double> x) const {
        if (members.empty()) return 0.0;
        double votes = 0;
        for (const auto& m : members) {
            auto r = rotate(m, x);
            votes += m.tree.vote(r);
        }
        return votes / static_cast<double>(members.size());
    }
};

namespace detail {

/// Random partition of [0, n) into groups of `size`; a short final group is
/// topped up with distinct features drawn from the rest.
inline std::vector<std::vector<std::size_t>> random_groups(std::size_t n, std::size_t size, Rng& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; i += size)
        groups.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(i),
                            perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + size)));
    auto& last = groups.back();
    while (last.size() < std::min(size, n)) {
        std::size_t f = perm[static_cast<std::size_t>(rng.below(n))];
        if (std::find(last.begin(), last.end(), f) == last.end()) last.push_back(f);
    }
    return groups;
}

} // namespace detail

inline RotationForestModel train_rotation_forest(const Dataset& d, std::uint64_t seed,
                                                 const RotationForestParams& p = {}) {
    require_trainable(d);
    RotationForestModel model;
    model.scale = Standardizer::fit(d);
    for (std::size_t f = 0; f < d.n_features; ++f)
        (d.kinds[f] == FeatureKind::numeric ? model.numeric : model.categorical).push_back(f);
    if (model.numeric.empty()) throw Error("train.no_numeric", "rotation forest needs numeric features");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < d.rows(); ++i) by_class[d.y[i]].push_back(i);

    for (std::size_t t = 0; t < p.members; ++t) {
        Rng rng(seed + t);
        RotationMember member;
        member.groups = detail::random_groups(model.numeric.size(), p.group_size, rng);
        for (const auto& grp : member.groups) {
            std::vector<double> sample;
            for (const auto& rows : by_class) {
                auto draws = static_cast<std::size_t>(std::ceil(p.sample_fraction * static_cast<double>(rows.size())));
                for (std::size_t s = 0; s < draws; ++s) {
                    std::size_t i = rows[static_cast<std::size_t>(rng.below(rows.size()))];
                    for (auto k : grp) sample.push_back(model.scale.apply(model.numeric[k], d.at(i, model.numeric[k])));
                }
            }
            auto pca = pca_basis(sample, grp.size());
            if (pca.degenerate) ++model.degenerate_groups;
            member.bases.push_back(std::move(pca.basis));
        }

        Dataset rotated;
        rotated.manifest_hash = d.manifest_hash;
        std::size_t width = 0;
        for (const auto& g : member.groups) width += g.size();
        rotated.n_features = width + model.categorical.size();
        rotated.kinds.assign(width, FeatureKind::numeric);
        rotated.kinds.insert(rotated.kinds.end(), model.categorical.size(), FeatureKind::categorical);
        for (std::size_t i = 0; i < d.rows(); ++i) rotated.push_back(model.rotate(member, d.row(i)), d.y[i], d.ids[i]);
        member.tree = train_tree(rotated, p.tree, &rng);
        model.members.push_back(std::move(member));
    }
    return model;
}

} // namespace shill::ml
