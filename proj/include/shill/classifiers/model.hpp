#pragma once

// Uniform train / score / serialize surface over the learner suite.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "shill/classifiers/baseline_learners.hpp"
#include "shill/classifiers/dataset.hpp"
#include "shill/classifiers/decision_tree.hpp"
#include "shill/classifiers/ensembles.hpp"

namespace shill::ml {

enum class Algorithm { one_r, naive_bayes, decision_tree, knn3, bagging, random_forest, rotation_forest };

inline constexpr std::array<Algorithm, 7> all_algorithms{
    Algorithm::one_r,   Algorithm::naive_bayes,   Algorithm::decision_tree,  Algorithm::knn3,
    Algorithm::bagging, Algorithm::random_forest, Algorithm::rotation_forest};

inline std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::one_r: return "one-r";
    case Algorithm::naive_bayes: return "naive-bayes";
    case Algorithm::decision_tree: return "decision-tree";
    case Algorithm::knn3: return "knn3";
    case Algorithm::bagging: return "bagging";
    case Algorithm::random_forest: return "random-forest";
    case Algorithm::rotation_forest: return "rotation-forest";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
    for (auto a : all_algorithms)
        if (to_string(a) == s) return a;
    throw Error("config.algorithm", "unknown algorithm '" + std::string(s) + "'");
}

struct Hyperparameters {
    std::size_t ensemble_trees = 100;       // bagging, random forest
    std::size_t rf_features_per_split = 0;  // 0: floor(log2(F) + 1)
    std::size_t rotation_members = 10;
    std::size_t rotation_group_size = 3;
    double rotation_sample_fraction = 0.5;
    std::size_t tree_min_leaf = 2;
    bool tree_prune = true;
    double tree_confidence = 0.25;
    std::size_t knn_k = 3;
    std::size_t one_r_min_bucket = 6;
    double nb_variance_floor = 1e-9;
};

using ModelParams =
    std::variant<OneRModel, NaiveBayesModel, DecisionTree, KnnModel, TreeEnsemble, RotationForestModel>;

struct Model {
    Algorithm algorithm = Algorithm::decision_tree;
    std::uint64_t seed = 0;
    std::string manifest_hash;
    std::size_t n_features = 0;
    std::vector<FeatureKind> kinds;
    Hyperparameters hyper;
    ModelParams params;
    std::vector<std::string> warnings;
};

/// Deterministic in (dataset contents, hyperparameters, seed); the dataset is
/// reordered by user id first.
inline Model train(Algorithm algorithm, const Dataset& input, const Hyperparameters& hp = {},
                   std::uint64_t seed = 1) {
    require_trainable(input);
    const Dataset d = canonicalize(input);
    Model m{algorithm, seed, d.manifest_hash, d.n_features, d.kinds, hp, {}, {}};
    TreeParams tree{SplitCriterion::gain_ratio, hp.tree_min_leaf, 0, hp.tree_prune, hp.tree_confidence};
    switch (algorithm) {
    case Algorithm::one_r: m.params = train_one_r(d, hp.one_r_min_bucket); break;
    case Algorithm::naive_bayes: m.params = train_naive_bayes(d, hp.nb_variance_floor); break;
    case Algorithm::decision_tree: m.params = train_tree(d, tree); break;
    case Algorithm::knn3: m.params = train_knn(d, hp.knn_k); break;
    case Algorithm::bagging:
        m.params = train_bagging(d, hp.ensemble_trees, seed,
                                 {SplitCriterion::gain_ratio, hp.tree_min_leaf, 0, false, hp.tree_confidence});
        break;
    case Algorithm::random_forest:
        m.params = train_random_forest(d, hp.ensemble_trees, seed, hp.rf_features_per_split);
        break;
    case Algorithm::rotation_forest: {
        RotationForestParams rp{hp.rotation_members, hp.rotation_group_size, hp.rotation_sample_fraction, tree};
        auto rf = train_rotation_forest(d, seed, rp);
        if (rf.degenerate_groups > 0)
            m.warnings.push_back(std::to_string(rf.degenerate_groups) +
                                 " feature group(s) had zero variance; identity rotation used");
        m.params = std::move(rf);
        break;
    }
    }
    return m;
}

/// Shill likelihood in [0, 1].
inline double predict_score(const Model& m, std::span<const double> x) {
    if (x.size() != m.n_features)
        throw Error("predict.manifest_mismatch", "feature vector has " + std::to_string(x.size()) +
                                                     " values, model expects " + std::to_string(m.n_features));
    return std::visit([&](const auto& p) { return p.score(x); }, m.params);
}

inline std::vector<double> predict_scores(const Model& m, const Dataset& d) {
    if (d.manifest_hash != m.manifest_hash)
        throw Error("predict.manifest_mismatch",
                    "dataset manifest " + d.manifest_hash + " does not match model manifest " + m.manifest_hash);
    std::vector<double> out(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) out[i] = predict_score(m, d.row(i));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

constexpr int model_format_version = 1;

namespace detail {

using nlohmann::json;

inline json tree_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.categorical, n.threshold, n.left, n.right, n.positives, n.total, n.gain});
    return nodes;
}

inline DecisionTree tree_from(const json& j) {
    DecisionTree t;
    for (const auto& n : j)
        t.nodes.push_back({n[0].get<std::int32_t>(), n[1].get<bool>(), n[2].get<double>(), n[3].get<std::uint32_t>(),
                           n[4].get<std::uint32_t>(), n[5].get<double>(), n[6].get<double>(), n[7].get<double>()});
    return t;
}

inline json matrix_json(const SquareMatrix& m) { return {{"n", m.n}, {"a", m.a}}; }
inline SquareMatrix matrix_from(const json& j) {
    SquareMatrix m(j.at("n").get<std::size_t>());
    m.a = j.at("a").get<std::vector<double>>();
    return m;
}

inline json standardizer_json(const Standardizer& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }
inline Standardizer standardizer_from(const json& j) {
    return {j.at("mean").get<std::vector<double>>(), j.at("stddev").get<std::vector<double>>()};
}

inline json params_json(const ModelParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, OneRModel>) {
                return {{"feature", p.feature},       {"categorical", p.categorical},
                        {"breakpoints", p.breakpoints}, {"values", p.values},
                        {"bucket_positives", p.bucket_positives}, {"bucket_totals", p.bucket_totals},
                        {"base_rate", p.base_rate},   {"errors", p.errors}};
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                return {{"prior", {p.prior[0], p.prior[1]}},
                        {"mean", {p.mean[0], p.mean[1]}},
                        {"variance", {p.variance[0], p.variance[1]}},
                        {"cat_values", p.cat_values},
                        {"cat_counts", {p.cat_counts[0], p.cat_counts[1]}},
                        {"class_count", {p.class_count[0], p.class_count[1]}}};
            } else if constexpr (std::is_same_v<T, DecisionTree>) {
                return {{"nodes", tree_json(p)}};
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return {{"k", p.k}, {"scale", standardizer_json(p.scale)}, {"rows", p.rows}, {"labels", p.labels}};
            } else if constexpr (std::is_same_v<T, TreeEnsemble>) {
                json trees = json::array();
                for (const auto& t : p.trees) trees.push_back(tree_json(t));
                return {{"trees", trees}};
            } else {
                json members = json::array();
                for (const auto& m : p.members) {
                    json bases = json::array();
                    for (const auto& b : m.bases) bases.push_back(matrix_json(b));
                    members.push_back({{"groups", m.groups}, {"bases", bases}, {"tree", tree_json(m.tree)}});
                }
                return {{"scale", standardizer_json(p.scale)}, {"numeric", p.numeric},
                        {"categorical", p.categorical},     {"degenerate_groups", p.degenerate_groups},
                        {"members", members}};
            }
        },
        params);
}

inline ModelParams params_from(Algorithm a, const json& j, const std::vector<FeatureKind>& kinds) {
    switch (a) {
    case Algorithm::one_r: {
        OneRModel m;
        m.feature = j.at("feature");
        m.categorical = j.at("categorical");
        m.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        m.values = j.at("values").get<std::vector<double>>();
        m.bucket_positives = j.at("bucket_positives").get<std::vector<double>>();
        m.bucket_totals = j.at("bucket_totals").get<std::vector<double>>();
        m.base_rate = j.at("base_rate");
        m.errors = j.at("errors");
        return m;
    }
    case Algorithm::naive_bayes: {
        NaiveBayesModel m;
        m.kinds = kinds;
        for (int c = 0; c < 2; ++c) {
            m.prior[c] = j.at("prior")[c];
            m.mean[c] = j.at("mean")[c].get<std::vector<double>>();
            m.variance[c] = j.at("variance")[c].get<std::vector<double>>();
            m.cat_counts[c] = j.at("cat_counts")[c].get<std::vector<std::vector<double>>>();
            m.class_count[c] = j.at("class_count")[c];
        }
        m.cat_values = j.at("cat_values").get<std::vector<std::vector<double>>>();
        return m;
    }
    case Algorithm::decision_tree: return tree_from(j.at("nodes"));
    case Algorithm::knn3: {
        KnnModel m;
        m.k = j.at("k");
        m.kinds = kinds;
        m.scale = standardizer_from(j.at("scale"));
        m.rows = j.at("rows").get<std::vector<double>>();
        m.labels = j.at("labels").get<std::vector<int>>();
        return m;
    }
    case Algorithm::bagging:
    case Algorithm::random_forest: {
        TreeEnsemble e;
        for (const auto& t : j.at("trees")) e.trees.push_back(tree_from(t));
        return e;
    }
    case Algorithm::rotation_forest: {
        RotationForestModel m;
        m.scale = standardizer_from(j.at("scale"));
        m.numeric = j.at("numeric").get<std::vector<std::size_t>>();
        m.categorical = j.at("categorical").get<std::vector<std::size_t>>();
        m.degenerate_groups = j.at("degenerate_groups");
        for (const auto& mj : j.at("members")) {
            RotationMember mem;
            mem.groups = mj.at("groups").get<std::vector<std::vector<std::size_t>>>();
            for (const auto& b : mj.at("bases")) mem.bases.push_back(matrix_from(b));
            mem.tree = tree_from(mj.at("tree"));
            m.members.push_back(std::move(mem));
        }
        return m;
    }
    }
    throw Error("model.format", "unknown algorithm");
}

} // namespace detail

inline nlohmann::json to_json(const Model& m) {
    std::vector<std::string> kinds;
    for (auto k : m.kinds) kinds.push_back(k == FeatureKind::numeric ? "numeric" : "categorical");
    const auto& h = m.hyper;
    return {{"format", "shill-model"},
            {"format_version", model_format_version},
            {"algorithm", to_string(m.algorithm)},
            {"seed", m.seed},
            {"manifest_hash", m.manifest_hash},
            {"n_features", m.n_features},
            {"kinds", kinds},
            {"hyperparameters",
             {{"ensemble_trees", h.ensemble_trees},
              {"rf_features_per_split", h.rf_features_per_split},
              {"rotation_members", h.rotation_members},
              {"rotation_group_size", h.rotation_group_size},
              {"rotation_sample_fraction", h.rotation_sample_fraction},
              {"tree_min_leaf", h.tree_min_leaf},
              {"tree_prune", h.tree_prune},
              {"tree_confidence", h.tree_confidence},
              {"knn_k", h.knn_k},
              {"one_r_min_bucket", h.one_r_min_bucket},
              {"nb_variance_floor", h.nb_variance_floor}}},
            {"params", detail::params_json(m.params)},
            {"warnings", m.warnings}};
}

/// Refuses containers whose manifest hash differs from `expected_manifest`.
inline Model model_from_json(const nlohmann::json& j, const std::string& expected_manifest) {
    if (j.value("format", "") != "shill-model" || j.value("format_version", 0) != model_format_version)
        throw Error("model.format", "not a shill-model container of version " + std::to_string(model_format_version));
    Model m;
    m.manifest_hash = j.at("manifest_hash").get<std::string>();
    if (m.manifest_hash != expected_manifest)
        throw Error("model.manifest_mismatch",
                    "model manifest " + m.manifest_hash + " does not match expected " + expected_manifest);
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.seed = j.at("seed");
    m.n_features = j.at("n_features");
    for (const auto& k : j.at("kinds"))
        m.kinds.push_back(k.get<std::string>() == "numeric" ? FeatureKind::numeric : FeatureKind::categorical);
    const auto& h = j.at("hyperparameters");
    m.hyper.ensemble_trees = h.at("ensemble_trees");
    m.hyper.rf_features_per_split = h.at("rf_features_per_split");
    m.hyper.rotation_members = h.at("rotation_members");
    m.hyper.rotation_group_size = h.at("rotation_group_size");
    m.hyper.rotation_sample_fraction = h.at("rotation_sample_fraction");
    m.hyper.tree_min_leaf = h.at("tree_min_leaf");
    m.hyper.tree_prune = h.at("tree_prune");
    m.hyper.tree_confidence = h.at("tree_confidence");
    m.hyper.knn_k = h.at("knn_k");
    m.hyper.one_r_min_bucket = h.at("one_r_min_bucket");
    m.hyper.nb_variance_floor = h.at("nb_variance_floor");
    m.params = detail::params_from(m.algorithm, j.at("params"), m.kinds);
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

} // namespace shill::ml
