// shill: command line front end for the detection pipeline.
//
//   shill synth --out DIR [--users N --shill-fraction F --seed S ...]
//   shill features --corpus DIR --out DIR
//   shill train --features FILE --algorithm NAME --out DIR
//   shill evaluate --features FILE --algorithm NAME... --out DIR
//   shill precision-at-k --features FILE --out DIR
//   shill ecosystem --corpus DIR --out DIR
//   shill report --corpus DIR --out DIR
//
// Every subcommand writes manifest.json next to its artifacts. Existing
// artifacts are never overwritten. Errors go to stderr as one JSON object.

#include <CLI11.hpp>

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "shill/ecosystem.hpp"
#include "shill/evaluation.hpp"
#include "shill/pipeline.hpp"
#include "shill/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace shill;

namespace {

constexpr const char* tool_version = "1.0.0";

std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("io.read", "cannot read " + p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

/// Output directory of one run: refuses to replace files that already exist.
class RunDir {
public:
    RunDir(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
        fs::create_directories(dir_);
    }

    fs::path claim(const std::string& name) {
        fs::path p = dir_ / name;
        if (fs::exists(p)) throw Error("io.exists", "refusing to overwrite " + p.string());
        outputs_.push_back(p);
        return p;
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        auto p = claim(name);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("io.write", "cannot write " + p.string());
        fn(out);
        if (!out) throw Error("io.write", "write failed for " + p.string());
    }

    void write_json(const std::string& name, const ordered_json& j) {
        write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    }

    void input(const fs::path& p) { inputs_.push_back(p); }

    void finish(const ordered_json& config, const ordered_json& seeds) {
        ordered_json in = ordered_json::array(), out = ordered_json::array();
        for (const auto& p : inputs_) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        for (const auto& p : outputs_) out.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}});
        ordered_json m{{"tool", "shill"},
                       {"version", tool_version},
                       {"command", command_},
                       {"config", config},
                       {"seeds", seeds},
                       {"inputs", in},
                       {"outputs", out}};
        write_json("manifest.json", m);
    }

    const fs::path& path() const { return dir_; }

private:
    fs::path dir_;
    std::string command_;
    std::vector<fs::path> inputs_, outputs_;
};

struct CorpusArgs {
    std::string dir, transactions, feedback, profiles, labels;
    double max_bad_fraction = 0.10;

    void add(CLI::App* app) {
        app->add_option("--corpus", dir, "directory with transactions, feedback, profiles and labels.txt");
        app->add_option("--transactions", transactions, "transactions file (.csv or .jsonl)");
        app->add_option("--feedback", feedback, "feedback file (.csv or .jsonl)");
        app->add_option("--profiles", profiles, "profiles file (.csv or .jsonl)");
        app->add_option("--labels", labels, "shill label list, one user id per line");
        app->add_option("--max-bad-fraction", max_bad_fraction, "reject a file above this share of bad rows")
            ->capture_default_str();
    }

    fs::path resolve(const std::string& explicit_path, const std::string& stem) const {
        if (!explicit_path.empty()) return explicit_path;
        if (dir.empty()) throw Error("config.missing_input", "need --corpus or --" + stem);
        for (const char* ext : {".csv", ".jsonl", ".txt"}) {
            fs::path p = fs::path(dir) / (stem + ext);
            if (fs::exists(p)) return p;
        }
        throw Error("config.missing_input", "no " + stem + " file in " + dir);
    }

    Corpus load(RunDir& run) const {
        auto t = resolve(transactions, "transactions"), f = resolve(feedback, "feedback"),
             p = resolve(profiles, "profiles"), l = resolve(labels, "labels");
        for (const auto& x : {t, f, p, l}) run.input(x);
        ParseOptions opt;
        opt.max_bad_fraction = max_bad_fraction;
        return load_corpus(t, f, p, l, opt);
    }

    ordered_json echo() const {
        return {{"corpus", dir}, {"transactions", transactions}, {"feedback", feedback},
                {"profiles", profiles}, {"labels", labels}, {"max_bad_fraction", max_bad_fraction}};
    }
};

struct HyperArgs {
    ml::Hyperparameters hp;

    void add(CLI::App* app) {
        app->add_option("--trees", hp.ensemble_trees, "members of bagging and random forest")->capture_default_str();
        app->add_option("--rf-features", hp.rf_features_per_split, "random forest features per split (0: log2 F + 1)")
            ->capture_default_str();
        app->add_option("--rotation-members", hp.rotation_members)->capture_default_str();
        app->add_option("--rotation-group-size", hp.rotation_group_size)->capture_default_str();
        app->add_option("--rotation-sample-fraction", hp.rotation_sample_fraction)->capture_default_str();
        app->add_option("--min-leaf", hp.tree_min_leaf)->capture_default_str();
        app->add_option("--prune", hp.tree_prune)->capture_default_str();
        app->add_option("--confidence", hp.tree_confidence)->capture_default_str();
        app->add_option("--knn-k", hp.knn_k)->capture_default_str();
        app->add_option("--one-r-min-bucket", hp.one_r_min_bucket)->capture_default_str();
        app->add_option("--nb-variance-floor", hp.nb_variance_floor)->capture_default_str();
    }

    ordered_json echo() const {
        return {{"trees", hp.ensemble_trees},
                {"rf_features", hp.rf_features_per_split},
                {"rotation_members", hp.rotation_members},
                {"rotation_group_size", hp.rotation_group_size},
                {"rotation_sample_fraction", hp.rotation_sample_fraction},
                {"min_leaf", hp.tree_min_leaf},
                {"prune", hp.tree_prune},
                {"confidence", hp.tree_confidence},
                {"knn_k", hp.knn_k},
                {"one_r_min_bucket", hp.one_r_min_bucket},
                {"nb_variance_floor", hp.nb_variance_floor}};
    }
};

struct Emit {
    std::vector<std::string> kinds{"json", "csv", "svg"};
    void add(CLI::App* app) {
        app->add_option("--emit", kinds, "report renderers")
            ->check(CLI::IsMember({"json", "csv", "svg"}))
            ->capture_default_str();
    }
    bool operator()(const std::string& k) const { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); }
};

ml::Dataset load_features(RunDir& run, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io.read", "cannot read " + path);
    run.input(path);
    return ml::make_dataset(read_feature_csv(in));
}

std::vector<ml::Algorithm> algorithms_of(const std::vector<std::string>& names) {
    std::vector<ml::Algorithm> out;
    for (const auto& n : names) {
        if (n == "all") return {ml::all_algorithms.begin(), ml::all_algorithms.end()};
        out.push_back(ml::parse_algorithm(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
    MarketConfig cfg;
    std::string out, format = "csv";

    void add(CLI::App* app) {
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
        app->add_option("--seed", cfg.seed)->capture_default_str();
        app->add_option("--users", cfg.users)->capture_default_str();
        app->add_option("--shill-fraction", cfg.shill_fraction)->capture_default_str();
        app->add_option("--ring-min", cfg.ring_min)->capture_default_str();
        app->add_option("--ring-max", cfg.ring_max)->capture_default_str();
        app->add_option("--ring-size-decay", cfg.ring_size_decay)->capture_default_str();
        app->add_option("--ring-sales-max", cfg.ring_sales_max)->capture_default_str();
        app->add_option("--reciprocal-probability", cfg.reciprocal_probability)->capture_default_str();
        app->add_option("--ring-two-way-trade-probability", cfg.ring_two_way_trade_probability)->capture_default_str();
        app->add_option("--cross-ring-probability", cfg.cross_ring_probability)->capture_default_str();
        app->add_option("--seller-fraction", cfg.seller_fraction)->capture_default_str();
        app->add_option("--purchases-mean", cfg.purchases_mean)->capture_default_str();
        app->add_option("--preferential-weight", cfg.preferential_weight)->capture_default_str();
        app->add_option("--feedback-probability", cfg.feedback_probability)->capture_default_str();
        app->add_option("--seller-feedback-probability", cfg.seller_feedback_probability)->capture_default_str();
        app->add_option("--neutral-rate", cfg.neutral_rate)->capture_default_str();
        app->add_option("--negative-rate", cfg.negative_rate)->capture_default_str();
        app->add_option("--price-min", cfg.price_min, "cents")->capture_default_str();
        app->add_option("--price-max", cfg.price_max, "cents")->capture_default_str();
        app->add_option("--multi-quantity-probability", cfg.multi_quantity_probability)->capture_default_str();
        app->add_option("--cheap-price-min", cfg.cheap_price_min, "cents")->capture_default_str();
        app->add_option("--cheap-price-max", cfg.cheap_price_max, "cents")->capture_default_str();
        app->add_option("--extra-activity-multiplier", cfg.extra_activity_multiplier)->capture_default_str();
        app->add_option("--shill-cheap-sale-share", cfg.shill_cheap_sale_share)->capture_default_str();
        app->add_option("--shill-negative-rate", cfg.shill_negative_rate)->capture_default_str();
        app->add_option("--shill-default-state-probability", cfg.shill_default_state_probability)->capture_default_str();
        app->add_option("--benign-default-state-probability", cfg.benign_default_state_probability)->capture_default_str();
        app->add_option("--dormant-shill-fraction", cfg.dormant_shill_fraction)->capture_default_str();
        app->add_option("--power-seller-fraction", cfg.power_seller_fraction)->capture_default_str();
        app->add_option("--power-seller-multiplier", cfg.power_seller_multiplier)->capture_default_str();
        app->add_option("--cheap-seller-fraction", cfg.cheap_seller_fraction)->capture_default_str();
        app->add_option("--social-fraction", cfg.social_fraction)->capture_default_str();
        app->add_option("--heavy-buyer-fraction", cfg.heavy_buyer_fraction)->capture_default_str();
        app->add_option("--heavy-buyer-multiplier", cfg.heavy_buyer_multiplier)->capture_default_str();
        app->add_option("--missing-birth-year-probability", cfg.missing_birth_year_probability)->capture_default_str();
    }

    void run() {
        RunDir dir(out, "synth");
        auto fmt = format == "jsonl" ? InputFormat::jsonl : InputFormat::csv;
        auto m = generate(cfg);
        auto p = corpus_paths(dir.path(), fmt);
        for (const auto& f : {p.transactions, p.feedback, p.profiles, p.labels, p.provenance})
            dir.claim(f.filename().string());
        write_market(m, dir.path(), fmt);
        dir.finish({{"market", to_json(cfg)}, {"format", format}}, {{"seed", cfg.seed}});
    }
};

// ---------------------------------------------------------------------------
// features

struct FeaturesCmd {
    CorpusArgs corpus;
    std::string out;

    void add(CLI::App* app) {
        corpus.add(app);
        app->add_option("--out", out, "output directory")->required();
    }

    void run() {
        RunDir dir(out, "features");
        auto c = corpus.load(dir);
        auto g = build_graphs(c);
        auto m = corpus_features(c, g);
        dir.write("features.csv", [&](std::ostream& o) { write_feature_csv(o, m); });
        dir.write_json("feature_schema.json", feature_schema_json());
        ordered_json warnings = c.warnings;
        for (const auto& w : m.warnings) warnings.push_back(w);
        dir.write_json("warnings.json", warnings);
        dir.finish({{"corpus", corpus.echo()}}, ordered_json::object());
    }
};

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
    std::string features, out, algorithm = "rotation-forest", sample = "balanced";
    std::uint64_t seed = 42;
    HyperArgs hyper;

    void add(CLI::App* app) {
        app->add_option("--features", features, "feature CSV")->required();
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--algorithm", algorithm)->capture_default_str();
        app->add_option("--sample", sample, "balanced: all shills plus as many benign users; all: every row")
            ->check(CLI::IsMember({"balanced", "all"}))
            ->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        hyper.add(app);
    }

    void run() {
        RunDir dir(out, "train");
        auto d = load_features(dir, features);
        auto alg = ml::parse_algorithm(algorithm);
        if (sample == "balanced") d = balanced_training_sample(d, derive_seed(seed, "balanced"));
        auto model = ml::train(alg, d, hyper.hp, derive_seed(seed, "model"));
        dir.write_json("model.json", ml::to_json(model));
        dir.finish({{"algorithm", algorithm}, {"sample", sample}, {"hyperparameters", hyper.echo()},
                    {"training_rows", d.rows()}},
                   {{"seed", seed},
                    {"balanced", derive_seed(seed, "balanced")},
                    {"model", derive_seed(seed, "model")}});
    }
};

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateCmd {
    std::string features, out;
    std::vector<std::string> algorithms{"all"};
    std::size_t folds = 10;
    bool no_balance = false;
    std::uint64_t seed = 42;
    HyperArgs hyper;
    Emit emit;

    void add(CLI::App* app) {
        app->add_option("--features", features, "feature CSV")->required();
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--algorithm", algorithms, "algorithm names or 'all'")->capture_default_str();
        app->add_option("--folds", folds)->capture_default_str();
        app->add_flag("--no-balance", no_balance, "cross validate on every row instead of a balanced sample");
        app->add_option("--seed", seed)->capture_default_str();
        hyper.add(app);
        emit.add(app);
    }

    void run() {
        RunDir dir(out, "evaluate");
        auto d = load_features(dir, features);
        if (!no_balance) d = balanced_training_sample(d, derive_seed(seed, "balanced"));
        EvaluationReport rep;
        rep.seed = seed;
        for (auto a : algorithms_of(algorithms)) rep.classifiers.push_back(cross_validate(a, d, hyper.hp, folds, seed));
        if (emit("json")) dir.write_json("evaluation.json", to_json(rep));
        if (emit("csv")) dir.write("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, rep.classifiers); });
        dir.finish({{"algorithms", algorithms}, {"folds", folds}, {"balanced", !no_balance}, {"rows", d.rows()},
                    {"hyperparameters", hyper.echo()}},
                   {{"seed", seed}, {"balanced", derive_seed(seed, "balanced")}, {"folds", derive_seed(seed, "folds")}});
    }
};

// ---------------------------------------------------------------------------
// precision-at-k

struct PrecisionCmd {
    std::string features, out, algorithm = "rotation-forest";
    std::vector<std::size_t> ratios{2, 5, 10, 20, 100};
    std::size_t repetitions = 3, max_k = 1000;
    std::vector<std::size_t> k_values;
    std::uint64_t seed = 42;
    HyperArgs hyper;
    Emit emit;

    void add(CLI::App* app) {
        app->add_option("--features", features, "feature CSV")->required();
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--algorithm", algorithm)->capture_default_str();
        app->add_option("--ratios", ratios, "benign users per test shill")->delimiter(',')->capture_default_str();
        app->add_option("--repetitions", repetitions)->capture_default_str();
        app->add_option("--max-k", max_k, "k grid is 1..max-k unless --k is given")->capture_default_str();
        app->add_option("--k", k_values, "explicit k grid")->delimiter(',');
        app->add_option("--seed", seed)->capture_default_str();
        hyper.add(app);
        emit.add(app);
    }

    ProtocolConfig config() const {
        ProtocolConfig pc;
        pc.algorithm = ml::parse_algorithm(algorithm);
        pc.hyper = hyper.hp;
        pc.ratios = ratios;
        pc.repetitions = repetitions;
        pc.k_grid = k_values.empty() ? default_k_grid(max_k) : k_values;
        pc.seed = seed;
        return pc;
    }

    void run() {
        RunDir dir(out, "precision-at-k");
        auto d = load_features(dir, features);
        auto pc = config();
        auto res = imbalanced_protocol(d, pc);
        EvaluationReport rep;
        rep.seed = seed;
        rep.protocol = res;
        rep.protocol_algorithm = pc.algorithm;
        if (emit("json")) dir.write_json("precision.json", to_json(rep));
        if (emit("csv")) dir.write("precision.csv", [&](std::ostream& o) { write_precision_csv(o, res); });
        if (emit("svg")) dir.write("precision.svg", [&](std::ostream& o) { write_precision_svg(o, res); });
        ordered_json reps = ordered_json::array();
        for (std::size_t r = 0; r < repetitions; ++r) reps.push_back(seed + r);
        dir.finish({{"algorithm", algorithm}, {"ratios", ratios}, {"repetitions", repetitions}, {"k_grid_size", pc.k_grid.size()},
                    {"hyperparameters", hyper.echo()}},
                   {{"seed", seed}, {"repetitions", reps}});
    }
};

// ---------------------------------------------------------------------------
// ecosystem

struct EcosystemCmd {
    CorpusArgs corpus;
    std::string out, weight_mode = "rating_sum", cohort_file;
    std::uint64_t seed = 42;
    bool verbose = false;
    std::size_t clique_limit = default_clique_limit;
    Emit emit;

    void add(CLI::App* app) {
        corpus.add(app);
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--weight-mode", weight_mode)->check(CLI::IsMember({"count", "rating_sum"}))->capture_default_str();
        app->add_option("--cohort", cohort_file, "user ids to analyse instead of the labelled shills");
        app->add_option("--seed", seed, "seed for the random benign comparison cohort")->capture_default_str();
        app->add_flag("--verbose", verbose, "include clique sizes 1 and 2 in the histogram");
        app->add_option("--clique-limit", clique_limit)->capture_default_str();
        emit.add(app);
    }

    void run() {
        RunDir dir(out, "ecosystem");
        auto c = corpus.load(dir);
        auto g = build_graphs(c);
        auto mode = parse_weight_mode(weight_mode);

        std::vector<std::string> cohort = c.labels.shill_ids;
        if (!cohort_file.empty()) {
            std::ifstream in(cohort_file);
            if (!in) throw Error("io.read", "cannot read " + cohort_file);
            dir.input(cohort_file);
            cohort = load_label_list(in).shill_ids;
        }
        if (cohort.empty()) throw Error("ecosystem.empty_cohort", "cohort is empty");
        std::vector<std::string> benign;
        std::set<std::string> in_cohort(cohort.begin(), cohort.end());
        for (const auto& id : g.users.ids())
            if (!c.labels.contains(id) && !in_cohort.count(id)) benign.push_back(id);
        if (benign.size() < cohort.size())
            throw Error("ecosystem.insufficient_benign", "not enough benign users for an equal-size comparison cohort");
        Rng rng(derive_seed(seed, "random-cohort"));
        rng.shuffle(benign);
        benign.resize(cohort.size());
        std::sort(benign.begin(), benign.end());

        EcosystemOptions opt{verbose, clique_limit};
        auto ha = project_feedback_graph(g.feedback, vertices_of(g.users, cohort), mode);
        auto hb = project_feedback_graph(g.feedback, vertices_of(g.users, benign), mode);
        auto ra = ecosystem_report(ha, g.feedback, opt, cohort_file.empty() ? "shill" : "cohort");
        auto rb = ecosystem_report(hb, g.feedback, opt, "random");
        auto cmp = compare_cohorts(ra, rb);
        if (emit("json")) {
            dir.write_json("ecosystem.json", {{"cohort", to_json(ra)}, {"random", to_json(rb)}});
            dir.write_json("comparison.json", to_json(cmp));
        }
        if (emit("csv")) {
            dir.write("ecosystem.csv", [&](std::ostream& o) { write_report_csv(o, ra); });
            dir.write("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, cmp); });
        }
        auto cliques = maximal_cliques(undirected_adjacency(ha), clique_limit);
        dir.write("cliques.txt", [&](std::ostream& o) { write_clique_list(o, cliques, ha, g.users, verbose ? 1 : 3); });
        dir.write("cohort.dot", [&](std::ostream& o) { write_dot(o, ha, g.users); });
        dir.write("cohort.graphml", [&](std::ostream& o) { write_graphml(o, ha, g.users); });
        dir.write("random_cohort.txt", [&](std::ostream& o) {
            for (const auto& id : benign) o << id << '\n';
        });
        dir.finish({{"corpus", corpus.echo()}, {"weight_mode", weight_mode}, {"cohort", cohort_file},
                    {"verbose", verbose}, {"clique_limit", clique_limit}},
                   {{"seed", seed}, {"random_cohort", derive_seed(seed, "random-cohort")}});
    }
};

// ---------------------------------------------------------------------------
// report: features, evaluation, precision@k, information gain and ecosystem

struct ReportCmd {
    EcosystemCmd eco;
    std::vector<std::string> algorithms{"all"};
    std::size_t folds = 10;
    PrecisionCmd prec;

    void add(CLI::App* app) {
        eco.add(app);
        app->add_option("--algorithm", algorithms, "algorithms for cross validation")->capture_default_str();
        app->add_option("--folds", folds)->capture_default_str();
        app->add_option("--protocol-algorithm", prec.algorithm)->capture_default_str();
        app->add_option("--ratios", prec.ratios)->delimiter(',')->capture_default_str();
        app->add_option("--repetitions", prec.repetitions)->capture_default_str();
        app->add_option("--max-k", prec.max_k)->capture_default_str();
        prec.hyper.add(app);
    }

    void run() {
        RunDir dir(eco.out, "report");
        const auto seed = eco.seed;
        auto c = eco.corpus.load(dir);
        auto g = build_graphs(c);
        auto fm = corpus_features(c, g);
        dir.write("features.csv", [&](std::ostream& o) { write_feature_csv(o, fm); });
        auto all = ml::make_dataset(fm);
        auto balanced = balanced_training_sample(all, derive_seed(seed, "balanced"));

        EvaluationReport rep;
        rep.seed = seed;
        for (auto a : algorithms_of(algorithms))
            rep.classifiers.push_back(cross_validate(a, balanced, prec.hyper.hp, folds, seed));
        prec.seed = seed;
        auto pc = prec.config();
        rep.protocol = imbalanced_protocol(all, pc);
        rep.protocol_algorithm = pc.algorithm;

        ordered_json ig = ordered_json::array();
        for (const auto& s : information_gain_ranking(balanced))
            ig.push_back({{"feature", feature_names()[s.feature]}, {"score", s.score}, {"bins", s.bins}});

        auto mode = parse_weight_mode(eco.weight_mode);
        std::vector<std::string> benign;
        for (std::size_t i = 0; i < fm.size(); ++i)
            if (!fm.labels[i]) benign.push_back(fm.user_ids[i]);
        const auto& shills = c.labels.shill_ids;
        if (shills.empty()) throw Error("ecosystem.empty_cohort", "corpus has no labelled shills");
        Rng rng(derive_seed(seed, "random-cohort"));
        rng.shuffle(benign);
        if (benign.size() < shills.size())
            throw Error("ecosystem.insufficient_benign", "not enough benign users for an equal-size comparison cohort");
        benign.resize(shills.size());
        EcosystemOptions opt{eco.verbose, eco.clique_limit};
        auto ra = ecosystem_report(project_feedback_graph(g.feedback, vertices_of(g.users, shills), mode), g.feedback, opt,
                                   "shill");
        auto rb = ecosystem_report(project_feedback_graph(g.feedback, vertices_of(g.users, benign), mode), g.feedback, opt,
                                   "random");
        auto cmp = compare_cohorts(ra, rb);

        ordered_json ratios = ordered_json::array();
        for (const auto& r : cohort_feature_ratios(fm)) ratios.push_back({{"mean", r.mean_ratio}, {"median", r.median_ratio}});
        ordered_json named = ordered_json::object();
        for (std::size_t f = 0; f < feature_count; ++f) named[std::string(feature_names()[f])] = ratios[f];

        if (eco.emit("json")) {
            auto j = to_json(rep);
            j["information_gain"] = ig;
            j["feature_ratios"] = named;
            j["ecosystem"] = {{"shill", to_json(ra)}, {"random", to_json(rb)}, {"comparison", to_json(cmp)}};
            dir.write_json("report.json", j);
        }
        if (eco.emit("csv")) {
            dir.write("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, rep.classifiers); });
            dir.write("precision.csv", [&](std::ostream& o) { write_precision_csv(o, *rep.protocol); });
            dir.write("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, cmp); });
            dir.write("information_gain.csv", [&](std::ostream& o) {
                o << "feature,score\n";
                for (const auto& e : ig) o << e["feature"].get<std::string>() << ',' << format_double(e["score"].get<double>()) << '\n';
            });
        }
        if (eco.emit("svg")) dir.write("precision.svg", [&](std::ostream& o) { write_precision_svg(o, *rep.protocol); });
        dir.finish({{"corpus", eco.corpus.echo()},
                    {"algorithms", algorithms},
                    {"folds", folds},
                    {"protocol_algorithm", prec.algorithm},
                    {"ratios", prec.ratios},
                    {"repetitions", prec.repetitions},
                    {"max_k", prec.max_k},
                    {"weight_mode", eco.weight_mode},
                    {"hyperparameters", prec.hyper.echo()}},
                   {{"seed", seed}});
    }
};

void print_error(const std::string& code, const std::string& message) {
    std::cerr << ordered_json{{"error", code}, {"message", message}}.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shill-bidder detection pipeline"};
    app.set_version_flag("--version", tool_version);
    app.set_config("--config", "", "key = value configuration file ([subcommand] sections)");
    app.require_subcommand(1);

    SynthCmd synth;
    FeaturesCmd features;
    TrainCmd train;
    EvaluateCmd evaluate;
    PrecisionCmd precision;
    EcosystemCmd ecosystem;
    ReportCmd report;
    synth.add(app.add_subcommand("synth", "generate a labelled synthetic marketplace"));
    features.add(app.add_subcommand("features", "extract the 31 per-user features"));
    train.add(app.add_subcommand("train", "train a classifier and store it as model.json"));
    evaluate.add(app.add_subcommand("evaluate", "cross-validated TP rate, FP rate, F-measure and AUC"));
    precision.add(app.add_subcommand("precision-at-k", "held-out precision@k across imbalance ratios"));
    ecosystem.add(app.add_subcommand("ecosystem", "feedback graph report of a cohort against a random cohort"));
    report.add(app.add_subcommand("report", "full pipeline report"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("cli.usage", e.what());
        return 2;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        if (name == "synth") synth.run();
        else if (name == "features") features.run();
        else if (name == "train") train.run();
        else if (name == "evaluate") evaluate.run();
        else if (name == "precision-at-k") precision.run();
        else if (name == "ecosystem") ecosystem.run();
        else if (name == "report") report.run();
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
