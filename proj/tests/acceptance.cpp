// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <unistd.h>

#include "oracles.hpp"
#include "shill/ecosystem.hpp"
#include "shill/evaluation.hpp"
#include "shill/pipeline.hpp"

using namespace shill;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// --- shared standard corpus -------------------------------------------------

struct Standard {
    Corpus corpus;
    MarketGraphs graphs;
    FeatureMatrix features;
    Dataset all;
};

const Standard& standard() {
    static const Standard s = [] {
        MarketConfig c; // 20,000 users, 5% shills
        Standard s;
        s.corpus = corpus_of(generate(c, 42));
        s.graphs = build_graphs(s.corpus);
        s.features = corpus_features(s.corpus, s.graphs);
        s.all = ml::make_dataset(s.features);
        return s;
    }();
    return s;
}

// --- criteria ---------------------------------------------------------------

Outcome cliques_oracle() {
    auto t0 = Clock::now();
    Rng rng(2024);
    std::size_t mismatches = 0, total = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 1 + rng.below(12);
        const double p = 0.15 + 0.7 * rng.uniform();
        oracle::Graph g(n, std::vector<bool>(n, false));
        AdjacencyList adj(n);
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = u + 1; v < n; ++v)
                if (rng.chance(p)) {
                    g[u][v] = g[v][u] = true;
                    adj[u].push_back(v);
                    adj[v].push_back(u);
                }
        auto got = maximal_cliques(adj);
        std::set<Clique> mine(got.begin(), got.end());
        auto want = oracle::subset_cliques(g);
        mismatches += mine != want || got.size() != want.size();
        total += want.size();
    }
    double s = seconds_since(t0);
    return {mismatches == 0 && s < 10.0,
            std::to_string(mismatches) + " mismatching graphs of 50, " + std::to_string(total) + " cliques, " +
                fmt("%.3f s", s)};
}

Outcome auc_oracle() {
    auto t0 = Clock::now();
    Rng rng(77);
    std::size_t mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(200);
        std::vector<int> y(200);
        const std::uint64_t levels = 2 + rng.below(50); // forces ties
        for (std::size_t i = 0; i < 200; ++i) {
            s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
            y[i] = i < 2 ? static_cast<int>(i) : rng.chance(0.3);
        }
        mismatches += auc(s, y) != oracle::pair_auc(s, y);
    }
    double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 5.0, std::to_string(mismatches) + " inexact of 100, " + fmt("%.3f s", secs)};
}

Outcome information_gain_oracle() {
    Rng rng(5);
    double worst = 0;
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 20 + rng.below(81);
        std::vector<double> x(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.chance(0.5);
            x[i] = static_cast<double>(rng.below(12)) + (y[i] ? 4.0 * rng.uniform() : 0.0);
        }
        auto cuts = mdl_cut_points(x, y);
        worst = std::max(worst, std::abs(information_gain(x, y, cuts) - oracle::direct_information_gain(x, y, cuts)));
    }
    // perfect separator on a balanced label: 1 bit
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(i);
        y.push_back(i >= 20);
    }
    auto cuts = mdl_cut_points(x, y);
    double one = information_gain(x, y, cuts);
    double one_oracle = oracle::direct_information_gain(x, y, cuts);
    // constant column: nothing to learn
    std::vector<double> flat(40, 2.5);
    auto none = mdl_cut_points(flat, y);
    double zero = information_gain(flat, y, none);
    bool ok = worst <= 1e-9 && std::abs(one - 1.0) <= 1e-9 && std::abs(one_oracle - 1.0) <= 1e-9 &&
              std::abs(zero) <= 1e-9 && none.empty();
    return {ok, "max |diff| " + fmt("%.2e", worst) + ", separator " + fmt("%.12f", one) + ", constant " +
                    fmt("%.12f", zero)};
}

Outcome density_check() {
    double d = graph_density(156769, 1805199);
    return {std::abs(d - 7.35e-5) <= 5e-7, "density " + fmt("%.6e", d)};
}

std::size_t identity_violations(const FeatureMatrix& m) {
    std::size_t bad = 0;
    std::int64_t buy = 0, sell = 0;
    for (const auto& r : m.rows) {
        bad += r[GvnFdbkRSum] != r[GvnPosFdbk] - r[GvnNegFdbk];
        bad += r[RcvFdbkRSum] != r[RcvPosFdbk] - r[RcvNegFdbk];
        bad += r[GvnPosFdbk] + r[GvnNegFdbk] > r[GvnFdbkNum];
        bad += r[RcvPosFdbk] + r[RcvNegFdbk] > r[RcvFdbkNum];
        bad += r[UniqueSellers] > r[BuyTransNum];
        bad += r[UniqueBuyers] > r[SellTransNum];
        bad += r[BidirTransUsers] > std::min(r[UniqueSellers], r[UniqueBuyers]);
        bad += r[GvnUniqueFdbk] > r[GvnFdbkNum];
        bad += r[RcvUniqueFdbk] > r[RcvFdbkNum];
        bad += r[BidirFdbkUsers] > std::min(r[GvnUniqueFdbk], r[RcvUniqueFdbk]);
        bad += r[BuyTransNum] > 0 && (r[MinBuyPrice] > r[MaxBuyPrice] || r[MaxBuyQuantity] > r[TotalBuyQuantity]);
        bad += r[SellTransNum] > 0 && (r[MinSellPrice] > r[MaxSellPrice] || r[MaxSellQuantity] > r[TotalSellQuantity]);
        bad += r[GvnFdbkAvg] < -1 || r[GvnFdbkAvg] > 1 || r[RcvFdbkAvg] < -1 || r[RcvFdbkAvg] > 1;
        for (std::size_t f = 0; f < feature_count; ++f) {
            bool signed_feature = f == GvnFdbkRSum || f == RcvFdbkRSum || f == GvnFdbkAvg || f == RcvFdbkAvg;
            bad += !signed_feature && r[f] < 0;
            bad += !std::isfinite(r[f]);
        }
        buy += std::llround(r[TotalBuyAmount] * 100);
        sell += std::llround(r[TotalSellAmount] * 100);
    }
    return bad + (buy != sell);
}

Outcome feature_identities() {
    std::size_t corpora = 0, rows = 0, bad = 0;
    for (std::size_t users : {500u, 2000u, 6000u})
        for (std::uint64_t seed : {1u, 2u, 3u, 7u}) {
            MarketConfig c;
            c.users = users;
            auto corpus = corpus_of(generate(c, seed));
            auto m = corpus_features(corpus, build_graphs(corpus));
            bad += identity_violations(m);
            rows += m.size();
            ++corpora;
        }
    bad += identity_violations(standard().features);
    rows += standard().features.size();
    ++corpora;
    return {bad == 0, std::to_string(bad) + " violations over " + std::to_string(corpora) + " corpora, " +
                          std::to_string(rows) + " users"};
}

Outcome classifier_quality() {
    auto t0 = Clock::now();
    const auto& s = standard();
    const std::uint64_t seed = 42;
    auto balanced = balanced_training_sample(s.all, derive_seed(seed, "balanced"));
    auto rf = cross_validate(ml::Algorithm::rotation_forest, balanced, {}, 10, seed);
    auto one_r = cross_validate(ml::Algorithm::one_r, balanced, {}, 10, seed);
    double secs = seconds_since(t0);
    bool ok = rf.auc >= 0.85 && rf.auc >= one_r.auc + 0.05 && secs < 300;
    return {ok, "rotation forest AUC " + fmt("%.4f", rf.auc) + ", OneR AUC " + fmt("%.4f", one_r.auc) + ", " +
                    std::to_string(balanced.rows()) + " rows, " + fmt("%.1f s", secs)};
}

Outcome precision_shape() {
    ProtocolConfig cfg; // rotation forest, ratios 2..100, 3 repetitions, k 1..1000
    cfg.seed = 42;
    auto r = imbalanced_protocol(standard().all, cfg);
    double p100 = r.at(10, 100);
    std::string curve, curve100;
    bool monotone = true;
    for (std::size_t i = 0; i < cfg.ratios.size(); ++i) {
        double v = r.at(cfg.ratios[i], 1000);
        if (i && v > r.at(cfg.ratios[i - 1], 1000)) monotone = false;
        curve += (i ? ", " : "") + fmt("%.3f", v);
        curve100 += (i ? ", " : "") + fmt("%.3f", r.at(cfg.ratios[i], 100));
    }
    return {p100 >= 0.90 && monotone, "precision@100 at 1:10 " + fmt("%.3f", p100) + "; precision@1000 by ratio " +
                                          curve + "; precision@100 by ratio " + curve100};
}

Outcome ecosystem_contrast() {
    const auto& s = standard();
    const auto& shills = s.corpus.labels.shill_ids;
    std::vector<std::string> benign;
    for (std::size_t i = 0; i < s.features.size(); ++i)
        if (!s.features.labels[i]) benign.push_back(s.features.user_ids[i]);
    Rng rng(derive_seed(42, "random-cohort"));
    rng.shuffle(benign);
    benign.resize(shills.size());
    auto report = [&](const std::vector<std::string>& ids) {
        auto h = project_feedback_graph(s.graphs.feedback, vertices_of(s.graphs.users, ids), WeightMode::rating_sum);
        return ecosystem_report(h, s.graphs.feedback);
    };
    auto a = report(shills), b = report(benign);
    bool ok = a.max_clique_size >= 5 && b.max_clique_size <= 3 &&
              a.largest_component_fraction > b.largest_component_fraction;
    return {ok, "max clique " + std::to_string(a.max_clique_size) + " vs " + std::to_string(b.max_clique_size) +
                    ", largest component " + fmt("%.3f", a.largest_component_fraction) + " vs " +
                    fmt("%.3f", b.largest_component_fraction)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome bit_exactness() {
    const std::uint32_t check = crc32_state("123456789");
    const fs::path dir = fs::temp_directory_path() / ("shill_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto run = [&](const std::string& args) {
        std::string cmd = "cd '" + dir.string() + "' && '" SHILL_CLI "' " + args + " >/dev/null 2>>errors.txt";
        int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
            throw Error("acceptance.cli", "command failed: " + args + " " + slurp(dir / "errors.txt"));
    };
    run("synth --out corpus --users 3000 --seed 11");
    run("report --corpus corpus --out first");
    // second run from the recorded manifest
    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "first/manifest.json"));
    run(manifest["command"].get<std::string>() + " --corpus corpus --out second");
    std::size_t files = 0, differing = 0;
    for (const auto& o : manifest["outputs"]) {
        std::string name = o["path"];
        ++files;
        differing += slurp(dir / "first" / name) != slurp(dir / "second" / name);
    }
    fs::remove_all(dir);
    char crc[16];
    std::snprintf(crc, sizeof crc, "0x%08X", check);
    return {check == 0xCBF43926u && files > 0 && differing == 0,
            std::string("CRC-32 ") + crc + ", " + std::to_string(differing) + " of " + std::to_string(files) +
                " artifacts differ on rerun"};
}

Outcome performance() {
    MarketConfig c;
    c.users = 150000;
    auto corpus = corpus_of(generate(c, 99));
    const auto tx = corpus.transactions.size(), fb = corpus.feedback.size();
    auto t0 = Clock::now();
    auto g = build_graphs(corpus);
    double graph_s = seconds_since(t0);
    t0 = Clock::now();
    auto m = corpus_features(corpus, g);
    double feature_s = seconds_since(t0);
    bool ok = tx >= 1'000'000 && fb >= 1'000'000 && graph_s < 30 && feature_s < 60 && m.size() == g.users.size();
    return {ok, std::to_string(tx) + " transactions, " + std::to_string(fb) + " feedback, graph build " +
                    fmt("%.2f s", graph_s) + ", feature extraction " + fmt("%.2f s", feature_s)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle-cliques", cliques_oracle},
        {"oracle-auc", auc_oracle},
        {"oracle-information-gain", information_gain_oracle},
        {"density-consistency", density_check},
        {"feature-identities", feature_identities},
        {"classifier-quality", classifier_quality},
        {"precision-at-k-shape", precision_shape},
        {"ecosystem-contrast", ecosystem_contrast},
        {"bit-exactness", bit_exactness},
        {"performance", performance},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: all criteria pass"))
              << std::endl;
    return failed ? 1 : 0;
}
