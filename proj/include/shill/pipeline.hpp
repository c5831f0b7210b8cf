#pragma once

// Corpus -> graphs -> feature matrix glue shared by the CLI and the tests.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shill/features.hpp"
#include "shill/graphs.hpp"
#include "shill/market_data.hpp"
#include "shill/synth.hpp"

namespace shill {

struct Corpus {
    std::vector<TransactionRecord> transactions;
    std::vector<FeedbackRecord> feedback;
    std::vector<UserProfile> profiles;
    LabelSet labels;
    std::vector<std::string> warnings;
};

inline Corpus corpus_of(const SyntheticMarket& m) {
    return {m.transactions, m.feedback, m.profiles, m.labels, {}};
}

inline InputFormat format_of(const std::filesystem::path& p) {
    return p.extension() == ".jsonl" ? InputFormat::jsonl : InputFormat::csv;
}

/// Reads the four corpus files; rejected rows become warnings.
inline Corpus load_corpus(const std::filesystem::path& transactions, const std::filesystem::path& feedback,
                          const std::filesystem::path& profiles, const std::filesystem::path& labels,
                          const ParseOptions& opt = {}) {
    auto open = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw Error("io.read", "cannot read " + p.string());
        return in;
    };
    Corpus c;
    auto note = [&](const char* what, const auto& res) {
        for (const auto& e : res.errors)
            c.warnings.push_back(std::string(what) + " row " + std::to_string(e.line) + ": " + e.message);
    };
    {
        auto in = open(transactions);
        auto r = parse_transactions(in, format_of(transactions), opt);
        note("transactions", r);
        c.transactions = std::move(r.records);
    }
    {
        auto in = open(feedback);
        auto r = parse_feedback(in, format_of(feedback), opt);
        note("feedback", r);
        c.feedback = std::move(r.records);
    }
    {
        auto in = open(profiles);
        auto r = parse_profiles(in, format_of(profiles), opt);
        note("profiles", r);
        c.profiles = std::move(r.records);
    }
    {
        auto in = open(labels);
        c.labels = load_label_list(in);
    }
    return c;
}

struct MarketGraphs {
    UserIndex users;
    TransactionMultigraph transactions;
    FeedbackMultigraph feedback;
};

inline MarketGraphs build_graphs(const Corpus& c) {
    UserIndex users = UserIndex::from_corpus(c.transactions, c.feedback, c.profiles);
    auto tx = build_transaction_graph(users, c.transactions);
    auto fb = build_feedback_graph(users, c.feedback);
    return {std::move(users), std::move(tx), std::move(fb)};
}

/// One feature row per known user.
inline FeatureMatrix corpus_features(const Corpus& c, const MarketGraphs& g) {
    auto m = extract_all(g.users.ids(), g.users, g.transactions, g.feedback, c.profiles, c.labels);
    for (const auto& w : check_registration_order(c.profiles, c.transactions, c.feedback))
        m.warnings.push_back(w.user_id + ": " + w.message);
    return m;
}

inline std::vector<VertexId> vertices_of(const UserIndex& users, const std::vector<std::string>& ids) {
    std::vector<VertexId> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(users.at(id));
    return out;
}

} // namespace shill
