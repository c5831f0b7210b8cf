#pragma once

// Cohort-level feedback graph properties and maximal clique enumeration.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shill/common.hpp"
#include "shill/graphs.hpp"

namespace shill {

using Clique = std::vector<std::uint32_t>;
using AdjacencyList = std::vector<std::vector<std::uint32_t>>;

constexpr std::size_t default_clique_limit = 10'000'000;

namespace detail {

inline std::vector<std::uint32_t> intersect(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Vertices in smallest-last (degeneracy) order.
inline std::vector<std::uint32_t> degeneracy_order(const AdjacencyList& adj) {
    const std::size_t n = adj.size();
    std::size_t max_deg = 0;
    std::vector<std::size_t> deg(n);
    for (std::size_t v = 0; v < n; ++v) max_deg = std::max(max_deg, deg[v] = adj[v].size());
    std::vector<std::vector<std::uint32_t>> bucket(max_deg + 1);
    for (std::uint32_t v = 0; v < n; ++v) bucket[deg[v]].push_back(v);
    std::vector<char> removed(n, 0);
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::size_t d = 0;
    while (order.size() < n) {
        d = std::min(d, max_deg);
        while (bucket[d].empty()) ++d;
        auto v = bucket[d].back();
        bucket[d].pop_back();
        if (removed[v] || deg[v] != d) continue; // stale entry
        removed[v] = 1;
        order.push_back(v);
        for (auto w : adj[v])
            if (!removed[w]) {
                --deg[w];
                bucket[deg[w]].push_back(w);
                if (deg[w] < d) d = deg[w];
            }
    }
    return order;
}

class CliqueSearch {
public:
    CliqueSearch(const AdjacencyList& adj, const std::function<void(const Clique&)>& emit, std::size_t limit)
        : adj_(adj), emit_(emit), limit_(limit) {}

    void run() {
        auto order = degeneracy_order(adj_);
        std::vector<std::size_t> pos(adj_.size());
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (auto v : order) {
            if (adj_[v].empty()) continue; // isolated vertices are not reported
            std::vector<std::uint32_t> p, x;
            for (auto w : adj_[v]) (pos[w] > pos[v] ? p : x).push_back(w);
            r_.assign(1, v);
            expand(p, x);
        }
    }

    std::size_t found() const { return found_; }

private:
    void expand(std::vector<std::uint32_t>& p, std::vector<std::uint32_t>& x) {
        if (p.empty()) {
            if (x.empty()) {
                if (++found_ > limit_)
                    throw Error("ecosystem.clique_limit",
                                "maximal clique enumeration exceeded " + std::to_string(limit_) + " cliques");
                Clique c = r_;
                std::sort(c.begin(), c.end());
                emit_(c);
            }
            return;
        }
        // Tomita pivot: the vertex of P u X with most neighbours in P
        std::uint32_t pivot = p[0];
        std::size_t best = 0;
        bool first = true;
        for (const auto* set : {&p, &x})
            for (auto u : *set) {
                auto n = intersect(p, adj_[u]).size();
                if (first || n > best) {
                    best = n;
                    pivot = u;
                    first = false;
                }
            }
        std::vector<std::uint32_t> candidates;
        std::set_difference(p.begin(), p.end(), adj_[pivot].begin(), adj_[pivot].end(), std::back_inserter(candidates));
        for (auto v : candidates) {
            auto np = intersect(p, adj_[v]);
            auto nx = intersect(x, adj_[v]);
            r_.push_back(v);
            expand(np, nx);
            r_.pop_back();
            p.erase(std::lower_bound(p.begin(), p.end(), v));
            x.insert(std::lower_bound(x.begin(), x.end(), v), v);
        }
    }

    const AdjacencyList& adj_;
    const std::function<void(const Clique&)>& emit_;
    std::size_t limit_;
    std::size_t found_ = 0;
    Clique r_;
};

} // namespace detail

/// Calls `emit` once per maximal clique of size >= 2 of the undirected graph
/// (rows of `adj` sorted, symmetric, no self-loops). Throws
/// "ecosystem.clique_limit" once more than `limit` cliques are found.
inline std::size_t for_each_maximal_clique(const AdjacencyList& adj, const std::function<void(const Clique&)>& emit,
                                           std::size_t limit = default_clique_limit) {
    detail::CliqueSearch s(adj, emit, limit);
    s.run();
    return s.found();
}

/// All maximal cliques (size >= 2), each sorted, in lexicographic order.
inline std::vector<Clique> maximal_cliques(const AdjacencyList& adj, std::size_t limit = default_clique_limit) {
    std::vector<Clique> out;
    for_each_maximal_clique(adj, [&](const Clique& c) { out.push_back(c); }, limit);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Clique> maximal_cliques(const WeightedFeedbackGraph& h, std::size_t limit = default_clique_limit) {
    return maximal_cliques(undirected_adjacency(h), limit);
}

// ---------------------------------------------------------------------------
// Reports

struct EcosystemOptions {
    /// Also report sizes 1 (isolated users) and 2 in the clique histogram.
    bool verbose_histogram = false;
    std::size_t clique_limit = default_clique_limit;
};

struct EcosystemReport {
    std::string label;
    std::string weight_mode;
    std::size_t users = 0;
    std::size_t feedback_total = 0, feedback_positive = 0, feedback_negative = 0;
    std::size_t self_loop_feedback = 0;
    std::size_t non_isolated_users = 0;
    std::size_t links = 0;
    double weight_avg = 0;
    std::int64_t weight_max = 0, weight_min = 0;
    std::size_t bidirectional_links = 0;
    double density = 0;
    std::size_t components = 0; // with at least two users
    std::size_t largest_component = 0;
    double largest_component_fraction = 0; // of the cohort size
    std::size_t max_clique_size = 0;
    std::size_t maximal_clique_count = 0;  // sum of the histogram
    std::map<std::size_t, std::size_t> clique_histogram;
};

/// Report over the cohort's projected feedback graph `h` (built from `g`
/// with the same cohort).
inline EcosystemReport ecosystem_report(const WeightedFeedbackGraph& h, const FeedbackMultigraph& g,
                                        const EcosystemOptions& opt = {}, std::string label = {}) {
    if (h.members.empty()) throw Error("ecosystem.empty_cohort", "cohort is empty");
    EcosystemReport r;
    r.label = std::move(label);
    r.weight_mode = std::string(to_string(h.weight_mode));
    r.users = h.vertex_count();

    std::vector<char> in_cohort(g.vertex_count(), 0);
    for (auto v : h.members) in_cohort[v] = 1;
    for (auto u : h.members)
        for (auto e : g.out_links(u)) {
            auto v = g.target(e);
            if (!in_cohort[v] || v == u) continue;
            ++r.feedback_total;
            auto rating = g.payload(e).rating;
            if (rating > 0) ++r.feedback_positive;
            if (rating < 0) ++r.feedback_negative;
        }
    r.self_loop_feedback = h.self_loop_feedback;

    r.non_isolated_users = h.non_isolated_count();
    r.links = h.link_count();
    if (!h.links.empty()) {
        std::int64_t sum = 0;
        r.weight_max = r.weight_min = h.links.front().weight;
        for (const auto& l : h.links) {
            sum += l.weight;
            r.weight_max = std::max(r.weight_max, l.weight);
            r.weight_min = std::min(r.weight_min, l.weight);
        }
        r.weight_avg = static_cast<double>(sum) / static_cast<double>(h.links.size());
    }
    r.bidirectional_links = bidirectional_link_count(h);
    r.density = graph_density(r.non_isolated_users, r.links);

    auto parts = connected_components(h);
    r.components = parts.non_trivial_count();
    if (r.components > 0) {
        r.largest_component = parts.largest();
        r.largest_component_fraction = static_cast<double>(r.largest_component) / static_cast<double>(r.users);
    }

    auto adj = undirected_adjacency(h);
    std::map<std::size_t, std::size_t> all_sizes;
    for_each_maximal_clique(adj, [&](const Clique& c) { ++all_sizes[c.size()]; }, opt.clique_limit);
    if (!all_sizes.empty()) r.max_clique_size = all_sizes.rbegin()->first;
    if (opt.verbose_histogram && r.users > r.non_isolated_users) all_sizes[1] = r.users - r.non_isolated_users;
    for (const auto& [size, count] : all_sizes)
        if (size >= 3 || opt.verbose_histogram) r.clique_histogram[size] = count;
    for (const auto& [size, count] : r.clique_histogram) r.maximal_clique_count += count;
    return r;
}

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(const EcosystemReport& r) {
    OrderedJson hist = OrderedJson::object();
    for (const auto& [size, count] : r.clique_histogram) hist[std::to_string(size)] = count;
    return {{"label", r.label},
            {"weight_mode", r.weight_mode},
            {"users", r.users},
            {"feedback_total", r.feedback_total},
            {"feedback_positive", r.feedback_positive},
            {"feedback_negative", r.feedback_negative},
            {"self_loop_feedback", r.self_loop_feedback},
            {"non_isolated_users", r.non_isolated_users},
            {"links", r.links},
            {"weight_avg", r.weight_avg},
            {"weight_max", r.weight_max},
            {"weight_min", r.weight_min},
            {"bidirectional_links", r.bidirectional_links},
            {"density", r.density},
            {"components", r.components},
            {"largest_component", r.largest_component},
            {"largest_component_fraction", r.largest_component_fraction},
            {"max_clique_size", r.max_clique_size},
            {"maximal_clique_count", r.maximal_clique_count},
            {"clique_histogram", hist}};
}

struct ComparisonRow {
    std::string property;
    double a, b;
    double delta() const { return a - b; }
};

struct CohortComparison {
    std::string label_a, label_b;
    std::vector<ComparisonRow> properties;
    /// size -> (count in A, count in B)
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> clique_sizes;
    double largest_component_fraction_delta = 0;
    double max_clique_size_delta = 0;
};

inline CohortComparison compare_cohorts(const EcosystemReport& a, const EcosystemReport& b) {
    CohortComparison c;
    c.label_a = a.label;
    c.label_b = b.label;
    auto d = [](std::size_t v) { return static_cast<double>(v); };
    c.properties = {
        {"users", d(a.users), d(b.users)},
        {"feedback_total", d(a.feedback_total), d(b.feedback_total)},
        {"feedback_positive", d(a.feedback_positive), d(b.feedback_positive)},
        {"feedback_negative", d(a.feedback_negative), d(b.feedback_negative)},
        {"non_isolated_users", d(a.non_isolated_users), d(b.non_isolated_users)},
        {"links", d(a.links), d(b.links)},
        {"weight_avg", a.weight_avg, b.weight_avg},
        {"weight_max", static_cast<double>(a.weight_max), static_cast<double>(b.weight_max)},
        {"weight_min", static_cast<double>(a.weight_min), static_cast<double>(b.weight_min)},
        {"bidirectional_links", d(a.bidirectional_links), d(b.bidirectional_links)},
        {"density", a.density, b.density},
        {"components", d(a.components), d(b.components)},
        {"largest_component", d(a.largest_component), d(b.largest_component)},
        {"largest_component_fraction", a.largest_component_fraction, b.largest_component_fraction},
        {"max_clique_size", d(a.max_clique_size), d(b.max_clique_size)},
        {"maximal_clique_count", d(a.maximal_clique_count), d(b.maximal_clique_count)},
    };
    for (const auto& [s, n] : a.clique_histogram) c.clique_sizes[s].first = n;
    for (const auto& [s, n] : b.clique_histogram) c.clique_sizes[s].second = n;
    c.largest_component_fraction_delta = a.largest_component_fraction - b.largest_component_fraction;
    c.max_clique_size_delta = d(a.max_clique_size) - d(b.max_clique_size);
    return c;
}

inline OrderedJson to_json(const CohortComparison& c) {
    OrderedJson rows = OrderedJson::array();
    for (const auto& p : c.properties)
        rows.push_back({{"property", p.property}, {c.label_a, p.a}, {c.label_b, p.b}, {"delta", p.delta()}});
    OrderedJson sizes = OrderedJson::array();
    for (const auto& [s, n] : c.clique_sizes) sizes.push_back({{"size", s}, {c.label_a, n.first}, {c.label_b, n.second}});
    return {{"properties", rows},
            {"clique_sizes", sizes},
            {"largest_component_fraction_delta", c.largest_component_fraction_delta},
            {"max_clique_size_delta", c.max_clique_size_delta}};
}

inline void write_comparison_csv(std::ostream& out, const CohortComparison& c) {
    out << "property," << c.label_a << ',' << c.label_b << ",delta\n";
    for (const auto& p : c.properties)
        out << p.property << ',' << format_double(p.a) << ',' << format_double(p.b) << ',' << format_double(p.delta())
            << '\n';
    out << "\nclique_size," << c.label_a << ',' << c.label_b << '\n';
    for (const auto& [s, n] : c.clique_sizes) out << s << ',' << n.first << ',' << n.second << '\n';
}

inline void write_report_csv(std::ostream& out, const EcosystemReport& r) {
    out << "property,value\n";
    const auto j = to_json(r);
    for (const auto& [k, v] : j.items()) {
        if (k == "clique_histogram" || k == "label" || k == "weight_mode") continue;
        out << k << ',' << (v.is_number_float() ? format_double(v.get<double>()) : v.dump()) << '\n';
    }
    out << "weight_mode," << r.weight_mode << '\n';
    for (const auto& [s, n] : r.clique_histogram) out << "cliques_of_size_" << s << ',' << n << '\n';
}

/// One clique per line, members as user ids separated by spaces.
inline void write_clique_list(std::ostream& out, const std::vector<Clique>& cliques, const WeightedFeedbackGraph& h,
                              const UserIndex& users, std::size_t min_size = 3) {
    for (const auto& c : cliques) {
        if (c.size() < min_size) continue;
        for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << users.id(h.members[c[i]]);
        out << '\n';
    }
}

} // namespace shill
