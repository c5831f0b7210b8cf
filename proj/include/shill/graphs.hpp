#pragma once

// Transaction and feedback multigraphs over a shared user index, and the
// weighted feedback graph projected onto a user subset.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shill/market_data.hpp"

namespace shill {

using VertexId = std::uint32_t;

/// Dense vertex numbering. Ids are ordered lexicographically, so vertex order
/// and user-id order coincide.
class UserIndex {
public:
    UserIndex() = default;

    explicit UserIndex(std::vector<std::string> ids) : ids_(std::move(ids)) {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
        lookup_.reserve(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i)
            lookup_.emplace(ids_[i], static_cast<VertexId>(i));
    }

    UserIndex(const UserIndex& other) : UserIndex(other.ids_) {}
    UserIndex& operator=(const UserIndex& other) {
        if (this != &other) *this = UserIndex(other.ids_);
        return *this;
    }
    UserIndex(UserIndex&&) = default;
    UserIndex& operator=(UserIndex&&) = default;

    /// Every id mentioned by any record or profile.
    static UserIndex from_corpus(const std::vector<TransactionRecord>& tx,
                                 const std::vector<FeedbackRecord>& fb,
                                 const std::vector<UserProfile>& profiles) {
        std::vector<std::string> ids;
        ids.reserve(2 * tx.size() + 2 * fb.size() + profiles.size());
        for (const auto& r : tx) {
            ids.push_back(r.buyer_id);
            ids.push_back(r.seller_id);
        }
        for (const auto& r : fb) {
            ids.push_back(r.giver_id);
            ids.push_back(r.receiver_id);
        }
        for (const auto& p : profiles) ids.push_back(p.user_id);
        return UserIndex(std::move(ids));
    }

    std::size_t size() const { return ids_.size(); }
    const std::string& id(VertexId v) const { return ids_[v]; }
    const std::vector<std::string>& ids() const { return ids_; }

    std::optional<VertexId> find(std::string_view id) const {
        auto it = lookup_.find(id);
        if (it == lookup_.end()) return std::nullopt;
        return it->second;
    }

    VertexId at(std::string_view id) const {
        auto v = find(id);
        if (!v) throw Error("graph.unknown_user", "unknown user id '" + std::string(id) + "'");
        return *v;
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string_view, VertexId> lookup_;
};

/// Directed multigraph in compressed adjacency form. Each vertex's out-links
/// are sorted by (target, link id) and in-links by (source, link id).
template <class Payload>
class DirectedMultigraph {
public:
    DirectedMultigraph() = default;

    DirectedMultigraph(std::size_t vertex_count, std::vector<VertexId> src,
                       std::vector<VertexId> dst, std::vector<Payload> payload)
        : n_(vertex_count), src_(std::move(src)), dst_(std::move(dst)), payload_(std::move(payload)) {
        index(src_, dst_, out_offsets_, out_links_);
        index(dst_, src_, in_offsets_, in_links_);
    }

    std::size_t vertex_count() const { return n_; }
    std::size_t link_count() const { return src_.size(); }

    VertexId source(std::size_t link) const { return src_[link]; }
    VertexId target(std::size_t link) const { return dst_[link]; }
    const Payload& payload(std::size_t link) const { return payload_[link]; }

    std::span<const std::uint32_t> out_links(VertexId v) const {
        return {out_links_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
    }
    std::span<const std::uint32_t> in_links(VertexId v) const {
        return {in_links_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
    }
    std::size_t out_degree(VertexId v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
    std::size_t in_degree(VertexId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

private:
    // Two stable counting passes: by secondary key, then by primary key.
    void index(const std::vector<VertexId>& primary, const std::vector<VertexId>& secondary,
               std::vector<std::size_t>& offsets, std::vector<std::uint32_t>& links) const {
        const std::size_t m = primary.size();
        std::vector<std::uint32_t> by_secondary(m);
        {
            std::vector<std::size_t> count(n_ + 1, 0);
            for (auto v : secondary) ++count[v + 1];
            std::partial_sum(count.begin(), count.end(), count.begin());
            for (std::size_t e = 0; e < m; ++e)
                by_secondary[count[secondary[e]]++] = static_cast<std::uint32_t>(e);
        }
        offsets.assign(n_ + 1, 0);
        for (auto v : primary) ++offsets[v + 1];
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        links.resize(m);
        for (auto e : by_secondary) links[cursor[primary[e]]++] = e;
    }

    std::size_t n_ = 0;
    std::vector<VertexId> src_, dst_;
    std::vector<Payload> payload_;
    std::vector<std::size_t> out_offsets_{0}, in_offsets_{0};
    std::vector<std::uint32_t> out_links_, in_links_;
};

struct TransactionLink {
    std::string product_id;
    std::int64_t quantity = 1;
    Cents unit_price = 0;
    Timestamp timestamp = 0;

    Cents amount() const { return quantity * unit_price; }
};

struct FeedbackLink {
    int rating = 0;
    Timestamp timestamp = 0;
};

/// Links run buyer -> seller.
using TransactionMultigraph = DirectedMultigraph<TransactionLink>;
/// Links run giver -> receiver.
using FeedbackMultigraph = DirectedMultigraph<FeedbackLink>;

inline TransactionMultigraph build_transaction_graph(const UserIndex& users,
                                                     const std::vector<TransactionRecord>& records) {
    std::vector<VertexId> src, dst;
    std::vector<TransactionLink> payload;
    src.reserve(records.size());
    dst.reserve(records.size());
    payload.reserve(records.size());
    for (const auto& r : records) {
        src.push_back(users.at(r.buyer_id));
        dst.push_back(users.at(r.seller_id));
        payload.push_back({r.product_id, r.quantity, r.unit_price, r.timestamp});
    }
    return {users.size(), std::move(src), std::move(dst), std::move(payload)};
}

inline FeedbackMultigraph build_feedback_graph(const UserIndex& users,
                                               const std::vector<FeedbackRecord>& records) {
    std::vector<VertexId> src, dst;
    std::vector<FeedbackLink> payload;
    src.reserve(records.size());
    dst.reserve(records.size());
    payload.reserve(records.size());
    for (const auto& r : records) {
        if (r.rating < -1 || r.rating > 1)
            throw Error("graph.bad_rating", "feedback rating outside {-1,0,+1}");
        src.push_back(users.at(r.giver_id));
        dst.push_back(users.at(r.receiver_id));
        payload.push_back({r.rating, r.timestamp});
    }
    return {users.size(), std::move(src), std::move(dst), std::move(payload)};
}

// ---------------------------------------------------------------------------
// Weighted feedback graph

enum class WeightMode { count, rating_sum };

inline std::string_view to_string(WeightMode m) {
    return m == WeightMode::count ? "count" : "rating_sum";
}

inline WeightMode parse_weight_mode(std::string_view s) {
    if (s == "count") return WeightMode::count;
    if (s == "rating_sum") return WeightMode::rating_sum;
    throw Error("config.weight_mode", "weight mode must be 'count' or 'rating_sum'");
}

/// Simple directed graph over a user subset. Local vertex i corresponds to
/// global vertex `members[i]`; members are sorted ascending.
struct WeightedFeedbackGraph {
    struct Link {
        std::uint32_t src;
        std::uint32_t dst;
        std::int64_t weight;
    };

    WeightMode weight_mode = WeightMode::rating_sum;
    std::vector<VertexId> members;
    std::vector<Link> links;                // sorted by (src, dst)
    std::vector<std::size_t> out_offsets{0}; // into links, per local vertex
    std::size_t self_loop_feedback = 0;     // u -> u records dropped from links
    std::size_t feedback_records = 0;       // records with both ends in the subset, self-loops excluded

    std::size_t vertex_count() const { return members.size(); }
    std::size_t link_count() const { return links.size(); }

    std::span<const Link> out(std::uint32_t u) const {
        return {links.data() + out_offsets[u], out_offsets[u + 1] - out_offsets[u]};
    }

    bool has_link(std::uint32_t u, std::uint32_t v) const {
        auto row = out(u);
        auto it = std::lower_bound(row.begin(), row.end(), v,
                                   [](const Link& l, std::uint32_t x) { return l.dst < x; });
        return it != row.end() && it->dst == v;
    }

    /// Vertices with at least one incident link.
    std::size_t non_isolated_count() const {
        std::vector<char> touched(members.size(), 0);
        for (const auto& l : links) touched[l.src] = touched[l.dst] = 1;
        return static_cast<std::size_t>(std::count(touched.begin(), touched.end(), 1));
    }
};

/// Projects G_F onto `subset` (global vertex ids, any order, duplicates
/// ignored). A link (u,v) exists iff u gave v at least one rating; its weight
/// is the number of ratings (count) or their sum (rating_sum).
inline WeightedFeedbackGraph project_feedback_graph(const FeedbackMultigraph& g,
                                                    std::vector<VertexId> subset, WeightMode mode) {
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    for (auto v : subset)
        if (v >= g.vertex_count()) throw Error("graph.bad_subset", "subset vertex outside graph");

    WeightedFeedbackGraph h;
    h.weight_mode = mode;
    h.members = std::move(subset);
    std::vector<std::int32_t> local(g.vertex_count(), -1);
    for (std::size_t i = 0; i < h.members.size(); ++i) local[h.members[i]] = static_cast<std::int32_t>(i);

    h.out_offsets.assign(h.members.size() + 1, 0);
    for (std::size_t i = 0; i < h.members.size(); ++i) {
        VertexId u = h.members[i];
        // out-links are grouped by target, so each run is one projected link
        for (auto e : g.out_links(u)) {
            VertexId v = g.target(e);
            if (local[v] < 0) continue;
            if (v == u) {
                ++h.self_loop_feedback;
                continue;
            }
            ++h.feedback_records;
            std::int64_t w = mode == WeightMode::count ? 1 : g.payload(e).rating;
            auto lv = static_cast<std::uint32_t>(local[v]);
            if (!h.links.empty() && h.links.back().src == i && h.links.back().dst == lv)
                h.links.back().weight += w;
            else
                h.links.push_back({static_cast<std::uint32_t>(i), lv, w});
        }
        h.out_offsets[i + 1] = h.links.size();
    }
    return h;
}

/// m / (n (n - 1)) with n the number of non-isolated vertices; 0 when n <= 1.
inline double graph_density(std::size_t non_isolated, std::size_t links) {
    if (non_isolated <= 1) return 0.0;
    const double n = static_cast<double>(non_isolated);
    return static_cast<double>(links) / (n * (n - 1.0));
}

inline double graph_density(const WeightedFeedbackGraph& h) {
    return graph_density(h.non_isolated_count(), h.link_count());
}

/// Number of ordered links (u,v) whose reverse (v,u) is also present.
inline std::size_t bidirectional_link_count(const WeightedFeedbackGraph& h) {
    std::size_t count = 0;
    for (const auto& l : h.links)
        if (h.has_link(l.dst, l.src)) ++count;
    return count;
}

/// Undirected adjacency: {u,v} iff (u,v) or (v,u) is a link. Rows sorted.
inline std::vector<std::vector<std::uint32_t>> undirected_adjacency(const WeightedFeedbackGraph& h) {
    std::vector<std::vector<std::uint32_t>> adj(h.vertex_count());
    for (const auto& l : h.links) {
        adj[l.src].push_back(l.dst);
        adj[l.dst].push_back(l.src);
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return adj;
}

/// Connected components of the undirected view, including isolated vertices
/// as singletons. Components are numbered by their smallest vertex.
struct ComponentPartition {
    std::vector<std::uint32_t> component_of;
    std::vector<std::size_t> sizes;

    std::size_t count() const { return sizes.size(); }

    /// Components with more than one vertex (isolated vertices excluded).
    std::size_t non_trivial_count() const {
        return static_cast<std::size_t>(
            std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 1; }));
    }
    std::size_t largest() const {
        return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    }
};

inline ComponentPartition connected_components(const WeightedFeedbackGraph& h) {
    const std::size_t n = h.vertex_count();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& l : h.links) {
        auto a = find(l.src), b = find(l.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    ComponentPartition p;
    p.component_of.assign(n, 0);
    std::vector<std::int64_t> id_of_root(n, -1);
    for (std::uint32_t v = 0; v < n; ++v) {
        auto r = find(v);
        if (id_of_root[r] < 0) {
            id_of_root[r] = static_cast<std::int64_t>(p.sizes.size());
            p.sizes.push_back(0);
        }
        p.component_of[v] = static_cast<std::uint32_t>(id_of_root[r]);
        ++p.sizes[p.component_of[v]];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Export

inline void write_edge_list(std::ostream& out, const WeightedFeedbackGraph& h, const UserIndex& users) {
    out << "src,dst,weight\n";
    for (const auto& l : h.links)
        out << users.id(h.members[l.src]) << ',' << users.id(h.members[l.dst]) << ',' << l.weight << '\n';
}

namespace detail {
inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}
} // namespace detail

/// GraphML with a `label` node attribute and a `weight` edge attribute.
/// `is_shill`, when non-empty, adds a boolean node attribute per member.
inline void write_graphml(std::ostream& out, const WeightedFeedbackGraph& h, const UserIndex& users,
                          const std::vector<bool>& is_shill = {}) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"shill\" for=\"node\" attr.name=\"shill\" attr.type=\"boolean\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
        << "  <graph id=\"feedback\" edgedefault=\"directed\">\n";
    for (std::size_t i = 0; i < h.members.size(); ++i) {
        out << "    <node id=\"n" << i << "\"><data key=\"label\">"
            << detail::xml_escape(users.id(h.members[i])) << "</data>";
        if (!is_shill.empty())
            out << "<data key=\"shill\">" << (is_shill[i] ? "true" : "false") << "</data>";
        out << "</node>\n";
    }
    for (std::size_t e = 0; e < h.links.size(); ++e) {
        const auto& l = h.links[e];
        out << "    <edge id=\"e" << e << "\" source=\"n" << l.src << "\" target=\"n" << l.dst
            << "\"><data key=\"weight\">" << l.weight << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

inline void write_dot(std::ostream& out, const WeightedFeedbackGraph& h, const UserIndex& users) {
    out << "digraph feedback {\n";
    for (const auto& l : h.links)
        out << "  \"" << users.id(h.members[l.src]) << "\" -> \"" << users.id(h.members[l.dst])
            << "\" [weight=" << l.weight << "];\n";
    out << "}\n";
}

} // namespace shill
