#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "shill/graphs.hpp"
#include "shill/synth.hpp"

using namespace shill;

namespace {

FeedbackMultigraph feedback_graph(std::size_t n, const std::vector<std::tuple<VertexId, VertexId, int>>& edges) {
    std::vector<VertexId> src, dst;
    std::vector<FeedbackLink> pay;
    for (auto [u, v, r] : edges) {
        src.push_back(u);
        dst.push_back(v);
        pay.push_back({r, 0});
    }
    return {n, src, dst, pay};
}

std::vector<VertexId> all_vertices(std::size_t n) {
    std::vector<VertexId> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return v;
}

// Component sizes by depth-first flood fill over an adjacency matrix.
std::multiset<std::size_t> flood_fill_sizes(std::size_t n, const std::vector<std::vector<bool>>& adj) {
    std::vector<bool> seen(n, false);
    std::multiset<std::size_t> sizes;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::size_t size = 0;
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            ++size;
            for (std::size_t w = 0; w < n; ++w)
                if ((adj[u][w] || adj[w][u]) && !seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
        }
        sizes.insert(size);
    }
    return sizes;
}

struct SmallMarket {
    SyntheticMarket m;
    UserIndex users;
    TransactionMultigraph tx;
    FeedbackMultigraph fb;
};

SmallMarket small_market(std::size_t users, std::uint64_t seed) {
    MarketConfig c;
    c.users = users;
    SmallMarket s{generate(c, seed), {}, {}, {}};
    s.users = UserIndex::from_corpus(s.m.transactions, s.m.feedback, s.m.profiles);
    s.tx = build_transaction_graph(s.users, s.m.transactions);
    s.fb = build_feedback_graph(s.users, s.m.feedback);
    return s;
}

} // namespace

TEST(Density, LargeSparseGraph) {
    EXPECT_NEAR(graph_density(156769, 1805199), 7.35e-5, 5e-7);
    EXPECT_EQ(graph_density(1, 0), 0.0);
    EXPECT_EQ(graph_density(2, 2), 1.0);
}

TEST(UserIndex, SortedAndUnique) {
    UserIndex idx({"u3", "u1", "u2", "u1"});
    EXPECT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx.id(0), "u1");
    EXPECT_EQ(idx.at("u3"), 2u);
    EXPECT_FALSE(idx.find("u9"));
    EXPECT_THROW(idx.at("u9"), Error);
    UserIndex copy = idx;
    EXPECT_EQ(copy.at("u2"), 1u);
}

TEST(Multigraph, HandshakeAndDegrees) {
    auto s = small_market(600, 5);
    std::size_t out = 0, in = 0;
    std::map<std::string, std::size_t> buys;
    for (const auto& t : s.m.transactions) ++buys[t.buyer_id];
    for (VertexId v = 0; v < s.users.size(); ++v) {
        out += s.tx.out_degree(v);
        in += s.tx.in_degree(v);
        auto it = buys.find(s.users.id(v));
        ASSERT_EQ(s.tx.out_degree(v), it == buys.end() ? 0 : it->second);
    }
    EXPECT_EQ(out, s.m.transactions.size());
    EXPECT_EQ(in, s.m.transactions.size());

    out = in = 0;
    for (VertexId v = 0; v < s.users.size(); ++v) {
        out += s.fb.out_degree(v);
        in += s.fb.in_degree(v);
    }
    EXPECT_EQ(out, s.m.feedback.size());
    EXPECT_EQ(in, s.m.feedback.size());
}

TEST(Multigraph, OutLinksSortedByTarget) {
    auto g = feedback_graph(4, {{0, 3, 1}, {0, 1, 1}, {0, 3, -1}, {2, 0, 0}, {0, 1, 0}});
    std::vector<VertexId> targets;
    for (auto e : g.out_links(0)) targets.push_back(g.target(e));
    EXPECT_EQ(targets, (std::vector<VertexId>{1, 1, 3, 3}));
    EXPECT_EQ(g.in_degree(0), 1u);
}

TEST(Multigraph, RejectsBadRating) {
    UserIndex idx({"a", "b"});
    EXPECT_THROW(build_feedback_graph(idx, {{"a", "b", 2, 0}}), Error);
}

TEST(Projection, ReciprocalPair) {
    auto g = feedback_graph(2, {{0, 1, 1}, {1, 0, 1}});
    auto h = project_feedback_graph(g, all_vertices(2), WeightMode::count);
    EXPECT_EQ(bidirectional_link_count(h), 2u);
    auto parts = connected_components(h);
    EXPECT_EQ(parts.count(), 1u);
    EXPECT_EQ(parts.largest(), 2u);
}

TEST(Projection, WeightModesAndSelfLoops) {
    auto g = feedback_graph(3, {{0, 1, 1}, {0, 1, -1}, {0, 1, -1}, {1, 1, 1}, {2, 0, 0}, {1, 2, 1}});
    auto hc = project_feedback_graph(g, {0, 1, 2}, WeightMode::count);
    auto hr = project_feedback_graph(g, {0, 1, 2}, WeightMode::rating_sum);
    ASSERT_EQ(hc.link_count(), 3u);
    EXPECT_EQ(hc.links[0].weight, 3);
    EXPECT_EQ(hr.links[0].weight, -1);
    EXPECT_EQ(hr.links[2].weight, 0);
    EXPECT_EQ(hc.self_loop_feedback, 1u);
    EXPECT_EQ(hc.feedback_records, 5u);
    EXPECT_FALSE(hc.has_link(1, 1));

    auto sub = project_feedback_graph(g, {1, 0}, WeightMode::count);
    EXPECT_EQ(sub.link_count(), 1u);
    EXPECT_EQ(sub.non_isolated_count(), 2u);
    EXPECT_THROW(project_feedback_graph(g, {7}, WeightMode::count), Error);
}

TEST(Projection, ConservationOnSyntheticCohorts) {
    auto s = small_market(800, 9);
    std::vector<VertexId> shills;
    for (const auto& id : s.m.labels.shill_ids) shills.push_back(s.users.at(id));
    for (const auto& subset : {shills, all_vertices(s.users.size())}) {
        auto h = project_feedback_graph(s.fb, subset, WeightMode::count);
        std::set<VertexId> in(subset.begin(), subset.end());
        std::size_t records = 0;
        for (const auto& r : s.m.feedback)
            if (r.giver_id != r.receiver_id && in.count(s.users.at(r.giver_id)) && in.count(s.users.at(r.receiver_id)))
                ++records;
        std::int64_t weight = 0;
        for (const auto& l : h.links) {
            ASSERT_GE(l.weight, 1);
            weight += l.weight;
        }
        EXPECT_EQ(static_cast<std::size_t>(weight), records);
        EXPECT_LE(h.non_isolated_count(), h.vertex_count());

        auto bidir = bidirectional_link_count(h);
        EXPECT_EQ(bidir % 2, 0u);
        EXPECT_LE(bidir, h.link_count());

        auto parts = connected_components(h);
        std::size_t total = 0, isolated = 0;
        for (auto sz : parts.sizes) {
            total += sz;
            isolated += sz == 1;
        }
        EXPECT_EQ(total, h.vertex_count());
        EXPECT_EQ(h.vertex_count() - isolated, h.non_isolated_count());
    }
}

TEST(Projection, BidirectionalCountIsRelabelInvariant) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 25;
        std::vector<std::tuple<VertexId, VertexId, int>> edges;
        for (VertexId u = 0; u < n; ++u)
            for (VertexId v = 0; v < n; ++v)
                if (u != v && rng.chance(0.15)) edges.emplace_back(u, v, 1);
        std::vector<VertexId> perm = all_vertices(n);
        rng.shuffle(perm);
        auto relabeled = edges;
        for (auto& [u, v, r] : relabeled) {
            u = perm[u];
            v = perm[v];
        }
        auto a = project_feedback_graph(feedback_graph(n, edges), all_vertices(n), WeightMode::count);
        auto b = project_feedback_graph(feedback_graph(n, relabeled), all_vertices(n), WeightMode::count);
        EXPECT_EQ(bidirectional_link_count(a), bidirectional_link_count(b));
        EXPECT_EQ(connected_components(a).largest(), connected_components(b).largest());
    }
}

TEST(Components, MatchFloodFillOnRandomDigraph) {
    Rng rng(3);
    const std::size_t n = 30;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    std::vector<std::tuple<VertexId, VertexId, int>> edges;
    for (VertexId u = 0; u < n; ++u)
        for (VertexId v = 0; v < n; ++v)
            if (u != v && rng.chance(0.04)) {
                adj[u][v] = true;
                edges.emplace_back(u, v, 1);
            }
    auto h = project_feedback_graph(feedback_graph(n, edges), all_vertices(n), WeightMode::count);
    auto parts = connected_components(h);
    std::multiset<std::size_t> got(parts.sizes.begin(), parts.sizes.end());
    EXPECT_EQ(got, flood_fill_sizes(n, adj));
    for (const auto& l : h.links) EXPECT_EQ(parts.component_of[l.src], parts.component_of[l.dst]);
}

TEST(Export, EdgeListGraphmlDot) {
    UserIndex idx({"a&b", "c"});
    auto g = feedback_graph(2, {{0, 1, 1}, {1, 0, -1}});
    auto h = project_feedback_graph(g, {0, 1}, WeightMode::rating_sum);
    std::ostringstream e, gm, dot;
    write_edge_list(e, h, idx);
    EXPECT_EQ(e.str(), "src,dst,weight\na&b,c,1\nc,a&b,-1\n");
    write_graphml(gm, h, idx);
    EXPECT_NE(gm.str().find("a&amp;b"), std::string::npos);
    EXPECT_NE(gm.str().find("<edge id=\"e1\" source=\"n1\" target=\"n0\">"), std::string::npos);
    write_dot(dot, h, idx);
    EXPECT_NE(dot.str().find("\"c\" -> \"a&b\" [weight=-1];"), std::string::npos);
}

TEST(WeightMode, Parse) {
    EXPECT_EQ(parse_weight_mode("count"), WeightMode::count);
    EXPECT_EQ(to_string(WeightMode::rating_sum), "rating_sum");
    EXPECT_THROW(parse_weight_mode("sum"), Error);
}
