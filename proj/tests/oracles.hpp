#pragma once

// Slow reference computations used to check the library. Nothing here calls
// into the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shill/market_data.hpp"

namespace oracle {

// --- features --------------------------------------------------------------

/// Per-user feature row in manifest order, recounted straight from records.
inline std::array<double, 31> recount_features(const std::string& u, const std::vector<shill::TransactionRecord>& tx,
                                               const std::vector<shill::FeedbackRecord>& fb,
                                               const std::vector<shill::UserProfile>& profiles) {
    std::array<double, 31> f{};
    std::set<std::string> sellers, buyers, to, from;
    std::int64_t buy_n = 0, sell_n = 0, bq_max = 0, bq_sum = 0, sq_max = 0, sq_sum = 0;
    std::int64_t bmax = -1, bmin = -1, bsum = 0, smax = -1, smin = -1, ssum = 0;
    std::int64_t last = INT64_MIN;
    for (const auto& t : tx) {
        std::int64_t a = t.quantity * t.unit_price;
        if (t.buyer_id == u) {
            ++buy_n;
            sellers.insert(t.seller_id);
            bmax = bmax < 0 ? a : std::max(bmax, a);
            bmin = bmin < 0 ? a : std::min(bmin, a);
            bsum += a;
            bq_max = std::max(bq_max, t.quantity);
            bq_sum += t.quantity;
        }
        if (t.seller_id == u) {
            ++sell_n;
            buyers.insert(t.buyer_id);
            smax = smax < 0 ? a : std::max(smax, a);
            smin = smin < 0 ? a : std::min(smin, a);
            ssum += a;
            sq_max = std::max(sq_max, t.quantity);
            sq_sum += t.quantity;
        }
        if (t.buyer_id == u || t.seller_id == u) last = std::max(last, t.timestamp);
    }
    std::size_t both = 0;
    for (const auto& s : sellers) both += buyers.count(s);
    f[0] = double(buy_n);
    f[1] = double(sell_n);
    f[2] = double(sellers.size());
    f[3] = double(buyers.size());
    f[4] = double(both);
    f[5] = bmax < 0 ? 0 : bmax / 100.0;
    f[6] = bmin < 0 ? 0 : bmin / 100.0;
    f[7] = double(bq_max);
    f[8] = double(bq_sum);
    f[9] = bsum / 100.0;
    f[10] = smax < 0 ? 0 : smax / 100.0;
    f[11] = smin < 0 ? 0 : smin / 100.0;
    f[12] = double(sq_max);
    f[13] = double(sq_sum);
    f[14] = ssum / 100.0;

    std::int64_t gn = 0, rn = 0, gp = 0, gneg = 0, rp = 0, rneg = 0, gs = 0, rs = 0;
    for (const auto& r : fb) {
        if (r.giver_id == u) {
            ++gn;
            to.insert(r.receiver_id);
            gp += r.rating == 1;
            gneg += r.rating == -1;
            gs += r.rating;
        }
        if (r.receiver_id == u) {
            ++rn;
            from.insert(r.giver_id);
            rp += r.rating == 1;
            rneg += r.rating == -1;
            rs += r.rating;
        }
    }
    std::size_t bidir = 0;
    for (const auto& s : to) bidir += from.count(s);
    f[15] = double(gn);
    f[16] = double(rn);
    f[17] = double(to.size());
    f[18] = double(from.size());
    f[19] = double(bidir);
    f[20] = double(gp);
    f[21] = double(gneg);
    f[22] = double(rp);
    f[23] = double(rneg);
    f[24] = double(gs);
    f[25] = double(rs);
    f[26] = gn ? double(gs) / double(gn) : 0.0;
    f[27] = rn ? double(rs) / double(rn) : 0.0;

    for (const auto& p : profiles) {
        if (p.user_id != u) continue;
        f[28] = p.birth_year ? *p.birth_year : 0;
        // CRC-32, bitwise
        std::uint32_t crc = 0xFFFFFFFFu;
        for (unsigned char c : p.state_text) {
            crc ^= c;
            for (int k = 0; k < 8; ++k) crc = (crc & 1u) ? (crc >> 1) ^ 0xEDB88320u : crc >> 1;
        }
        f[29] = double(~crc);
        if (last != INT64_MIN) {
            auto day = [](std::int64_t t) { return (t - ((t % 86400) + 86400) % 86400) / 86400; };
            f[30] = double(std::max<std::int64_t>(0, day(last) - day(p.registration_date)));
        }
    }
    return f;
}

// --- cliques ---------------------------------------------------------------

using Graph = std::vector<std::vector<bool>>; // symmetric adjacency matrix

/// Maximal cliques of size >= 2 by checking every vertex subset.
inline std::set<std::vector<std::uint32_t>> subset_cliques(const Graph& g) {
    const std::size_t n = g.size();
    std::set<std::vector<std::uint32_t>> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::uint32_t> c;
        for (std::uint32_t v = 0; v < n; ++v)
            if (mask >> v & 1u) c.push_back(v);
        if (c.size() < 2) continue;
        bool clique = true;
        for (std::size_t i = 0; i < c.size() && clique; ++i)
            for (std::size_t j = i + 1; j < c.size() && clique; ++j) clique = g[c[i]][c[j]];
        if (!clique) continue;
        bool maximal = true;
        for (std::uint32_t w = 0; w < n && maximal; ++w) {
            if (mask >> w & 1u) continue;
            bool joins = true;
            for (auto v : c) joins = joins && g[v][w];
            maximal = !joins;
        }
        if (maximal) out.insert(c);
    }
    return out;
}

/// Textbook Bron-Kerbosch without pivoting or vertex ordering.
inline void bron_kerbosch(const Graph& g, std::vector<std::uint32_t> r, std::vector<std::uint32_t> p,
                          std::vector<std::uint32_t> x, std::set<std::vector<std::uint32_t>>& out) {
    if (p.empty() && x.empty()) {
        if (r.size() >= 2) {
            std::sort(r.begin(), r.end());
            out.insert(r);
        }
        return;
    }
    while (!p.empty()) {
        auto v = p.front();
        std::vector<std::uint32_t> np, nx;
        for (auto w : p)
            if (g[v][w]) np.push_back(w);
        for (auto w : x)
            if (g[v][w]) nx.push_back(w);
        auto nr = r;
        nr.push_back(v);
        bron_kerbosch(g, nr, np, nx, out);
        p.erase(p.begin());
        x.push_back(v);
    }
}

inline std::set<std::vector<std::uint32_t>> unpivoted_cliques(const Graph& g) {
    std::set<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> all(g.size());
    for (std::uint32_t v = 0; v < g.size(); ++v) all[v] = v;
    bron_kerbosch(g, {}, all, {}, out);
    return out;
}

// --- metrics ---------------------------------------------------------------

/// Fraction of (positive, negative) pairs ranked correctly; ties count 1/2.
inline double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) (y[i] ? pos : neg) += 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j]) continue;
            if (s[i] > s[j]) wins += 1;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / (pos * neg);
}

/// Entropy in bits via natural logs.
inline double entropy_bits(const std::vector<double>& counts) {
    double n = 0, h = 0;
    for (double c : counts) n += c;
    for (double c : counts)
        if (c > 0) h -= (c / n) * std::log(c / n);
    return h / std::log(2.0);
}

/// H(y) - H(y | bin), bins assigned by counting how many cuts lie at or below x.
inline double direct_information_gain(const std::vector<double>& x, const std::vector<int>& y,
                                      const std::vector<double>& cuts) {
    std::map<std::size_t, std::vector<double>> bins;
    std::vector<double> all(2, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t b = 0;
        for (double c : cuts) b += c <= x[i];
        auto& counts = bins[b];
        counts.resize(2, 0.0);
        counts[static_cast<std::size_t>(y[i])] += 1;
        all[static_cast<std::size_t>(y[i])] += 1;
    }
    double cond = 0;
    for (const auto& [b, counts] : bins) cond += (counts[0] + counts[1]) / double(x.size()) * entropy_bits(counts);
    return entropy_bits(all) - cond;
}

} // namespace oracle
