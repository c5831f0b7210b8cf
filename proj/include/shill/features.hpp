#pragma once

// Per-user feature vectors: 15 transaction, 13 feedback and 3 profile
// features, in a fixed column order.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shill/graphs.hpp"
#include "shill/market_data.hpp"

namespace shill {

enum Feature : std::size_t {
    BuyTransNum,
    SellTransNum,
    UniqueSellers,
    UniqueBuyers,
    BidirTransUsers,
    MaxBuyPrice,
    MinBuyPrice,
    MaxBuyQuantity,
    TotalBuyQuantity,
    TotalBuyAmount,
    MaxSellPrice,
    MinSellPrice,
    MaxSellQuantity,
    TotalSellQuantity,
    TotalSellAmount,
    GvnFdbkNum,
    RcvFdbkNum,
    GvnUniqueFdbk,
    RcvUniqueFdbk,
    BidirFdbkUsers,
    GvnPosFdbk,
    GvnNegFdbk,
    RcvPosFdbk,
    RcvNegFdbk,
    GvnFdbkRSum,
    RcvFdbkRSum,
    GvnFdbkAvg,
    RcvFdbkAvg,
    BirthYear,
    State,
    ActiveDays,
};

constexpr std::size_t feature_count = 31;
constexpr std::size_t transaction_feature_count = 15;
constexpr std::size_t feedback_feature_count = 13;
constexpr std::size_t profile_feature_count = 3;

/// Bumped whenever names, order or semantics of the columns change.
constexpr int feature_manifest_version = 1;

inline const std::array<std::string_view, feature_count>& feature_names() {
    static const std::array<std::string_view, feature_count> names{
        "Buy-Trans-Num",     "Sell-Trans-Num",     "Unique-Sellers",   "Unique-Buyers",
        "Bidir-Trans-Users", "Max-Buy-Price",      "Min-Buy-Price",    "Max-Buy-Quantity",
        "Total-Buy-Quantity", "Total-Buy-Amount",  "Max-Sell-Price",   "Min-Sell-Price",
        "Max-Sell-Quantity", "Total-Sell-Quantity", "Total-Sell-Amount", "Gvn-Fdbk-Num",
        "Rcv-Fdbk-Num",      "Gvn-Unique-Fdbk",    "Rcv-Unique-Fdbk",  "Bidir-Fdbk-Users",
        "Gvn-Pos-Fdbk",      "Gvn-Neg-Fdbk",       "Rcv-Pos-Fdbk",     "Rcv-Neg-Fdbk",
        "Gvn-Fdbk-RSum",     "Rcv-Fdbk-RSum",      "Gvn-Fdbk-Avg",     "Rcv-Fdbk-Avg",
        "Birth-Year",        "State",              "Active-Days"};
    return names;
}

/// Manifest hash: CRC-32 over the version and the ordered column names.
inline std::string feature_manifest_hash() {
    std::string text = "v" + std::to_string(feature_manifest_version);
    for (auto n : feature_names()) {
        text += '|';
        text += n;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc32_state(text));
    return buf;
}

using FeatureVector = std::array<double, feature_count>;
using TransactionBlock = std::array<double, transaction_feature_count>;
using FeedbackBlock = std::array<double, feedback_feature_count>;
using ProfileBlock = std::array<double, profile_feature_count>;

namespace detail {

/// Distinct neighbours of a sorted-by-neighbour link run.
template <class Graph, class Other>
std::vector<VertexId> distinct_ends(const Graph& g, std::span<const std::uint32_t> links, Other other) {
    std::vector<VertexId> out;
    for (auto e : links) {
        VertexId w = other(g, e);
        if (out.empty() || out.back() != w) out.push_back(w);
    }
    return out;
}

inline std::size_t sorted_intersection_size(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

inline double to_dollars(Cents c) { return static_cast<double>(c) / 100.0; }

} // namespace detail

/// Transaction block for v. Price features aggregate the transaction total
/// (quantity x unit price). Empty max/min are 0.
inline TransactionBlock transaction_features(VertexId v, const TransactionMultigraph& g) {
    TransactionBlock b{};
    auto buys = g.out_links(v);
    auto sells = g.in_links(v);
    auto sellers = detail::distinct_ends(g, buys, [](const auto& gr, auto e) { return gr.target(e); });
    auto buyers = detail::distinct_ends(g, sells, [](const auto& gr, auto e) { return gr.source(e); });

    b[BuyTransNum] = static_cast<double>(buys.size());
    b[SellTransNum] = static_cast<double>(sells.size());
    b[UniqueSellers] = static_cast<double>(sellers.size());
    b[UniqueBuyers] = static_cast<double>(buyers.size());
    b[BidirTransUsers] = static_cast<double>(detail::sorted_intersection_size(sellers, buyers));

    auto side = [&](std::span<const std::uint32_t> links, std::size_t max_price, std::size_t min_price,
                    std::size_t max_qty, std::size_t total_qty, std::size_t total_amount) {
        if (links.empty()) return;
        Cents hi = std::numeric_limits<Cents>::min(), lo = std::numeric_limits<Cents>::max(), sum = 0;
        std::int64_t qmax = 0, qsum = 0;
        for (auto e : links) {
            const auto& l = g.payload(e);
            Cents a = l.amount();
            hi = std::max(hi, a);
            lo = std::min(lo, a);
            sum += a;
            qmax = std::max(qmax, l.quantity);
            qsum += l.quantity;
        }
        b[max_price] = detail::to_dollars(hi);
        b[min_price] = detail::to_dollars(lo);
        b[max_qty] = static_cast<double>(qmax);
        b[total_qty] = static_cast<double>(qsum);
        b[total_amount] = detail::to_dollars(sum);
    };
    side(buys, MaxBuyPrice, MinBuyPrice, MaxBuyQuantity, TotalBuyQuantity, TotalBuyAmount);
    side(sells, MaxSellPrice, MinSellPrice, MaxSellQuantity, TotalSellQuantity, TotalSellAmount);
    return b;
}

/// Feedback block for v; indices are relative to GvnFdbkNum. 0/0 averages are 0.
inline FeedbackBlock feedback_features(VertexId v, const FeedbackMultigraph& g) {
    FeedbackBlock b{};
    auto given = g.out_links(v);
    auto received = g.in_links(v);
    auto to = detail::distinct_ends(g, given, [](const auto& gr, auto e) { return gr.target(e); });
    auto from = detail::distinct_ends(g, received, [](const auto& gr, auto e) { return gr.source(e); });
    auto at = [&](Feature f) -> double& { return b[f - GvnFdbkNum]; };

    at(GvnFdbkNum) = static_cast<double>(given.size());
    at(RcvFdbkNum) = static_cast<double>(received.size());
    at(GvnUniqueFdbk) = static_cast<double>(to.size());
    at(RcvUniqueFdbk) = static_cast<double>(from.size());
    at(BidirFdbkUsers) = static_cast<double>(detail::sorted_intersection_size(to, from));

    std::int64_t gpos = 0, gneg = 0, gsum = 0, rpos = 0, rneg = 0, rsum = 0;
    for (auto e : given) {
        int r = g.payload(e).rating;
        gpos += r > 0;
        gneg += r < 0;
        gsum += r;
    }
    for (auto e : received) {
        int r = g.payload(e).rating;
        rpos += r > 0;
        rneg += r < 0;
        rsum += r;
    }
    at(GvnPosFdbk) = static_cast<double>(gpos);
    at(GvnNegFdbk) = static_cast<double>(gneg);
    at(RcvPosFdbk) = static_cast<double>(rpos);
    at(RcvNegFdbk) = static_cast<double>(rneg);
    at(GvnFdbkRSum) = static_cast<double>(gsum);
    at(RcvFdbkRSum) = static_cast<double>(rsum);
    at(GvnFdbkAvg) = given.empty() ? 0.0 : static_cast<double>(gsum) / static_cast<double>(given.size());
    at(RcvFdbkAvg) = received.empty() ? 0.0 : static_cast<double>(rsum) / static_cast<double>(received.size());
    return b;
}

/// Most recent buy or sell of v, if any.
inline std::optional<Timestamp> last_transaction(VertexId v, const TransactionMultigraph& g) {
    std::optional<Timestamp> last;
    for (auto e : g.out_links(v)) last = std::max(last.value_or(INT64_MIN), g.payload(e).timestamp);
    for (auto e : g.in_links(v)) last = std::max(last.value_or(INT64_MIN), g.payload(e).timestamp);
    return last;
}

struct ProfileOutcome {
    ProfileBlock values{};
    bool activity_before_registration = false;
};

/// Birth year (0 when absent), CRC-32 of the state text, and whole days from
/// registration to the last transaction (0 with no transactions, clamped at 0).
/// A missing profile yields all zeros except State, which hashes "".
inline ProfileOutcome profile_features(const UserProfile* profile, std::optional<Timestamp> last_tx) {
    ProfileOutcome out;
    if (!profile) return out;
    out.values[0] = profile->birth_year ? static_cast<double>(*profile->birth_year) : 0.0;
    out.values[1] = static_cast<double>(crc32_state(profile->state_text));
    if (last_tx) {
        std::int64_t days = day_number(*last_tx) - day_number(profile->registration_date);
        if (days < 0) {
            out.activity_before_registration = true;
            days = 0;
        }
        out.values[2] = static_cast<double>(days);
    }
    return out;
}

struct FeatureMatrix {
    std::vector<std::string> user_ids;
    std::vector<FeatureVector> rows;
    std::vector<int> labels; // 1 = shill, 0 = benign
    std::vector<std::string> warnings;

    std::size_t size() const { return rows.size(); }

    std::optional<std::size_t> row_of(std::string_view id) const {
        auto it = std::lower_bound(user_ids.begin(), user_ids.end(), id);
        if (it == user_ids.end() || *it != id) return std::nullopt;
        return static_cast<std::size_t>(it - user_ids.begin());
    }
};

/// One row per requested user, ordered by user id.
inline FeatureMatrix extract_all(std::vector<std::string> users, const UserIndex& index,
                                 const TransactionMultigraph& tx, const FeedbackMultigraph& fb,
                                 const std::vector<UserProfile>& profiles, const LabelSet& labels) {
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::vector<std::string> unknown;
    for (const auto& u : users)
        if (!index.find(u)) unknown.push_back(u);
    if (!unknown.empty()) {
        std::string list;
        for (std::size_t i = 0; i < unknown.size() && i < 20; ++i) list += (i ? ", " : "") + unknown[i];
        if (unknown.size() > 20) list += ", ...";
        throw Error("features.unknown_users",
                    std::to_string(unknown.size()) + " unknown user id(s): " + list);
    }

    std::vector<const UserProfile*> profile_of(index.size(), nullptr);
    for (const auto& p : profiles)
        if (auto v = index.find(p.user_id)) profile_of[*v] = &p;

    FeatureMatrix m;
    m.rows.resize(users.size());
    m.labels.resize(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        VertexId v = *index.find(users[i]);
        auto t = transaction_features(v, tx);
        auto f = feedback_features(v, fb);
        auto p = profile_features(profile_of[v], last_transaction(v, tx));
        if (p.activity_before_registration)
            m.warnings.push_back(users[i] + ": last transaction precedes registration; Active-Days clamped to 0");
        auto& row = m.rows[i];
        std::copy(t.begin(), t.end(), row.begin());
        std::copy(f.begin(), f.end(), row.begin() + transaction_feature_count);
        std::copy(p.values.begin(), p.values.end(), row.begin() + transaction_feature_count + feedback_feature_count);
        m.labels[i] = labels.contains(users[i]) ? 1 : 0;
    }
    m.user_ids = std::move(users);
    return m;
}

// ---------------------------------------------------------------------------
// Cohort statistics

struct CohortRatio {
    double mean_ratio = 1.0;
    double median_ratio = 1.0;
};

namespace detail {
inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
inline double ratio(double shill, double benign) {
    if (benign == 0.0) {
        if (shill == 0.0) return 1.0;
        return shill > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return shill / benign;
}
} // namespace detail

/// Shill-cohort statistic over benign-cohort statistic for every feature.
/// x/0 with x > 0 is +inf; 0/0 is 1.
inline std::array<CohortRatio, feature_count> cohort_feature_ratios(const FeatureMatrix& m) {
    std::array<std::vector<double>, feature_count> shill, benign;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t f = 0; f < feature_count; ++f)
            (m.labels[i] ? shill : benign)[f].push_back(m.rows[i][f]);
    if (shill[0].empty() || benign[0].empty())
        throw Error("features.empty_cohort", "cohort ratios need both shill and benign users");
    std::array<CohortRatio, feature_count> out;
    for (std::size_t f = 0; f < feature_count; ++f) {
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        out[f].mean_ratio = detail::ratio(mean(shill[f]), mean(benign[f]));
        out[f].median_ratio = detail::ratio(detail::median(shill[f]), detail::median(benign[f]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export / import

/// CSV: user_id, the 31 features in manifest order, label.
inline void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
    out << "user_id";
    for (auto n : feature_names()) out << ',' << n;
    out << ",label\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.user_ids[i];
        for (double x : m.rows[i]) out << ',' << format_double(x);
        out << ',' << m.labels[i] << '\n';
    }
}

inline nlohmann::ordered_json feature_schema_json() {
    nlohmann::ordered_json features = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < feature_count; ++i) features[std::string(feature_names()[i])] = i;
    return {{"version", feature_manifest_version},
            {"manifest_hash", feature_manifest_hash()},
            {"categorical", {"State"}},
            {"features", features}};
}

inline FeatureMatrix read_feature_csv(std::istream& in) {
    FeatureMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw Error("features.empty", "feature CSV is empty");
    auto header = detail::split_csv(line);
    if (!header || header->size() != feature_count + 2 || (*header)[0] != "user_id" ||
        header->back() != "label" ||
        !std::equal(feature_names().begin(), feature_names().end(), header->begin() + 1))
        throw Error("features.manifest_mismatch", "feature CSV header does not match manifest v" +
                                                      std::to_string(feature_manifest_version));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv(line);
        if (!fields || fields->size() != feature_count + 2)
            throw Error("features.bad_row", "feature CSV line " + std::to_string(line_no) + " malformed");
        FeatureVector row{};
        for (std::size_t f = 0; f < feature_count; ++f) {
            const auto& s = (*fields)[f + 1];
            auto res = std::from_chars(s.data(), s.data() + s.size(), row[f]);
            if (res.ec != std::errc{})
                throw Error("features.bad_row", "feature CSV line " + std::to_string(line_no) + " bad number");
        }
        m.user_ids.push_back((*fields)[0]);
        m.rows.push_back(row);
        m.labels.push_back((*fields)[feature_count + 1] == "1" ? 1 : 0);
    }
    if (!std::is_sorted(m.user_ids.begin(), m.user_ids.end()))
        throw Error("features.unsorted", "feature CSV rows must be ordered by user id");
    return m;
}

} // namespace shill
