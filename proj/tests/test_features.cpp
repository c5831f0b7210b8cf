#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "shill/pipeline.hpp"

using namespace shill;

namespace {

FeatureMatrix features_of(const Corpus& c) {
    auto g = build_graphs(c);
    return corpus_features(c, g);
}

Corpus hand_corpus() {
    const Timestamp d0 = 1338508800; // 2012-06-01
    Corpus c;
    c.transactions = {
        {"a", "b", "p1", 2, 350, d0},
        {"a", "b", "p2", 1, 1000, d0 + 86400},
        {"b", "a", "p3", 3, 10, d0 + 2 * 86400},
        {"c", "a", "p4", 1, 99, d0 + 10 * 86400},
        {"d", "d", "p5", 1, 500, d0},
    };
    c.feedback = {
        {"a", "b", 1, d0}, {"a", "b", -1, d0}, {"b", "a", 1, d0}, {"c", "a", 0, d0}, {"c", "b", -1, d0},
    };
    c.profiles = {
        {"a", 1970, "default", d0 - 100 * 86400},
        {"b", std::nullopt, "CA", d0 - 86400},
        {"c", 1985, "NY", d0 + 30 * 86400}, // registers after trading
    };
    c.labels.shill_ids = {"a", "c"};
    return c;
}

MarketConfig small(std::size_t users) {
    MarketConfig c;
    c.users = users;
    return c;
}

} // namespace

TEST(Features, HandCorpusValues) {
    auto c = hand_corpus();
    auto m = features_of(c);
    ASSERT_EQ(m.user_ids, (std::vector<std::string>{"a", "b", "c", "d"}));
    const auto& a = m.rows[0];
    EXPECT_EQ(a[BuyTransNum], 2);
    EXPECT_EQ(a[SellTransNum], 2);
    EXPECT_EQ(a[UniqueSellers], 1);
    EXPECT_EQ(a[UniqueBuyers], 2);
    EXPECT_EQ(a[BidirTransUsers], 1);
    EXPECT_DOUBLE_EQ(a[MaxBuyPrice], 10.0);
    EXPECT_DOUBLE_EQ(a[MinBuyPrice], 7.0);
    EXPECT_EQ(a[MaxBuyQuantity], 2);
    EXPECT_EQ(a[TotalBuyQuantity], 3);
    EXPECT_DOUBLE_EQ(a[TotalBuyAmount], 17.0);
    EXPECT_DOUBLE_EQ(a[MinSellPrice], 0.3);
    EXPECT_DOUBLE_EQ(a[MaxSellPrice], 0.99);
    EXPECT_EQ(a[GvnFdbkNum], 2);
    EXPECT_EQ(a[GvnUniqueFdbk], 1);
    EXPECT_EQ(a[RcvFdbkNum], 2);
    EXPECT_EQ(a[BidirFdbkUsers], 1);
    EXPECT_EQ(a[GvnFdbkRSum], 0);
    EXPECT_EQ(a[RcvFdbkAvg], 0.5);
    EXPECT_EQ(a[BirthYear], 1970);
    EXPECT_EQ(a[State], double(crc32_state("default")));
    EXPECT_EQ(a[ActiveDays], 110);
    EXPECT_EQ(m.labels, (std::vector<int>{1, 0, 1, 0}));

    const auto& b = m.rows[1];
    EXPECT_EQ(b[BirthYear], 0);
    EXPECT_EQ(b[GvnFdbkAvg], 1.0);
    EXPECT_EQ(b[RcvNegFdbk], 2);
    EXPECT_EQ(b[RcvFdbkRSum], -1);
    EXPECT_DOUBLE_EQ(b[MaxBuyPrice], 0.3);

    // c never sells: empty max/min stay 0
    EXPECT_EQ(m.rows[2][MaxSellPrice], 0);
    EXPECT_EQ(m.rows[2][MinSellPrice], 0);
    EXPECT_EQ(m.rows[2][ActiveDays], 0);
    // self trade counts on both sides; no profile gives zeros
    const auto& d = m.rows[3];
    EXPECT_EQ(d[BuyTransNum], 1);
    EXPECT_EQ(d[SellTransNum], 1);
    EXPECT_EQ(d[BidirTransUsers], 1);
    EXPECT_EQ(d[State], 0);
    EXPECT_EQ(d[BirthYear], 0);

    bool warned = false;
    for (const auto& w : m.warnings) warned = warned || w.rfind("c:", 0) == 0;
    EXPECT_TRUE(warned);
}

TEST(Features, MatchRecountOracle) {
    auto mk = generate(small(500), 13);
    auto c = corpus_of(mk);
    auto m = features_of(c);
    ASSERT_EQ(m.size(), 500u);
    for (std::size_t i = 0; i < m.size(); i += 7) {
        auto want = oracle::recount_features(m.user_ids[i], c.transactions, c.feedback, c.profiles);
        for (std::size_t f = 0; f < feature_count; ++f)
            ASSERT_NEAR(m.rows[i][f], want[f], 1e-9 * std::max(1.0, std::abs(want[f])))
                << m.user_ids[i] << " " << feature_names()[f];
    }
}

TEST(Features, IdentitiesBoundsAndConservation) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto c = corpus_of(generate(small(1500), seed));
        auto m = features_of(c);
        std::int64_t buy = 0, sell = 0;
        for (const auto& r : m.rows) {
            ASSERT_EQ(r[GvnFdbkRSum], r[GvnPosFdbk] - r[GvnNegFdbk]);
            ASSERT_EQ(r[RcvFdbkRSum], r[RcvPosFdbk] - r[RcvNegFdbk]);
            ASSERT_LE(r[GvnPosFdbk] + r[GvnNegFdbk], r[GvnFdbkNum]);
            ASSERT_LE(r[RcvPosFdbk] + r[RcvNegFdbk], r[RcvFdbkNum]);
            ASSERT_LE(r[UniqueSellers], r[BuyTransNum]);
            ASSERT_LE(r[UniqueBuyers], r[SellTransNum]);
            ASSERT_LE(r[BidirTransUsers], std::min(r[UniqueSellers], r[UniqueBuyers]));
            ASSERT_LE(r[BidirFdbkUsers], std::min(r[GvnUniqueFdbk], r[RcvUniqueFdbk]));
            if (r[BuyTransNum] > 0) {
                ASSERT_LE(r[MinBuyPrice], r[MaxBuyPrice]);
                ASSERT_LE(r[MaxBuyQuantity], r[TotalBuyQuantity]);
            }
            if (r[SellTransNum] > 0) {
                ASSERT_LE(r[MinSellPrice], r[MaxSellPrice]);
            }
            ASSERT_GE(r[GvnFdbkAvg], -1.0);
            ASSERT_LE(r[GvnFdbkAvg], 1.0);
            for (std::size_t f = 0; f < feature_count; ++f) {
                bool signed_feature = f == GvnFdbkRSum || f == RcvFdbkRSum || f == GvnFdbkAvg || f == RcvFdbkAvg;
                if (!signed_feature) {
                    ASSERT_GE(r[f], 0.0);
                }
            }
            buy += std::llround(r[TotalBuyAmount] * 100);
            sell += std::llround(r[TotalSellAmount] * 100);
        }
        EXPECT_EQ(buy, sell);
    }
}

TEST(Features, DeterministicCsvRoundTrip) {
    auto c = corpus_of(generate(small(400), 4));
    std::ostringstream a, b;
    write_feature_csv(a, features_of(c));
    write_feature_csv(b, features_of(c));
    EXPECT_EQ(a.str(), b.str());

    std::istringstream in(a.str());
    auto back = read_feature_csv(in);
    auto orig = features_of(c);
    EXPECT_EQ(back.user_ids, orig.user_ids);
    EXPECT_EQ(back.labels, orig.labels);
    EXPECT_EQ(back.rows, orig.rows);
}

TEST(Features, CsvManifestChecks) {
    std::istringstream bad("user_id,Buy-Trans-Num,label\nu1,1,0\n");
    EXPECT_THROW(read_feature_csv(bad), Error);
    auto schema = feature_schema_json();
    EXPECT_EQ(schema["features"]["State"], 29);
    EXPECT_EQ(schema["manifest_hash"], feature_manifest_hash());
    EXPECT_EQ(feature_names().size(), feature_count);
}

TEST(Features, UnknownUsersRejected) {
    auto c = hand_corpus();
    auto g = build_graphs(c);
    try {
        extract_all({"a", "zz"}, g.users, g.transactions, g.feedback, c.profiles, c.labels);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "features.unknown_users");
    }
}

TEST(CohortRatios, IdenticalCohortsGiveOne) {
    FeatureMatrix m;
    FeatureVector r{};
    r[BuyTransNum] = 3;
    r[GvnNegFdbk] = 0;
    m.user_ids = {"a", "b"};
    m.rows = {r, r};
    m.labels = {1, 0};
    for (const auto& x : cohort_feature_ratios(m)) {
        EXPECT_EQ(x.mean_ratio, 1.0);
        EXPECT_EQ(x.median_ratio, 1.0);
    }
}

TEST(CohortRatios, HandBuiltFourUsers) {
    FeatureMatrix m;
    m.user_ids = {"a", "b", "c", "d"};
    m.labels = {1, 1, 0, 0};
    m.rows.assign(4, FeatureVector{});
    // Sell-Trans-Num: shills 10, 2; benign 1, 3
    m.rows[0][SellTransNum] = 10;
    m.rows[1][SellTransNum] = 2;
    m.rows[2][SellTransNum] = 1;
    m.rows[3][SellTransNum] = 3;
    // Gvn-Neg-Fdbk: shills 1, 2; benign 0, 0
    m.rows[0][GvnNegFdbk] = 1;
    m.rows[1][GvnNegFdbk] = 2;
    auto r = cohort_feature_ratios(m);
    EXPECT_DOUBLE_EQ(r[SellTransNum].mean_ratio, 6.0 / 2.0);
    EXPECT_DOUBLE_EQ(r[SellTransNum].median_ratio, 6.0 / 2.0);
    EXPECT_TRUE(std::isinf(r[GvnNegFdbk].median_ratio));
    EXPECT_TRUE(std::isinf(r[GvnNegFdbk].mean_ratio));
    EXPECT_EQ(r[BuyTransNum].mean_ratio, 1.0);

    m.labels = {1, 1, 1, 1};
    EXPECT_THROW(cohort_feature_ratios(m), Error);
}
