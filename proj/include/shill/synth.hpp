#pragma once

// Labelled synthetic marketplaces with planted shill rings.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shill/common.hpp"
#include "shill/market_data.hpp"

namespace shill {

struct MarketConfig {
    std::size_t users = 20000;
    double shill_fraction = 0.05;

    // rings: sizes ring_min..ring_max, P(size = ring_min + i) proportional to ring_size_decay^i
    std::size_t ring_min = 3;
    std::size_t ring_max = 7;
    double ring_size_decay = 0.6;
    std::size_t ring_sales_max = 3;     // cheap sales per ordered member pair, 1..max
    double reciprocal_probability = 0.95;
    double ring_two_way_trade_probability = 0.3; // otherwise a member pair trades one way only
    double cross_ring_probability = 0.95; // ring i links to an earlier ring

    // benign market
    double seller_fraction = 0.35;
    double purchases_mean = 4.0;          // per user, geometric
    double preferential_weight = 0.7;     // chance a purchase follows past sales
    double feedback_probability = 0.6;    // buyer rates seller
    double seller_feedback_probability = 0.4;
    double neutral_rate = 0.04;
    double negative_rate = 0.03;
    Cents price_min = 300, price_max = 25000;
    double multi_quantity_probability = 0.12;

    // shill behaviour
    Cents cheap_price_min = 50, cheap_price_max = 400;
    double extra_activity_multiplier = 1.5;
    double shill_cheap_sale_share = 0.7;
    double shill_negative_rate = 0.08;
    double shill_default_state_probability = 0.72;
    double benign_default_state_probability = 0.25;

    // confounders
    double dormant_shill_fraction = 0.03;  // labelled shills that trade like benign users
    double power_seller_fraction = 0.08;   // benign sellers with many cheap sales
    double power_seller_multiplier = 6.0;
    double cheap_seller_fraction = 0.40;   // benign sellers who often list cheap items
    double social_fraction = 0.30;         // benign users in small reciprocal groups
    double heavy_buyer_fraction = 0.15;    // benign users buying at heavy_buyer_multiplier x the mean
    double heavy_buyer_multiplier = 4.0;
    double missing_birth_year_probability = 0.08;

    std::uint64_t seed = 42;

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0)) throw Error("config.invalid", std::string(name) + " must lie in [0, 1]");
        };
        prob(shill_fraction, "shill_fraction");
        prob(ring_size_decay, "ring_size_decay");
        prob(reciprocal_probability, "reciprocal_probability");
        prob(ring_two_way_trade_probability, "ring_two_way_trade_probability");
        prob(heavy_buyer_fraction, "heavy_buyer_fraction");
        prob(cross_ring_probability, "cross_ring_probability");
        prob(seller_fraction, "seller_fraction");
        prob(preferential_weight, "preferential_weight");
        prob(feedback_probability, "feedback_probability");
        prob(seller_feedback_probability, "seller_feedback_probability");
        prob(neutral_rate, "neutral_rate");
        prob(negative_rate, "negative_rate");
        prob(multi_quantity_probability, "multi_quantity_probability");
        prob(shill_cheap_sale_share, "shill_cheap_sale_share");
        prob(shill_negative_rate, "shill_negative_rate");
        prob(shill_default_state_probability, "shill_default_state_probability");
        prob(benign_default_state_probability, "benign_default_state_probability");
        prob(dormant_shill_fraction, "dormant_shill_fraction");
        prob(power_seller_fraction, "power_seller_fraction");
        prob(social_fraction, "social_fraction");
        prob(cheap_seller_fraction, "cheap_seller_fraction");
        prob(missing_birth_year_probability, "missing_birth_year_probability");
        if (neutral_rate + negative_rate > 1.0 || shill_negative_rate + neutral_rate > 1.0)
            throw Error("config.invalid", "neutral and negative rates sum above 1");
        if (ring_min < 2 || ring_max < ring_min) throw Error("config.invalid", "ring sizes must satisfy 2 <= min <= max");
        if (ring_sales_max < 1) throw Error("config.invalid", "ring_sales_max must be at least 1");
        if (users < 2) throw Error("config.invalid", "need at least 2 users");
        if (purchases_mean < 0 || extra_activity_multiplier < 0 || power_seller_multiplier < 0 ||
            heavy_buyer_multiplier < 0)
            throw Error("config.invalid", "rates must be non-negative");
        if (price_min < 1 || price_max < price_min || cheap_price_min < 1 || cheap_price_max < cheap_price_min)
            throw Error("config.invalid", "price ranges must be positive and ordered");
        auto shills = shill_count();
        if (shills > 0 && shills < ring_min)
            throw Error("synth.too_few_shills", "shill count " + std::to_string(shills) +
                                                    " is below the smallest ring size " + std::to_string(ring_min));
        if (shills >= users) throw Error("config.invalid", "no benign users left");
    }

    std::size_t shill_count() const {
        return static_cast<std::size_t>(shill_fraction * static_cast<double>(users) + 0.5);
    }
};

inline nlohmann::ordered_json to_json(const MarketConfig& c) {
    return {{"users", c.users},
            {"shill_fraction", c.shill_fraction},
            {"ring_min", c.ring_min},
            {"ring_max", c.ring_max},
            {"ring_size_decay", c.ring_size_decay},
            {"ring_sales_max", c.ring_sales_max},
            {"reciprocal_probability", c.reciprocal_probability},
            {"ring_two_way_trade_probability", c.ring_two_way_trade_probability},
            {"cross_ring_probability", c.cross_ring_probability},
            {"seller_fraction", c.seller_fraction},
            {"purchases_mean", c.purchases_mean},
            {"preferential_weight", c.preferential_weight},
            {"feedback_probability", c.feedback_probability},
            {"seller_feedback_probability", c.seller_feedback_probability},
            {"neutral_rate", c.neutral_rate},
            {"negative_rate", c.negative_rate},
            {"price_min", c.price_min},
            {"price_max", c.price_max},
            {"multi_quantity_probability", c.multi_quantity_probability},
            {"cheap_price_min", c.cheap_price_min},
            {"cheap_price_max", c.cheap_price_max},
            {"extra_activity_multiplier", c.extra_activity_multiplier},
            {"shill_cheap_sale_share", c.shill_cheap_sale_share},
            {"shill_negative_rate", c.shill_negative_rate},
            {"shill_default_state_probability", c.shill_default_state_probability},
            {"benign_default_state_probability", c.benign_default_state_probability},
            {"dormant_shill_fraction", c.dormant_shill_fraction},
            {"power_seller_fraction", c.power_seller_fraction},
            {"power_seller_multiplier", c.power_seller_multiplier},
            {"cheap_seller_fraction", c.cheap_seller_fraction},
            {"social_fraction", c.social_fraction},
            {"heavy_buyer_fraction", c.heavy_buyer_fraction},
            {"heavy_buyer_multiplier", c.heavy_buyer_multiplier},
            {"missing_birth_year_probability", c.missing_birth_year_probability},
            {"seed", c.seed}};
}

struct SyntheticMarket {
    std::vector<std::string> user_ids; // sorted
    std::vector<TransactionRecord> transactions;
    std::vector<FeedbackRecord> feedback;
    std::vector<UserProfile> profiles;
    LabelSet labels;
    std::vector<std::vector<std::string>> rings;
    std::vector<std::string> dormant_shills, unringed_shills;
    nlohmann::ordered_json provenance;
};

namespace detail {

inline constexpr std::array<const char*, 50> state_names{
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS", "KY",
    "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND",
    "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY"};

constexpr Timestamp market_start = 1262304000; // 2010-01-01
constexpr Timestamp market_end = 1356998399;   // 2012-12-31T23:59:59
constexpr Timestamp registration_start = 946684800; // 2000-01-01
constexpr Timestamp registration_end = 1262217600;   // 2009-12-31

class MarketBuilder {
public:
    MarketBuilder(const MarketConfig& c, std::uint64_t seed)
        : c_(c), rng_(derive_seed(seed, "synth")), seed_(seed) {}

    SyntheticMarket build() {
        c_.validate();
        const std::size_t n = c_.users;
        m_.user_ids.resize(n);
        char buf[32];
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "u%06zu", i);
            m_.user_ids[i] = buf;
        }
        assign_roles();
        make_profiles();
        benign_market();
        power_sellers();
        social_groups();
        shill_rings();
        shill_external();
        finish();
        return std::move(m_);
    }

private:
    enum Role : std::uint8_t { benign, power, shill_active, shill_dormant };

    std::size_t geometric(double mean) {
        if (mean <= 0) return 0;
        const double q = mean / (1.0 + mean);
        std::size_t k = 0;
        while (k < 100000 && rng_.chance(q)) ++k;
        return k;
    }

    int rating(double negative) {
        double u = rng_.uniform();
        if (u < negative) return -1;
        if (u < negative + c_.neutral_rate) return 0;
        return 1;
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(rng_.below(v.size()))];
    }

    /// One sale; returns its timestamp.
    Timestamp sale(std::size_t buyer, std::size_t seller, Cents lo, Cents hi) {
        std::int64_t qty = rng_.chance(c_.multi_quantity_probability) ? rng_.between(2, 5) : 1;
        Cents price = rng_.between(lo, hi);
        Timestamp earliest = std::max({market_start, registered_[buyer], registered_[seller]});
        Timestamp t = rng_.between(earliest, market_end);
        char product[32];
        std::snprintf(product, sizeof product, "p%06zu-%02lld", seller, static_cast<long long>(rng_.below(20)));
        m_.transactions.push_back({m_.user_ids[buyer], m_.user_ids[seller], product, qty, price, t});
        return t;
    }

    void rate(std::size_t giver, std::size_t receiver, int r, Timestamp after) {
        Timestamp t = std::min(market_end, after + rng_.between(3600, 14 * seconds_per_day));
        m_.feedback.push_back({m_.user_ids[giver], m_.user_ids[receiver], r, t});
    }

    /// Ordinary sale with the buyer/seller feedback habits of the market.
    void trade(std::size_t buyer, std::size_t seller, Cents lo, Cents hi, double negative) {
        Timestamp t = sale(buyer, seller, lo, hi);
        if (rng_.chance(c_.feedback_probability)) rate(buyer, seller, rating(negative), t);
        if (rng_.chance(c_.seller_feedback_probability)) rate(seller, buyer, rating(c_.negative_rate), t);
    }

    void assign_roles() {
        const std::size_t n = c_.users, s = c_.shill_count();
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng_.shuffle(perm);
        role_.assign(n, benign);
        std::vector<std::size_t> shills(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s));
        auto dormant = static_cast<std::size_t>(c_.dormant_shill_fraction * static_cast<double>(s) + 0.5);
        for (std::size_t i = 0; i < s; ++i) {
            role_[shills[i]] = i < dormant ? shill_dormant : shill_active;
            (i < dormant ? dormant_ : active_).push_back(shills[i]);
        }
        for (std::size_t i = s; i < n; ++i) benign_.push_back(perm[i]);
        std::sort(benign_.begin(), benign_.end());
        std::sort(dormant_.begin(), dormant_.end());
        // sellers and power sellers among benign users
        for (auto u : benign_)
            if (rng_.chance(c_.seller_fraction)) sellers_.push_back(u);
        if (sellers_.empty()) sellers_.push_back(benign_.front());
        cheap_.assign(n, 0);
        for (auto u : sellers_) {
            if (rng_.chance(c_.power_seller_fraction)) {
                role_[u] = power;
                power_.push_back(u);
            }
            if (rng_.chance(c_.cheap_seller_fraction)) cheap_[u] = 1;
        }
    }

    void make_profiles() {
        registered_.resize(c_.users);
        for (std::size_t i = 0; i < c_.users; ++i) {
            bool shill = role_[i] == shill_active || role_[i] == shill_dormant;
            UserProfile p;
            p.user_id = m_.user_ids[i];
            if (!rng_.chance(c_.missing_birth_year_probability)) p.birth_year = static_cast<int>(rng_.between(1940, 1995));
            double def = shill ? c_.shill_default_state_probability : c_.benign_default_state_probability;
            if (rng_.chance(def)) p.state_text = "default";
            else p.state_text = state_names[rng_.below(shill ? 20 : state_names.size())];
            Timestamp day = rng_.between(registration_start / seconds_per_day, registration_end / seconds_per_day);
            p.registration_date = day * seconds_per_day;
            registered_[i] = p.registration_date;
            m_.profiles.push_back(std::move(p));
        }
    }

    std::size_t choose_seller() {
        if (!tickets_.empty() && rng_.chance(c_.preferential_weight)) return pick(tickets_);
        return pick(sellers_);
    }

    void benign_market() {
        // every non-active user buys; dormant shills blend in here
        for (std::size_t u = 0; u < c_.users; ++u) {
            if (role_[u] == shill_active) continue;
            double mean = c_.purchases_mean;
            if (rng_.chance(c_.heavy_buyer_fraction)) mean *= c_.heavy_buyer_multiplier;
            std::size_t k = geometric(mean);
            for (std::size_t j = 0; j < k; ++j) {
                std::size_t s = choose_seller();
                if (s == u) continue;
                if (cheap_[s] && rng_.chance(0.5)) trade(u, s, c_.cheap_price_min, c_.cheap_price_max, c_.negative_rate);
                else trade(u, s, c_.price_min, c_.price_max, c_.negative_rate);
                tickets_.push_back(s);
            }
        }
    }

    void power_sellers() {
        for (auto s : power_) {
            std::size_t k = geometric(c_.purchases_mean * c_.power_seller_multiplier);
            for (std::size_t j = 0; j < k; ++j) {
                std::size_t b = pick(benign_);
                if (b == s) continue;
                bool cheap = rng_.chance(0.6);
                trade(b, s, cheap ? c_.cheap_price_min : c_.price_min, cheap ? c_.cheap_price_max : c_.price_max,
                      c_.negative_rate);
            }
        }
    }

    void social_groups() {
        std::vector<std::size_t> members;
        for (auto u : benign_)
            if (rng_.chance(c_.social_fraction)) members.push_back(u);
        rng_.shuffle(members);
        std::size_t i = 0;
        while (i + 1 < members.size()) {
            std::size_t size = std::min<std::size_t>(members.size() - i, static_cast<std::size_t>(rng_.between(2, 3)));
            for (std::size_t a = i; a < i + size; ++a)
                for (std::size_t b = i; b < i + size; ++b) {
                    if (a == b || !rng_.chance(0.7)) continue;
                    Timestamp t = sale(members[b], members[a], c_.price_min, c_.price_max);
                    if (rng_.chance(0.8)) rate(members[b], members[a], 1, t);
                    if (rng_.chance(0.8)) rate(members[a], members[b], 1, t);
                }
            i += size;
        }
    }

    std::size_t ring_size() {
        std::size_t s = c_.ring_min;
        while (s < c_.ring_max && rng_.chance(c_.ring_size_decay)) ++s;
        return s;
    }

    void cheap_pair_sale(std::size_t seller, std::size_t buyer) {
        Timestamp t = sale(buyer, seller, c_.cheap_price_min, c_.cheap_price_max);
        if (rng_.chance(c_.reciprocal_probability)) rate(buyer, seller, 1, t);
        if (rng_.chance(c_.reciprocal_probability)) rate(seller, buyer, 1, t);
    }

    void shill_rings() {
        std::vector<std::size_t> pool = active_;
        rng_.shuffle(pool);
        std::size_t i = 0;
        while (i < pool.size()) {
            std::size_t s = ring_size();
            if (pool.size() - i < s) {
                if (pool.size() - i >= c_.ring_min) s = pool.size() - i;
                else break;
            }
            rings_.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(i),
                                pool.begin() + static_cast<std::ptrdiff_t>(i + s));
            i += s;
        }
        for (; i < pool.size(); ++i) unringed_.push_back(pool[i]);

        for (const auto& ring : rings_)
            for (std::size_t i = 0; i < ring.size(); ++i)
                for (std::size_t j = i + 1; j < ring.size(); ++j) {
                    auto a = ring[i], b = ring[j];
                    bool two_way = rng_.chance(c_.ring_two_way_trade_probability);
                    if (!two_way && rng_.chance(0.5)) std::swap(a, b);
                    for (int dir = 0; dir < (two_way ? 2 : 1); ++dir) {
                        auto k = static_cast<std::size_t>(rng_.between(1, static_cast<std::int64_t>(c_.ring_sales_max)));
                        for (std::size_t t = 0; t < k; ++t) cheap_pair_sale(a, b);
                        std::swap(a, b);
                    }
                }
        for (std::size_t r = 1; r < rings_.size(); ++r) {
            if (!rng_.chance(c_.cross_ring_probability)) continue;
            const auto& other = rings_[static_cast<std::size_t>(rng_.below(r))];
            cheap_pair_sale(pick(rings_[r]), pick(other));
        }
    }

    void shill_external() {
        for (auto s : active_) {
            double activity = c_.extra_activity_multiplier * (0.4 + 1.2 * rng_.uniform());
            std::size_t sells = geometric(c_.purchases_mean * activity);
            for (std::size_t j = 0; j < sells; ++j) {
                bool cheap = rng_.chance(c_.shill_cheap_sale_share);
                trade(pick(benign_), s, cheap ? c_.cheap_price_min : c_.price_min,
                      cheap ? c_.cheap_price_max : c_.price_max, c_.shill_negative_rate);
            }
            std::size_t buys = geometric(c_.purchases_mean * activity * 0.6);
            for (std::size_t j = 0; j < buys; ++j) {
                std::size_t seller = choose_seller();
                Timestamp t = sale(s, seller, c_.price_min, c_.price_max);
                if (rng_.chance(c_.feedback_probability)) rate(s, seller, rating(c_.shill_negative_rate), t);
                if (rng_.chance(c_.seller_feedback_probability)) rate(seller, s, rating(c_.negative_rate), t);
            }
        }
    }

    void finish() {
        auto ids = [&](const std::vector<std::size_t>& v) {
            std::vector<std::string> out;
            for (auto i : v) out.push_back(m_.user_ids[i]);
            std::sort(out.begin(), out.end());
            return out;
        };
        std::vector<std::size_t> shills = active_;
        shills.insert(shills.end(), dormant_.begin(), dormant_.end());
        m_.labels.shill_ids = ids(shills);
        for (const auto& r : rings_) m_.rings.push_back(ids(r));
        std::sort(m_.rings.begin(), m_.rings.end());
        m_.dormant_shills = ids(dormant_);
        m_.unringed_shills = ids(unringed_);
        auto cfg = to_json(c_);
        cfg["seed"] = seed_;
        m_.provenance = {{"generator", "shill-synth"},
                         {"version", 1},
                         {"seed", seed_},
                         {"config", cfg},
                         {"counts",
                          {{"users", c_.users},
                           {"shills", m_.labels.size()},
                           {"transactions", m_.transactions.size()},
                           {"feedback", m_.feedback.size()}}},
                         {"rings", m_.rings},
                         {"dormant_shills", m_.dormant_shills},
                         {"unringed_shills", m_.unringed_shills},
                         {"power_sellers", ids(power_)}};
    }

    MarketConfig c_;
    Rng rng_;
    std::uint64_t seed_;
    SyntheticMarket m_;
    std::vector<Role> role_;
    std::vector<char> cheap_;
    std::vector<Timestamp> registered_;
    std::vector<std::size_t> benign_, sellers_, power_, active_, dormant_, unringed_, tickets_;
    std::vector<std::vector<std::size_t>> rings_;
};

} // namespace detail

/// Deterministic in (config, seed).
inline SyntheticMarket generate(const MarketConfig& config, std::uint64_t seed) {
    return detail::MarketBuilder(config, seed).build();
}

inline SyntheticMarket generate(const MarketConfig& config) { return generate(config, config.seed); }

struct CorpusPaths {
    std::filesystem::path transactions, feedback, profiles, labels, provenance;
};

inline CorpusPaths corpus_paths(const std::filesystem::path& dir, InputFormat format) {
    const char* ext = format == InputFormat::csv ? ".csv" : ".jsonl";
    return {dir / (std::string("transactions") + ext), dir / (std::string("feedback") + ext),
            dir / (std::string("profiles") + ext), dir / "labels.txt", dir / "provenance.json"};
}

/// Writes the corpus files into `dir` (created if needed).
inline CorpusPaths write_market(const SyntheticMarket& m, const std::filesystem::path& dir, InputFormat format) {
    std::filesystem::create_directories(dir);
    auto p = corpus_paths(dir, format);
    auto open = [](const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("io.write", "cannot write " + path.string());
        return out;
    };
    {
        auto out = open(p.transactions);
        write_transactions(out, m.transactions, format);
    }
    {
        auto out = open(p.feedback);
        write_feedback(out, m.feedback, format);
    }
    {
        auto out = open(p.profiles);
        write_profiles(out, m.profiles, format);
    }
    {
        auto out = open(p.labels);
        write_labels(out, m.labels);
    }
    {
        auto out = open(p.provenance);
        out << m.provenance.dump(2) << '\n';
    }
    return p;
}

} // namespace shill
