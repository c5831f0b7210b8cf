#pragma once

// Input corpora: transactions, feedback, user profiles and the shill label
// list. Records are plain values; parsing reports bad rows instead of
// dropping them.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "shill/common.hpp"

namespace shill {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

/// Monetary value in US cents.
using Cents = std::int64_t;

constexpr Timestamp seconds_per_day = 86400;

struct TransactionRecord {
    std::string buyer_id;
    std::string seller_id;
    std::string product_id;
    std::int64_t quantity = 1;
    Cents unit_price = 0;
    Timestamp timestamp = 0;

    Cents amount() const { return quantity * unit_price; }
    bool is_self_trade() const { return buyer_id == seller_id; }
};

struct FeedbackRecord {
    std::string giver_id;
    std::string receiver_id;
    int rating = 0; // -1, 0 or +1
    Timestamp timestamp = 0;
};

struct UserProfile {
    std::string user_id;
    std::optional<int> birth_year;
    std::string state_text;
    Timestamp registration_date = 0; // midnight UTC
};

struct LabelSet {
    std::vector<std::string> shill_ids; // sorted, unique
    std::size_t duplicate_count = 0;

    bool contains(std::string_view id) const {
        return std::binary_search(shill_ids.begin(), shill_ids.end(), id);
    }
    std::size_t size() const { return shill_ids.size(); }
};

enum class InputFormat { csv, jsonl };

struct ParseOptions {
    /// Fraction of bad rows above which parsing fails as a whole.
    double max_bad_fraction = 0.10;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

template <class Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<RowError> errors;
    std::size_t rows_seen = 0;
};

// ---------------------------------------------------------------------------
// CRC-32 state encoding

/// Standard CRC-32 (IEEE 802.3, reflected 0xEDB88320) of the UTF-8 bytes.
inline std::uint32_t crc32_state(std::string_view state_text) {
    boost::crc_32_type crc;
    crc.process_bytes(state_text.data(), state_text.size());
    return crc.checksum();
}

// ---------------------------------------------------------------------------
// Scalar codecs

namespace detail {

inline bool parse_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        i += len;
    }
    return true;
}

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool field_was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty() && !field_was_quoted) {
            quoted = true;
            field_was_quoted = true;
        } else if (c == ',') {
            fields.push_back(field_was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            field_was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(field_was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

inline std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace detail

/// Identifiers are non-empty and free of whitespace, commas, quotes and
/// control characters.
inline bool valid_user_id(std::string_view id) {
    if (id.empty()) return false;
    for (unsigned char c : id)
        if (c <= 0x20 || c == ',' || c == '"' || c == 0x7F) return false;
    return detail::valid_utf8(id);
}

/// RFC 3339 instant ("2012-06-01T00:00:00Z", optional fraction and numeric
/// offset) or a bare date, which is taken as midnight UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    s = detail::trim(s);
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    std::int64_t y, mo, d;
    if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), mo) ||
        !detail::parse_int(s.substr(8, 2), d))
        return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{year{static_cast<int>(y)}, month{static_cast<unsigned>(mo)},
                       day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    Timestamp t = static_cast<Timestamp>(sys_days{ymd}.time_since_epoch().count()) * seconds_per_day;
    if (s.size() == 10) return t;

    if (s.size() < 20 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || s[13] != ':' ||
        s[16] != ':')
        return std::nullopt;
    std::int64_t hh, mm, ss;
    if (!detail::parse_int(s.substr(11, 2), hh) || !detail::parse_int(s.substr(14, 2), mm) ||
        !detail::parse_int(s.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60)
        return std::nullopt;
    t += hh * 3600 + mm * 60 + ss;
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
    }
    std::string_view zone = s.substr(pos);
    if (zone == "Z" || zone == "z") return t;
    if (zone.size() != 6 || (zone[0] != '+' && zone[0] != '-') || zone[3] != ':')
        return std::nullopt;
    std::int64_t oh, om;
    if (!detail::parse_int(zone.substr(1, 2), oh) || !detail::parse_int(zone.substr(4, 2), om))
        return std::nullopt;
    std::int64_t offset = oh * 3600 + om * 60;
    return zone[0] == '+' ? t - offset : t + offset;
}

/// Day number (days since epoch) of a timestamp, flooring toward -inf.
inline std::int64_t day_number(Timestamp t) {
    return t >= 0 ? t / seconds_per_day : -((-t + seconds_per_day - 1) / seconds_per_day);
}

inline std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    std::int64_t days = day_number(t);
    std::int64_t rem = t - days * seconds_per_day;
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

inline std::string format_date(Timestamp t) { return format_timestamp(t).substr(0, 10); }

/// Decimal dollars to cents; more than two fractional digits round half up.
inline std::optional<Cents> parse_price(std::string_view s) {
    s = detail::trim(s);
    if (s.empty() || s.front() == '-') return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    std::int64_t w = 0;
    if (!whole.empty() && !detail::parse_int(whole, w)) return std::nullopt;
    for (char c : frac)
        if (c < '0' || c > '9') return std::nullopt;
    Cents cents = w * 100;
    if (!frac.empty()) cents += (frac[0] - '0') * 10;
    if (frac.size() > 1) cents += frac[1] - '0';
    if (frac.size() > 2 && frac[2] >= '5') cents += 1;
    return cents;
}

inline std::string format_price(Cents c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(c / 100),
                  static_cast<long long>(c % 100));
    return buf;
}

// ---------------------------------------------------------------------------
// Row decoding

namespace detail {

/// Fields of one input row, either CSV columns or JSON object members,
/// addressed by column index.
struct RowFields {
    std::vector<std::string> values;
};

inline std::string json_scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", v.get<double>());
        return buf;
    }
    if (v.is_null()) return {};
    return v.dump();
}

/// Reads rows of `columns` from a stream in the given format and hands each to
/// `decode`, which returns an error message or nullopt on success.
template <class Record, class Decode>
ParseResult<Record> parse_rows(std::istream& in, InputFormat format,
                               const std::vector<std::string_view>& columns,
                               const ParseOptions& options, std::string_view what,
                               Decode&& decode) {
    if (!in) throw Error("parse.unreadable", std::string(what) + ": stream is not readable");
    ParseResult<Record> result;
    std::string line;
    std::size_t line_no = 0;
    bool header_done = format == InputFormat::jsonl;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!valid_utf8(line)) {
            if (!header_done) throw Error("parse.encoding", std::string(what) + ": header is not UTF-8");
            ++result.rows_seen;
            result.errors.push_back({line_no, "row is not valid UTF-8"});
            continue;
        }
        if (!header_done) {
            auto header = split_csv(line);
            if (!header || header->size() != columns.size() ||
                !std::equal(columns.begin(), columns.end(), header->begin()))
                throw Error("parse.header", std::string(what) + ": expected header row with columns " +
                                                [&] {
                                                    std::string s;
                                                    for (auto c : columns) s += (s.empty() ? "" : ",") + std::string(c);
                                                    return s;
                                                }());
            header_done = true;
            continue;
        }
        ++result.rows_seen;
        RowFields row;
        if (format == InputFormat::csv) {
            auto fields = split_csv(line);
            if (!fields) {
                result.errors.push_back({line_no, "unterminated quoted field"});
                continue;
            }
            if (fields->size() != columns.size()) {
                result.errors.push_back({line_no, "expected " + std::to_string(columns.size()) +
                                                      " fields, got " + std::to_string(fields->size())});
                continue;
            }
            row.values = std::move(*fields);
        } else {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                result.errors.push_back({line_no, std::string("invalid JSON: ") + e.what()});
                continue;
            }
            if (!obj.is_object()) {
                result.errors.push_back({line_no, "JSON row is not an object"});
                continue;
            }
            bool ok = true;
            for (auto col : columns) {
                auto it = obj.find(std::string(col));
                if (it == obj.end()) {
                    result.errors.push_back({line_no, "missing key '" + std::string(col) + "'"});
                    ok = false;
                    break;
                }
                row.values.push_back(json_scalar_text(*it));
            }
            if (!ok) continue;
        }
        Record rec;
        if (auto err = decode(row.values, rec)) {
            result.errors.push_back({line_no, *err});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    if (in.bad()) throw Error("parse.unreadable", std::string(what) + ": read failure");
    if (result.rows_seen > 0 &&
        static_cast<double>(result.errors.size()) >
            options.max_bad_fraction * static_cast<double>(result.rows_seen))
        throw Error("parse.too_many_bad_rows",
                    std::string(what) + ": " + std::to_string(result.errors.size()) + " of " +
                        std::to_string(result.rows_seen) + " rows rejected (first at line " +
                        std::to_string(result.errors.front().line) + ": " +
                        result.errors.front().message + ")");
    return result;
}

} // namespace detail

inline const std::vector<std::string_view>& transaction_columns() {
    static const std::vector<std::string_view> cols{"buyer_id", "seller_id", "product_id",
                                                    "quantity", "unit_price", "timestamp"};
    return cols;
}
inline const std::vector<std::string_view>& feedback_columns() {
    static const std::vector<std::string_view> cols{"giver_id", "receiver_id", "rating", "timestamp"};
    return cols;
}
inline const std::vector<std::string_view>& profile_columns() {
    static const std::vector<std::string_view> cols{"user_id", "birth_year", "state",
                                                    "registration_date"};
    return cols;
}

inline ParseResult<TransactionRecord> parse_transactions(std::istream& in, InputFormat format,
                                                         const ParseOptions& options = {}) {
    return detail::parse_rows<TransactionRecord>(
        in, format, transaction_columns(), options, "transactions",
        [](const std::vector<std::string>& f, TransactionRecord& r) -> std::optional<std::string> {
            if (!valid_user_id(f[0])) return "invalid buyer_id";
            if (!valid_user_id(f[1])) return "invalid seller_id";
            if (f[2].empty()) return "empty product_id";
            std::int64_t q;
            if (!detail::parse_int(f[3], q)) return "quantity is not an integer";
            if (q < 1) return "quantity must be >= 1";
            auto price = parse_price(f[4]);
            if (!price) return "unit_price must be a non-negative decimal";
            auto ts = parse_timestamp(f[5]);
            if (!ts) return "timestamp is not RFC 3339";
            r = {f[0], f[1], f[2], q, *price, *ts};
            return std::nullopt;
        });
}

inline ParseResult<FeedbackRecord> parse_feedback(std::istream& in, InputFormat format,
                                                  const ParseOptions& options = {}) {
    return detail::parse_rows<FeedbackRecord>(
        in, format, feedback_columns(), options, "feedback",
        [](const std::vector<std::string>& f, FeedbackRecord& r) -> std::optional<std::string> {
            if (!valid_user_id(f[0])) return "invalid giver_id";
            if (!valid_user_id(f[1])) return "invalid receiver_id";
            std::int64_t rating;
            if (!detail::parse_int(f[2], rating)) return "rating is not an integer";
            if (rating < -1 || rating > 1) return "rating must be -1, 0 or +1";
            auto ts = parse_timestamp(f[3]);
            if (!ts) return "timestamp is not RFC 3339";
            r = {f[0], f[1], static_cast<int>(rating), *ts};
            return std::nullopt;
        });
}

inline ParseResult<UserProfile> parse_profiles(std::istream& in, InputFormat format,
                                               const ParseOptions& options = {}) {
    std::unordered_set<std::string> seen;
    return detail::parse_rows<UserProfile>(
        in, format, profile_columns(), options, "profiles",
        [&seen](const std::vector<std::string>& f, UserProfile& r) -> std::optional<std::string> {
            if (!valid_user_id(f[0])) return "invalid user_id";
            if (seen.count(f[0])) return "duplicate user_id '" + f[0] + "'";
            std::optional<int> birth;
            if (!f[1].empty()) {
                std::int64_t y;
                if (!detail::parse_int(f[1], y) || y < 0 || y > 9999)
                    return "birth_year must be a year or empty";
                birth = static_cast<int>(y);
            }
            auto reg = parse_timestamp(f[3]);
            if (!reg) return "registration_date is not a date";
            seen.insert(f[0]);
            r = {f[0], birth, f[2], day_number(*reg) * seconds_per_day};
            return std::nullopt;
        });
}

/// One id per line; blank lines are ignored and duplicates counted.
inline LabelSet load_label_list(std::istream& in) {
    if (!in) throw Error("parse.unreadable", "labels: stream is not readable");
    LabelSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto id = detail::trim(line);
        if (id.empty()) continue;
        if (!valid_user_id(id))
            throw Error("labels.invalid_id", "labels: invalid user id at line " + std::to_string(line_no));
        set.shill_ids.emplace_back(id);
    }
    std::sort(set.shill_ids.begin(), set.shill_ids.end());
    auto last = std::unique(set.shill_ids.begin(), set.shill_ids.end());
    set.duplicate_count = static_cast<std::size_t>(set.shill_ids.end() - last);
    set.shill_ids.erase(last, set.shill_ids.end());
    return set;
}

// ---------------------------------------------------------------------------
// Serialization, mirror of the parsers.

inline void write_transactions(std::ostream& out, const std::vector<TransactionRecord>& rows,
                               InputFormat format) {
    if (format == InputFormat::csv) {
        out << "buyer_id,seller_id,product_id,quantity,unit_price,timestamp\n";
        for (const auto& r : rows)
            out << r.buyer_id << ',' << r.seller_id << ',' << detail::csv_escape(r.product_id) << ','
                << r.quantity << ',' << format_price(r.unit_price) << ',' << format_timestamp(r.timestamp)
                << '\n';
        return;
    }
    for (const auto& r : rows) {
        nlohmann::ordered_json j{{"buyer_id", r.buyer_id},   {"seller_id", r.seller_id},
                                 {"product_id", r.product_id}, {"quantity", r.quantity},
                                 {"unit_price", format_price(r.unit_price)},
                                 {"timestamp", format_timestamp(r.timestamp)}};
        out << j.dump() << '\n';
    }
}

inline void write_feedback(std::ostream& out, const std::vector<FeedbackRecord>& rows,
                           InputFormat format) {
    if (format == InputFormat::csv) {
        out << "giver_id,receiver_id,rating,timestamp\n";
        for (const auto& r : rows)
            out << r.giver_id << ',' << r.receiver_id << ',' << r.rating << ','
                << format_timestamp(r.timestamp) << '\n';
        return;
    }
    for (const auto& r : rows) {
        nlohmann::ordered_json j{{"giver_id", r.giver_id}, {"receiver_id", r.receiver_id},
                                 {"rating", r.rating}, {"timestamp", format_timestamp(r.timestamp)}};
        out << j.dump() << '\n';
    }
}

inline void write_profiles(std::ostream& out, const std::vector<UserProfile>& rows,
                           InputFormat format) {
    if (format == InputFormat::csv) {
        out << "user_id,birth_year,state,registration_date\n";
        for (const auto& r : rows)
            out << r.user_id << ',' << (r.birth_year ? std::to_string(*r.birth_year) : "") << ','
                << detail::csv_escape(r.state_text) << ',' << format_date(r.registration_date) << '\n';
        return;
    }
    for (const auto& r : rows) {
        nlohmann::ordered_json j{{"user_id", r.user_id},
                                 {"birth_year", r.birth_year ? nlohmann::ordered_json(*r.birth_year)
                                                             : nlohmann::ordered_json(nullptr)},
                                 {"state", r.state_text},
                                 {"registration_date", format_date(r.registration_date)}};
        out << j.dump() << '\n';
    }
}

inline void write_labels(std::ostream& out, const LabelSet& labels) {
    for (const auto& id : labels.shill_ids) out << id << '\n';
}

// ---------------------------------------------------------------------------
// Cross-corpus validation

struct DataWarning {
    std::string user_id;
    std::string message;
};

/// Users whose recorded activity predates their registration. These are
/// reported, not rejected.
inline std::vector<DataWarning> check_registration_order(const std::vector<UserProfile>& profiles,
                                                         const std::vector<TransactionRecord>& tx,
                                                         const std::vector<FeedbackRecord>& fb) {
    std::vector<std::pair<std::string_view, Timestamp>> first;
    first.reserve(2 * tx.size() + 2 * fb.size());
    for (const auto& r : tx) {
        first.emplace_back(r.buyer_id, r.timestamp);
        first.emplace_back(r.seller_id, r.timestamp);
    }
    for (const auto& r : fb) {
        first.emplace_back(r.giver_id, r.timestamp);
        first.emplace_back(r.receiver_id, r.timestamp);
    }
    std::sort(first.begin(), first.end());
    std::vector<DataWarning> warnings;
    for (const auto& p : profiles) {
        auto it = std::lower_bound(first.begin(), first.end(),
                                   std::pair<std::string_view, Timestamp>{p.user_id, INT64_MIN});
        if (it != first.end() && it->first == p.user_id && it->second < p.registration_date)
            warnings.push_back({p.user_id, "activity at " + format_timestamp(it->second) +
                                               " precedes registration " + format_date(p.registration_date)});
    }
    return warnings;
}

} // namespace shill
