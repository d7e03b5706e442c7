#pragma once

// Referrer-log ingestion: parsing, monthly aggregation and the domain-level
// privacy floor.

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "navnet/error.hpp"
#include "navnet/util.hpp"

namespace navnet {

/// Calendar month, rendered as YYYY-MM.
struct Month {
    int year = 0;
    int month = 0;

    auto operator<=>(const Month&) const = default;

    static std::optional<Month> parse(std::string_view text) {
        text = trim(text);
        if (text.size() != 7 || text[4] != '-') return std::nullopt;
        const auto y = parse_int<int>(text.substr(0, 4));
        const auto m = parse_int<int>(text.substr(5, 2));
        if (!y || !m || *m < 1 || *m > 12) return std::nullopt;
        return Month{*y, *m};
    }

    static Month parse_or_throw(std::string_view text) {
        auto m = parse(text);
        if (!m) fail(ErrorCode::parse, "malformed month '" + std::string(text) + "'");
        return *m;
    }

    std::string str() const {
        std::string out = std::to_string(year);
        while (out.size() < 4) out.insert(out.begin(), '0');
        out += month < 10 ? "-0" : "-";
        out += std::to_string(month);
        return out;
    }
};

using Domain = std::string;

struct TrafficRecord {
    Month month;
    Domain referrer;
    Domain target;
    std::int64_t page_views = 0;

    bool operator==(const TrafficRecord&) const = default;
};

/// Host aliases applied after canonicalisation (e.g. www.rt.com -> rt.com).
using AliasTable = std::unordered_map<std::string, std::string>;

inline AliasTable load_aliases(const std::string& path);

/// Lowercases and strips scheme, userinfo, port, path, query and trailing dot.
/// Returns an empty string when nothing host-like remains.
inline std::string canonicalize_domain(std::string_view raw) {
    std::string_view s = trim(raw);
    if (const auto scheme = s.find("://"); scheme != std::string_view::npos) s.remove_prefix(scheme + 3);
    if (const auto path = s.find_first_of("/?#"); path != std::string_view::npos) s = s.substr(0, path);
    if (const auto at = s.rfind('@'); at != std::string_view::npos) s.remove_prefix(at + 1);
    if (const auto port = s.find(':'); port != std::string_view::npos) s = s.substr(0, port);
    while (!s.empty() && s.back() == '.') s.remove_suffix(1);
    std::string host = to_lower(s);
    for (const char c : host) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
                        c == '_' || static_cast<unsigned char>(c) >= 0x80;
        if (!ok) return {};
    }
    return host;
}

inline std::string canonicalize_domain(std::string_view raw, const AliasTable& aliases) {
    std::string host = canonicalize_domain(raw);
    if (auto it = aliases.find(host); it != aliases.end()) return it->second;
    return host;
}

inline AliasTable load_aliases(const std::string& path) {
    AliasTable table;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_csv(line);
        if (i == 0 && fields.size() == 2 && fields[0] == "from_host") continue;
        if (fields.size() != 2) fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": expected from_host,to_host");
        const auto from = canonicalize_domain(fields[0]);
        const auto to = canonicalize_domain(fields[1]);
        if (from.empty() || to.empty()) fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": bad host");
        table[from] = to;
    }
    return table;
}

enum class LogFormat { csv, jsonl };

struct ParseResult {
    std::vector<TrafficRecord> records;
    std::size_t malformed = 0;
};

namespace detail {

inline std::optional<Month> month_from_field(std::string_view value, bool is_timestamp) {
    value = trim(value);
    if (is_timestamp) {
        // ISO-8601 timestamps bucket to their calendar month.
        if (value.size() < 7) return std::nullopt;
        if (value.size() > 7 && value[7] != '-' && value[7] != 'T' && value[7] != ' ') return std::nullopt;
        return Month::parse(value.substr(0, 7));
    }
    return Month::parse(value);
}

inline std::optional<TrafficRecord> make_record(std::optional<Month> month, std::string_view referrer,
                                                std::string_view target,
                                                std::optional<std::int64_t> views,
                                                const AliasTable& aliases) {
    if (!month || !views || *views < 1) return std::nullopt;
    TrafficRecord r{*month, canonicalize_domain(referrer, aliases), canonicalize_domain(target, aliases), *views};
    if (r.referrer.empty() || r.target.empty() || r.referrer == r.target) return std::nullopt;
    return r;
}

}  // namespace detail

/// Parses a referrer log. Rows that violate a record invariant are skipped and
/// counted; the parser never merges rows.
inline ParseResult parse_log(const std::string& path, LogFormat format, const AliasTable& aliases = {}) {
    const auto lines = read_lines(path);
    ParseResult result;

    if (format == LogFormat::csv) {
        std::size_t first = 0;
        while (first < lines.size() && trim(lines[first]).empty()) ++first;
        if (first == lines.size()) fail(ErrorCode::empty_input, "'" + path + "' contains no rows");
        const auto header = split_csv(lines[first]);
        std::map<std::string, std::size_t> column;
        for (std::size_t i = 0; i < header.size(); ++i) column[to_lower(header[i])] = i;
        const bool has_month = column.count("month") != 0;
        const bool has_ts = column.count("timestamp") != 0;
        if ((!has_month && !has_ts) || !column.count("referrer") || !column.count("target") ||
            !column.count("page_views")) {
            fail(ErrorCode::parse, "'" + path + "': header must contain month (or timestamp),referrer,target,page_views");
        }
        const std::size_t month_col = has_month ? column["month"] : column["timestamp"];
        const std::size_t ref_col = column["referrer"];
        const std::size_t tgt_col = column["target"];
        const std::size_t pv_col = column["page_views"];
        const std::size_t width = header.size();

        for (std::size_t i = first + 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            const auto fields = split_csv(lines[i]);
            if (fields.size() != width) {
                ++result.malformed;
                continue;
            }
            auto rec = detail::make_record(detail::month_from_field(fields[month_col], !has_month),
                                           fields[ref_col], fields[tgt_col],
                                           parse_int<std::int64_t>(fields[pv_col]), aliases);
            if (rec) result.records.push_back(std::move(*rec));
            else ++result.malformed;
        }
    } else {
        for (const auto& line : lines) {
            if (trim(line).empty()) continue;
            auto row = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (!row.is_object()) {
                ++result.malformed;
                continue;
            }
            auto text = [&](const char* key) -> std::optional<std::string> {
                auto it = row.find(key);
                if (it == row.end() || !it->is_string()) return std::nullopt;
                return it->get<std::string>();
            };
            std::optional<Month> month;
            if (auto m = text("month")) month = detail::month_from_field(*m, false);
            else if (auto ts = text("timestamp")) month = detail::month_from_field(*ts, true);
            std::optional<std::int64_t> views;
            if (auto it = row.find("page_views"); it != row.end()) {
                if (it->is_number_integer()) views = it->get<std::int64_t>();
                else if (it->is_string()) views = parse_int<std::int64_t>(it->get<std::string>());
            }
            const auto ref = text("referrer");
            const auto tgt = text("target");
            std::optional<TrafficRecord> rec;
            if (ref && tgt) rec = detail::make_record(month, *ref, *tgt, views, aliases);
            if (rec) result.records.push_back(std::move(*rec));
            else ++result.malformed;
        }
    }

    if (result.records.empty()) {
        fail(ErrorCode::empty_input, "'" + path + "' has no valid rows (" +
                                         std::to_string(result.malformed) + " malformed)");
    }
    return result;
}

using MonthlyRecords = std::map<Month, std::vector<TrafficRecord>>;

/// One record per (month, referrer, target), page views summed. Output rows
/// are sorted by (referrer, target) so the result is independent of input order.
inline MonthlyRecords aggregate_month(const std::vector<TrafficRecord>& records) {
    std::map<Month, std::map<std::pair<Domain, Domain>, std::int64_t>> sums;
    for (const auto& r : records) sums[r.month][{r.referrer, r.target}] += r.page_views;

    MonthlyRecords out;
    for (auto& [month, pairs] : sums) {
        auto& rows = out[month];
        rows.reserve(pairs.size());
        for (auto& [key, views] : pairs) rows.push_back({month, key.first, key.second, views});
    }
    return out;
}

/// Removes every domain whose total monthly traffic (inbound + outbound) is
/// not above `floor`, together with its incident records. Removal cascades
/// until every surviving domain clears the floor, which makes the operation
/// idempotent.
inline std::vector<TrafficRecord> apply_privacy_floor(std::vector<TrafficRecord> records, std::int64_t floor) {
    if (floor < 1) fail(ErrorCode::invalid_argument, "privacy floor must be >= 1");
    while (true) {
        std::vector<bool> keep(records.size());
        bool all_kept = true;
        {
            std::unordered_map<std::string_view, std::int64_t> totals;
            for (const auto& r : records) {
                totals[r.referrer] += r.page_views;
                totals[r.target] += r.page_views;
            }
            for (std::size_t i = 0; i < records.size(); ++i) {
                keep[i] = totals[records[i].referrer] > floor && totals[records[i].target] > floor;
                all_kept = all_kept && keep[i];
            }
        }
        if (all_kept) return records;
        std::vector<TrafficRecord> next;
        next.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i)
            if (keep[i]) next.push_back(std::move(records[i]));
        records = std::move(next);
    }
}

inline std::string records_to_csv(const MonthlyRecords& monthly) {
    std::string out = "month,referrer,target,page_views\n";
    for (const auto& [month, rows] : monthly) {
        for (const auto& r : rows) {
            out += month.str();
            out += ',';
            out += r.referrer;
            out += ',';
            out += r.target;
            out += ',';
            out += std::to_string(r.page_views);
            out += '\n';
        }
    }
    return out;
}

}  // namespace navnet
