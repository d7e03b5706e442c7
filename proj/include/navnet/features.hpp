#pragma once

// Traffic features for a domain in one month's navigation graph: log traffic
// totals, shares of outbound/inbound page views per label and category, and
// misinformation egonet membership counts.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/graph.hpp"
#include "navnet/labels.hpp"
#include "navnet/ml/matrix.hpp"
#include "navnet/util.hpp"

namespace navnet {

enum class FeatureMode { binary, multiclass };

inline std::string_view to_string(FeatureMode m) { return m == FeatureMode::binary ? "binary" : "multiclass"; }

inline std::optional<FeatureMode> parse_feature_mode(std::string_view s) {
    if (s == "binary") return FeatureMode::binary;
    if (s == "multiclass") return FeatureMode::multiclass;
    return std::nullopt;
}

struct FeatureVector {
    double inbound_traffic_log = 0;
    double outbound_traffic_log = 0;
    double to_misinformation = 0;
    double to_authoritative = 0;
    double to_propaganda = 0;
    double to_google = 0;
    double to_bing = 0;
    double to_duckduckgo = 0;
    double to_social = 0;
    double to_news = 0;
    double to_mail = 0;
    double from_misinformation = 0;
    double from_authoritative = 0;
    double from_propaganda = 0;
    double from_google = 0;
    double from_bing = 0;
    double from_duckduckgo = 0;
    double from_social = 0;
    double from_news = 0;
    double from_mail = 0;
    double inbound_egonets = 0;
    double outbound_egonets = 0;

    bool operator==(const FeatureVector&) const = default;

    /// Values in schema column order for `mode`.
    std::vector<double> values(FeatureMode mode) const {
        std::vector<double> v{inbound_traffic_log, outbound_traffic_log, to_misinformation, to_authoritative};
        if (mode == FeatureMode::multiclass) v.push_back(to_propaganda);
        v.insert(v.end(), {to_google, to_bing, to_duckduckgo, to_social, to_news, to_mail, from_misinformation,
                           from_authoritative});
        if (mode == FeatureMode::multiclass) v.push_back(from_propaganda);
        v.insert(v.end(), {from_google, from_bing, from_duckduckgo, from_social, from_news, from_mail,
                           inbound_egonets, outbound_egonets});
        return v;
    }
};

inline std::vector<std::string> traffic_feature_names(FeatureMode mode) {
    std::vector<std::string> names{"inbound_traffic_log", "outbound_traffic_log", "to_misinformation",
                                   "to_authoritative"};
    if (mode == FeatureMode::multiclass) names.push_back("to_propaganda");
    names.insert(names.end(), {"to_google", "to_bing", "to_duckduckgo", "to_social", "to_news", "to_mail",
                               "from_misinformation", "from_authoritative"});
    if (mode == FeatureMode::multiclass) names.push_back("from_propaganda");
    names.insert(names.end(), {"from_google", "from_bing", "from_duckduckgo", "from_social", "from_news",
                               "from_mail", "inbound_egonets", "outbound_egonets"});
    return names;
}

/// Column layout of a feature matrix. Models refuse matrices whose schema
/// differs from the one they were trained on.
struct FeatureSchema {
    std::string version;
    std::vector<std::string> columns;

    bool operator==(const FeatureSchema&) const = default;

    std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return std::nullopt;
    }
};

inline constexpr std::string_view kFeatureSchemaVersion = "navnet-features/1";

// ---------------------------------------------------------------------------
// Optional host block, read from a file and one-hot encoded.

struct HostInfo {
    std::string registrar;
    std::string creation_year;
    std::string registrant_country;
    std::string dnssec;

    std::array<std::string, 4> fields() const { return {registrar, creation_year, registrant_country, dnssec}; }
};

inline constexpr std::array<std::string_view, 4> kHostFields = {"registrar", "creation_year", "registrant_country",
                                                                "dnssec"};

using HostTable = std::map<Domain, HostInfo>;

/// Reads `domain,registrar,creation_year,registrant_country,dnssec`.
inline HostTable load_host_table(const std::string& path) {
    HostTable table;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_csv(line);
        if (f[0] == "domain") continue;
        if (f.size() != 5) fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": expected 5 fields");
        table[canonicalize_domain(f[0])] = {f[1], f[2], f[3], f[4]};
    }
    return table;
}

/// One-hot encoder: the `top_n` most frequent values per field, plus "other"
/// and "unknown" (missing or empty) columns.
class HostEncoder {
public:
    HostEncoder() = default;

    static HostEncoder fit(const HostTable& table, std::size_t top_n = 20) {
        HostEncoder enc;
        for (std::size_t f = 0; f < kHostFields.size(); ++f) {
            std::map<std::string, std::size_t> freq;
            for (const auto& [d, info] : table) {
                const auto v = info.fields()[f];
                if (!is_unknown(v)) ++freq[v];
            }
            std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            if (ranked.size() > top_n) ranked.resize(top_n);
            for (const auto& [v, n] : ranked) enc.values_[f].push_back(v);
            std::sort(enc.values_[f].begin(), enc.values_[f].end());
        }
        return enc;
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        for (std::size_t f = 0; f < kHostFields.size(); ++f) {
            const std::string prefix = "host." + std::string(kHostFields[f]) + "=";
            for (const auto& v : values_[f]) names.push_back(prefix + v);
            names.push_back(prefix + "<other>");
            names.push_back(prefix + "<unknown>");
        }
        return names;
    }

    std::size_t width() const {
        std::size_t w = 0;
        for (const auto& v : values_) w += v.size() + 2;
        return w;
    }

    void encode(const HostInfo* info, std::vector<double>& out) const {
        for (std::size_t f = 0; f < kHostFields.size(); ++f) {
            const auto& vals = values_[f];
            std::vector<double> block(vals.size() + 2, 0.0);
            const std::string v = info ? info->fields()[f] : std::string();
            if (is_unknown(v)) {
                block[vals.size() + 1] = 1.0;
            } else {
                auto it = std::lower_bound(vals.begin(), vals.end(), v);
                if (it != vals.end() && *it == v) block[static_cast<std::size_t>(it - vals.begin())] = 1.0;
                else block[vals.size()] = 1.0;
            }
            out.insert(out.end(), block.begin(), block.end());
        }
    }

private:
    static bool is_unknown(std::string_view v) { return v.empty() || v == "unknown"; }

    std::array<std::vector<std::string>, 4> values_;
};

struct HostBlock {
    HostTable table;
    HostEncoder encoder;
};

inline FeatureSchema feature_schema(FeatureMode mode, const HostBlock* host = nullptr) {
    FeatureSchema s;
    s.version = std::string(kFeatureSchemaVersion) + "/" + std::string(to_string(mode));
    s.columns = traffic_feature_names(mode);
    if (host) {
        s.version += "+host";
        const auto extra = host->encoder.column_names();
        s.columns.insert(s.columns.end(), extra.begin(), extra.end());
    }
    return s;
}

// ---------------------------------------------------------------------------

namespace detail {

enum NodeFlag : std::uint8_t {
    kMisinformation = 1,
    kAuthoritative = 2,
    kPropaganda = 4,
};

/// Label bits plus category (or -1) for one neighbour.
struct NodeRole {
    std::uint8_t flags = 0;
    int category = -1;
};

inline NodeRole role_of(std::string_view domain, const LabelStore& store, const CategoryRegistry& registry) {
    NodeRole role;
    if (const auto* l = store.find(domain)) {
        if (l->cls == DomainClass::misinformation) role.flags |= kMisinformation;
        if (l->cls == DomainClass::authoritative) role.flags |= kAuthoritative;
        if (l->propaganda) role.flags |= kPropaganda;
    }
    if (const auto c = registry.category_of(domain)) role.category = static_cast<int>(*c);
    return role;
}

struct DirectionSums {
    std::int64_t total = 0;
    std::int64_t misinformation = 0;
    std::int64_t authoritative = 0;
    std::int64_t propaganda = 0;
    std::array<std::int64_t, kCategories.size()> category{};
    std::int64_t misinformation_neighbors = 0;
};

inline double share(std::int64_t part, std::int64_t total) {
    return total == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(total);
}

/// Shared by single-domain and batch extraction so both produce bit-identical
/// values; `role` resolves a neighbour id to its label/category role.
template <class RoleFn>
FeatureVector compute_features(const NavigationGraph& g, NodeId id, RoleFn&& role) {
    auto accumulate = [&](const std::vector<Arc>& arcs) {
        DirectionSums s;
        for (const auto& a : arcs) {
            if (a.node == id) continue;
            const NodeRole r = role(a.node);
            s.total += a.weight;
            if (r.flags & kMisinformation) {
                s.misinformation += a.weight;
                ++s.misinformation_neighbors;
            }
            if (r.flags & kAuthoritative) s.authoritative += a.weight;
            if (r.flags & kPropaganda) s.propaganda += a.weight;
            if (r.category >= 0) s.category[static_cast<std::size_t>(r.category)] += a.weight;
        }
        return s;
    };
    const DirectionSums out = accumulate(g.successors(id));
    const DirectionSums in = accumulate(g.predecessors(id));

    FeatureVector f;
    f.inbound_traffic_log = std::log10(1.0 + static_cast<double>(in.total));
    f.outbound_traffic_log = std::log10(1.0 + static_cast<double>(out.total));
    f.to_misinformation = share(out.misinformation, out.total);
    f.to_authoritative = share(out.authoritative, out.total);
    f.to_propaganda = share(out.propaganda, out.total);
    f.to_google = share(out.category[0], out.total);
    f.to_bing = share(out.category[1], out.total);
    f.to_duckduckgo = share(out.category[2], out.total);
    f.to_social = share(out.category[3], out.total);
    f.to_news = share(out.category[4], out.total);
    f.to_mail = share(out.category[5], out.total);
    f.from_misinformation = share(in.misinformation, in.total);
    f.from_authoritative = share(in.authoritative, in.total);
    f.from_propaganda = share(in.propaganda, in.total);
    f.from_google = share(in.category[0], in.total);
    f.from_bing = share(in.category[1], in.total);
    f.from_duckduckgo = share(in.category[2], in.total);
    f.from_social = share(in.category[3], in.total);
    f.from_news = share(in.category[4], in.total);
    f.from_mail = share(in.category[5], in.total);
    // The domain sits in m's 1-hop inbound egonet iff it refers traffic to m,
    // and in m's outbound egonet iff m refers traffic to it.
    f.inbound_egonets = static_cast<double>(out.misinformation_neighbors);
    f.outbound_egonets = static_cast<double>(in.misinformation_neighbors);
    return f;
}

}  // namespace detail

/// Traffic features of `domain` (which must be a node of `graph`).
inline FeatureVector extract_features(const NavigationGraph& graph, const LabelStore& store,
                                      const CategoryRegistry& registry, std::string_view domain) {
    const NodeId id = graph.id_of(domain);
    return detail::compute_features(graph, id, [&](NodeId n) {
        return detail::role_of(graph.name(n), store, registry);
    });
}

/// Per-node roles for a whole graph, computed once for batch extraction.
class GraphRoles {
public:
    GraphRoles(const NavigationGraph& graph, const LabelStore& store, const CategoryRegistry& registry) {
        roles_.reserve(graph.node_count());
        for (NodeId i = 0; i < graph.node_count(); ++i)
            roles_.push_back(detail::role_of(graph.name(i), store, registry));
    }

    const detail::NodeRole& operator[](NodeId id) const { return roles_[id]; }

private:
    std::vector<detail::NodeRole> roles_;
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::string month;                  // informational; empty when mixed
    std::vector<Domain> domains;        // row index, lexicographic
    Matrix values;
    std::vector<Domain> missing;        // requested domains absent from the graph
    std::vector<Domain> zero_filled;    // absent domains given all-zero traffic rows

    std::optional<std::size_t> row_of(std::string_view domain) const {
        auto it = std::lower_bound(domains.begin(), domains.end(), domain);
        if (it == domains.end() || *it != domain) return std::nullopt;
        return static_cast<std::size_t>(it - domains.begin());
    }
};

struct ExtractOptions {
    FeatureMode mode = FeatureMode::binary;
    /// Absent domains get all-zero traffic rows instead of being reported missing.
    bool zero_fill_missing = false;
    const HostBlock* host = nullptr;
};

/// Batch extraction, rows in lexicographic domain order. Domains absent from
/// the graph are listed in `missing` (or zero-filled when requested).
inline FeatureMatrix extract_matrix(const NavigationGraph& graph, const LabelStore& store,
                                    const CategoryRegistry& registry, std::vector<Domain> domains,
                                    const ExtractOptions& options = {}) {
    std::sort(domains.begin(), domains.end());
    domains.erase(std::unique(domains.begin(), domains.end()), domains.end());

    FeatureMatrix m;
    m.schema = feature_schema(options.mode, options.host);
    m.month = graph.month().str();
    m.values.cols = m.schema.columns.size();
    m.values.data.reserve(domains.size() * m.values.cols);

    std::optional<GraphRoles> roles;
    if (!domains.empty()) roles.emplace(graph, store, registry);

    std::vector<double> row;
    for (auto& d : domains) {
        const auto id = graph.find(d);
        if (!id && !options.zero_fill_missing) {
            m.missing.push_back(d);
            continue;
        }
        const FeatureVector f = id ? detail::compute_features(graph, *id, [&](NodeId n) { return (*roles)[n]; })
                                   : FeatureVector{};
        if (!id) m.zero_filled.push_back(d);
        row = f.values(options.mode);
        if (options.host) {
            auto it = options.host->table.find(d);
            options.host->encoder.encode(it == options.host->table.end() ? nullptr : &it->second, row);
        }
        m.values.append_row(row);
        m.domains.push_back(std::move(d));
    }
    return m;
}

// ---------------------------------------------------------------------------
// CSV form:
//   # schema: <version>
//   # month: YYYY-MM
//   domain,<columns...>

inline std::string feature_matrix_to_csv(const FeatureMatrix& m) {
    std::string out = "# schema: " + m.schema.version + "\n";
    if (!m.month.empty()) out += "# month: " + m.month + "\n";
    out += "domain";
    for (const auto& c : m.schema.columns) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < m.domains.size(); ++r) {
        out += m.domains[r];
        for (const double v : m.values.row(r)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline FeatureMatrix feature_matrix_from_csv(const std::string& path) {
    const auto lines = read_lines(path);
    FeatureMatrix m;
    std::size_t i = 0;
    for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i) {
        const std::string_view line = lines[i];
        if (line.rfind("# schema: ", 0) == 0) m.schema.version = std::string(trim(line.substr(10)));
        if (line.rfind("# month: ", 0) == 0) m.month = std::string(trim(line.substr(9)));
    }
    if (m.schema.version.empty() || i >= lines.size()) fail(ErrorCode::parse, "'" + path + "': missing schema header");
    auto header = split_csv(lines[i]);
    if (header.empty() || header[0] != "domain") fail(ErrorCode::parse, "'" + path + "': missing column header");
    m.schema.columns.assign(header.begin() + 1, header.end());
    m.values.cols = m.schema.columns.size();
    for (++i; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split_csv(lines[i]);
        if (f.size() != m.values.cols + 1) fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": width mismatch");
        std::vector<double> row;
        row.reserve(m.values.cols);
        for (std::size_t c = 1; c < f.size(); ++c) {
            const auto v = parse_double(f[c]);
            if (!v) fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": bad number '" + f[c] + "'");
            row.push_back(*v);
        }
        m.values.append_row(row);
        m.domains.push_back(f[0]);
    }
    if (!std::is_sorted(m.domains.begin(), m.domains.end())) {
        fail(ErrorCode::parse, "'" + path + "': rows must be sorted by domain");
    }
    return m;
}

}  // namespace navnet
