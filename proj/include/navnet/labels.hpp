#pragma once

// Label store (misinformation / authoritative / propaganda) with an
// append-only review log, and the registry of category hosts.

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "navnet/error.hpp"
#include "navnet/ingest.hpp"
#include "navnet/util.hpp"

namespace navnet {

enum class DomainClass { misinformation, authoritative, unlabeled };

inline std::string_view to_string(DomainClass c) {
    switch (c) {
        case DomainClass::misinformation: return "misinformation";
        case DomainClass::authoritative: return "authoritative";
        case DomainClass::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

inline std::optional<DomainClass> parse_domain_class(std::string_view s) {
    const auto lower = to_lower(trim(s));
    if (lower == "misinformation") return DomainClass::misinformation;
    if (lower == "authoritative") return DomainClass::authoritative;
    if (lower == "unlabeled") return DomainClass::unlabeled;
    return std::nullopt;
}

struct DomainLabel {
    Domain domain;
    DomainClass cls = DomainClass::unlabeled;
    bool propaganda = false;
    std::string source;
    std::string added_at;

    bool operator==(const DomainLabel&) const = default;
};

enum class Verdict { confirmed_misinformation, confirmed_propaganda, rejected };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::confirmed_misinformation: return "confirmed_misinformation";
        case Verdict::confirmed_propaganda: return "confirmed_propaganda";
        case Verdict::rejected: return "rejected";
    }
    return "rejected";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
    if (s == "confirmed_misinformation") return Verdict::confirmed_misinformation;
    if (s == "confirmed_propaganda") return Verdict::confirmed_propaganda;
    if (s == "rejected") return Verdict::rejected;
    return std::nullopt;
}

inline bool is_confirmation(Verdict v) { return v != Verdict::rejected; }

struct ReviewEvent {
    Domain domain;
    Verdict verdict = Verdict::rejected;
    std::string reviewer;
    std::string timestamp;
    std::string run;                 // optional: deployment run the review belongs to
    std::vector<bool> checklist;     // optional: rubric rows ticked by the reviewer

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["domain"] = domain;
        j["verdict"] = std::string(to_string(verdict));
        j["reviewer"] = reviewer;
        j["timestamp"] = timestamp;
        if (!run.empty()) j["run"] = run;
        if (!checklist.empty()) j["checklist"] = checklist;
        return j;
    }

    static ReviewEvent from_json(const nlohmann::json& j) {
        ReviewEvent e;
        e.domain = canonicalize_domain(j.at("domain").get<std::string>());
        auto v = parse_verdict(j.at("verdict").get<std::string>());
        if (!v || e.domain.empty()) fail(ErrorCode::parse, "bad review event: " + j.dump());
        e.verdict = *v;
        e.reviewer = j.value("reviewer", "");
        e.timestamp = j.value("timestamp", "");
        e.run = j.value("run", "");
        if (auto it = j.find("checklist"); it != j.end()) e.checklist = it->get<std::vector<bool>>();
        return e;
    }
};

/// Merged labels plus the review events applied on top of them. One live label
/// per domain; replaying the event log onto the same base files reproduces the
/// same state.
class LabelStore {
public:
    const DomainLabel* find(std::string_view domain) const {
        auto it = labels_.find(std::string(domain));
        return it == labels_.end() ? nullptr : &it->second;
    }

    DomainClass class_of(std::string_view domain) const {
        const auto* l = find(domain);
        return l ? l->cls : DomainClass::unlabeled;
    }

    bool is_misinformation(std::string_view d) const { return class_of(d) == DomainClass::misinformation; }
    bool is_authoritative(std::string_view d) const { return class_of(d) == DomainClass::authoritative; }
    bool is_labeled(std::string_view d) const { return class_of(d) != DomainClass::unlabeled; }
    bool is_propaganda(std::string_view d) const {
        const auto* l = find(d);
        return l && l->propaganda;
    }

    const std::map<Domain, DomainLabel>& labels() const { return labels_; }
    const std::vector<ReviewEvent>& events() const { return events_; }

    std::vector<Domain> misinformation_domains() const {
        std::vector<Domain> out;
        for (const auto& [d, l] : labels_)
            if (l.cls == DomainClass::misinformation) out.push_back(d);
        return out;
    }

    std::vector<Domain> propaganda_domains() const {
        std::vector<Domain> out;
        for (const auto& [d, l] : labels_)
            if (l.propaganda) out.push_back(d);
        return out;
    }

    struct Counts {
        std::size_t misinformation = 0;
        std::size_t authoritative = 0;
        std::size_t propaganda = 0;
    };

    Counts counts() const {
        Counts c;
        for (const auto& [d, l] : labels_) {
            if (l.cls == DomainClass::misinformation) ++c.misinformation;
            if (l.cls == DomainClass::authoritative) ++c.authoritative;
            if (l.propaganda) ++c.propaganda;
        }
        return c;
    }

    /// Merges one source row: misinformation beats authoritative, the
    /// propaganda flag is OR-ed and promotes the domain to misinformation.
    void merge(const DomainLabel& incoming) {
        if (incoming.cls == DomainClass::unlabeled && !incoming.propaganda) return;
        auto [it, inserted] = labels_.try_emplace(incoming.domain, incoming);
        DomainLabel& cur = it->second;
        if (!inserted) {
            if (incoming.cls == DomainClass::misinformation) cur.cls = DomainClass::misinformation;
            cur.propaganda = cur.propaganda || incoming.propaganda;
            append_source(cur.source, incoming.source);
        }
        if (cur.propaganda) cur.cls = DomainClass::misinformation;
    }

    /// Existing review verdict for `domain`, if any.
    std::optional<Verdict> review_verdict(std::string_view domain) const {
        auto it = verdicts_.find(std::string(domain));
        if (it == verdicts_.end()) return std::nullopt;
        return it->second;
    }

    /// Applies a review verdict. Returns false (store unchanged, nothing to
    /// log) when the same verdict was already recorded; throws a conflict
    /// error when a different verdict exists.
    bool add_review_label(const ReviewEvent& event) {
        if (auto prior = review_verdict(event.domain)) {
            if (*prior == event.verdict) return false;
            fail(ErrorCode::conflict, "domain '" + event.domain + "' already reviewed as " +
                                          std::string(to_string(*prior)));
        }
        DomainLabel label;
        label.domain = event.domain;
        label.cls = is_confirmation(event.verdict) ? DomainClass::misinformation : DomainClass::authoritative;
        label.propaganda = event.verdict == Verdict::confirmed_propaganda;
        label.source = "review";
        label.added_at = event.timestamp;
        labels_[event.domain] = std::move(label);
        verdicts_[event.domain] = event.verdict;
        events_.push_back(event);
        ++version_;
        return true;
    }

    /// Bumped on every applied review; lets callers cache derived sets.
    std::uint64_t version() const { return version_; }

    /// Compacted snapshot in label-file format.
    std::string snapshot_csv() const {
        std::string out = "domain,class,propaganda,source\n";
        for (const auto& [d, l] : labels_) {
            out += d + "," + std::string(to_string(l.cls)) + "," + (l.propaganda ? "true" : "false") + "," +
                   l.source + "\n";
        }
        return out;
    }

private:
    static void append_source(std::string& into, const std::string& source) {
        if (source.empty()) return;
        std::size_t start = 0;
        while (start <= into.size()) {
            const auto end = std::min(into.find(';', start), into.size());
            if (into.compare(start, end - start, source) == 0 && end - start == source.size()) return;
            start = end + 1;
        }
        if (!into.empty()) into += ';';
        into += source;
    }

    std::map<Domain, DomainLabel> labels_;
    std::unordered_map<Domain, Verdict> verdicts_;
    std::vector<ReviewEvent> events_;
    std::uint64_t version_ = 0;
};

inline std::optional<bool> parse_flag(std::string_view s) {
    const auto v = to_lower(trim(s));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    return std::nullopt;
}

/// Reads `domain,class,propaganda,source` rows from every file and merges them.
inline LabelStore load_labels(const std::vector<std::string>& paths) {
    LabelStore store;
    for (const auto& path : paths) {
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto line = trim(lines[i]);
            if (line.empty() || line.front() == '#') continue;
            const auto f = split_csv(line);
            if (f.size() >= 1 && f[0] == "domain") continue;
            const auto where = path + ":" + std::to_string(i + 1);
            if (f.size() != 4) fail(ErrorCode::parse, where + ": expected domain,class,propaganda,source");
            const auto cls = parse_domain_class(f[1]);
            if (!cls) fail(ErrorCode::parse, where + ": unknown class '" + f[1] + "'");
            const auto prop = parse_flag(f[2]);
            if (!prop) fail(ErrorCode::parse, where + ": bad propaganda flag '" + f[2] + "'");
            const auto domain = canonicalize_domain(f[0]);
            if (domain.empty()) fail(ErrorCode::parse, where + ": bad domain '" + f[0] + "'");
            store.merge({domain, *cls, *prop, f[3], ""});
        }
    }
    return store;
}

/// Reads an event log. A torn final line (crash mid-append) is ignored.
inline std::vector<ReviewEvent> read_event_log(const std::string& path) {
    std::vector<ReviewEvent> events;
    std::ifstream probe(path);
    if (!probe) return events;
    probe.close();
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) {
            if (i + 1 == lines.size()) break;
            fail(ErrorCode::parse, path + ":" + std::to_string(i + 1) + ": corrupt event");
        }
        events.push_back(ReviewEvent::from_json(j));
    }
    return events;
}

inline void replay_events(LabelStore& store, const std::vector<ReviewEvent>& events) {
    for (const auto& e : events) store.add_review_label(e);
}

/// Appends one event as a single write + fsync so a crash leaves at most a
/// torn tail, never an interleaved record.
inline void append_event(const std::string& path, const ReviewEvent& event) {
    const std::string line = event.to_json().dump() + "\n";
    const int fd = ::open(path.c_str(), O_RDWR | O_APPEND | O_CREAT, 0644);
    if (fd < 0) fail(ErrorCode::io, "cannot open event log '" + path + "'");
    // A previous crash may have left a torn record without its newline. It was
    // never acknowledged, so drop it rather than bury it mid-log.
    char last = '\n';
    if (const auto size = ::lseek(fd, 0, SEEK_END); size > 0 && ::pread(fd, &last, 1, size - 1) == 1 && last != '\n') {
        std::ifstream in(path, std::ios::binary);
        const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto keep = content.find_last_of('\n');
        if (::ftruncate(fd, keep == std::string::npos ? 0 : static_cast<off_t>(keep + 1)) != 0) {
            ::close(fd);
            fail(ErrorCode::io, "cannot repair torn tail of '" + path + "'");
        }
    }
    const auto written = ::write(fd, line.data(), line.size());
    const bool ok = written == static_cast<ssize_t>(line.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) fail(ErrorCode::io, "append failed on '" + path + "'");
}

// ---------------------------------------------------------------------------

enum class Category { google, bing, duckduckgo, social, news, mail };

inline constexpr std::array<Category, 6> kCategories = {Category::google, Category::bing, Category::duckduckgo,
                                                        Category::social, Category::news, Category::mail};

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::google: return "google";
        case Category::bing: return "bing";
        case Category::duckduckgo: return "duckduckgo";
        case Category::social: return "social";
        case Category::news: return "news";
        case Category::mail: return "mail";
    }
    return "";
}

inline std::optional<Category> parse_category(std::string_view s) {
    for (const auto c : kCategories)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

/// Exact-host category membership. Search engines are split per engine
/// because each engine is its own feature.
class CategoryRegistry {
public:
    void add(Category category, std::string_view raw_host) {
        const auto host = canonicalize_domain(raw_host);
        if (host.empty()) fail(ErrorCode::parse, "bad category host '" + std::string(raw_host) + "'");
        auto [it, inserted] = hosts_.emplace(host, category);
        if (!inserted && it->second != category) {
            fail(ErrorCode::invalid_argument, "host '" + host + "' listed under both " +
                                                  std::string(to_string(it->second)) + " and " +
                                                  std::string(to_string(category)));
        }
    }

    std::optional<Category> category_of(std::string_view host) const {
        auto it = hosts_.find(std::string(host));
        if (it == hosts_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view host) const { return category_of(host).has_value(); }

    bool is_search_engine(std::string_view host) const {
        const auto c = category_of(host);
        return c && (*c == Category::google || *c == Category::bing || *c == Category::duckduckgo);
    }

    std::vector<std::string> hosts(Category c) const {
        std::vector<std::string> out;
        for (const auto& [h, cat] : hosts_)
            if (cat == c) out.push_back(h);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t size() const { return hosts_.size(); }

private:
    std::unordered_map<std::string, Category> hosts_;
};

inline CategoryRegistry default_registry() {
    CategoryRegistry r;
    for (const auto* h : {"google.com", "www.google.com"}) r.add(Category::google, h);
    for (const auto* h : {"bing.com", "www.bing.com"}) r.add(Category::bing, h);
    for (const auto* h : {"duckduckgo.com", "www.duckduckgo.com"}) r.add(Category::duckduckgo, h);
    for (const auto* h : {"facebook.com", "www.facebook.com", "m.facebook.com", "l.facebook.com", "twitter.com",
                          "x.com", "t.co", "tiktok.com", "www.tiktok.com", "linkedin.com", "www.linkedin.com",
                          "telegram.org", "web.telegram.org", "t.me", "web.whatsapp.com"})
        r.add(Category::social, h);
    for (const auto* h : {"bloomberg.com", "www.bloomberg.com", "msn.com", "www.msn.com", "news.google.com",
                          "news.yahoo.com"})
        r.add(Category::news, h);
    for (const auto* h : {"gmail.com", "mail.google.com", "mail.yahoo.com", "outlook.com", "outlook.live.com",
                          "outlook.office.com"})
        r.add(Category::mail, h);
    return r;
}

/// Reads `category,host` rows.
inline CategoryRegistry load_registry(const std::string& path) {
    CategoryRegistry r;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_csv(line);
        if (f.size() == 2 && f[0] == "category") continue;
        const auto where = path + ":" + std::to_string(i + 1);
        if (f.size() != 2) fail(ErrorCode::parse, where + ": expected category,host");
        const auto c = parse_category(f[0]);
        if (!c) fail(ErrorCode::parse, where + ": unknown category '" + f[0] + "'");
        r.add(*c, f[1]);
    }
    return r;
}

inline std::string registry_to_csv(const CategoryRegistry& r) {
    std::string out = "category,host\n";
    for (const auto c : kCategories)
        for (const auto& h : r.hosts(c)) out += std::string(to_string(c)) + "," + h + "\n";
    return out;
}

}  // namespace navnet
