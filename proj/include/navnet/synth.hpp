#pragma once

// Seeded synthetic referrer traffic with planted misinformation and
// propaganda communities. Misinformation-class sites send most of their
// outbound traffic to each other; authoritative and benign sites almost never
// touch them. Planted misinformation ships unlabeled and serves as deployment
// ground truth.
//
// Link structure is drawn once; every month redraws edge weights (and drops a
// small fraction of links), so months are stationary.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "navnet/error.hpp"
#include "navnet/ingest.hpp"
#include "navnet/labels.hpp"
#include "navnet/util.hpp"

namespace navnet {

struct SynthConfig {
    int n_misinformation = 1000;
    int n_propaganda = 100;          // subset of n_misinformation
    int n_authoritative = 1000;
    int n_unlabeled_misinfo = 100;   // planted, shipped unlabeled
    int n_unlabeled_propaganda = 10; // subset of the planted ones
    int n_benign_unlabeled = 2800;
    int months = 3;
    std::string first_month = "2022-10";

    double intra_misinfo_share = 0.5;   // chance a misinformation out-link stays inside the community
    double search_referral_share = 0.6; // chance each search engine refers to a misinformation site
    double social_referral_share = 0.6; // chance each social platform refers to a misinformation site
    double propaganda_affinity = 0.3;   // chance a propaganda site's out-link goes to another propaganda site
    double authoritative_leak = 0.03;   // chance an ordinary out-link lands on misinformation (low volume)
    double fringe_share = 0.05;         // benign sites with a misinformation-like referral profile
    double loner_share = 0.05;          // labeled misinformation with weak community ties
    double monthly_link_churn = 0.1;    // chance a link is absent in a given month
    double community_weight = 5.0;      // volume multiplier on misinformation-to-misinformation links
    double propaganda_degree = 1.0;     // out-degree multiplier for propaganda sites
    double gateway_weight = 3.0;        // volume multiplier on social/duckduckgo referrals to misinformation-like sites
    double mean_out_degree = 6.0;
    std::int64_t traffic_scale = 3000;  // weight scale; community links never fall below it
    std::uint64_t seed = 7;

    void validate() const {
        const auto bad = [](const std::string& what) { fail(ErrorCode::invalid_argument, "synth config: " + what); };
        for (const int n : {n_misinformation, n_propaganda, n_authoritative, n_unlabeled_misinfo,
                            n_unlabeled_propaganda, n_benign_unlabeled})
            if (n < 0) bad("counts must be >= 0");
        if (n_propaganda > n_misinformation) bad("n_propaganda exceeds n_misinformation");
        if (n_unlabeled_propaganda > n_unlabeled_misinfo) bad("n_unlabeled_propaganda exceeds n_unlabeled_misinfo");
        if (months < 1) bad("months must be >= 1");
        if (!Month::parse(first_month)) bad("first_month must be YYYY-MM");
        for (const double s : {intra_misinfo_share, search_referral_share, social_referral_share, propaganda_affinity,
                               authoritative_leak, fringe_share, loner_share, monthly_link_churn})
            if (!(s >= 0.0 && s <= 1.0)) bad("shares must lie in [0,1]");
        if (intra_misinfo_share + authoritative_leak > 1.0 + 1e-12) bad("class profile shares exceed 1");
        if (mean_out_degree < 1.0) bad("mean_out_degree must be >= 1");
        if (!(community_weight > 0.0) || !(gateway_weight > 0.0)) bad("volume multipliers must be > 0");
        if (!(propaganda_degree >= 1.0)) bad("propaganda_degree must be >= 1");
        if (traffic_scale < 1) bad("traffic_scale must be >= 1");
    }

    nlohmann::json to_json() const {
        return {{"version", 1},
                {"n_misinformation", n_misinformation},
                {"n_propaganda", n_propaganda},
                {"n_authoritative", n_authoritative},
                {"n_unlabeled_misinfo", n_unlabeled_misinfo},
                {"n_unlabeled_propaganda", n_unlabeled_propaganda},
                {"n_benign_unlabeled", n_benign_unlabeled},
                {"months", months},
                {"first_month", first_month},
                {"intra_misinfo_share", intra_misinfo_share},
                {"search_referral_share", search_referral_share},
                {"social_referral_share", social_referral_share},
                {"propaganda_affinity", propaganda_affinity},
                {"authoritative_leak", authoritative_leak},
                {"fringe_share", fringe_share},
                {"loner_share", loner_share},
                {"monthly_link_churn", monthly_link_churn},
                {"community_weight", community_weight},
                {"gateway_weight", gateway_weight},
                {"propaganda_degree", propaganda_degree},
                {"mean_out_degree", mean_out_degree},
                {"traffic_scale", traffic_scale},
                {"seed", seed}};
    }

    static SynthConfig from_json(const nlohmann::json& j) {
        if (j.value("version", 1) != 1) fail(ErrorCode::parse, "unsupported synth config version");
        SynthConfig c;
        c.n_misinformation = j.value("n_misinformation", c.n_misinformation);
        c.n_propaganda = j.value("n_propaganda", c.n_propaganda);
        c.n_authoritative = j.value("n_authoritative", c.n_authoritative);
        c.n_unlabeled_misinfo = j.value("n_unlabeled_misinfo", c.n_unlabeled_misinfo);
        c.n_unlabeled_propaganda = j.value("n_unlabeled_propaganda", c.n_unlabeled_propaganda);
        c.n_benign_unlabeled = j.value("n_benign_unlabeled", c.n_benign_unlabeled);
        c.months = j.value("months", c.months);
        c.first_month = j.value("first_month", c.first_month);
        c.intra_misinfo_share = j.value("intra_misinfo_share", c.intra_misinfo_share);
        c.search_referral_share = j.value("search_referral_share", c.search_referral_share);
        c.social_referral_share = j.value("social_referral_share", c.social_referral_share);
        c.propaganda_affinity = j.value("propaganda_affinity", c.propaganda_affinity);
        c.authoritative_leak = j.value("authoritative_leak", c.authoritative_leak);
        c.fringe_share = j.value("fringe_share", c.fringe_share);
        c.loner_share = j.value("loner_share", c.loner_share);
        c.monthly_link_churn = j.value("monthly_link_churn", c.monthly_link_churn);
        c.community_weight = j.value("community_weight", c.community_weight);
        c.gateway_weight = j.value("gateway_weight", c.gateway_weight);
        c.propaganda_degree = j.value("propaganda_degree", c.propaganda_degree);
        c.mean_out_degree = j.value("mean_out_degree", c.mean_out_degree);
        c.traffic_scale = j.value("traffic_scale", c.traffic_scale);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
};

enum class SiteKind { misinformation, planted, authoritative, benign, fringe, loner, hub };

inline std::string_view to_string(SiteKind k) {
    switch (k) {
        case SiteKind::misinformation: return "misinformation";
        case SiteKind::planted: return "planted";
        case SiteKind::authoritative: return "authoritative";
        case SiteKind::benign: return "benign";
        case SiteKind::fringe: return "fringe";
        case SiteKind::loner: return "loner";
        case SiteKind::hub: return "hub";
    }
    return "";
}

struct SynthSite {
    Domain domain;
    SiteKind kind = SiteKind::benign;
    bool propaganda = false;

    /// Ground truth, independent of what ships in the label file.
    bool truly_misinformation() const {
        return kind == SiteKind::misinformation || kind == SiteKind::planted || kind == SiteKind::loner;
    }
};

struct SynthData {
    MonthlyRecords records;
    std::vector<DomainLabel> labels;  // what an operator would know
    std::vector<SynthSite> sites;     // full ground truth, sorted by domain

    const SynthSite* site(std::string_view domain) const {
        auto it = std::lower_bound(sites.begin(), sites.end(), domain,
                                   [](const SynthSite& s, std::string_view d) { return s.domain < d; });
        return it != sites.end() && it->domain == domain ? &*it : nullptr;
    }

    LabelStore label_store() const {
        LabelStore store;
        for (const auto& l : labels) store.merge(l);
        return store;
    }
};

namespace detail {

struct HubSpec {
    const char* host;
    Category category;
};

// One host per category family, all present in the default registry.
inline constexpr std::array<HubSpec, 10> kSynthHubs = {{{"google.com", Category::google},
                                                         {"bing.com", Category::bing},
                                                         {"duckduckgo.com", Category::duckduckgo},
                                                         {"facebook.com", Category::social},
                                                         {"twitter.com", Category::social},
                                                         {"t.me", Category::social},
                                                         {"news.google.com", Category::news},
                                                         {"msn.com", Category::news},
                                                         {"mail.google.com", Category::mail},
                                                         {"outlook.live.com", Category::mail}}};

/// Probability that hub h refers traffic to a site of the given profile.
inline double hub_referral_probability(const SynthConfig& c, bool misinfo_profile, Category cat) {
    if (misinfo_profile) {
        switch (cat) {
            case Category::google: return c.search_referral_share;
            case Category::bing: return c.search_referral_share * 0.5;
            case Category::duckduckgo: return c.search_referral_share * 0.8;
            case Category::social: return c.social_referral_share;
            case Category::news: return 0.03;
            case Category::mail: return 0.08;
        }
    }
    switch (cat) {
        case Category::google: return 0.7;
        case Category::bing: return 0.3;
        case Category::duckduckgo: return 0.08;
        case Category::social: return 0.25;
        case Category::news: return 0.05;
        case Category::mail: return 0.2;
    }
    return 0.0;
}

struct Link {
    std::uint32_t from;
    std::uint32_t to;
    bool community;  // misinformation-to-misinformation; floored at the weight scale
    bool leak;       // ordinary site to misinformation; weight pinned just above the scale
    double scale;    // per-link volume multiplier
};

}  // namespace detail

inline SynthData generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    // Site roster: kinds are shuffled before naming so names carry no signal.
    std::vector<SynthSite> sites;
    const int n_loner = static_cast<int>(std::lround(config.loner_share * (config.n_misinformation - config.n_propaganda)));
    for (int i = 0; i < config.n_misinformation; ++i) {
        SynthSite s;
        s.propaganda = i < config.n_propaganda;
        s.kind = (!s.propaganda && i >= config.n_misinformation - n_loner) ? SiteKind::loner : SiteKind::misinformation;
        sites.push_back(s);
    }
    for (int i = 0; i < config.n_unlabeled_misinfo; ++i)
        sites.push_back({"", SiteKind::planted, i < config.n_unlabeled_propaganda});
    for (int i = 0; i < config.n_authoritative; ++i) sites.push_back({"", SiteKind::authoritative, false});
    const int n_fringe = static_cast<int>(std::lround(config.fringe_share * config.n_benign_unlabeled));
    for (int i = 0; i < config.n_benign_unlabeled; ++i)
        sites.push_back({"", i < n_fringe ? SiteKind::fringe : SiteKind::benign, false});
    rng.shuffle(sites);
    const int width = std::max<int>(6, static_cast<int>(std::to_string(sites.size()).size()));
    for (std::size_t i = 0; i < sites.size(); ++i) {
        std::string num = std::to_string(i);
        sites[i].domain = "site" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num + ".example";
    }
    const std::size_t n_regular = sites.size();
    for (const auto& h : detail::kSynthHubs) sites.push_back({h.host, SiteKind::hub, false});

    // Authoritative and benign sites share one "ordinary" profile: the labeled
    // authoritative set is a random sample of the ordinary web.
    std::vector<std::uint32_t> community, propaganda, ordinary, fringe;
    for (std::uint32_t i = 0; i < n_regular; ++i) {
        const auto& s = sites[i];
        if (s.truly_misinformation()) community.push_back(i);
        if (s.propaganda) propaganda.push_back(i);
        if (s.kind == SiteKind::authoritative || s.kind == SiteKind::benign) ordinary.push_back(i);
        if (s.kind == SiteKind::fringe) fringe.push_back(i);
    }
    std::vector<std::uint32_t> hubs;
    for (std::uint32_t i = static_cast<std::uint32_t>(n_regular); i < sites.size(); ++i) hubs.push_back(i);

    const auto pick = [&](const std::vector<std::uint32_t>& from, std::uint32_t self) -> std::optional<std::uint32_t> {
        if (from.empty() || (from.size() == 1 && from[0] == self)) return std::nullopt;
        while (true) {
            const auto c = from[static_cast<std::size_t>(rng.below(from.size()))];
            if (c != self) return c;
        }
    };

    // Popularity: heavy-tailed, drives both link volume and how often a site
    // is chosen as a link target. Popular authoritative sites therefore collect
    // many misinformation referrers while those referrals stay a small share
    // of their traffic.
    std::vector<double> volume(sites.size());
    for (auto& v : volume) v = rng.pareto(2.5);
    const auto cumulative = [&](const std::vector<std::uint32_t>& pool) {
        std::vector<double> c(pool.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < pool.size(); ++k) c[k] = acc += volume[pool[k]];
        return c;
    };
    const auto cum_ordinary = cumulative(ordinary);
    const auto pick_popular = [&](const std::vector<std::uint32_t>& from, const std::vector<double>& cum,
                                  std::uint32_t self) -> std::optional<std::uint32_t> {
        if (from.empty() || (from.size() == 1 && from[0] == self)) return std::nullopt;
        while (true) {
            const double r = rng.uniform() * cum.back();
            const auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
            const auto c = from[std::min(k, from.size() - 1)];
            if (c != self) return c;
        }
    };

    // Link structure.
    std::vector<detail::Link> links;
    for (std::uint32_t i = 0; i < n_regular; ++i) {
        const auto& s = sites[i];
        const bool misinfo = s.truly_misinformation();
        const double intra = s.kind == SiteKind::loner ? 0.0 : config.intra_misinfo_share;
        // Out-degree: geometric, mean proportional to popularity (the
        // popularity mean is 5/3, so the population mean stays near the
        // configured one).
        int degree = 1;
        const double mean = std::max(1.0, config.mean_out_degree * volume[i] * 0.6 *
                                              (s.propaganda ? config.propaganda_degree : 1.0));
        const double q = 1.0 - 1.0 / mean;
        while (rng.bernoulli(q) && degree < 400) ++degree;
        std::vector<std::uint32_t> seen;
        for (int e = 0; e < degree; ++e) {
            std::optional<std::uint32_t> to;
            bool community_link = false;
            bool leak = false;
            const double u = rng.uniform();
            if (s.propaganda && u < config.propaganda_affinity) {
                community_link = true;
                to = pick(propaganda, i);
            } else if (misinfo) {
                if (rng.uniform() < intra) {
                    community_link = true;
                    to = pick(community, i);
                } else {
                    const double v = rng.uniform();
                    to = v < 0.75 ? pick_popular(ordinary, cum_ordinary, i) : pick(hubs, i);
                }
            } else if (s.kind == SiteKind::fringe) {
                to = u < 0.5 ? pick(fringe, i) : u < 0.7 ? pick_popular(ordinary, cum_ordinary, i) : pick(hubs, i);
            } else {
                if (u < config.authoritative_leak) {
                    to = pick(community, i);
                    leak = true;
                } else {
                    const double v = rng.uniform();
                    to = v < 0.7 ? pick_popular(ordinary, cum_ordinary, i) : pick(hubs, i);
                }
            }
            if (!to || std::find(seen.begin(), seen.end(), *to) != seen.end()) continue;
            seen.push_back(*to);
            links.push_back({i, *to, community_link, leak, community_link ? volume[i] * config.community_weight : volume[i]});
        }
        // Referrals from hubs.
        const bool misinfo_profile = misinfo || s.kind == SiteKind::fringe;
        for (const auto h : hubs) {
            const auto cat = detail::kSynthHubs[h - n_regular].category;
            const double p = detail::hub_referral_probability(config, misinfo_profile, cat);
            // Social platforms and the privacy search engine are the dominant
            // gateways into misinformation-like sites, not just frequent ones.
            const bool gateway = misinfo_profile && (cat == Category::social || cat == Category::duckduckgo);
            if (rng.bernoulli(p)) links.push_back({h, i, false, false, volume[i] * 2.0 * (gateway ? config.gateway_weight : 1.0)});
        }
    }

    SynthData data;
    Month month = Month::parse_or_throw(config.first_month);
    const double scale = static_cast<double>(config.traffic_scale);
    for (int m = 0; m < config.months; ++m) {
        std::vector<TrafficRecord> rows;
        rows.reserve(links.size());
        for (const auto& l : links) {
            if (rng.bernoulli(config.monthly_link_churn)) continue;
            double w = scale * l.scale * rng.pareto(1.5) * (0.5 + rng.uniform());
            if (l.community) w = std::max(w, scale);
            // Leaked links exist (they clear the edge threshold) but carry
            // little traffic: a link count sees them, a traffic share barely does.
            if (l.leak) w = scale * (1.0 + 0.25 * rng.uniform());
            const auto views = static_cast<std::int64_t>(std::llround(w));
            if (views < 1) continue;
            rows.push_back({month, sites[l.from].domain, sites[l.to].domain, views});
        }
        data.records.emplace(month, aggregate_month(rows).at(month));
        month = month.month == 12 ? Month{month.year + 1, 1} : Month{month.year, month.month + 1};
    }

    for (const auto& s : sites) {
        if (s.kind == SiteKind::misinformation || s.kind == SiteKind::loner)
            data.labels.push_back({s.domain, DomainClass::misinformation, s.propaganda, "synth", ""});
        else if (s.kind == SiteKind::authoritative)
            data.labels.push_back({s.domain, DomainClass::authoritative, false, "synth", ""});
    }
    std::sort(data.labels.begin(), data.labels.end(), [](const auto& a, const auto& b) { return a.domain < b.domain; });
    data.sites = std::move(sites);
    std::sort(data.sites.begin(), data.sites.end(), [](const auto& a, const auto& b) { return a.domain < b.domain; });
    return data;
}

inline std::string labels_to_csv(const std::vector<DomainLabel>& labels) {
    std::string out = "domain,class,propaganda,source\n";
    for (const auto& l : labels)
        out += l.domain + "," + std::string(to_string(l.cls)) + "," + (l.propaganda ? "true" : "false") + "," + l.source + "\n";
    return out;
}

inline std::string truth_to_csv(const std::vector<SynthSite>& sites) {
    std::string out = "domain,kind,misinformation,propaganda\n";
    for (const auto& s : sites) {
        out += s.domain + "," + std::string(to_string(s.kind)) + "," + (s.truly_misinformation() ? "true" : "false") +
               "," + (s.propaganda ? "true" : "false") + "\n";
    }
    return out;
}

}  // namespace navnet
