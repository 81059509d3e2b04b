#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip_lab/estimators.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/graph.hpp"
#include "gossip_lab/protocol.hpp"
#include "gossip_lab/stats.hpp"

namespace gossip_lab {

inline constexpr const char* report_schema = "1";

inline void to_json(nlohmann::json& j, const FamilySpec& s) {
    j = nlohmann::json{{"family", to_string(s.family)}};
    switch (s.family) {
        case Family::diamonds:
            j["m"] = s.m;
            j["k"] = s.k;
            break;
        case Family::hypercube: j["d"] = s.d; break;
        case Family::gnp:
            j["n"] = s.n;
            j["p"] = s.p;
            j["seed"] = s.seed;
            break;
        default: j["n"] = s.n;
    }
}

/// Reports are dumped with sorted keys and round-trip doubles, so equal inputs give equal bytes.
inline std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json graph_summary(const Graph& g, const std::string& source) {
    return {{"n", g.vertex_count()}, {"m", g.edge_count()}, {"source", source}};
}

enum class Stat { wast, gst };

inline std::string to_string(Stat s) { return s == Stat::wast ? "wast" : "gst"; }

inline Stat stat_from_string(const std::string& s) {
    if (s == "wast") return Stat::wast;
    if (s == "gst") return Stat::gst;
    throw std::invalid_argument("unknown stat '" + s + "'");
}

/// Estimate report: the spread summary for one stat with per-start entries and the resolved config.
inline nlohmann::json estimate_report(const Graph& g, const std::string& source, const SpreadSummary& summary,
                                      Stat stat, const nlohmann::json& config) {
    nlohmann::json per_start = nlohmann::json::array();
    for (const auto& s : summary.per_start)
        per_start.push_back({{"start", s.start}, {"estimate", stat == Stat::wast ? s.mean : s.quantile}});
    nlohmann::json warnings = nlohmann::json::array();
    if (stat == Stat::gst && summary.below_recommended)
        warnings.push_back("trials per start below the recommended max(1000, 50n) for the (1-1/n)-quantile");
    return {{"schema", report_schema},
            {"command", "estimate"},
            {"config", config},
            {"graph", graph_summary(g, source)},
            {"model", to_string(summary.model)},
            {"variant", to_string(summary.variant)},
            {"stat", to_string(stat)},
            {"estimate", stat == Stat::wast ? summary.wast : summary.gst},
            {"worst_start", stat == Stat::wast ? summary.worst_mean_start : summary.worst_quantile_start},
            {"per_start", per_start},
            {"warnings", warnings}};
}

/// One row per (start, trial).
inline std::string raw_samples_csv(const SpreadSummary& summary) {
    std::string out = "start,trial,spread_time\n";
    char buf[64];
    for (std::size_t i = 0; i < summary.raw.size(); ++i)
        for (std::size_t t = 0; t < summary.raw[i].size(); ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", summary.raw[i][t]);
            out += std::to_string(summary.per_start[i].start) + "," + std::to_string(t) + "," + buf + "\n";
        }
    return out;
}

/// Per-start estimate table.
inline std::string estimate_csv(const SpreadSummary& summary, Stat stat) {
    std::string out = "start,point,stderr,ci_lo,ci_hi,trials\n";
    char buf[160];
    for (const auto& s : summary.per_start) {
        const Estimate& e = stat == Stat::wast ? s.mean : s.quantile;
        std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g,%.17g,%zu\n", s.start, e.point, e.stderr_, e.ci_lo,
                      e.ci_hi, e.trials);
        out += buf;
    }
    return out;
}

}  // namespace gossip_lab
