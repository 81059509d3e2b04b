#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip_lab/graph.hpp"

namespace gossip_lab {

enum class Variant { push_pull, push_only, pull_only };
enum class Model { sync, async };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::push_pull: return "push_pull";
        case Variant::push_only: return "push_only";
        case Variant::pull_only: return "pull_only";
    }
    return "?";
}

inline std::string to_string(Model m) { return m == Model::sync ? "sync" : "async"; }

inline Variant variant_from_string(const std::string& s) {
    for (Variant v : {Variant::push_pull, Variant::push_only, Variant::pull_only})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown protocol variant '" + s + "'");
}

inline Model model_from_string(const std::string& s) {
    if (s == "sync") return Model::sync;
    if (s == "async") return Model::async;
    throw std::invalid_argument("unknown model '" + s + "'");
}

inline bool pushes(Variant v) noexcept { return v != Variant::pull_only; }
inline bool pulls(Variant v) noexcept { return v != Variant::push_only; }

/// Outcome of one call from `caller` to `callee` given current knowledge.
/// Returns the newly informed vertex, or `none` when the call is useless.
inline constexpr Vertex no_vertex = static_cast<Vertex>(-1);

inline Vertex resolve_call(Variant variant, bool caller_informed, bool callee_informed, Vertex caller,
                           Vertex callee) noexcept {
    if (caller_informed && !callee_informed && pushes(variant)) return callee;
    if (!caller_informed && callee_informed && pulls(variant)) return caller;
    return no_vertex;
}

struct TraceEvent {
    double time;
    Vertex vertex;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// One protocol execution. Times are in units of the mean ring interval of a
/// single clock (asynchronous engines), rounds (synchronous/lazy), or steps
/// (sequential). The trace lists each vertex once, in informing order.
struct RunRecord {
    std::string engine;
    Vertex start = 0;
    double spread_time = 0.0;
    std::vector<TraceEvent> trace;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Informing time per vertex (index = vertex id).
    std::vector<double> informing_times(std::size_t n) const {
        std::vector<double> t(n, -1.0);
        for (const auto& e : trace) t[e.vertex] = e.time;
        return t;
    }
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : r.trace) trace.push_back({e.time, e.vertex});
    j = nlohmann::json{{"engine", r.engine},           {"start", r.start}, {"spread_time", r.spread_time},
                       {"trace", std::move(trace)}, {"seed", r.seed},   {"stream", r.stream}};
}

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Communication law of edge uv, with the rumour travelling from u to v.
///  async: rate of the exponential communication time.
///         push_pull 1/deg(u) + 1/deg(v); push_only 1/deg(u); pull_only 1/deg(v).
///  sync:  per-round success probability of the same operations,
///         push_pull 1 - (1 - 1/deg(u))(1 - 1/deg(v)).
inline double edge_rate(const Graph& g, Vertex u, Vertex v, Variant variant, Model model) {
    if (!g.has_edge(u, v))
        throw std::invalid_argument("edge_rate: " + std::to_string(u) + " " + std::to_string(v) + " is not an edge");
    const double pu = 1.0 / static_cast<double>(g.degree(u));
    const double pv = 1.0 / static_cast<double>(g.degree(v));
    switch (variant) {
        case Variant::push_only: return pu;
        case Variant::pull_only: return pv;
        case Variant::push_pull: return model == Model::async ? pu + pv : 1.0 - (1.0 - pu) * (1.0 - pv);
    }
    return 0.0;
}

}  // namespace gossip_lab
