#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "gossip_lab/graph.hpp"
#include "gossip_lab/protocol.hpp"
#include "gossip_lab/random.hpp"

namespace gossip_lab {

inline constexpr std::uint64_t default_event_budget = 1'000'000'000ULL;

namespace detail {

struct InformedSet {
    std::vector<char> flag;
    std::size_t count = 0;
    RunRecord record;

    InformedSet(std::size_t n, std::span<const Vertex> sources, std::string engine) : flag(n, 0) {
        if (sources.empty()) throw std::invalid_argument("at least one initially informed vertex required");
        record.engine = std::move(engine);
        record.start = sources.front();
        for (Vertex s : sources) {
            if (s >= n) throw std::invalid_argument("start vertex out of range");
            if (!flag[s]) {
                flag[s] = 1;
                ++count;
                record.trace.push_back({0.0, s});
            }
        }
    }

    bool complete() const noexcept { return count == flag.size(); }

    void inform(Vertex v, double t) {
        flag[v] = 1;
        ++count;
        record.trace.push_back({t, v});
        record.spread_time = t;
    }

    RunRecord finish(const RandomSource* src) && {
        if (src) {
            record.seed = src->seed();
            record.stream = src->stream();
        }
        return std::move(record);
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Synchronous rounds
// ---------------------------------------------------------------------------

/// Synchronous protocol with an arbitrary neighbour chooser
/// `Vertex choose(Vertex caller, std::size_t round)` (round is 1-based).
/// Every vertex calls once per round; all calls are resolved against the
/// informed set at the start of the round, so a vertex informed in round t
/// acts as informed only from round t+1.
template <class Chooser>
RunRecord run_synchronous_with(const Graph& g, std::span<const Vertex> sources, Variant variant, Chooser&& choose,
                               std::size_t max_rounds = 100'000'000) {
    const std::size_t n = g.vertex_count();
    detail::InformedSet state(n, sources, "synchronous");
    std::vector<Vertex> fresh;
    for (std::size_t round = 1; !state.complete(); ++round) {
        if (round > max_rounds) throw ProtocolError("synchronous run exceeded round budget");
        fresh.clear();
        for (Vertex u = 0; u < n; ++u) {
            Vertex w = choose(u, round);
            Vertex learner = resolve_call(variant, state.flag[u] != 0, state.flag[w] != 0, u, w);
            if (learner != no_vertex) fresh.push_back(learner);
        }
        std::sort(fresh.begin(), fresh.end());
        fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
        for (Vertex v : fresh) state.inform(v, static_cast<double>(round));
    }
    return std::move(state).finish(nullptr);
}

inline RunRecord run_synchronous(const Graph& g, Vertex start, Variant variant, RandomSource& src) {
    const Vertex sources[] = {start};
    auto rec = run_synchronous_with(g, sources, variant,
                                    [&](Vertex u, std::size_t) { return src.uniform_neighbour(g, u); });
    rec.seed = src.seed();
    rec.stream = src.stream();
    return rec;
}

/// Synchronous run driven by per-vertex calling lists: in round r vertex u
/// calls entry r-1 of its list.
inline RunRecord run_synchronous(const Graph& g, std::span<const Vertex> sources, Variant variant,
                                 CallingLists& lists) {
    return run_synchronous_with(g, sources, variant,
                                [&](Vertex u, std::size_t round) { return lists.entry(u, round - 1); });
}

// ---------------------------------------------------------------------------
// Asynchronous: superposed clock event loop
// ---------------------------------------------------------------------------

/// Definitional asynchronous engine: n rate-1 clocks realized as one rate-n
/// clock whose rings are assigned to uniformly random vertices.
inline RunRecord run_async_event(const Graph& g, std::span<const Vertex> sources, Variant variant,
                                 RandomSource& src, std::uint64_t event_budget = default_event_budget) {
    const std::size_t n = g.vertex_count();
    detail::InformedSet state(n, sources, "async_event");
    const double total_rate = static_cast<double>(n);
    double t = 0.0;
    for (std::uint64_t events = 0; !state.complete(); ++events) {
        if (events >= event_budget) throw ProtocolError("async_event: event budget exceeded");
        t += sample_exponential(total_rate, src);
        Vertex b = src.uniform_vertex(n);
        Vertex w = src.uniform_neighbour(g, b);
        Vertex learner = resolve_call(variant, state.flag[b] != 0, state.flag[w] != 0, b, w);
        if (learner != no_vertex) state.inform(learner, t);
    }
    return std::move(state).finish(&src);
}

inline RunRecord run_async_event(const Graph& g, Vertex start, Variant variant, RandomSource& src,
                                 std::uint64_t event_budget = default_event_budget) {
    const Vertex sources[] = {start};
    return run_async_event(g, sources, variant, src, event_budget);
}

/// Time from the start of observation until u and v first call each other
/// (either direction), measured on the superposed asynchronous clock.
inline double measure_communication_time(const Graph& g, Vertex u, Vertex v, RandomSource& src,
                                         std::uint64_t event_budget = default_event_budget) {
    if (!g.has_edge(u, v)) throw std::invalid_argument("communication time needs an edge");
    const std::size_t n = g.vertex_count();
    double t = 0.0;
    for (std::uint64_t events = 0; events < event_budget; ++events) {
        t += sample_exponential(static_cast<double>(n), src);
        Vertex b = src.uniform_vertex(n);
        if (b != u && b != v) continue;
        Vertex w = src.uniform_neighbour(g, b);
        if ((b == u && w == v) || (b == v && w == u)) return t;
    }
    throw ProtocolError("communication time: event budget exceeded");
}

// ---------------------------------------------------------------------------
// Asynchronous: first-passage percolation
// ---------------------------------------------------------------------------

/// Multi-source Dijkstra where `weight(u, v)` is the traversal time of u -> v.
/// Each traversal is queried at most once, from the endpoint settled first, so
/// weights may be drawn lazily. Returns distances and the settle order.
template <class WeightFn>
std::pair<std::vector<double>, std::vector<Vertex>> first_passage_times(const Graph& g,
                                                                        std::span<const Vertex> sources,
                                                                        WeightFn&& weight) {
    const std::size_t n = g.vertex_count();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<char> settled(n, 0);
    std::vector<Vertex> order;
    order.reserve(n);
    using Item = std::pair<double, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (Vertex s : sources) {
        if (s >= n) throw std::invalid_argument("source out of range");
        dist[s] = 0.0;
        heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        order.push_back(u);
        for (Vertex v : g.neighbours(u)) {
            if (settled[v]) continue;
            double candidate = d + weight(u, v);
            if (candidate < dist[v]) {
                dist[v] = candidate;
                heap.emplace(candidate, v);
            }
        }
    }
    return {std::move(dist), std::move(order)};
}

template <class WeightFn>
RunRecord fpp_record(const Graph& g, std::span<const Vertex> sources, WeightFn&& weight) {
    auto [dist, order] = first_passage_times(g, sources, std::forward<WeightFn>(weight));
    RunRecord rec;
    rec.engine = "async_fpp";
    rec.start = sources.front();
    rec.trace.reserve(order.size());
    for (Vertex v : order) rec.trace.push_back({dist[v], v});
    rec.spread_time = rec.trace.back().time;
    return rec;
}

/// Production asynchronous engine: independent exponential traversal weights
/// (one per edge for push&pull, one per direction otherwise) and a single
/// shortest-path computation.
inline RunRecord run_async_fpp(const Graph& g, std::span<const Vertex> sources, Variant variant,
                               RandomSource& src) {
    auto weight = [&](Vertex u, Vertex v) {
        return sample_exponential(edge_rate(g, u, v, variant, Model::async), src);
    };
    auto rec = fpp_record(g, sources, weight);
    rec.seed = src.seed();
    rec.stream = src.stream();
    return rec;
}

inline RunRecord run_async_fpp(const Graph& g, Vertex start, Variant variant, RandomSource& src) {
    const Vertex sources[] = {start};
    return run_async_fpp(g, sources, variant, src);
}

/// Spread time only; skips trace construction for Monte Carlo batches.
inline double fpp_spread_time(const Graph& g, Vertex start, Variant variant, RandomSource& src) {
    const Vertex sources[] = {start};
    const bool symmetric = variant == Variant::push_pull;
    auto [dist, order] = first_passage_times(g, sources, [&](Vertex u, Vertex v) {
        const double rate = symmetric ? 1.0 / static_cast<double>(g.degree(u)) + 1.0 / static_cast<double>(g.degree(v))
                                      : edge_rate(g, u, v, variant, Model::async);
        return sample_exponential(rate, src);
    });
    return dist[order.back()];
}

// ---------------------------------------------------------------------------
// Two clocks per edge
// ---------------------------------------------------------------------------

/// Every edge uv carries two independent clocks of rate 1/deg(u) + 1/deg(v),
/// one near each endpoint. A ring of the clock near x on edge xy informs x when
/// y is informed and x is not. Simulated literally with a heap of 2m clocks.
inline RunRecord run_two_clock(const Graph& g, Vertex start, RandomSource& src,
                               std::uint64_t event_budget = default_event_budget) {
    const std::size_t n = g.vertex_count();
    const Vertex sources[] = {start};
    detail::InformedSet state(n, sources, "two_clock");
    if (state.complete()) return std::move(state).finish(&src);

    struct Clock {
        Vertex near;
        Vertex far;
        double rate;
    };
    std::vector<Clock> clocks;
    clocks.reserve(2 * g.edge_count());
    for (const auto& [u, v] : g.edges()) {
        const double rate = edge_rate(g, u, v, Variant::push_pull, Model::async);
        clocks.push_back({u, v, rate});
        clocks.push_back({v, u, rate});
    }
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t i = 0; i < clocks.size(); ++i) heap.emplace(sample_exponential(clocks[i].rate, src), i);

    for (std::uint64_t events = 0; !state.complete(); ++events) {
        if (events >= event_budget) throw ProtocolError("two_clock: event budget exceeded");
        auto [t, i] = heap.top();
        heap.pop();
        const Clock& c = clocks[i];
        if (state.flag[c.far] && !state.flag[c.near]) state.inform(c.near, t);
        heap.emplace(t + sample_exponential(c.rate, src), i);
    }
    return std::move(state).finish(&src);
}

// ---------------------------------------------------------------------------
// Sequential protocol
// ---------------------------------------------------------------------------

struct SequentialRun {
    RunRecord record;
    std::size_t steps = 0;                   // N: completion step
    std::vector<std::size_t> informed_step;  // per vertex; 0 for initially informed
};

/// Step i (1-based) applies pair i of the calling sequence: caller B_i calls
/// W_i. When the sequence runs out it is extended through `drawer` if given.
inline SequentialRun run_sequential(const Graph& g, std::span<const Vertex> sources, CallingSequence& calls,
                                    CallingSequenceDrawer* drawer = nullptr,
                                    Variant variant = Variant::push_pull,
                                    std::size_t max_steps = 1'000'000'000) {
    const std::size_t n = g.vertex_count();
    detail::InformedSet state(n, sources, "sequential");
    SequentialRun out;
    out.informed_step.assign(n, 0);
    std::size_t step = 0;
    while (!state.complete()) {
        if (step >= calls.size()) {
            if (!drawer) throw ProtocolError("sequential: calling sequence exhausted before completion");
            drawer->extend(calls, std::max<std::size_t>(2 * calls.size(), 4 * n));
        }
        if (step >= max_steps) throw ProtocolError("sequential: step budget exceeded");
        const CallPair& p = calls.pairs[step];
        ++step;
        Vertex learner = resolve_call(variant, state.flag[p.caller] != 0, state.flag[p.callee] != 0, p.caller,
                                      p.callee);
        if (learner != no_vertex) {
            state.inform(learner, static_cast<double>(step));
            out.informed_step[learner] = step;
        }
    }
    out.steps = step;
    out.record = std::move(state).finish(nullptr);
    return out;
}

inline SequentialRun run_sequential(const Graph& g, Vertex start, CallingSequence& calls,
                                    CallingSequenceDrawer* drawer = nullptr) {
    const Vertex sources[] = {start};
    return run_sequential(g, sources, calls, drawer);
}

// ---------------------------------------------------------------------------
// Decelerated asynchronous variants
// ---------------------------------------------------------------------------

/// Partition of time into subintervals in which each vertex acts at most once.
/// `epoch`: boundaries at the instants every clock has rung since the previous
/// boundary (coupon-collector epochs). `fixed`: boundaries at delta, 2 delta, ...
struct Deceleration {
    enum class Kind { epoch, fixed };
    Kind kind = Kind::epoch;
    double delta = 0.0;

    static Deceleration epochs() { return {Kind::epoch, 0.0}; }
    static Deceleration fixed(double delta) {
        if (!(delta > 0.0)) throw std::invalid_argument("subinterval length must be positive");
        return {Kind::fixed, delta};
    }
    /// 4 log n, natural log.
    static Deceleration fixed_default(std::size_t n) {
        return fixed(4.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
    }
};

namespace detail {

/// Merges per-vertex ring times into one time-ordered stream.
class RingMerger {
public:
    explicit RingMerger(RingSchedule& rings) : rings_(&rings), next_index_(rings.vertex_count(), 0) {
        for (Vertex v = 0; v < rings.vertex_count(); ++v) push(v);
    }

    bool empty() const noexcept { return heap_.empty(); }

    std::pair<double, Vertex> pop() {
        auto item = heap_.top();
        heap_.pop();
        push(item.second);
        return item;
    }

private:
    void push(Vertex v) {
        if (auto t = rings_->ring(v, next_index_[v]++)) heap_.emplace(*t, v);
    }

    using Item = std::pair<double, Vertex>;
    RingSchedule* rings_;
    std::vector<std::size_t> next_index_;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap_;
};

}  // namespace detail

/// First `count` coupon-collector epoch boundaries X_1, X_1+X_2, ... of a ring schedule.
inline std::vector<double> coupon_collector_epochs(RingSchedule& rings, std::size_t count) {
    const std::size_t n = rings.vertex_count();
    std::vector<double> boundaries;
    std::vector<char> rung(n, 0);
    std::size_t rung_count = 0;
    detail::RingMerger merger(rings);
    while (boundaries.size() < count) {
        if (merger.empty()) throw ProtocolError("ring schedule exhausted before epoch completed");
        auto [t, v] = merger.pop();
        if (rung[v]) continue;
        rung[v] = 1;
        if (++rung_count == n) {
            boundaries.push_back(t);
            std::fill(rung.begin(), rung.end(), 0);
            rung_count = 0;
        }
    }
    return boundaries;
}

struct DeceleratedRun {
    RunRecord record;
    // epoch mode: ends of the epochs completed before the last informing;
    // fixed mode: k * delta for every subinterval up to the one containing it.
    std::vector<double> boundaries;
};

/// Asynchronous push&pull in which each vertex acts only on its first ring in
/// each subinterval, consuming the next entry of its calling list. Actions are
/// applied in ring order, so informedness updates within a subinterval.
inline DeceleratedRun run_decelerated(const Graph& g, Vertex start, CallingLists& lists, RingSchedule& rings,
                                      Deceleration mode, Variant variant = Variant::push_pull) {
    const std::size_t n = g.vertex_count();
    if (rings.vertex_count() != n) throw std::invalid_argument("ring schedule size mismatch");
    const Vertex sources[] = {start};
    detail::InformedSet state(n, sources, mode.kind == Deceleration::Kind::epoch ? "decelerated_epoch"
                                                                                  : "decelerated_fixed");
    DeceleratedRun out;
    std::vector<std::size_t> actions(n, 0);
    std::vector<char> acted(n, 0);
    std::size_t acted_count = 0;
    std::vector<std::int64_t> last_interval(n, -1);
    detail::RingMerger merger(rings);

    while (!state.complete()) {
        if (merger.empty()) throw ProtocolError("decelerated: ring schedule exhausted before completion");
        auto [t, v] = merger.pop();
        bool act = false;
        if (mode.kind == Deceleration::Kind::epoch) {
            if (!acted[v]) {
                acted[v] = 1;
                ++acted_count;
                act = true;
            }
        } else {
            auto interval = static_cast<std::int64_t>(std::floor(t / mode.delta));
            if (last_interval[v] != interval) {
                last_interval[v] = interval;
                act = true;
            }
        }
        if (act) {
            Vertex w = lists.entry(v, actions[v]++);
            Vertex learner = resolve_call(variant, state.flag[v] != 0, state.flag[w] != 0, v, w);
            if (learner != no_vertex) state.inform(learner, t);
        }
        if (mode.kind == Deceleration::Kind::epoch && acted_count == n) {
            out.boundaries.push_back(t);
            std::fill(acted.begin(), acted.end(), 0);
            acted_count = 0;
        }
    }
    if (mode.kind == Deceleration::Kind::fixed) {
        const auto touched = static_cast<std::size_t>(std::floor(state.record.spread_time / mode.delta)) + 1;
        for (std::size_t k = 1; k <= touched; ++k) out.boundaries.push_back(static_cast<double>(k) * mode.delta);
    }
    out.record = std::move(state).finish(nullptr);
    return out;
}

}  // namespace gossip_lab
