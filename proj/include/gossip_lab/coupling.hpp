#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip_lab/engines.hpp"
#include "gossip_lab/graph.hpp"
#include "gossip_lab/protocol.hpp"
#include "gossip_lab/random.hpp"
#include "gossip_lab/stats.hpp"
#include "gossip_lab/structure.hpp"

namespace gossip_lab {

struct SpecialSet {
    double alpha = 0.0;
    std::vector<Vertex> vertices;  // sorted
    std::vector<char> mask;        // per vertex

    bool contains(Vertex v) const { return mask[v] != 0; }
};

/// Vertices whose contact probability pi(v) strictly exceeds n^(alpha - 1).
/// Since pi sums to one there are fewer than n^(1 - alpha) of them.
inline SpecialSet compute_special_vertices(const Graph& g, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
    const std::size_t n = g.vertex_count();
    const double threshold = std::pow(static_cast<double>(n), alpha - 1.0);
    const auto profiles = rate_profiles(g);
    SpecialSet out{alpha, {}, std::vector<char>(n, 0)};
    for (Vertex v = 0; v < n; ++v)
        // Regular graphs give pi == 1/n == threshold at alpha = 0; keep that case non-special.
        if (profiles.contact[v] > threshold * (1.0 + 1e-12)) {
            out.vertices.push_back(v);
            out.mask[v] = 1;
        }
    return out;
}

struct Block {
    std::size_t first = 0;  // index of the first pair
    std::size_t last = 0;   // one past the final pair

    std::size_t pair_count() const noexcept { return last - first; }
    std::size_t size() const noexcept { return 2 * pair_count(); }  // S_j counts both entries of each pair
};

/// Greedy partition of B_1 W_1 B_2 W_2 ... into blocks. Built over the first N
/// pairs of a sequential run, `blocks.size()` is N_b.
struct BlockPartition {
    double alpha = 0.0;
    std::vector<Vertex> special;
    std::vector<Block> blocks;
    std::size_t covered_pairs = 0;
    bool refined = false;

    std::size_t block_count() const noexcept { return blocks.size(); }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s;
        s.reserve(blocks.size());
        for (const auto& b : blocks) s.push_back(b.size());
        return s;
    }

    /// Block index holding pair `index` (0-based).
    std::size_t block_of(std::size_t index) const {
        auto it = std::upper_bound(blocks.begin(), blocks.end(), index,
                                   [](std::size_t i, const Block& b) { return i < b.first; });
        return static_cast<std::size_t>(it - blocks.begin()) - 1;
    }
};

namespace detail {

/// Stamp-based membership of the block under construction; O(1) per pair.
class BlockBuilder {
public:
    BlockBuilder(std::size_t n, const SpecialSet& special) : stamp_(n, 0), special_(&special) {}

    /// Whether pair p may extend the current (nonempty) block.
    bool admits(const CallPair& p) const {
        if (stamp_[p.caller] == current_) return false;
        if (stamp_[p.callee] == current_ && !special_->contains(p.callee)) return false;
        return true;
    }

    void open() { ++current_; }

    void add(const CallPair& p) {
        stamp_[p.caller] = current_;
        stamp_[p.callee] = current_;
    }

private:
    std::vector<std::uint64_t> stamp_;
    std::uint64_t current_ = 0;
    const SpecialSet* special_;
};

}  // namespace detail

/// Greedy maximal blocks over the first `pair_count` pairs: a pair joins the open
/// block iff its caller is absent from the block's earlier entries and its
/// callee is absent or special. The final block may be cut short by `pair_count`.
inline BlockPartition partition_blocks(const Graph& g, const CallingSequence& calls, const SpecialSet& special,
                                       std::size_t pair_count) {
    if (pair_count > calls.size()) throw std::invalid_argument("partition prefix longer than calling sequence");
    BlockPartition out;
    out.alpha = special.alpha;
    out.special = special.vertices;
    out.covered_pairs = pair_count;
    detail::BlockBuilder builder(g.vertex_count(), special);
    for (std::size_t i = 0; i < pair_count; ++i) {
        const CallPair& p = calls.pairs[i];
        if (out.blocks.empty() || !builder.admits(p)) {
            if (!out.blocks.empty()) out.blocks.back().last = i;
            out.blocks.push_back({i, i + 1});
            builder.open();
        }
        builder.add(p);
        out.blocks.back().last = i + 1;
    }
    return out;
}

inline BlockPartition partition_blocks(const Graph& g, const CallingSequence& calls, const SpecialSet& special) {
    return partition_blocks(g, calls, special, calls.size());
}

/// Extends `calls` until at least `count` blocks are complete (a later block has
/// opened), then partitions; the result holds exactly `count` complete blocks.
inline BlockPartition partition_complete_blocks(const Graph& g, CallingSequence& calls, CallingSequenceDrawer& drawer,
                                                const SpecialSet& special, std::size_t count) {
    BlockPartition out;
    out.alpha = special.alpha;
    out.special = special.vertices;
    detail::BlockBuilder builder(g.vertex_count(), special);
    std::size_t i = 0;
    for (;; ++i) {
        if (i >= calls.size()) drawer.extend(calls, std::max<std::size_t>(2 * calls.size(), 64));
        const CallPair& p = calls.pairs[i];
        if (out.blocks.empty() || !builder.admits(p)) {
            if (out.blocks.size() == count) break;
            out.blocks.push_back({i, i + 1});
            builder.open();
        }
        builder.add(p);
        out.blocks.back().last = i + 1;
    }
    out.covered_pairs = i;
    return out;
}

/// Splits a block between pairs i and i+1 whenever a special vertex was first
/// informed at sequential step i and pair i+1 lies in the same block.
/// `informed_step[v]` is the step at which v learned the rumour, 0 for the start.
inline BlockPartition refine_blocks_at_special(const BlockPartition& partition,
                                               std::span<const std::size_t> informed_step) {
    std::vector<std::size_t> cuts;  // pair index that begins a new block
    for (Vertex v : partition.special) {
        const std::size_t step = informed_step[v];
        if (step == 0 || step >= partition.covered_pairs) continue;
        // pairs step-1 and step (0-based) share a block?
        if (partition.block_of(step - 1) == partition.block_of(step)) cuts.push_back(step);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    BlockPartition out = partition;
    out.blocks.clear();
    out.refined = true;
    auto cut = cuts.begin();
    for (const Block& b : partition.blocks) {
        std::size_t first = b.first;
        while (cut != cuts.end() && *cut < b.last) {
            if (*cut > first) {
                out.blocks.push_back({first, *cut});
                first = *cut;
            }
            ++cut;
        }
        out.blocks.push_back({first, b.last});
    }
    return out;
}

struct PartitionAudit {
    bool contiguous = true;  // blocks tile [0, covered_pairs) in order
    bool valid = true;       // both block conditions hold inside every block
    bool maximal = true;     // the pair after each non-final block violates a condition
};

/// Re-checks a partition from scratch with explicit per-block entry sets.
inline PartitionAudit audit_partition(const BlockPartition& partition, const CallingSequence& calls,
                                      const SpecialSet& special) {
    PartitionAudit audit;
    auto violates = [&](const std::set<Vertex>& seen, const CallPair& p) {
        return seen.count(p.caller) > 0 || (seen.count(p.callee) > 0 && !special.contains(p.callee));
    };
    std::size_t expected_first = 0;
    for (std::size_t j = 0; j < partition.blocks.size(); ++j) {
        const Block& b = partition.blocks[j];
        if (b.first != expected_first || b.last <= b.first) audit.contiguous = false;
        expected_first = b.last;
        std::set<Vertex> seen;
        for (std::size_t i = b.first; i < b.last; ++i) {
            const CallPair& p = calls.pairs[i];
            if (i > b.first && violates(seen, p)) audit.valid = false;
            seen.insert(p.caller);
            seen.insert(p.callee);
        }
        const bool last_block = j + 1 == partition.blocks.size();
        if (!last_block && !partition.refined && !violates(seen, calls.pairs[b.last])) audit.maximal = false;
    }
    if (expected_first != partition.covered_pairs) audit.contiguous = false;
    return audit;
}

/// Lazy scenario: round k applies every pair of block k at once, resolved
/// against the informed set at the start of the round; vertices outside the
/// block stay idle. Round numbers are the trace times.
inline RunRecord run_lazy(const Graph& g, Vertex start, const CallingSequence& calls, const BlockPartition& partition,
                          Variant variant = Variant::push_pull) {
    const std::size_t n = g.vertex_count();
    std::vector<char> informed(n, 0);
    informed[start] = 1;
    std::size_t count = 1;
    RunRecord rec;
    rec.engine = "lazy";
    rec.start = start;
    rec.trace.push_back({0.0, start});
    std::vector<Vertex> fresh;
    std::size_t round = 0;
    while (count < n) {
        if (round >= partition.blocks.size()) throw ProtocolError("lazy: blocks exhausted before completion");
        const Block& b = partition.blocks[round];
        ++round;
        fresh.clear();
        for (std::size_t i = b.first; i < b.last; ++i) {
            const CallPair& p = calls.pairs[i];
            Vertex learner = resolve_call(variant, informed[p.caller] != 0, informed[p.callee] != 0, p.caller, p.callee);
            if (learner != no_vertex) fresh.push_back(learner);
        }
        std::sort(fresh.begin(), fresh.end());
        fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
        for (Vertex v : fresh) {
            informed[v] = 1;
            ++count;
            rec.trace.push_back({static_cast<double>(round), v});
        }
    }
    rec.spread_time = static_cast<double>(round);
    return rec;
}

/// Lazy round k informs exactly what sequential steps of blocks 1..k inform:
/// every vertex's lazy round equals the index of the block holding its
/// sequential informing step.
inline bool lazy_matches_sequential(const BlockPartition& partition, const SequentialRun& sequential,
                                    const RunRecord& lazy) {
    const std::size_t n = sequential.informed_step.size();
    auto lazy_round = lazy.informing_times(n);
    for (Vertex v = 0; v < n; ++v) {
        const std::size_t step = sequential.informed_step[v];
        const double expected = step == 0 ? 0.0 : static_cast<double>(partition.block_of(step - 1) + 1);
        if (lazy_round[v] != expected) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Synchronous vs decelerated asynchronous on shared calling lists
// ---------------------------------------------------------------------------

struct CoupledRun {
    RunRecord sync;
    DeceleratedRun decelerated;
    std::vector<double> epoch_ends;     // X_1, X_1+X_2, ... for each synchronous round
    std::vector<char> superset;         // per round k: decelerated informed at epoch k end contains sync after k rounds
    bool within_epoch_sum = true;       // decelerated spread <= X_1 + ... + X_{sync rounds}

    bool all_supersets() const {
        return std::all_of(superset.begin(), superset.end(), [](char c) { return c != 0; });
    }
};

inline CoupledRun coupled_sync_async_run(const Graph& g, Vertex start, const RandomSource& src) {
    const std::size_t n = g.vertex_count();
    CallingLists lists(g, src.substream(0));
    RingSchedule rings(n, src.substream(1));
    CoupledRun out;
    const Vertex sources[] = {start};
    out.sync = run_synchronous(g, sources, Variant::push_pull, lists);
    out.sync.seed = src.seed();
    out.sync.stream = src.stream();
    out.decelerated = run_decelerated(g, start, lists, rings, Deceleration::epochs());
    out.decelerated.record.seed = src.seed();
    out.decelerated.record.stream = src.stream();

    const auto rounds = static_cast<std::size_t>(out.sync.spread_time);
    out.epoch_ends = coupon_collector_epochs(rings, rounds);
    const auto sync_time = out.sync.informing_times(n);
    const auto decel_time = out.decelerated.record.informing_times(n);
    for (std::size_t k = 1; k <= rounds; ++k) {
        bool ok = true;
        for (Vertex v = 0; v < n && ok; ++v)
            if (sync_time[v] <= static_cast<double>(k) && decel_time[v] > out.epoch_ends[k - 1]) ok = false;
        out.superset.push_back(ok ? 1 : 0);
    }
    if (rounds > 0) out.within_epoch_sum = out.decelerated.record.spread_time <= out.epoch_ends.back();
    return out;
}

// ---------------------------------------------------------------------------
// Lemma diagnostics
// ---------------------------------------------------------------------------

struct DiagnosticEvent {
    std::string event;
    Proportion frequency;
    nlohmann::json params;
};

/// Empirical frequencies of the events bounding N and the block sizes, all
/// conditional on the supplied guaranteed-spread-time estimate.
struct DiagnosticsReport {
    std::vector<DiagnosticEvent> events;
    std::size_t trials = 0;
    bool graph_too_small = false;
    double gst_estimate = 0.0;
    double alpha = 0.0;

    const DiagnosticEvent* find(const std::string& name) const {
        for (const auto& e : events)
            if (e.event == name) return &e;
        return nullptr;
    }
};

inline void to_json(nlohmann::json& j, const DiagnosticsReport& r) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : r.events)
        events.push_back({{"event", e.event},
                          {"frequency", e.frequency.frequency},
                          {"ci95", {e.frequency.ci_lo, e.frequency.ci_hi}},
                          {"trials", e.frequency.trials},
                          {"params", e.params}});
    j = nlohmann::json{{"events", std::move(events)},
                       {"trials", r.trials},
                       {"graph_too_small", r.graph_too_small},
                       {"conditional_on_gst_estimate", r.gst_estimate},
                       {"alpha", r.alpha}};
}

inline DiagnosticsReport lemma_diagnostics(const Graph& g, double alpha, std::size_t trials, double gst_estimate,
                                           std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("diagnostics need at least one trial");
    const std::size_t n = g.vertex_count();
    DiagnosticsReport report;
    report.trials = trials;
    report.gst_estimate = gst_estimate;
    report.alpha = alpha;
    if (n < 2) {
        report.graph_too_small = true;
        return report;
    }
    const auto special = compute_special_vertices(g, alpha);
    const double dn = static_cast<double>(n);
    const double n_bound = 4.0 * dn * gst_estimate;
    const auto block_target = static_cast<std::size_t>(std::ceil(64.0 * gst_estimate * std::pow(dn, (1.0 + alpha) / 2.0)));
    const double size_bound = 8.0 * gst_estimate * dn;
    const double ell = std::pow(dn, (1.0 - alpha) / 2.0) / 4.0;

    std::size_t hits_a = 0, hits_b = 0, hits_large = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        RandomSource src(seed, t);
        CallingSequenceDrawer drawer(g, src, false);
        CallingSequence calls;
        drawer.extend(calls, 4 * n);
        auto seq = run_sequential(g, 0, calls, &drawer);
        if (static_cast<double>(seq.steps) <= n_bound) ++hits_a;
        auto blocks = partition_complete_blocks(g, calls, drawer, special, std::max<std::size_t>(block_target, 1));
        std::size_t total = 0;
        for (std::size_t j = 0; j < block_target && j < blocks.blocks.size(); ++j) total += blocks.blocks[j].size();
        if (static_cast<double>(total) >= size_bound) ++hits_b;
        if (static_cast<double>(blocks.blocks.front().size()) > 2.0 * ell) ++hits_large;
    }
    report.events.push_back({"N_le_4n_gst", proportion(hits_a, trials), {{"bound", n_bound}}});
    report.events.push_back({"block_sum_ge_8gst_n",
                             proportion(hits_b, trials),
                             {{"k", block_target}, {"bound", size_bound}}});
    report.events.push_back({"S1_gt_2ell", proportion(hits_large, trials), {{"ell", ell}}});
    return report;
}

}  // namespace gossip_lab
