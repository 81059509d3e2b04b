#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip_lab/coupling.hpp"
#include "gossip_lab/engines.hpp"
#include "gossip_lab/estimators.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/oracle.hpp"
#include "gossip_lab/report.hpp"
#include "gossip_lab/structure.hpp"

namespace gossip_lab {

struct CheckResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // distance to failure; negative when failing
    std::string detail;
};

inline void to_json(nlohmann::json& j, const CheckResult& c) {
    j = nlohmann::json{{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"detail", c.detail}};
}

struct SuiteReport {
    std::string suite;
    nlohmann::json config = nlohmann::json::object();
    std::vector<CheckResult> checks;

    void add(std::string name, bool pass, double margin, std::string detail = {}) {
        checks.push_back({std::move(name), pass, margin, std::move(detail)});
    }

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }

    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass) out.push_back(c.name);
        return out;
    }

    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

inline void to_json(nlohmann::json& j, const SuiteReport& r) {
    j = nlohmann::json{{"schema", report_schema}, {"command", "verify"},   {"suite", r.suite},
                       {"config", r.config},      {"checks", r.checks},    {"passed", r.passed()},
                       {"failures", r.failures()}};
}

/// `threads` changes scheduling only and is left out of every report.
struct VerifyOptions {
    std::uint64_t seed = 0;
    std::size_t trials = 0;  // 0 selects the suite default
    std::vector<std::size_t> sizes;
    std::size_t threads = default_threads();
};

inline std::string strprintf(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// (m, k) with (k + 1) m = n - 1 and k closest to sqrt(n), so diamonds(m, k) has exactly n vertices.
inline std::pair<std::size_t, std::size_t> diamonds_for_size(std::size_t n) {
    if (n < 4) throw std::invalid_argument("no string of diamonds has fewer than 4 vertices");
    const double target = std::sqrt(static_cast<double>(n));
    std::pair<std::size_t, std::size_t> best{0, 0};
    for (std::size_t k = 2; k + 1 <= n - 1; ++k) {
        if ((n - 1) % (k + 1)) continue;
        if (best.second == 0 || std::fabs(k - target) < std::fabs(best.second - target)) best = {(n - 1) / (k + 1), k};
    }
    if (best.second == 0) throw std::invalid_argument("no string of diamonds has exactly n vertices");
    return best;
}

/// One graph per family at (about) n vertices: the hypercube uses the nearest
/// power of two, gnp uses p = min(1, 3 log n / n) with seed n.
inline std::vector<FamilySpec> battery_families(std::size_t n) {
    const double dn = static_cast<double>(n);
    const auto [m, k] = diamonds_for_size(n);
    const auto d = static_cast<std::size_t>(std::lround(std::log2(dn)));
    return {FamilySpec::path(n),
            FamilySpec::star(n),
            FamilySpec::complete(n),
            FamilySpec::double_star(n % 2 ? n + 1 : n),
            FamilySpec::diamonds(m, k),
            FamilySpec::hypercube(d),
            FamilySpec::gnp(n, std::min(1.0, 3.0 * std::log(dn) / dn), n)};
}

/// One start per automorphism class for the structured families (all vertices for gnp).
inline std::vector<Vertex> representative_starts(const FamilySpec& spec) {
    const std::size_t n = spec.vertex_count();
    std::vector<Vertex> out;
    switch (spec.family) {
        case Family::path:
            for (Vertex v = 0; v < (n + 1) / 2; ++v) out.push_back(v);
            break;
        case Family::star: out = {0, 1}; break;
        case Family::complete:
        case Family::hypercube: out = {0}; break;
        case Family::double_star: out = {0, 2}; break;
        case Family::diamonds:
            // reflection maps hub i to hub m - i and diamond j to diamond m - 1 - j
            for (Vertex h = 0; h <= spec.m / 2; ++h) out.push_back(h);
            for (std::size_t j = 0; 2 * j + 1 <= spec.m; ++j)
                out.push_back(static_cast<Vertex>(spec.m + 1 + j * spec.k));
            break;
        case Family::gnp:
            for (Vertex v = 0; v < n; ++v) out.push_back(v);
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo against exact oracles
// ---------------------------------------------------------------------------

/// |mean - exact| <= 4 stderr, one check per (graph, model, start).
inline std::vector<CheckResult> monte_carlo_vs_oracle(const std::vector<FamilySpec>& graphs, std::size_t trials,
                                                      std::uint64_t seed, bool all_starts, std::size_t threads) {
    std::vector<CheckResult> out;
    for (const auto& spec : graphs) {
        const Graph g = generate_family(spec);
        std::vector<Vertex> starts = all_starts ? all_vertices(g) : std::vector<Vertex>{0};
        for (Model model : {Model::async, Model::sync})
            for (Vertex s : starts) {
                const double exact = model == Model::async ? exact_async_expected(g, s) : exact_sync_expected(g, s);
                const Estimate e = estimate_average_spread(g, s, model, Variant::push_pull, trials, seed, threads);
                const double dev = std::fabs(e.point - exact);
                out.push_back({strprintf("mc_%s %s v=%u", to_string(model).c_str(), spec.label().c_str(), s),
                               dev <= 4.0 * e.stderr_, 4.0 * e.stderr_ - dev,
                               strprintf("%.6f vs %.6f (stderr %.6f)", e.point, exact, e.stderr_)});
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline constexpr double oracle_tolerance = 1e-9;

inline SuiteReport verify_oracle(const VerifyOptions& opt) {
    SuiteReport r;
    r.suite = "oracle";
    const std::size_t trials = opt.trials ? opt.trials : 10'000;
    r.config = {{"seed", opt.seed}, {"trials", trials}};
    auto close = [&](const std::string& name, double got, double want) {
        const double diff = std::fabs(got - want);
        r.add(strprintf("%s: %.6f vs %.6f", name.c_str(), got, want), diff <= oracle_tolerance,
              oracle_tolerance - diff);
    };

    for (std::size_t n = 3; n <= 10; ++n) {
        const Graph g = generate_family(FamilySpec::path(n));
        const double endpoint = exact_async_expected(g, 0);
        close(strprintf("path_async n=%zu", n), endpoint, closed_form(ClosedForm::path_async_mean, n));
        double worst = 0.0;
        for (Vertex v = 0; v < n; ++v) worst = std::max(worst, exact_async_expected(g, v));
        r.add(strprintf("path_async_endpoint_is_worst n=%zu", n), worst <= endpoint + oracle_tolerance,
              endpoint + oracle_tolerance - worst);
    }
    for (std::size_t n = 3; n <= 10; ++n)
        close(strprintf("complete_async n=%zu", n), exact_async_expected(generate_family(FamilySpec::complete(n)), 0),
              closed_form(ClosedForm::complete_async_mean, n));
    for (std::size_t n = 3; n <= 8; ++n) {
        const Graph g = generate_family(FamilySpec::path(n));
        double worst = 0.0;
        for (Vertex v = 0; v < n; ++v) worst = std::max(worst, exact_sync_expected(g, v));
        close(strprintf("path_sync n=%zu", n), worst, closed_form(ClosedForm::path_sync_mean, n));
    }
    for (std::size_t n = 3; n <= 8; ++n) {
        const Graph g = generate_family(FamilySpec::star(n));
        close(strprintf("star_sync_gst n=%zu", n), static_cast<double>(exact_sync_gst(g)),
              closed_form(ClosedForm::star_sync_gst));
        close(strprintf("star_sync_leaf_tail_2 n=%zu", n), exact_sync_tail(g, 1, 2), 0.0);
        close(strprintf("star_sync_leaf_tail_1 n=%zu", n), exact_sync_tail(g, 1, 1), 1.0);
    }
    for (std::size_t n : {4, 10, 100}) {
        const Graph g = generate_family(FamilySpec::double_star(n));
        const double dn = static_cast<double>(n);
        close(strprintf("double_star_bridge_rate n=%zu", n), edge_rate(g, 0, 1, Variant::push_pull, Model::async),
              closed_form(ClosedForm::double_star_bridge_rate, n));
        close(strprintf("double_star_bridge_sync n=%zu", n), edge_rate(g, 0, 1, Variant::push_pull, Model::sync),
              4.0 / dn - 4.0 / (dn * dn));
    }
    close("K_2 pull_only async", exact_async_expected(generate_family(FamilySpec::complete(2)), 0, Variant::pull_only),
          1.0);
    close("path_sync_tail n=4 t=3", exact_sync_tail(generate_family(FamilySpec::path(4)), 0, 3), 0.25);

    // pull-only < 4n on a corpus of small random connected graphs
    {
        std::size_t ok = 0, total = 0;
        double margin = std::numeric_limits<double>::infinity();
        RandomSource src(opt.seed, 0);
        for (std::size_t i = 0; i < 200; ++i) {
            const std::size_t n = 2 + src.below(9);
            const double p = 0.2 + 0.6 * src.uniform();
            const Graph g = generate_family(FamilySpec::gnp(n, p, src.next_u64()));
            double worst = 0.0;
            for (Vertex v = 0; v < n; ++v) worst = std::max(worst, exact_async_expected(g, v, Variant::pull_only));
            ++total;
            ok += worst < 4.0 * static_cast<double>(n);
            margin = std::min(margin, 4.0 * static_cast<double>(n) - worst);
        }
        r.add(strprintf("pull_only_corpus: %zu/%zu", ok, total), ok == total, margin);
    }

    const std::vector<FamilySpec> mc_graphs{FamilySpec::path(6), FamilySpec::complete(5), FamilySpec::star(6),
                                            FamilySpec::double_star(8)};
    for (auto& c : monte_carlo_vs_oracle(mc_graphs, trials, opt.seed, false, opt.threads)) r.checks.push_back(c);
    return r;
}

/// KS threshold 0.0276 at 10^4 samples per side, scaled as 1/sqrt(M) for other sample sizes.
inline double engine_ks_threshold(std::size_t trials) { return 0.0276 * std::sqrt(1e4 / static_cast<double>(trials)); }

/// Checks that every vertex is informed by some call involving a vertex informed
/// before that round, and that every such call at round t informs by round t.
template <class Choices>
bool sync_trace_respects_rounds(const Graph& g, Variant variant, const RunRecord& rec, const Choices& choices) {
    const std::size_t n = g.vertex_count();
    const auto time = rec.informing_times(n);
    const auto rounds = static_cast<std::size_t>(rec.spread_time);
    for (std::size_t t = 1; t <= rounds; ++t) {
        std::vector<char> explained(n, 0);
        for (Vertex u = 0; u < n; ++u) {
            const Vertex w = choices[t - 1][u];
            const bool u_before = time[u] < static_cast<double>(t);
            const bool w_before = time[w] < static_cast<double>(t);
            const Vertex learner = resolve_call(variant, u_before, w_before, u, w);
            if (learner == no_vertex) continue;
            if (time[learner] > static_cast<double>(t)) return false;
            explained[learner] = 1;
        }
        for (Vertex v = 0; v < n; ++v)
            if (time[v] == static_cast<double>(t) && !explained[v]) return false;
    }
    return true;
}

inline bool trace_well_formed(const RunRecord& rec, std::size_t n) {
    if (rec.trace.empty() || rec.trace.front().time != 0.0 || rec.trace.front().vertex != rec.start) return false;
    std::vector<char> seen(n, 0);
    double last = 0.0;
    for (const auto& e : rec.trace) {
        if (e.vertex >= n || seen[e.vertex] || e.time < last) return false;
        seen[e.vertex] = 1;
        last = e.time;
    }
    return rec.trace.size() == n && rec.spread_time == last;
}

inline SuiteReport verify_engines(const VerifyOptions& opt) {
    SuiteReport r;
    r.suite = "engines";
    const std::size_t trials = opt.trials ? opt.trials : 10'000;
    const double threshold = engine_ks_threshold(trials);
    r.config = {{"seed", opt.seed}, {"trials", trials}, {"ks_threshold", threshold}};
    const std::vector<FamilySpec> graphs{FamilySpec::path(6), FamilySpec::complete(5), FamilySpec::double_star(10),
                                         FamilySpec::diamonds(2, 3)};
    for (const auto& spec : graphs) {
        const Graph g = generate_family(spec);
        const std::string label = spec.label();
        std::vector<double> event(trials), fpp(trials), clock(trials);
        std::vector<char> traces_ok(trials, 1);
        parallel_for(trials, opt.threads, [&](std::size_t t) {
            const RandomSource base(opt.seed, trial_stream(0, t));
            RandomSource a = base.substream(0), b = base.substream(1), c = base.substream(2);
            const RunRecord ra = run_async_event(g, 0, Variant::push_pull, a);
            const RunRecord rb = run_async_fpp(g, 0, Variant::push_pull, b);
            const RunRecord rc = run_two_clock(g, 0, c);
            event[t] = ra.spread_time;
            fpp[t] = rb.spread_time;
            clock[t] = rc.spread_time;
            const std::size_t n = g.vertex_count();
            traces_ok[t] = trace_well_formed(ra, n) && trace_well_formed(rb, n) && trace_well_formed(rc, n);
        });
        auto ks = [&](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
            const double d = ks_two_sample(x, y);
            r.add(strprintf("ks_%s %s", name, label.c_str()), d < threshold, threshold - d, strprintf("D = %.5f", d));
        };
        ks("event_vs_fpp", event, fpp);
        ks("event_vs_two_clock", event, clock);
        ks("fpp_vs_two_clock", fpp, clock);
        const auto bad = std::count(traces_ok.begin(), traces_ok.end(), 0);
        r.add("trace_invariants " + label, bad == 0, -static_cast<double>(bad));

        // worst start mean at most twice the best start mean
        std::vector<Estimate> means;
        for (Vertex v = 0; v < g.vertex_count(); ++v)
            means.push_back(estimate_average_spread(g, v, Model::async, Variant::push_pull, std::max<std::size_t>(
                                                        min_mean_trials, trials / 4), opt.seed, opt.threads));
        auto hi = *std::max_element(means.begin(), means.end(),
                                    [](const Estimate& a, const Estimate& b) { return a.point < b.point; });
        auto lo = *std::min_element(means.begin(), means.end(),
                                    [](const Estimate& a, const Estimate& b) { return a.point < b.point; });
        const double slack = 3.0 * std::sqrt(hi.stderr_ * hi.stderr_ + 4.0 * lo.stderr_ * lo.stderr_);
        r.add("start_factor_two " + label, hi.point <= 2.0 * lo.point + slack, 2.0 * lo.point + slack - hi.point,
              strprintf("worst %.4f best %.4f", hi.point, lo.point));

        // synchronous round semantics on recorded choices
        std::size_t sync_ok = 0;
        const std::size_t sync_runs = 200;
        for (std::size_t t = 0; t < sync_runs; ++t) {
            RandomSource src(opt.seed, trial_stream(1, t));
            std::vector<std::vector<Vertex>> choices;
            const Vertex sources[] = {0};
            const RunRecord rec = run_synchronous_with(g, sources, Variant::push_pull, [&](Vertex u, std::size_t round) {
                if (choices.size() < round) choices.emplace_back(g.vertex_count());
                return choices[round - 1][u] = src.uniform_neighbour(g, u);
            });
            sync_ok += sync_trace_respects_rounds(g, Variant::push_pull, rec, choices) && trace_well_formed(rec, g.vertex_count());
        }
        r.add(strprintf("sync_round_semantics %s: %zu/%zu", label.c_str(), sync_ok, sync_runs), sync_ok == sync_runs,
              static_cast<double>(sync_ok) - static_cast<double>(sync_runs));
    }

    // D(u, v) has the law of D(v, u)
    const std::vector<std::pair<FamilySpec, std::pair<Vertex, Vertex>>> asym{
        {FamilySpec::double_star(10), {2, 9}}, {FamilySpec::diamonds(2, 3), {0, 8}}, {FamilySpec::path(6), {1, 5}}};
    for (const auto& [spec, uv] : asym) {
        const Graph g = generate_family(spec);
        std::vector<double> forward(trials), backward(trials);
        parallel_for(trials, opt.threads, [&](std::size_t t) {
            RandomSource a = RandomSource(opt.seed, trial_stream(2, t)).substream(0);
            RandomSource b = RandomSource(opt.seed, trial_stream(2, t)).substream(1);
            forward[t] = run_async_fpp(g, uv.first, Variant::push_pull, a).informing_times(g.vertex_count())[uv.second];
            backward[t] = run_async_fpp(g, uv.second, Variant::push_pull, b).informing_times(g.vertex_count())[uv.first];
        });
        const double d = ks_two_sample(forward, backward);
        r.add(strprintf("start_symmetry %s u=%u v=%u", spec.label().c_str(), uv.first, uv.second), d < threshold,
              threshold - d, strprintf("D = %.5f", d));
    }
    return r;
}

inline SuiteReport verify_bounds(const VerifyOptions& opt) {
    SuiteReport r;
    r.suite = "bounds";
    const std::size_t trials = opt.trials ? opt.trials : 1000;
    const std::vector<std::size_t> sizes = opt.sizes.empty() ? std::vector<std::size_t>{20} : opt.sizes;
    r.config = {{"seed", opt.seed}, {"trials_per_start", trials}, {"sizes", sizes}, {"alpha", 1.0 / 3.0}};
    for (std::size_t n : sizes)
        for (const auto& spec : battery_families(n)) {
            const Graph g = generate_family(spec);
            const auto starts = representative_starts(spec);
            const std::string label = spec.label();
            auto a = summarize_spread(g, Model::async, Variant::push_pull, trials, opt.seed, starts, opt.threads, true);
            auto s = summarize_spread(g, Model::sync, Variant::push_pull, trials, opt.seed, starts, opt.threads);
            auto p = summarize_spread(g, Model::async, Variant::pull_only, trials, opt.seed, starts, opt.threads);
            EstimateBundle bundle{a.wast, a.gst, s.wast, s.gst, p.wast};
            for (const auto& c : bound_report(g, bundle))
                r.add(c.name + " " + label, c.pass, c.margin(),
                      strprintf("lhs %.6g rhs %.6g slack %.3g", c.lhs, c.rhs, c.slack));
            std::size_t focus = 0;
            for (std::size_t i = 0; i < a.per_start.size(); ++i)
                if (a.per_start[i].start == a.worst_mean_start) focus = i;
            for (unsigned k : {2u, 3u}) {
                const auto c = restart_inequality_check(a.raw, focus, k);
                r.add(c.name + " " + label, c.pass, c.margin(),
                      strprintf("P(>kt) %.4g max P(>t)^k %.4g", c.lhs, c.rhs));
            }
        }
    return r;
}

struct CouplingCounts {
    std::size_t superset = 0, superset_trials = 0;
    std::size_t lazy = 0, lazy_trials = 0;
};

inline SuiteReport verify_coupling(const VerifyOptions& opt) {
    SuiteReport r;
    r.suite = "coupling";
    const std::size_t trials = opt.trials ? opt.trials : 500;
    const std::size_t sequences = 10'000;
    const double alpha = 1.0 / 3.0;
    r.config = {{"seed", opt.seed}, {"trials", trials}, {"partition_sequences", sequences}, {"alpha", alpha}};

    for (const auto& spec : {FamilySpec::path(8), FamilySpec::complete(6), FamilySpec::double_star(10)}) {
        const Graph g = generate_family(spec);
        std::size_t ok = 0, within = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto run = coupled_sync_async_run(g, 0, RandomSource(opt.seed, t));
            ok += run.all_supersets();
            within += run.within_epoch_sum;
        }
        r.add(strprintf("decelerated_superset %s: %zu/%zu", spec.label().c_str(), ok, trials), ok == trials,
              static_cast<double>(ok) - static_cast<double>(trials));
        r.add(strprintf("decelerated_within_epochs %s: %zu/%zu", spec.label().c_str(), within, trials),
              within == trials, static_cast<double>(within) - static_cast<double>(trials));
    }

    for (const auto& spec : {FamilySpec::complete(6), FamilySpec::double_star(10), FamilySpec::path(8),
                             FamilySpec::diamonds(2, 3)}) {
        const Graph g = generate_family(spec);
        const SpecialSet special = compute_special_vertices(g, alpha);
        std::size_t ok = 0, bounded = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            RandomSource src(opt.seed, t);
            CallingSequenceDrawer drawer(g, src, false);
            CallingSequence calls;
            drawer.extend(calls, 4 * g.vertex_count());
            const SequentialRun seq = run_sequential(g, 0, calls, &drawer);
            const BlockPartition blocks = partition_blocks(g, calls, special, seq.steps);
            const BlockPartition refined = refine_blocks_at_special(blocks, seq.informed_step);
            const RunRecord lazy = run_lazy(g, 0, calls, refined);
            ok += lazy_matches_sequential(refined, seq, lazy);
            bounded += lazy.spread_time <= static_cast<double>(blocks.block_count() + special.vertices.size());
        }
        r.add(strprintf("lazy_sequential %s: %zu/%zu", spec.label().c_str(), ok, trials), ok == trials,
              static_cast<double>(ok) - static_cast<double>(trials));
        r.add(strprintf("lazy_rounds_le_Nb_plus_special %s: %zu/%zu", spec.label().c_str(), bounded, trials),
              bounded == trials, static_cast<double>(bounded) - static_cast<double>(trials));
    }

    // partition validity and greedy maximality on random sequences over random small graphs
    {
        RandomSource src(opt.seed, 1ULL << 40);
        std::vector<Graph> pool;
        for (std::size_t i = 0; i < 64; ++i)
            pool.push_back(generate_family(FamilySpec::gnp(2 + src.below(11), 0.3 + 0.5 * src.uniform(), src.next_u64())));
        std::size_t contiguous = 0, valid = 0, maximal = 0, special_small = 0;
        for (std::size_t t = 0; t < sequences; ++t) {
            const Graph& g = pool[t % pool.size()];
            RandomSource seq_src(opt.seed, (1ULL << 41) + t);
            const double a = 0.99 * seq_src.uniform();
            const SpecialSet special = compute_special_vertices(g, a);
            const auto calls = draw_calling_sequence(g, 6 * g.vertex_count(), false, seq_src);
            const auto partition = partition_blocks(g, calls, special);
            const auto audit = audit_partition(partition, calls, special);
            contiguous += audit.contiguous;
            valid += audit.valid;
            maximal += audit.maximal;
            special_small += static_cast<double>(special.vertices.size()) <
                             std::pow(static_cast<double>(g.vertex_count()), 1.0 - a);
        }
        auto add_count = [&](const char* name, std::size_t ok) {
            r.add(strprintf("%s: %zu/%zu", name, ok, sequences), ok == sequences,
                  static_cast<double>(ok) - static_cast<double>(sequences));
        };
        add_count("partition_contiguous", contiguous);
        add_count("partition_valid", valid);
        add_count("partition_maximal", maximal);
        add_count("special_count_lt_n^(1-alpha)", special_small);
    }
    return r;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"engines", "bounds", "coupling", "oracle"};
    return names;
}

inline SuiteReport run_suite(const std::string& name, const VerifyOptions& opt) {
    if (name == "engines") return verify_engines(opt);
    if (name == "bounds") return verify_bounds(opt);
    if (name == "coupling") return verify_coupling(opt);
    if (name == "oracle") return verify_oracle(opt);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace gossip_lab
