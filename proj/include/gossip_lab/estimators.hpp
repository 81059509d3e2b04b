#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gossip_lab/engines.hpp"
#include "gossip_lab/graph.hpp"
#include "gossip_lab/protocol.hpp"
#include "gossip_lab/random.hpp"
#include "gossip_lab/stats.hpp"

namespace gossip_lab {

/// Worker count from GOSSIP_LAB_THREADS, defaulting to 1.
inline std::size_t default_threads() {
    if (const char* env = std::getenv("GOSSIP_LAB_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    return 1;
}

/// Runs fn(i) for i in [0, count) on `threads` workers. Results must be written
/// by index so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            constexpr std::size_t chunk = 64;
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= count) return;
                const std::size_t end = std::min(count, begin + chunk);
                try {
                    for (std::size_t i = begin; i < end; ++i) fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Per-trial stream id: start vertex in the high word, trial index in the low word.
inline std::uint64_t trial_stream(Vertex start, std::size_t trial) {
    return (static_cast<std::uint64_t>(start) << 32) | static_cast<std::uint64_t>(trial);
}

/// One spread time: FPP engine for the asynchronous model, rounds for the synchronous one.
inline double sample_spread_time(const Graph& g, Vertex start, Model model, Variant variant, RandomSource& src) {
    if (g.vertex_count() == 1) return 0.0;
    if (model == Model::async) return fpp_spread_time(g, start, variant, src);
    return run_synchronous(g, start, variant, src).spread_time;
}

inline std::vector<double> sample_spread_times(const Graph& g, Vertex start, Model model, Variant variant,
                                               std::size_t trials, std::uint64_t seed,
                                               std::size_t threads = default_threads()) {
    if (start >= g.vertex_count()) throw std::invalid_argument("start vertex out of range");
    std::vector<double> out(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        RandomSource src(seed, trial_stream(start, t));
        out[t] = sample_spread_time(g, start, model, variant, src);
    });
    return out;
}

inline constexpr std::size_t min_mean_trials = 30;

inline Estimate estimate_average_spread(const Graph& g, Vertex start, Model model, Variant variant,
                                        std::size_t trials, std::uint64_t seed,
                                        std::size_t threads = default_threads()) {
    if (trials < min_mean_trials) throw std::invalid_argument("average spread estimate needs at least 30 trials");
    auto samples = sample_spread_times(g, start, model, variant, trials, seed, threads);
    return mean_estimate(samples, seed);
}

/// Recommended per-start sample size for the (1 - 1/n)-quantile.
inline std::size_t recommended_gst_trials(std::size_t n) { return std::max<std::size_t>(1000, 50 * n); }

struct StartEstimates {
    Vertex start = 0;
    Estimate mean;
    Estimate quantile;  // level 1 - 1/n
};

struct SpreadSummary {
    Model model = Model::async;
    Variant variant = Variant::push_pull;
    std::vector<StartEstimates> per_start;
    Estimate wast;  // max over starts of the mean
    Estimate gst;   // max over starts of the quantile
    Vertex worst_mean_start = 0;
    Vertex worst_quantile_start = 0;
    bool below_recommended = false;
    std::vector<std::vector<double>> raw;  // per start, filled when requested
};

namespace detail {

/// Maximum over starts. The CI holds the per-start maxima of both ends, so
/// lo <= point <= hi is preserved; ties go to the smallest start id.
inline std::pair<Estimate, std::size_t> max_over(const std::vector<Estimate>& per) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < per.size(); ++i)
        if (per[i].point > per[best].point) best = i;
    Estimate e = per[best];
    for (const auto& x : per) {
        e.ci_lo = std::max(e.ci_lo, x.ci_lo);
        e.ci_hi = std::max(e.ci_hi, x.ci_hi);
    }
    e.ci_lo = std::min(e.ci_lo, e.point);
    return {e, best};
}

}  // namespace detail

inline std::vector<Vertex> all_vertices(const Graph& g) {
    std::vector<Vertex> v(g.vertex_count());
    for (Vertex i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

/// Mean and (1 - 1/n)-quantile per start from one shared sample per start.
/// Empty `starts` means every vertex.
inline SpreadSummary summarize_spread(const Graph& g, Model model, Variant variant, std::size_t trials_per_start,
                                      std::uint64_t seed, std::span<const Vertex> starts = {},
                                      std::size_t threads = default_threads(), bool keep_raw = false) {
    if (trials_per_start < 1) throw std::invalid_argument("need at least one trial per start");
    std::vector<Vertex> chosen = starts.empty() ? all_vertices(g) : std::vector<Vertex>(starts.begin(), starts.end());
    const std::size_t n = g.vertex_count();
    const double level = 1.0 - 1.0 / static_cast<double>(std::max<std::size_t>(n, 2));
    SpreadSummary out;
    out.model = model;
    out.variant = variant;
    out.below_recommended = trials_per_start < recommended_gst_trials(n);
    std::vector<Estimate> means, quantiles;
    for (Vertex s : chosen) {
        auto samples = sample_spread_times(g, s, model, variant, trials_per_start, seed, threads);
        StartEstimates se{s, mean_estimate(samples, seed), quantile_estimate(samples, level, seed)};
        means.push_back(se.mean);
        quantiles.push_back(se.quantile);
        out.per_start.push_back(se);
        if (keep_raw) out.raw.push_back(std::move(samples));
    }
    auto [wast, wi] = detail::max_over(means);
    auto [gst, gi] = detail::max_over(quantiles);
    out.wast = wast;
    out.gst = gst;
    out.worst_mean_start = chosen[wi];
    out.worst_quantile_start = chosen[gi];
    return out;
}

/// Guaranteed spread time: max over starts of the upper empirical order statistic at level 1 - 1/n.
inline SpreadSummary estimate_guaranteed_spread(const Graph& g, Model model, Variant variant,
                                                std::size_t trials_per_start, std::uint64_t seed,
                                                std::span<const Vertex> starts = {},
                                                std::size_t threads = default_threads()) {
    return summarize_spread(g, model, variant, trials_per_start, seed, starts, threads);
}

/// Start with the largest estimated mean (smallest id on ties) and every per-start estimate.
inline std::pair<Vertex, std::vector<Estimate>> worst_start_vertex(const Graph& g, Model model, Variant variant,
                                                                   std::size_t trials, std::uint64_t seed,
                                                                   std::size_t threads = default_threads()) {
    std::vector<Estimate> per;
    per.reserve(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        per.push_back(estimate_average_spread(g, v, model, variant, trials, seed, threads));
    auto [e, best] = detail::max_over(per);
    (void)e;
    return {static_cast<Vertex>(best), std::move(per)};
}

// ---------------------------------------------------------------------------
// Inequality battery
// ---------------------------------------------------------------------------

struct EstimateBundle {
    std::optional<Estimate> wast_async, gst_async, wast_sync, gst_sync, wast_pull_async;
};

/// lhs <= rhs checked on estimates; passes when lhs - rhs <= slack, with
/// slack = 3 sigma of the combined estimator noise.
struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;

    double margin() const noexcept { return rhs + slack - lhs; }
};

inline void to_json(nlohmann::json& j, const BoundCheck& c) {
    j = nlohmann::json{{"name", c.name}, {"lhs", c.lhs},       {"rhs", c.rhs},
                       {"slack", c.slack}, {"pass", c.pass}, {"margin", c.margin()}};
}

namespace detail {

struct Term {
    double coefficient;
    const Estimate* estimate;  // null for a constant term
    double constant = 0.0;

    double value() const { return estimate ? coefficient * estimate->point : constant; }
    double variance() const { return estimate ? coefficient * coefficient * estimate->stderr_ * estimate->stderr_ : 0.0; }
};

inline BoundCheck make_check(std::string name, Term lhs, Term rhs, double constant_rhs = 0.0) {
    BoundCheck c;
    c.name = std::move(name);
    c.lhs = lhs.value();
    c.rhs = rhs.value() + constant_rhs;
    c.slack = 3.0 * std::sqrt(lhs.variance() + rhs.variance());
    c.pass = c.lhs <= c.rhs + c.slack;
    return c;
}

inline Term est(double coefficient, const Estimate& e) { return {coefficient, &e}; }
inline Term constant(double value) { return {0.0, nullptr, value}; }

}  // namespace detail

/// Evaluates the push&pull extremal, comparison and upper-bound inequalities on
/// estimates (natural logs, exact H_n, alpha for the sync-vs-async upper bound).
inline std::vector<BoundCheck> bound_report(const Graph& g, const EstimateBundle& b, double alpha = 1.0 / 3.0) {
    if (!b.wast_async || !b.gst_async || !b.wast_sync || !b.gst_sync)
        throw std::invalid_argument("bound report needs wast and gst estimates for both models");
    using detail::constant;
    using detail::est;
    using detail::make_check;
    const double n = static_cast<double>(g.vertex_count());
    const double log_n = std::log(n);
    const double e = std::numbers::e;
    const auto& wa = *b.wast_async;
    const auto& ga = *b.gst_async;
    const auto& ws = *b.wast_sync;
    const auto& gs = *b.gst_sync;

    std::vector<BoundCheck> out;
    out.push_back(make_check("async_gst_ge_(1-1/n)wast", est(1.0 - 1.0 / n, wa), est(1.0, ga)));
    out.push_back(make_check("async_gst_le_e_wast_logn", est(1.0, ga), est(e * log_n, wa)));
    out.push_back(make_check("async_wast_gt_logn/5", constant(log_n / 5.0), est(1.0, wa)));
    out.push_back(make_check("async_wast_lt_4n", est(1.0, wa), constant(4.0 * n)));
    out.push_back(make_check("async_gst_ge_logn/5", constant(log_n / 5.0), est(1.0, ga)));
    out.push_back(make_check("async_gst_le_4e_n_logn", est(1.0, ga), constant(4.0 * e * n * log_n)));
    out.push_back(make_check("sync_gst_ge_(1-1/n)wast", est(1.0 - 1.0 / n, ws), est(1.0, gs)));
    out.push_back(make_check("sync_gst_le_e_wast_logn", est(1.0, gs), est(e * log_n, ws)));
    out.push_back(make_check("sync_wast_lt_4.6n", est(1.0, ws), constant(4.6 * n)));
    out.push_back(make_check("sync_gst_lt_4.6e_n_logn", est(1.0, gs), constant(4.6 * e * n * log_n)));
    out.push_back(make_check("async_wast_le_Hn_sync_wast", est(1.0, wa), est(harmonic(g.vertex_count()), ws)));
    out.push_back(make_check("async_gst_le_8_sync_gst_logn", est(1.0, ga), est(8.0 * log_n, gs)));
    out.push_back(make_check("sync_gst_le_n^(1-a)+64_async_gst_n^((1+a)/2)", est(1.0, gs),
                             est(64.0 * std::pow(n, (1.0 + alpha) / 2.0), ga), std::pow(n, 1.0 - alpha)));
    if (b.wast_pull_async) out.push_back(make_check("pull_only_async_wast_lt_4n", est(1.0, *b.wast_pull_async), constant(4.0 * n)));
    return out;
}

/// Bundle for bound_report from one sample batch per (model, variant) and start.
inline EstimateBundle make_bundle(const Graph& g, std::size_t trials_per_start, std::uint64_t seed,
                                  std::span<const Vertex> starts = {}, bool with_pull = true,
                                  std::size_t threads = default_threads()) {
    EstimateBundle b;
    auto a = summarize_spread(g, Model::async, Variant::push_pull, trials_per_start, seed, starts, threads);
    auto s = summarize_spread(g, Model::sync, Variant::push_pull, trials_per_start, seed, starts, threads);
    b.wast_async = a.wast;
    b.gst_async = a.gst;
    b.wast_sync = s.wast;
    b.gst_sync = s.gst;
    if (with_pull) b.wast_pull_async = summarize_spread(g, Model::async, Variant::pull_only, trials_per_start, seed,
                                                        starts, threads)
                                           .wast;
    return b;
}

/// Restart inequality P(ST(v) > k t) <= (max_u P(ST(u) > t))^k at t = median of
/// the focus start's sample, checked empirically with 3 sigma slack.
inline BoundCheck restart_inequality_check(const std::vector<std::vector<double>>& per_start, std::size_t focus,
                                           unsigned k) {
    if (per_start.empty() || focus >= per_start.size() || per_start[focus].empty())
        throw std::invalid_argument("restart check needs a nonempty focus sample");
    std::vector<double> sorted = per_start[focus];
    std::sort(sorted.begin(), sorted.end());
    const double t = sorted[(sorted.size() - 1) / 2];
    const double m = static_cast<double>(sorted.size());
    double p_t = 0.0, m_t = 1.0;
    for (const auto& sample : per_start) {
        const double p = tail_fraction(sample, t);
        if (p >= p_t) {
            p_t = p;
            m_t = static_cast<double>(sample.size());
        }
    }
    const double p_kt = tail_fraction(per_start[focus], k * t);
    BoundCheck c;
    c.name = "restart_k" + std::to_string(k);
    c.lhs = p_kt;
    c.rhs = std::pow(p_t, k);
    // binomial sigma on the left; delta-method sigma of p_t^k on the right
    const double s_l = std::sqrt(p_kt * (1 - p_kt) / m);
    const double s_r = k * std::pow(p_t, k - 1) * std::sqrt(p_t * (1 - p_t) / m_t);
    c.slack = 3.0 * std::sqrt(s_l * s_l + s_r * s_r);
    c.pass = c.lhs <= c.rhs + c.slack;
    return c;
}

inline BoundCheck restart_inequality_check(std::span<const double> samples, unsigned k) {
    return restart_inequality_check({std::vector<double>(samples.begin(), samples.end())}, 0, k);
}

}  // namespace gossip_lab
