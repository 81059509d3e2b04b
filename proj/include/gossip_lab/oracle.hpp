#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gossip_lab/graph.hpp"
#include "gossip_lab/protocol.hpp"
#include "gossip_lab/random.hpp"

namespace gossip_lab {

inline constexpr std::size_t exact_async_limit = 20;
inline constexpr std::size_t exact_sync_limit = 10;
inline constexpr std::uint64_t exact_sync_choice_limit = 10'000'000;

class OracleLimitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Asynchronous: Markov jump process on informed subsets
// ---------------------------------------------------------------------------

/// Expected asynchronous spread time, exact up to rounding. From informed set
/// S, an uninformed v joins at rate r_v(S) = sum of edge rates from informed
/// neighbours, so E[S] = (1 + sum_v r_v E[S + v]) / R(S) with R = sum_v r_v.
/// Supersets are numerically larger masks, so a descending sweep suffices.
inline double exact_async_expected(const Graph& g, Vertex start, Variant variant = Variant::push_pull) {
    const std::size_t n = g.vertex_count();
    if (n > exact_async_limit)
        throw OracleLimitError("exact async oracle supports n <= " + std::to_string(exact_async_limit));
    if (start >= n) throw std::invalid_argument("start out of range");
    if (n == 1) return 0.0;

    const std::uint32_t full = (1u << n) - 1;
    const std::uint32_t start_bit = 1u << start;
    std::vector<double> expected(std::size_t{1} << n, 0.0);
    for (std::uint32_t s = full - 1; s >= 1; --s) {
        if (!(s & start_bit)) continue;
        double total = 0.0;
        double weighted = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            if (s & (1u << v)) continue;
            double rate = 0.0;
            for (Vertex u : g.neighbours(v))
                if (s & (1u << u)) rate += edge_rate(g, u, v, variant, Model::async);
            if (rate > 0.0) {
                total += rate;
                weighted += rate * expected[s | (1u << v)];
            }
        }
        expected[s] = total > 0.0 ? (1.0 + weighted) / total : std::numeric_limits<double>::infinity();
    }
    return expected[start_bit];
}

// ---------------------------------------------------------------------------
// Synchronous: exact one-round transition law on informed subsets
// ---------------------------------------------------------------------------

/// One-round transition law of the synchronous protocol. Only vertices on the
/// informed/uninformed boundary affect the next state; each is enumerated by
/// outcome class (which uninformed neighbour an informed vertex calls, or
/// whether an uninformed vertex hits an informed one), which is the exact
/// joint neighbour-choice law with irrelevant choices summed out.
class SyncTransitions {
public:
    using Row = std::vector<std::pair<std::uint32_t, double>>;

    SyncTransitions(const Graph& g, Variant variant) : graph_(&g), variant_(variant) {
        const std::size_t n = g.vertex_count();
        if (n > exact_sync_limit)
            throw OracleLimitError("exact sync oracle supports n <= " + std::to_string(exact_sync_limit));
        nbr_.assign(n, 0);
        for (Vertex v = 0; v < n; ++v)
            for (Vertex w : g.neighbours(v)) nbr_[v] |= 1u << w;
        scratch_.assign(std::size_t{1} << n, 0.0);
    }

    std::uint32_t full() const noexcept { return (1u << graph_->vertex_count()) - 1; }

    const Row& row(std::uint32_t s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(s, compute(s)).first->second;
    }

private:
    struct Option {
        std::uint32_t adds;
        double probability;
    };

    Row compute(std::uint32_t s) {
        const std::size_t n = graph_->vertex_count();
        std::vector<std::vector<Option>> choices;
        std::uint64_t combinations = 1;
        for (Vertex u = 0; u < n; ++u) {
            const double deg = static_cast<double>(graph_->degree(u));
            const bool informed = (s >> u) & 1u;
            std::vector<Option> opts;
            if (informed && pushes(variant_)) {
                const std::uint32_t targets = nbr_[u] & ~s;
                if (!targets) continue;
                const int useless = std::popcount(nbr_[u] & s);
                for (std::uint32_t t = targets; t; t &= t - 1)
                    opts.push_back({t & (~t + 1), 1.0 / deg});
                if (useless) opts.push_back({0, useless / deg});
            } else if (!informed && pulls(variant_)) {
                const int hits = std::popcount(nbr_[u] & s);
                if (!hits) continue;
                opts.push_back({1u << u, hits / deg});
                if (hits < static_cast<int>(deg)) opts.push_back({0, 1.0 - hits / deg});
            } else {
                continue;
            }
            combinations *= opts.size();
            if (combinations > exact_sync_choice_limit)
                throw OracleLimitError("exact sync oracle: joint choice enumeration exceeds 1e7");
            choices.push_back(std::move(opts));
        }
        touched_.clear();
        enumerate(choices, 0, s, 1.0);
        Row out;
        out.reserve(touched_.size());
        std::sort(touched_.begin(), touched_.end());
        for (std::uint32_t t : touched_) {
            out.emplace_back(t, scratch_[t]);
            scratch_[t] = 0.0;
        }
        return out;
    }

    void enumerate(const std::vector<std::vector<Option>>& choices, std::size_t depth, std::uint32_t state,
                   double p) {
        if (depth == choices.size()) {
            if (scratch_[state] == 0.0) touched_.push_back(state);
            scratch_[state] += p;
            return;
        }
        for (const auto& opt : choices[depth]) enumerate(choices, depth + 1, state | opt.adds, p * opt.probability);
    }

    const Graph* graph_;
    Variant variant_;
    std::vector<std::uint32_t> nbr_;
    std::vector<double> scratch_;
    std::vector<std::uint32_t> touched_;
    std::unordered_map<std::uint32_t, Row> cache_;
};

/// Expected synchronous rounds: E[S] = (1 + sum_{S' != S} P(S,S') E[S']) / (1 - P(S,S)).
inline double exact_sync_expected(const Graph& g, Vertex start, Variant variant = Variant::push_pull) {
    const std::size_t n = g.vertex_count();
    if (start >= n) throw std::invalid_argument("start out of range");
    SyncTransitions table(g, variant);
    if (n == 1) return 0.0;
    const std::uint32_t full = table.full();
    const std::uint32_t start_bit = 1u << start;
    std::vector<double> expected(std::size_t{1} << n, 0.0);
    for (std::uint32_t s = full - 1; s >= 1; --s) {
        if (!(s & start_bit)) continue;
        double stay = 0.0;
        double acc = 1.0;
        for (const auto& [t, p] : table.row(s)) {
            if (t == s)
                stay += p;
            else
                acc += p * expected[t];
        }
        if (1.0 - stay <= 1e-15) throw std::logic_error("exact sync oracle: non-absorbing state cannot progress");
        expected[s] = acc / (1.0 - stay);
    }
    return expected[start_bit];
}

/// P(synchronous spread time > t) for t = 0..max_rounds, by propagating the
/// state distribution round by round.
inline std::vector<double> exact_sync_tail_curve(const Graph& g, Vertex start, std::size_t max_rounds,
                                                 SyncTransitions& table) {
    const std::size_t n = g.vertex_count();
    if (start >= n) throw std::invalid_argument("start out of range");
    const std::uint32_t full = table.full();
    std::vector<double> probability(std::size_t{1} << n, 0.0), next(probability.size(), 0.0);
    probability[1u << start] = 1.0;
    std::vector<double> tails;
    tails.push_back(n == 1 ? 0.0 : 1.0);
    for (std::size_t round = 1; round <= max_rounds; ++round) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint32_t s = 0; s <= full; ++s) {
            if (probability[s] == 0.0) continue;
            if (s == full) {
                next[s] += probability[s];
                continue;
            }
            for (const auto& [t, p] : table.row(s)) next[t] += probability[s] * p;
        }
        std::swap(probability, next);
        tails.push_back(std::max(0.0, 1.0 - probability[full]));
    }
    return tails;
}

inline double exact_sync_tail(const Graph& g, Vertex start, std::size_t t, Variant variant = Variant::push_pull) {
    SyncTransitions table(g, variant);
    return exact_sync_tail_curve(g, start, t, table).back();
}

/// Exact synchronous guaranteed spread time: min { t : max_v P(ST(v) > t) <= 1/n }.
inline std::size_t exact_sync_gst(const Graph& g, Variant variant = Variant::push_pull,
                                  std::size_t max_rounds = 100'000) {
    const std::size_t n = g.vertex_count();
    if (n == 1) return 0;
    SyncTransitions table(g, variant);
    const double threshold = 1.0 / static_cast<double>(n);
    std::size_t horizon = 4;
    while (horizon <= max_rounds) {
        std::vector<double> worst(horizon + 1, 0.0);
        for (Vertex v = 0; v < n; ++v) {
            auto curve = exact_sync_tail_curve(g, v, horizon, table);
            for (std::size_t t = 0; t <= horizon; ++t) worst[t] = std::max(worst[t], curve[t]);
        }
        for (std::size_t t = 0; t <= horizon; ++t)
            if (worst[t] <= threshold + 1e-12) return t;
        horizon *= 2;
    }
    throw std::runtime_error("exact sync gst: not reached within round cap");
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

enum class ClosedForm { complete_async_mean, path_async_mean, path_sync_mean, star_sync_gst, double_star_bridge_rate };

inline ClosedForm closed_form_from_string(const std::string& s) {
    if (s == "complete_async_mean") return ClosedForm::complete_async_mean;
    if (s == "path_async_mean") return ClosedForm::path_async_mean;
    if (s == "path_sync_mean") return ClosedForm::path_sync_mean;
    if (s == "star_sync_gst") return ClosedForm::star_sync_gst;
    if (s == "double_star_bridge_rate") return ClosedForm::double_star_bridge_rate;
    throw std::invalid_argument("unknown closed-form query '" + s + "'");
}

/// K_n async mean sum_{k=1}^{n-1} (n-1)/(2k(n-k)); P_n async endpoint mean n - 5/3;
/// P_n sync worst mean (4/3)n - 2; star sync gst 2; double-star bridge rate 4/n.
inline double closed_form(ClosedForm query, std::size_t n = 0) {
    const double dn = static_cast<double>(n);
    switch (query) {
        case ClosedForm::complete_async_mean: {
            if (n < 2) throw std::invalid_argument("complete_async_mean needs n >= 2");
            double sum = 0.0;
            for (std::size_t k = 1; k < n; ++k) {
                const double dk = static_cast<double>(k);
                sum += (dn - 1.0) / (2.0 * dk * (dn - dk));
            }
            return sum;
        }
        case ClosedForm::path_async_mean:
            if (n < 3) throw std::invalid_argument("path_async_mean needs n >= 3");
            return dn - 5.0 / 3.0;
        case ClosedForm::path_sync_mean:
            if (n < 3) throw std::invalid_argument("path_sync_mean needs n >= 3");
            return 4.0 * dn / 3.0 - 2.0;
        case ClosedForm::star_sync_gst: return 2.0;
        case ClosedForm::double_star_bridge_rate:
            if (n < 4 || n % 2) throw std::invalid_argument("double_star_bridge_rate needs even n >= 4");
            return 4.0 / dn;
    }
    throw std::invalid_argument("unknown closed-form query");
}

/// Minimum over k parallel two-edge routes of the sum of two Exp(1/2) times:
/// the hub-to-hub passage bound inside one diamond.
inline double diamond_hub_passage_sample(std::size_t k, RandomSource& src) {
    if (k < 1) throw std::invalid_argument("diamond passage needs k >= 1");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i)
        best = std::min(best, sample_exponential(0.5, src) + sample_exponential(0.5, src));
    return best;
}

}  // namespace gossip_lab
