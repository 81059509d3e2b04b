#pragma once

#include <bit>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossip_lab/graph.hpp"

namespace gossip_lab {

/// Nonnegative reduced fraction; enough for cut ratios on graphs with n <= 20.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t p, std::int64_t q) : num(p), den(q) {
        if (q == 0) throw std::invalid_argument("zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        auto g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }
};

struct ExpansionMetrics {
    Rational conductance;       // Phi(G)
    Rational vertex_expansion;  // alpha(G)
};

inline constexpr std::size_t default_exhaustive_limit = 20;

/// Exact conductance and vertex expansion by enumerating all 2^n vertex subsets.
///   Phi   = min e(S, V\S) / vol(S)   over 0 < vol(S) <= vol(V)/2
///   alpha = min |dS| / |S|           over 0 < |S| <= n/2, dS = outside vertices adjacent to S
inline ExpansionMetrics expansion_metrics(const Graph& g, std::size_t limit = default_exhaustive_limit) {
    const std::size_t n = g.vertex_count();
    if (n > limit || n > 24)
        throw std::invalid_argument("expansion metrics enumerate 2^n subsets; n=" + std::to_string(n) +
                                    " exceeds limit " + std::to_string(std::min<std::size_t>(limit, 24)));
    if (n < 2) throw std::invalid_argument("expansion metrics need at least two vertices");

    std::vector<std::uint32_t> nbr(n, 0);
    for (Vertex v = 0; v < n; ++v)
        for (Vertex w : g.neighbours(v)) nbr[v] |= 1u << w;

    const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
    const std::int64_t total_volume = static_cast<std::int64_t>(2 * g.edge_count());

    // Incremental tables keyed by subset: add the lowest vertex to the subset without it.
    std::vector<std::int64_t> volume(std::size_t{1} << n, 0), cut(std::size_t{1} << n, 0);
    std::vector<std::uint32_t> reach(std::size_t{1} << n, 0);

    bool have_phi = false, have_alpha = false;
    Rational phi, alpha;
    for (std::uint32_t s = 1; s <= full && s != 0; ++s) {
        const int low = std::countr_zero(s);
        const std::uint32_t rest = s & (s - 1);
        const auto deg = static_cast<std::int64_t>(g.degree(static_cast<Vertex>(low)));
        volume[s] = volume[rest] + deg;
        cut[s] = cut[rest] + deg - 2 * std::popcount(nbr[low] & rest);
        reach[s] = reach[rest] | nbr[low];
        if (s == full) break;

        if (2 * volume[s] <= total_volume) {
            Rational r(cut[s], volume[s]);
            if (!have_phi || r < phi) phi = r, have_phi = true;
        }
        const auto size = static_cast<std::int64_t>(std::popcount(s));
        if (2 * static_cast<std::size_t>(size) <= n) {
            Rational r(std::popcount(reach[s] & ~s), size);
            if (!have_alpha || r < alpha) alpha = r, have_alpha = true;
        }
    }
    return {phi, alpha};
}

struct RateProfiles {
    std::vector<double> rate;     // f(v) = 1 + sum over neighbours u of 1/deg(u)
    std::vector<double> contact;  // pi(v) = (1/n) sum over neighbours u of 1/deg(u)
};

/// Per-vertex first-ring rate of the two-clock protocol and the probability
/// that a uniform caller's uniform callee is v. Sum f = 2n and sum pi = 1.
inline RateProfiles rate_profiles(const Graph& g) {
    const std::size_t n = g.vertex_count();
    RateProfiles out{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
    if (n == 1) {
        out.contact[0] = 1.0;
        return out;
    }
    for (Vertex v = 0; v < n; ++v) {
        double s = 0.0;
        for (Vertex u : g.neighbours(v)) s += 1.0 / static_cast<double>(g.degree(u));
        out.rate[v] += s;
        out.contact[v] = s / static_cast<double>(n);
    }
    return out;
}

}  // namespace gossip_lab
