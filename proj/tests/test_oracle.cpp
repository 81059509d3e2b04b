#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gossip_lab/engines.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/oracle.hpp"
#include "gossip_lab/stats.hpp"

using namespace gossip_lab;

namespace {

using Matrix = std::vector<std::vector<double>>;

// Dense Gaussian elimination with partial pivoting.
std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[pivot][c])) pivot = r;
        std::swap(a[c], a[pivot]);
        std::swap(b[c], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0.0) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

double rate_towards(const Graph& g, Vertex from, Vertex to, Variant variant) {
    const double push = 1.0 / static_cast<double>(g.degree(from));
    const double pull = 1.0 / static_cast<double>(g.degree(to));
    if (variant == Variant::push_only) return push;
    if (variant == Variant::pull_only) return pull;
    return push + pull;
}

// Expected async spread time from every state, as one linear system over all 2^n subsets.
std::vector<double> dense_async(const Graph& g, Variant variant) {
    const std::size_t n = g.vertex_count(), states = std::size_t{1} << n;
    Matrix a(states, std::vector<double>(states, 0.0));
    std::vector<double> b(states, 0.0);
    for (std::size_t s = 0; s < states; ++s) {
        a[s][s] = 1.0;
        if (s == states - 1 || s == 0) continue;
        double total = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            if ((s >> v) & 1) continue;
            double r = 0.0;
            for (Vertex u : g.neighbours(v))
                if ((s >> u) & 1) r += rate_towards(g, u, v, variant);
            total += r;
            a[s][s | (std::size_t{1} << v)] -= r;
        }
        for (std::size_t t = 0; t < states; ++t)
            if (t != s) a[s][t] /= total;
        b[s] = 1.0 / total;
    }
    return solve(a, b);
}

// One-round transition matrix by enumerating every joint neighbour choice.
Matrix naive_sync_transitions(const Graph& g, Variant variant) {
    const std::size_t n = g.vertex_count(), states = std::size_t{1} << n;
    Matrix p(states, std::vector<double>(states, 0.0));
    std::size_t combos = 1;
    for (Vertex v = 0; v < n; ++v) combos *= g.degree(v);
    const double weight = 1.0 / static_cast<double>(combos);
    for (std::size_t s = 1; s < states; ++s) {
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t rest = c, next = s;
            for (Vertex u = 0; u < n; ++u) {
                const Vertex w = g.neighbours(u)[rest % g.degree(u)];
                rest /= g.degree(u);
                const bool iu = (s >> u) & 1, iw = (s >> w) & 1;
                if (iu && !iw && variant != Variant::pull_only) next |= std::size_t{1} << w;
                if (!iu && iw && variant != Variant::push_only) next |= std::size_t{1} << u;
            }
            p[s][next] += weight;
        }
    }
    return p;
}

std::vector<double> naive_sync_expected(const Graph& g, Variant variant) {
    const Matrix p = naive_sync_transitions(g, variant);
    const std::size_t states = p.size();
    Matrix a(states, std::vector<double>(states, 0.0));
    std::vector<double> b(states, 0.0);
    for (std::size_t s = 0; s < states; ++s) {
        a[s][s] = 1.0;
        if (s == 0 || s == states - 1) continue;
        for (std::size_t t = 0; t < states; ++t) a[s][t] -= p[s][t];
        b[s] = 1.0;
    }
    return solve(a, b);
}

std::vector<double> naive_sync_tail(const Graph& g, Vertex start, std::size_t rounds, Variant variant) {
    const Matrix p = naive_sync_transitions(g, variant);
    const std::size_t states = p.size();
    std::vector<double> dist(states, 0.0);
    dist[std::size_t{1} << start] = 1.0;
    std::vector<double> tails{1.0};
    for (std::size_t r = 1; r <= rounds; ++r) {
        std::vector<double> next(states, 0.0);
        for (std::size_t s = 0; s < states; ++s)
            for (std::size_t t = 0; t < states; ++t) next[t] += dist[s] * (s == states - 1 ? (t == s) : p[s][t]);
        dist = next;
        tails.push_back(1.0 - dist[states - 1]);
    }
    return tails;
}

std::vector<Graph> small_corpus() {
    std::vector<Graph> out;
    for (std::size_t n : {2u, 3u, 4u, 6u}) out.push_back(generate_family(FamilySpec::path(n)));
    for (std::size_t n : {3u, 5u}) out.push_back(generate_family(FamilySpec::complete(n)));
    out.push_back(generate_family(FamilySpec::star(6)));
    out.push_back(generate_family(FamilySpec::double_star(6)));
    out.push_back(generate_family(FamilySpec::diamonds(1, 2)));
    out.push_back(generate_family(FamilySpec::hypercube(2)));
    for (std::uint64_t seed : {1u, 2u, 3u}) out.push_back(generate_family(FamilySpec::gnp(6, 0.5, seed)));
    return out;
}

constexpr Variant all_variants[] = {Variant::push_pull, Variant::push_only, Variant::pull_only};

}  // namespace

TEST(ExactAsync, Examples) {
    const Graph k2 = generate_family(FamilySpec::complete(2));
    EXPECT_NEAR(exact_async_expected(k2, 0), 0.5, 1e-12);
    EXPECT_NEAR(exact_async_expected(k2, 0, Variant::pull_only), 1.0, 1e-12);
    EXPECT_NEAR(exact_async_expected(generate_family(FamilySpec::path(1)), 0), 0.0, 1e-12);
    for (std::size_t n = 3; n <= 12; ++n)
        EXPECT_NEAR(exact_async_expected(generate_family(FamilySpec::path(n)), 0),
                    closed_form(ClosedForm::path_async_mean, n), 1e-9)
            << n;
    for (std::size_t n = 2; n <= 10; ++n)
        EXPECT_NEAR(exact_async_expected(generate_family(FamilySpec::complete(n)), 0),
                    closed_form(ClosedForm::complete_async_mean, n), 1e-9)
            << n;
}

TEST(ExactAsync, StarHandDerivation) {
    for (std::size_t n : {3u, 6u, 12u}) {
        const Graph s = generate_family(FamilySpec::star(n));
        const double dn = static_cast<double>(n);
        const double leaf_rate = 1.0 + 1.0 / (dn - 1);  // each centre-leaf edge
        EXPECT_NEAR(exact_async_expected(s, 0), harmonic(n - 1) / leaf_rate, 1e-9);
        EXPECT_NEAR(exact_async_expected(s, 1), (1.0 + harmonic(n - 2)) / leaf_rate, 1e-9);
    }
}

TEST(ExactAsync, MatchesDenseSolve) {
    for (const Graph& g : small_corpus())
        for (Variant variant : all_variants) {
            const auto dense = dense_async(g, variant);
            for (Vertex v = 0; v < g.vertex_count(); ++v)
                EXPECT_NEAR(exact_async_expected(g, v, variant), dense[std::size_t{1} << v], 1e-9)
                    << format_edge_list(g) << to_string(variant) << " start " << v;
        }
}

TEST(ExactAsync, PullOnlyBelowFourN) {
    RandomSource src(7, 0);
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 2 + src.below(9);
        const Graph g = generate_family(FamilySpec::gnp(n, 0.2 + 0.6 * src.uniform(), src.next_u64()));
        for (Vertex v = 0; v < n; ++v)
            EXPECT_LT(exact_async_expected(g, v, Variant::pull_only), 4.0 * static_cast<double>(n));
    }
}

TEST(ExactAsync, AgreesWithSimulation) {
    const Graph g = generate_family(FamilySpec::double_star(8));
    for (Vertex v : {0u, 2u}) {
        std::vector<double> xs(20000);
        for (std::size_t t = 0; t < xs.size(); ++t) {
            RandomSource src(70 + v, t);
            xs[t] = fpp_spread_time(g, v, Variant::push_pull, src);
        }
        const Estimate e = mean_estimate(xs);
        EXPECT_NEAR(e.point, exact_async_expected(g, v), 4 * e.stderr_);
    }
}

TEST(ExactSync, Examples) {
    const Graph k2 = generate_family(FamilySpec::complete(2));
    EXPECT_NEAR(exact_sync_expected(k2, 0), 1.0, 1e-12);
    EXPECT_NEAR(exact_sync_expected(k2, 0, Variant::pull_only), 1.0, 1e-12);
    for (std::size_t n = 3; n <= 10; ++n) {
        const Graph s = generate_family(FamilySpec::star(n));
        EXPECT_NEAR(exact_sync_expected(s, 0), 1.0, 1e-12);
        EXPECT_NEAR(exact_sync_expected(s, 1), 2.0, 1e-12);
        EXPECT_EQ(exact_sync_gst(s), 2u);
        EXPECT_NEAR(exact_sync_tail(s, 1, 1), 1.0, 1e-12);
        EXPECT_NEAR(exact_sync_tail(s, 1, 2), 0.0, 1e-12);
    }
    EXPECT_NEAR(exact_sync_tail(generate_family(FamilySpec::path(4)), 0, 3), 0.25, 1e-12);
    EXPECT_EQ(exact_sync_gst(generate_family(FamilySpec::path(1))), 0u);
}

TEST(ExactSync, PathWorstStartClosedForm) {
    for (std::size_t n = 3; n <= 8; ++n) {
        const Graph g = generate_family(FamilySpec::path(n));
        double worst = 0.0;
        for (Vertex v = 0; v < n; ++v) worst = std::max(worst, exact_sync_expected(g, v));
        EXPECT_NEAR(worst, closed_form(ClosedForm::path_sync_mean, n), 1e-9) << n;
    }
}

TEST(ExactSync, MatchesFullChoiceEnumeration) {
    for (const Graph& g : small_corpus())
        for (Variant variant : all_variants) {
            const auto naive = naive_sync_expected(g, variant);
            for (Vertex v = 0; v < g.vertex_count(); ++v) {
                EXPECT_NEAR(exact_sync_expected(g, v, variant), naive[std::size_t{1} << v], 1e-9)
                    << format_edge_list(g) << to_string(variant) << " start " << v;
                const auto tails = naive_sync_tail(g, v, 8, variant);
                SyncTransitions table(g, variant);
                const auto curve = exact_sync_tail_curve(g, v, 8, table);
                for (std::size_t t = 1; t <= 8; ++t) EXPECT_NEAR(curve[t], tails[t], 1e-12);
            }
        }
}

TEST(ExactSync, TailIsNonincreasing) {
    const Graph g = generate_family(FamilySpec::diamonds(2, 3));
    SyncTransitions table(g, Variant::push_pull);
    const auto curve = exact_sync_tail_curve(g, 0, 30, table);
    for (std::size_t t = 1; t < curve.size(); ++t) EXPECT_LE(curve[t], curve[t - 1] + 1e-15);
    EXPECT_NEAR(curve.front(), 1.0, 0.0);
    EXPECT_LT(curve.back(), 1e-6);
}

TEST(ExactSync, GstMatchesTailDefinition) {
    const Graph g = generate_family(FamilySpec::gnp(8, 0.4, 5));
    const std::size_t gst = exact_sync_gst(g);
    const double threshold = 1.0 / 8.0;
    double worst_at = 0.0, worst_before = 0.0;
    for (Vertex v = 0; v < 8; ++v) {
        worst_at = std::max(worst_at, exact_sync_tail(g, v, gst));
        worst_before = std::max(worst_before, exact_sync_tail(g, v, gst - 1));
    }
    EXPECT_LE(worst_at, threshold);
    EXPECT_GT(worst_before, threshold);
}

TEST(Oracle, SizeLimits) {
    EXPECT_THROW(exact_async_expected(generate_family(FamilySpec::path(21)), 0), OracleLimitError);
    EXPECT_THROW(exact_sync_expected(generate_family(FamilySpec::path(11)), 0), OracleLimitError);
    EXPECT_THROW(exact_sync_gst(generate_family(FamilySpec::star(11))), OracleLimitError);
    EXPECT_NO_THROW(exact_sync_expected(generate_family(FamilySpec::path(10)), 0));
    EXPECT_THROW(exact_async_expected(generate_family(FamilySpec::path(3)), 3), std::invalid_argument);
}

TEST(ClosedForms, ValuesAndErrors) {
    EXPECT_NEAR(closed_form(ClosedForm::path_async_mean, 4), 7.0 / 3.0, 1e-15);
    EXPECT_NEAR(closed_form(ClosedForm::complete_async_mean, 2), 0.5, 1e-15);
    EXPECT_EQ(closed_form(ClosedForm::star_sync_gst), 2.0);
    EXPECT_NEAR(closed_form(ClosedForm::double_star_bridge_rate, 100), 0.04, 1e-15);
    EXPECT_THROW(closed_form(ClosedForm::path_async_mean, 2), std::invalid_argument);
    EXPECT_THROW(closed_form(ClosedForm::double_star_bridge_rate, 5), std::invalid_argument);
    EXPECT_THROW(closed_form_from_string("torus_mean"), std::invalid_argument);
    EXPECT_EQ(closed_form_from_string("path_sync_mean"), ClosedForm::path_sync_mean);
}

TEST(DiamondPassage, SingleRouteMean) {
    std::vector<double> xs(50000);
    RandomSource src(80, 0);
    for (auto& x : xs) x = diamond_hub_passage_sample(1, src);
    const Estimate e = mean_estimate(xs);
    EXPECT_NEAR(e.point, 4.0, 4 * e.stderr_);
    EXPECT_THROW(diamond_hub_passage_sample(0, src), std::invalid_argument);
}

TEST(DiamondPassage, DecreasesWithRoutes) {
    double previous = 1e9;
    for (std::size_t k : {1u, 4u, 16u, 64u}) {
        std::vector<double> xs(5000);
        RandomSource src(81, k);
        for (auto& x : xs) x = diamond_hub_passage_sample(k, src);
        const double mean = mean_of(xs);
        EXPECT_LT(mean, previous);
        EXPECT_LE(mean, 15.0 / std::sqrt(static_cast<double>(k)));
        previous = mean;
    }
}
