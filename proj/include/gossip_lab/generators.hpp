#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossip_lab/graph.hpp"
#include "gossip_lab/random.hpp"

namespace gossip_lab {

enum class Family { path, star, complete, double_star, diamonds, hypercube, gnp };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::path: return "path";
        case Family::star: return "star";
        case Family::complete: return "complete";
        case Family::double_star: return "double_star";
        case Family::diamonds: return "diamonds";
        case Family::hypercube: return "hypercube";
        case Family::gnp: return "gnp";
    }
    return "?";
}

inline Family family_from_string(const std::string& s) {
    for (Family f : {Family::path, Family::star, Family::complete, Family::double_star, Family::diamonds,
                     Family::hypercube, Family::gnp})
        if (to_string(f) == s) return f;
    throw std::invalid_argument("unknown graph family '" + s + "'");
}

/// Which generator to run and its parameters. Only the fields relevant to the
/// family are read: n for path/star/complete/double_star/gnp, (m, k) for
/// diamonds, d for hypercube, p and seed for gnp.
struct FamilySpec {
    Family family = Family::path;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t d = 0;
    double p = 0.0;
    std::uint64_t seed = 0;

    static FamilySpec path(std::size_t n) { return {Family::path, n}; }
    static FamilySpec star(std::size_t n) { return {Family::star, n}; }
    static FamilySpec complete(std::size_t n) { return {Family::complete, n}; }
    static FamilySpec double_star(std::size_t n) { return {Family::double_star, n}; }
    static FamilySpec diamonds(std::size_t m, std::size_t k) { return {Family::diamonds, 0, m, k}; }
    static FamilySpec hypercube(std::size_t d) { return {Family::hypercube, 0, 0, 0, d}; }
    static FamilySpec gnp(std::size_t n, double p, std::uint64_t seed) {
        return {Family::gnp, n, 0, 0, 0, p, seed};
    }

    /// Vertex count the generator will produce.
    std::size_t vertex_count() const {
        switch (family) {
            case Family::diamonds: return k * m + m + 1;
            case Family::hypercube: return std::size_t{1} << d;
            default: return n;
        }
    }

    std::string label() const {
        switch (family) {
            case Family::diamonds: return "diamonds(m=" + std::to_string(m) + ",k=" + std::to_string(k) + ")";
            case Family::hypercube: return "hypercube(d=" + std::to_string(d) + ")";
            case Family::gnp: {
                char buf[64];
                std::snprintf(buf, sizeof buf, "gnp(n=%zu,p=%g,seed=%llu)", n, p,
                              static_cast<unsigned long long>(seed));
                return buf;
            }
            default: return to_string(family) + "(" + std::to_string(n) + ")";
        }
    }
};

inline constexpr std::size_t gnp_max_attempts = 1000;

/// Canonically labelled member of a family. Star and double-star centres come
/// first (double star: centres 0 and 1); diamonds put the m+1 hubs at 0..m in
/// chain order, then the k middle vertices of diamond j at m+1+j*k ...
inline Graph generate_family(const FamilySpec& spec) {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    std::vector<Edge> edges;
    switch (spec.family) {
        case Family::path:
            require(spec.n >= 1, "path needs n >= 1");
            for (Vertex v = 0; v + 1 < spec.n; ++v) edges.emplace_back(v, v + 1);
            return Graph::from_edges(spec.n, edges);
        case Family::star:
            require(spec.n >= 2, "star needs n >= 2");
            for (Vertex v = 1; v < spec.n; ++v) edges.emplace_back(0, v);
            return Graph::from_edges(spec.n, edges);
        case Family::complete:
            require(spec.n >= 1, "complete graph needs n >= 1");
            for (Vertex u = 0; u < spec.n; ++u)
                for (Vertex v = u + 1; v < spec.n; ++v) edges.emplace_back(u, v);
            return Graph::from_edges(spec.n, edges);
        case Family::double_star: {
            require(spec.n >= 4 && spec.n % 2 == 0, "double star needs even n >= 4");
            const auto half = static_cast<Vertex>(spec.n / 2);
            edges.emplace_back(0, 1);
            for (Vertex v = 2; v < spec.n; ++v) edges.emplace_back(v <= half ? 0 : 1, v);
            return Graph::from_edges(spec.n, edges);
        }
        case Family::diamonds: {
            require(spec.m >= 1 && spec.k >= 2, "string of diamonds needs m >= 1 and k >= 2");
            const std::size_t n = spec.vertex_count();
            for (std::size_t j = 0; j < spec.m; ++j)
                for (std::size_t i = 0; i < spec.k; ++i) {
                    auto mid = static_cast<Vertex>(spec.m + 1 + j * spec.k + i);
                    edges.emplace_back(static_cast<Vertex>(j), mid);
                    edges.emplace_back(static_cast<Vertex>(j + 1), mid);
                }
            return Graph::from_edges(n, edges);
        }
        case Family::hypercube: {
            require(spec.d >= 1 && spec.d <= 24, "hypercube needs 1 <= d <= 24");
            const std::size_t n = spec.vertex_count();
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t bit = 0; bit < spec.d; ++bit) {
                    std::size_t w = v ^ (std::size_t{1} << bit);
                    if (v < w) edges.emplace_back(static_cast<Vertex>(v), static_cast<Vertex>(w));
                }
            return Graph::from_edges(n, edges);
        }
        case Family::gnp: {
            require(spec.n >= 1, "gnp needs n >= 1");
            require(spec.p > 0.0 && spec.p <= 1.0, "gnp needs 0 < p <= 1");
            for (std::size_t attempt = 0; attempt < gnp_max_attempts; ++attempt) {
                RandomSource src(spec.seed, attempt);
                edges.clear();
                for (Vertex u = 0; u < spec.n; ++u)
                    for (Vertex v = u + 1; v < spec.n; ++v)
                        if (src.uniform() < spec.p) edges.emplace_back(u, v);
                try {
                    return Graph::from_edges(spec.n, edges);
                } catch (const GraphError&) {
                    // disconnected sample; redraw
                }
            }
            throw std::runtime_error("gnp: no connected sample within " + std::to_string(gnp_max_attempts) +
                                     " attempts");
        }
    }
    throw std::invalid_argument("unknown family");
}

}  // namespace gossip_lab
