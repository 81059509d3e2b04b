#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gossip_lab/graph.hpp"

namespace gossip_lab {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t a = seed;
    std::uint64_t h = splitmix64(a);
    std::uint64_t b = stream ^ 0xD1B54A32D192ED03ULL;
    h ^= splitmix64(b) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t key) noexcept {
        for (auto& word : s_) word = detail::splitmix64(key);
    }

    /// Raw state, for reproducing published test vectors.
    static constexpr Xoshiro256 from_state(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) noexcept {
        Xoshiro256 x(0);
        x.s_[0] = a;
        x.s_[1] = b;
        x.s_[2] = c;
        x.s_[3] = d;
        return x;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

private:
    std::uint64_t s_[4]{};
};

/// Deterministic random stream identified by (master seed, stream id).
/// Identical ids give identical draw sequences on every platform; the
/// conversions to doubles and bounded integers below are explicit so no
/// implementation-defined std distribution is involved.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), engine_(detail::mix_key(seed, stream)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent child stream, e.g. one per vertex or per role.
    RandomSource substream(std::uint64_t tag) const {
        return RandomSource(detail::mix_key(seed_, stream_), tag);
    }

    std::uint64_t next_u64() noexcept { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept {
        double u;
        do u = uniform();
        while (u == 0.0);
        return u;
    }

    /// Uniform integer on [0, bound), bound >= 1 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 product = static_cast<unsigned __int128>(engine_()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(engine_()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    Vertex uniform_vertex(std::size_t n) noexcept { return static_cast<Vertex>(below(n)); }

    Vertex uniform_neighbour(const Graph& g, Vertex v) noexcept {
        auto nb = g.neighbours(v);
        return nb[below(nb.size())];
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    Xoshiro256 engine_;
};

/// Exp(rate) by inversion: -log(1 - U) / rate.
inline double sample_exponential(double rate, RandomSource& src) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("exponential rate must be positive");
    return -std::log1p(-src.uniform_open()) / rate;
}

/// Geo(p) on {0, 1, 2, ...} with P(k) = (1-p)^k p.
inline std::uint64_t sample_geometric(double p, RandomSource& src) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric parameter must lie in (0, 1]");
    if (p == 1.0) return 0;
    double value = std::floor(std::log1p(-src.uniform_open()) / std::log1p(-p));
    return static_cast<std::uint64_t>(value);
}

struct CallPair {
    Vertex caller;  // B_i
    Vertex callee;  // W_i, a neighbour of the caller

    friend bool operator==(const CallPair&, const CallPair&) = default;
};

/// Shared randomness for the sequential / lazy / asynchronous couplings:
/// i.i.d. uniform callers, each with a uniform neighbour, plus optional Exp(n)
/// clock gaps.
struct CallingSequence {
    std::vector<CallPair> pairs;
    std::vector<double> gaps;  // empty, or one per pair

    std::size_t size() const noexcept { return pairs.size(); }
    bool has_clocks() const noexcept { return !gaps.empty(); }

    /// Every callee neighbours its caller, and every gap is positive.
    bool valid_for(const Graph& g) const {
        for (const auto& p : pairs)
            if (!g.has_edge(p.caller, p.callee)) return false;
        if (!gaps.empty() && gaps.size() != pairs.size()) return false;
        for (double z : gaps)
            if (!(z > 0.0)) return false;
        return true;
    }
};

/// Lazily extends a calling sequence. Pairs and clock gaps come from separate
/// substreams, so any prefix is reproduced exactly when a longer sequence is
/// requested with the same source.
class CallingSequenceDrawer {
public:
    CallingSequenceDrawer(const Graph& g, const RandomSource& src, bool with_clocks)
        : graph_(&g), pairs_(src.substream(0)), clocks_(src.substream(1)), with_clocks_(with_clocks) {}

    void extend(CallingSequence& seq, std::size_t length) {
        const std::size_t n = graph_->vertex_count();
        seq.pairs.reserve(length);
        while (seq.pairs.size() < length) {
            Vertex b = pairs_.uniform_vertex(n);
            Vertex w = pairs_.uniform_neighbour(*graph_, b);
            seq.pairs.push_back({b, w});
            if (with_clocks_) seq.gaps.push_back(sample_exponential(static_cast<double>(n), clocks_));
        }
    }

    const Graph& graph() const noexcept { return *graph_; }

private:
    const Graph* graph_;
    RandomSource pairs_;
    RandomSource clocks_;
    bool with_clocks_;
};

inline CallingSequence draw_calling_sequence(const Graph& g, std::size_t length, bool with_clocks,
                                             const RandomSource& src) {
    if (length == 0) throw std::invalid_argument("calling sequence length must be at least 1");
    if (g.vertex_count() < 2) throw std::invalid_argument("calling sequences need at least one edge");
    CallingSequence seq;
    CallingSequenceDrawer(g, src, with_clocks).extend(seq, length);
    return seq;
}

/// Per-vertex calling lists: entry r of vertex u is the neighbour u calls on
/// its (r+1)-th action. Lists are either injected or extended on demand from
/// one substream per vertex.
class CallingLists {
public:
    CallingLists(const Graph& g, const RandomSource& src) : graph_(&g), lists_(g.vertex_count()) {
        sources_.reserve(g.vertex_count());
        for (Vertex v = 0; v < g.vertex_count(); ++v) sources_.push_back(src.substream(v));
    }

    static CallingLists injected(const Graph& g, std::vector<std::vector<Vertex>> lists) {
        if (lists.size() != g.vertex_count()) throw std::invalid_argument("one calling list per vertex required");
        for (Vertex u = 0; u < lists.size(); ++u)
            for (Vertex w : lists[u])
                if (!g.has_edge(u, w)) throw std::invalid_argument("calling list entry is not a neighbour");
        CallingLists out(g);
        out.lists_ = std::move(lists);
        return out;
    }

    Vertex entry(Vertex u, std::size_t index) {
        auto& list = lists_[u];
        if (index >= list.size()) {
            if (sources_.empty()) throw std::out_of_range("injected calling list exhausted");
            while (list.size() <= index) list.push_back(sources_[u].uniform_neighbour(*graph_, u));
        }
        return list[index];
    }

private:
    explicit CallingLists(const Graph& g) : graph_(&g), lists_(g.vertex_count()) {}

    const Graph* graph_;
    std::vector<std::vector<Vertex>> lists_;
    std::vector<RandomSource> sources_;
};

/// Per-vertex rate-1 Poisson ring times, extended on demand or injected.
class RingSchedule {
public:
    RingSchedule(std::size_t n, const RandomSource& src) : rings_(n) {
        sources_.reserve(n);
        for (std::size_t v = 0; v < n; ++v) sources_.push_back(src.substream(v));
    }

    static RingSchedule injected(std::vector<std::vector<double>> rings) {
        for (const auto& r : rings)
            for (std::size_t i = 0; i < r.size(); ++i)
                if (r[i] < 0.0 || (i > 0 && r[i] < r[i - 1]))
                    throw std::invalid_argument("ring times must be nonnegative and nondecreasing");
        RingSchedule out;
        out.rings_ = std::move(rings);
        return out;
    }

    std::size_t vertex_count() const noexcept { return rings_.size(); }

    /// Time of the (index+1)-th ring of v, or nullopt if an injected schedule ran out.
    std::optional<double> ring(Vertex v, std::size_t index) {
        auto& r = rings_[v];
        if (index >= r.size()) {
            if (sources_.empty()) return std::nullopt;
            while (r.size() <= index) {
                double last = r.empty() ? 0.0 : r.back();
                r.push_back(last + sample_exponential(1.0, sources_[v]));
            }
        }
        return r[index];
    }

private:
    RingSchedule() = default;

    std::vector<std::vector<double>> rings_;
    std::vector<RandomSource> sources_;
};

}  // namespace gossip_lab
