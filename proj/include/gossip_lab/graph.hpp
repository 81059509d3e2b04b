#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gossip_lab {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Raised for malformed edge lists and invalid graph constructions.
/// `line()` is the 1-based input line the problem was found on, or 0 when the
/// problem is not tied to a single line (e.g. a disconnected graph built
/// programmatically).
class GraphError : public std::runtime_error {
public:
    explicit GraphError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Immutable simple connected undirected graph on vertices 0..n-1.
/// Adjacency is stored in CSR form with each neighbour list sorted.
class Graph {
public:
    /// Validates and canonicalizes. Edges may be given in any order and either
    /// orientation; self-loops, duplicates, out-of-range ids and disconnected
    /// inputs are rejected.
    static Graph from_edges(std::size_t n, std::vector<Edge> edges) {
        if (n == 0) throw GraphError("graph must have at least one vertex");
        for (auto& [u, v] : edges) {
            if (u >= n || v >= n) throw GraphError("vertex id out of range");
            if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
            throw GraphError("duplicate edge " + std::to_string(dup->first) + " " +
                             std::to_string(dup->second));

        Graph g;
        g.offsets_.assign(n + 1, 0);
        for (const auto& [u, v] : edges) {
            ++g.offsets_[u + 1];
            ++g.offsets_[v + 1];
        }
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.adjacency_.resize(2 * edges.size());
        std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& [u, v] : edges) {
            g.adjacency_[fill[u]++] = v;
            g.adjacency_[fill[v]++] = u;
        }
        for (std::size_t i = 0; i < n; ++i)
            std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                      g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
        g.edge_count_ = edges.size();
        if (!g.connected()) throw GraphError("graph is disconnected");
        return g;
    }

    std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return edge_count_; }

    std::span<const Vertex> neighbours(Vertex v) const {
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(Vertex u, Vertex v) const {
        if (u >= vertex_count() || v >= vertex_count()) return false;
        auto nb = neighbours(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Edges with u < v, sorted lexicographically.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (Vertex u = 0; u < vertex_count(); ++u)
            for (Vertex v : neighbours(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> d(vertex_count());
        for (Vertex v = 0; v < vertex_count(); ++v) d[v] = degree(v);
        return d;
    }

    /// Eccentricity maximum via BFS from every vertex.
    std::size_t diameter() const {
        std::size_t best = 0;
        for (Vertex s = 0; s < vertex_count(); ++s) {
            auto dist = bfs_distances(s);
            best = std::max(best, *std::max_element(dist.begin(), dist.end()));
        }
        return best;
    }

    std::vector<std::size_t> bfs_distances(Vertex source) const {
        std::vector<std::size_t> dist(vertex_count(), SIZE_MAX);
        std::queue<Vertex> frontier;
        dist[source] = 0;
        frontier.push(source);
        while (!frontier.empty()) {
            Vertex u = frontier.front();
            frontier.pop();
            for (Vertex w : neighbours(u))
                if (dist[w] == SIZE_MAX) {
                    dist[w] = dist[u] + 1;
                    frontier.push(w);
                }
        }
        return dist;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    Graph() = default;

    bool connected() const {
        auto dist = bfs_distances(0);
        return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == SIZE_MAX; });
    }

    std::vector<std::size_t> offsets_;
    std::vector<Vertex> adjacency_;
    std::size_t edge_count_ = 0;
};

namespace detail {

inline bool blank_or_comment(std::string_view line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string_view::npos || line[pos] == '#';
}

inline std::vector<long long> parse_ints(std::string_view line, std::size_t lineno) {
    std::vector<long long> out;
    std::istringstream in{std::string(line)};
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        long long value = 0;
        try {
            value = std::stoll(token, &used);
        } catch (const std::exception&) {
            throw GraphError("expected integer, got '" + token + "'", lineno);
        }
        if (used != token.size()) throw GraphError("expected integer, got '" + token + "'", lineno);
        out.push_back(value);
    }
    return out;
}

}  // namespace detail

/// Parses the edge-list format: optional '#' comment lines, a header "n m",
/// then m lines "u v". Every error carries the offending line number.
inline Graph parse_edge_list(std::string_view text) {
    std::size_t lineno = 0;
    std::size_t header_line = 0;
    long long n = -1, m = -1;
    std::vector<Edge> edges;
    std::vector<std::size_t> edge_lines;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (detail::blank_or_comment(line)) {
            if (end == text.size()) break;
            continue;
        }
        auto ints = detail::parse_ints(line, lineno);
        if (ints.size() != 2) throw GraphError("expected two integers", lineno);
        if (n < 0) {
            n = ints[0];
            m = ints[1];
            header_line = lineno;
            if (n < 1) throw GraphError("vertex count must be at least 1", lineno);
            if (m < 0) throw GraphError("edge count must be nonnegative", lineno);
        } else {
            if (static_cast<long long>(edges.size()) == m)
                throw GraphError("more edge lines than declared", lineno);
            long long u = ints[0], v = ints[1];
            if (u < 0 || v < 0 || u >= n || v >= n)
                throw GraphError("vertex id out of range", lineno);
            if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u), lineno);
            edges.emplace_back(static_cast<Vertex>(std::min(u, v)), static_cast<Vertex>(std::max(u, v)));
            edge_lines.push_back(lineno);
        }
        if (end == text.size()) break;
    }
    if (n < 0) throw GraphError("missing header line", lineno);
    if (static_cast<long long>(edges.size()) != m)
        throw GraphError("declared " + std::to_string(m) + " edges, found " + std::to_string(edges.size()),
                         header_line);

    // Duplicate detection needs the original line numbers, so do it before canonicalization.
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (edges[order[i]] == edges[order[i - 1]])
            throw GraphError("duplicate edge " + std::to_string(edges[order[i]].first) + " " +
                                 std::to_string(edges[order[i]].second),
                             edge_lines[order[i]]);
    try {
        return Graph::from_edges(static_cast<std::size_t>(n), std::move(edges));
    } catch (const GraphError& e) {
        throw GraphError(e.what(), header_line);
    }
}

/// Writes "n m" then the sorted edge list, newline-terminated.
inline std::string format_edge_list(const Graph& g) {
    std::string out = std::to_string(g.vertex_count()) + " " + std::to_string(g.edge_count()) + "\n";
    for (const auto& [u, v] : g.edges()) out += std::to_string(u) + " " + std::to_string(v) + "\n";
    return out;
}

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_list(buffer.str());
}

inline void write_edge_list_file(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << format_edge_list(g);
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace gossip_lab
