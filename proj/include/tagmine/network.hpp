#pragma once

// Follower graphs and their degree and triangle statistics.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"

namespace tagmine {

struct NodeInfo {
    std::string id;
    Role role = Role::unknown;
    Cohort cohort = Cohort::unlabeled;
};

struct GraphBuildReport {
    std::uint64_t records = 0;
    std::uint64_t self_loops_dropped = 0;
    std::uint64_t duplicates_dropped = 0;
};

using NodeIndex = std::uint32_t;

/// Immutable digraph in compressed sparse row form. Node indices follow id
/// order; neighbor arrays are sorted.
class DirectedGraph {
public:
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return out_targets_.size(); }

    const NodeInfo& node(NodeIndex i) const { return nodes_[i]; }

    std::optional<NodeIndex> index_of(std::string_view id) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                   [](const NodeInfo& n, std::string_view v) { return n.id < v; });
        if (it == nodes_.end() || it->id != id) return std::nullopt;
        return static_cast<NodeIndex>(it - nodes_.begin());
    }

    std::span<const NodeIndex> out(NodeIndex i) const {
        return {out_targets_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
    }
    std::span<const NodeIndex> in(NodeIndex i) const {
        return {in_sources_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
    }
    std::size_t out_degree(NodeIndex i) const { return out_offsets_[i + 1] - out_offsets_[i]; }
    std::size_t in_degree(NodeIndex i) const { return in_offsets_[i + 1] - in_offsets_[i]; }

    bool has_edge(NodeIndex from, NodeIndex to) const {
        auto o = out(from);
        return std::binary_search(o.begin(), o.end(), to);
    }

    std::vector<NodeIndex> all_nodes() const {
        std::vector<NodeIndex> v(nodes_.size());
        for (NodeIndex i = 0; i < v.size(); ++i) v[i] = i;
        return v;
    }

    std::vector<NodeIndex> select(const std::function<bool(const NodeInfo&)>& pred) const {
        std::vector<NodeIndex> v;
        for (NodeIndex i = 0; i < nodes_.size(); ++i)
            if (pred(nodes_[i])) v.push_back(i);
        return v;
    }

    std::vector<NodeIndex> indices_of(std::span<const std::string> ids) const {
        std::vector<NodeIndex> v;
        for (const auto& id : ids)
            if (auto i = index_of(id)) v.push_back(*i);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }

private:
    std::vector<NodeInfo> nodes_;
    std::vector<std::size_t> out_offsets_, in_offsets_;
    std::vector<NodeIndex> out_targets_, in_sources_;

    friend DirectedGraph build_graph(std::span<const FollowEdge>, std::span<const NodeInfo>, GraphBuildReport*);
};

/// Nodes are edge endpoints plus declared metadata nodes. Duplicate edges and
/// self-loops are dropped and counted. The first metadata entry per id wins.
inline DirectedGraph build_graph(std::span<const FollowEdge> records, std::span<const NodeInfo> metadata = {},
                                 GraphBuildReport* report = nullptr) {
    GraphBuildReport local;
    GraphBuildReport& rep = report ? *report : local;
    rep = {};

    std::map<std::string, NodeInfo> nodes;
    for (const auto& m : metadata) nodes.try_emplace(m.id, m);
    for (const auto& e : records) {
        nodes.try_emplace(e.follower, NodeInfo{e.follower});
        nodes.try_emplace(e.followed, NodeInfo{e.followed});
    }

    DirectedGraph g;
    g.nodes_.reserve(nodes.size());
    for (auto& [id, info] : nodes) g.nodes_.push_back(std::move(info));

    std::vector<std::pair<NodeIndex, NodeIndex>> edges;
    edges.reserve(records.size());
    for (const auto& e : records) {
        ++rep.records;
        if (e.follower == e.followed) {
            ++rep.self_loops_dropped;
            continue;
        }
        edges.emplace_back(*g.index_of(e.follower), *g.index_of(e.followed));
    }
    std::sort(edges.begin(), edges.end());
    auto last = std::unique(edges.begin(), edges.end());
    rep.duplicates_dropped = static_cast<std::uint64_t>(edges.end() - last);
    edges.erase(last, edges.end());

    const std::size_t n = g.nodes_.size();
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
        ++g.out_offsets_[u + 1];
        ++g.in_offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.out_offsets_[i + 1] += g.out_offsets_[i];
        g.in_offsets_[i + 1] += g.in_offsets_[i];
    }
    g.out_targets_.resize(edges.size());
    g.in_sources_.resize(edges.size());
    std::vector<std::size_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    std::vector<std::size_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    // Edges are sorted by (u, v), so out lists come out sorted; in lists are
    // filled in increasing u as well.
    for (auto [u, v] : edges) {
        g.out_targets_[out_pos[u]++] = v;
        g.in_sources_[in_pos[v]++] = u;
    }
    return g;
}

struct GroupStats {
    std::size_t n_nodes = 0;  // subset size
    std::size_t n_edges = 0;  // whole-graph edges
    double avg_in = 0.0;
    double avg_out = 0.0;

    double avg_total_degree() const { return avg_in + avg_out; }
    std::optional<double> in_out_ratio() const {
        if (avg_out == 0.0) return std::nullopt;
        return avg_in / avg_out;
    }

    static GroupStats from_averages(double avg_in, double avg_out) {
        GroupStats s;
        s.avg_in = avg_in;
        s.avg_out = avg_out;
        return s;
    }

    nlohmann::json to_json() const {
        auto ratio = in_out_ratio();
        return {{"n_nodes", n_nodes},
                {"n_edges", n_edges},
                {"avg_in", avg_in},
                {"avg_out", avg_out},
                {"avg_total_degree", avg_total_degree()},
                {"in_out_ratio", ratio ? nlohmann::json(*ratio) : nlohmann::json()},
                {"in_out_ratio_display", ratio ? nlohmann::json(format_ratio(*ratio)) : nlohmann::json()}};
    }

    static std::string format_ratio(double r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", r);
        return buf;
    }
};

/// Degree averages over a node subset, with degrees taken in the full graph.
inline GroupStats group_stats(const DirectedGraph& g, std::span<const NodeIndex> subset) {
    if (subset.empty()) throw ConfigError("group_stats needs a nonempty node subset");
    std::uint64_t in = 0;
    std::uint64_t out = 0;
    for (auto i : subset) {
        in += g.in_degree(i);
        out += g.out_degree(i);
    }
    GroupStats s;
    s.n_nodes = subset.size();
    s.n_edges = g.edge_count();
    s.avg_in = static_cast<double>(in) / static_cast<double>(subset.size());
    s.avg_out = static_cast<double>(out) / static_cast<double>(subset.size());
    return s;
}

struct TriangleCounts {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> per_node;
};

/// Directed 3-cycles a->b->c->a. A triple with both orientations counts twice.
/// Each cycle is found once, from its smallest node u, by intersecting
/// out(v) with in(u) for every edge u->v with v > u.
inline TriangleCounts triangle_count(const DirectedGraph& g) {
    TriangleCounts t;
    t.per_node.assign(g.node_count(), 0);
    for (NodeIndex u = 0; u < g.node_count(); ++u) {
        auto in_u = g.in(u);
        auto in_begin = std::upper_bound(in_u.begin(), in_u.end(), u);
        for (auto v : g.out(u)) {
            if (v <= u) continue;
            auto out_v = g.out(v);
            auto a = std::upper_bound(out_v.begin(), out_v.end(), u);
            auto b = in_begin;
            while (a != out_v.end() && b != in_u.end()) {
                if (*a < *b) {
                    ++a;
                } else if (*b < *a) {
                    ++b;
                } else {
                    ++t.total;
                    ++t.per_node[u];
                    ++t.per_node[v];
                    ++t.per_node[*a];
                    ++a;
                    ++b;
                }
            }
        }
    }
    return t;
}

/// Triangles in the undirected graph of mutual (reciprocated) follows.
inline std::uint64_t mutual_triangle_count(const DirectedGraph& g) {
    std::vector<std::vector<NodeIndex>> mutual(g.node_count());
    for (NodeIndex u = 0; u < g.node_count(); ++u)
        for (auto v : g.out(u))
            if (v > u && g.has_edge(v, u)) mutual[u].push_back(v);
    std::uint64_t total = 0;
    for (NodeIndex u = 0; u < g.node_count(); ++u)
        for (auto v : mutual[u]) {
            const auto& a = mutual[u];
            const auto& b = mutual[v];
            auto ia = std::upper_bound(a.begin(), a.end(), v);
            auto ib = b.begin();
            while (ia != a.end() && ib != b.end()) {
                if (*ia < *ib)
                    ++ia;
                else if (*ib < *ia)
                    ++ib;
                else {
                    ++total;
                    ++ia;
                    ++ib;
                }
            }
        }
    return total;
}

struct RankedAccount {
    std::string id;
    std::size_t in_degree = 0;
    Role role = Role::unknown;
};

/// "name(role)" with roles spelled as annotated in reports; unknown roles are bare.
inline std::string render_account(std::string_view id, Role role) {
    switch (role) {
        case Role::user: return std::string(id) + "(user)";
        case Role::dealer: return std::string(id) + "(dealer)";
        case Role::page: return std::string(id) + "(public page)";
        default: return std::string(id);
    }
}

/// Highest in-degree first; ties by id.
inline std::vector<RankedAccount> top_k_in_degree(const DirectedGraph& g, std::span<const NodeIndex> subset,
                                                  std::size_t k) {
    if (k == 0) throw ConfigError("k must be >= 1");
    std::vector<NodeIndex> order(subset.begin(), subset.end());
    std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
        if (g.in_degree(a) != g.in_degree(b)) return g.in_degree(a) > g.in_degree(b);
        return g.node(a).id < g.node(b).id;
    });
    if (order.size() > k) order.resize(k);
    std::vector<RankedAccount> out;
    for (auto i : order) out.push_back({g.node(i).id, g.in_degree(i), g.node(i).role});
    return out;
}

inline std::vector<RankedAccount> top_k_in_degree(const DirectedGraph& g, std::size_t k) {
    auto all = g.all_nodes();
    return top_k_in_degree(g, all, k);
}

/// The node in the most directed 3-cycles, ties by id; none for triangle-free graphs.
inline std::optional<std::string> hub_by_triangles(const DirectedGraph& g, const TriangleCounts& t) {
    if (t.total == 0) return std::nullopt;
    NodeIndex best = 0;
    for (NodeIndex i = 1; i < g.node_count(); ++i)
        if (t.per_node[i] > t.per_node[best]) best = i;  // indices follow id order
    return g.node(best).id;
}

inline std::optional<std::string> hub_by_triangles(const DirectedGraph& g) {
    return hub_by_triangles(g, triangle_count(g));
}

/// Members with strictly fewer than max_followers followers.
inline std::vector<NodeIndex> regular_filter(const DirectedGraph& g, std::span<const NodeIndex> subset,
                                             std::size_t max_followers = 1000) {
    std::vector<NodeIndex> out;
    for (auto i : subset)
        if (g.in_degree(i) < max_followers) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Input formats

/// "follower_id,followed_id" rows; a header row with those names is skipped.
inline std::vector<FollowEdge> read_edges_csv(std::istream& in) {
    std::vector<FollowEdge> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto t = trim(line);
        if (t.empty()) continue;
        auto parts = split(t, ',');
        if (parts.size() != 2)
            throw ParseError("edge list line " + std::to_string(number) + ": expected follower_id,followed_id");
        auto a = trim(parts[0]);
        auto b = trim(parts[1]);
        if (number == 1 && a == "follower_id" && b == "followed_id") continue;
        if (a.empty() || b.empty()) throw ParseError("edge list line " + std::to_string(number) + ": empty id");
        out.push_back({std::string(a), std::string(b)});
    }
    return out;
}

/// {"id": ..., "role": ..., "cohort": ...} per line.
inline std::vector<NodeInfo> read_node_metadata(std::istream& in) {
    std::vector<NodeInfo> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(), parse_role(j.value("role", std::string("unknown"))),
                           parse_cohort(j.value("cohort", std::string("unlabeled")))});
        } catch (const std::exception& e) {
            throw ParseError("node metadata line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace tagmine
