#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "tagmine/network.hpp"

using namespace tagmine;

namespace {

std::vector<FollowEdge> edges(std::initializer_list<std::pair<const char*, const char*>> list) {
    std::vector<FollowEdge> out;
    for (auto [a, b] : list) out.push_back({a, b});
    return out;
}

std::vector<FollowEdge> symmetric_clique(const std::string& prefix, int n) {
    std::vector<FollowEdge> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) out.push_back({prefix + std::to_string(i), prefix + std::to_string(j)});
    return out;
}

// O(n^3) oracle over an adjacency matrix: ordered triples (a, b, c) with
// a->b->c->a, each cycle seen three times by rotation.
std::uint64_t cubic_cycles(const std::vector<std::vector<bool>>& adj) {
    const std::size_t n = adj.size();
    std::uint64_t seen = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                if (a != b && b != c && a != c && adj[a][b] && adj[b][c] && adj[c][a]) ++seen;
    return seen / 3;
}

}  // namespace

TEST(BuildGraph, DedupAndSelfLoops) {
    GraphBuildReport rep;
    auto g = build_graph(edges({{"a", "b"}, {"a", "b"}, {"b", "a"}, {"c", "c"}}), {}, &rep);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(rep.records, 4u);
    EXPECT_EQ(rep.duplicates_dropped, 1u);
    EXPECT_EQ(rep.self_loops_dropped, 1u);
    EXPECT_TRUE(g.has_edge(*g.index_of("a"), *g.index_of("b")));
}

TEST(BuildGraph, IsolatedMetadataNodes) {
    std::vector<NodeInfo> meta{{"x", Role::page, Cohort::unlabeled}, {"y"}, {"z"}};
    auto g = build_graph({}, meta);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(g.node(*g.index_of("x")).role, Role::page);
    EXPECT_FALSE(g.index_of("nope"));
}

TEST(GroupStats, RatiosRoundToTwoDecimals) {
    struct Row {
        double in, out;
        const char* shown;
    };
    for (auto r : {Row{539.88, 799.48, "0.68"}, Row{554.17, 476.10, "1.16"}, Row{467.33, 483.07, "0.97"},
                   Row{495.15, 502.94, "0.98"}, Row{529.36, 463.31, "1.14"}}) {
        auto s = GroupStats::from_averages(r.in, r.out);
        EXPECT_EQ(GroupStats::format_ratio(*s.in_out_ratio()), r.shown);
        EXPECT_EQ(s.to_json()["in_out_ratio_display"], r.shown);
    }
}

TEST(GroupStats, SubsetAveragesUseFullGraphDegrees) {
    auto g = build_graph(edges({{"a", "b"}}));
    std::vector<NodeIndex> only_a{*g.index_of("a")};
    auto s = group_stats(g, only_a);
    EXPECT_EQ(s.avg_in, 0.0);
    EXPECT_EQ(s.avg_out, 1.0);
    EXPECT_EQ(*s.in_out_ratio(), 0.0);
    std::vector<NodeIndex> only_b{*g.index_of("b")};
    EXPECT_FALSE(group_stats(g, only_b).in_out_ratio());
    EXPECT_TRUE(group_stats(g, only_b).to_json()["in_out_ratio"].is_null());
    EXPECT_THROW(group_stats(g, {}), ConfigError);
}

// Property: over the whole graph, average in-degree equals average out-degree.
TEST(GroupStats, WholeGraphAveragesAgree) {
    std::mt19937_64 gen(4);
    for (int round = 0; round < 20; ++round) {
        std::vector<FollowEdge> e;
        for (int i = 0; i < 200; ++i) e.push_back({"n" + std::to_string(gen() % 40), "n" + std::to_string(gen() % 40)});
        auto g = build_graph(e);
        auto s = group_stats(g, g.all_nodes());
        EXPECT_DOUBLE_EQ(s.avg_in, s.avg_out);
        EXPECT_DOUBLE_EQ(s.avg_in, static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count()));
    }
}

TEST(Triangles, CanonicalCases) {
    EXPECT_EQ(triangle_count(build_graph(edges({{"a", "b"}, {"b", "c"}, {"c", "a"}}))).total, 1u);
    EXPECT_EQ(triangle_count(build_graph(symmetric_clique("k", 3))).total, 2u);
    // Transitive triple is not a cycle.
    EXPECT_EQ(triangle_count(build_graph(edges({{"a", "b"}, {"b", "c"}, {"a", "c"}}))).total, 0u);
    EXPECT_EQ(mutual_triangle_count(build_graph(symmetric_clique("k", 3))), 1u);
    EXPECT_EQ(mutual_triangle_count(build_graph(symmetric_clique("k", 4))), 4u);
}

TEST(Triangles, MatchCubicOracleOnRandomDigraphs) {
    std::mt19937_64 gen(2016);
    std::size_t mismatches = 0;
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 3 + gen() % 48;
        std::bernoulli_distribution coin(0.1);
        std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
        std::vector<FollowEdge> e;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && coin(gen)) {
                    adj[a][b] = true;
                    e.push_back({"v" + std::to_string(a), "v" + std::to_string(b)});
                }
        auto g = build_graph(e);
        auto t = triangle_count(g);
        mismatches += t.total != cubic_cycles(adj);
        // Every cycle has three nodes.
        std::uint64_t sum = 0;
        for (auto c : t.per_node) sum += c;
        mismatches += sum != 3 * t.total;
    }
    EXPECT_EQ(mismatches, 0u);
}

TEST(TopK, StarCenterFirst) {
    auto g = build_graph(edges({{"s1", "c"}, {"s2", "c"}, {"s3", "c"}, {"s4", "c"}, {"s5", "c"}, {"c", "s1"}}));
    auto top = top_k_in_degree(g, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].id, "c");
    EXPECT_EQ(top[0].in_degree, 5u);
    EXPECT_EQ(top[1].id, "s1");
    EXPECT_EQ(top[2].id, "s2");  // ties by id
    EXPECT_THROW(top_k_in_degree(g, 0), ConfigError);
    EXPECT_EQ(top_k_in_degree(g, 100).size(), g.node_count());
}

TEST(TopK, PlantedHub) {
    std::vector<FollowEdge> e;
    for (int i = 0; i < 100; ++i) e.push_back({"f" + std::to_string(i), "hub"});
    for (int i = 0; i < 10; ++i) e.push_back({"hub", "f" + std::to_string(i)});
    std::vector<NodeInfo> meta{{"hub", Role::dealer, Cohort::drug}};
    auto g = build_graph(e, meta);
    auto top = top_k_in_degree(g, 1);
    EXPECT_EQ(top[0].id, "hub");
    EXPECT_EQ(render_account(top[0].id, top[0].role), "hub(dealer)");
    EXPECT_EQ(render_account("p", Role::page), "p(public page)");
    EXPECT_EQ(render_account("q", Role::unknown), "q");
}

TEST(Hub, TiesAndCliques) {
    EXPECT_EQ(hub_by_triangles(build_graph(edges({{"b", "c"}, {"c", "a"}, {"a", "b"}}))), "a");
    auto e = symmetric_clique("big", 4);
    auto small = symmetric_clique("sm", 3);
    e.insert(e.end(), small.begin(), small.end());
    auto hub = hub_by_triangles(build_graph(e));
    ASSERT_TRUE(hub);
    EXPECT_EQ(hub->substr(0, 3), "big");
    EXPECT_FALSE(hub_by_triangles(build_graph(edges({{"a", "b"}}))));
}

TEST(RegularFilter, StrictlyBelowThreshold) {
    std::vector<FollowEdge> e;
    for (int i = 0; i < 1000; ++i) {
        e.push_back({"f" + std::to_string(i), "big"});
        if (i < 999) e.push_back({"f" + std::to_string(i), "edge"});
    }
    auto g = build_graph(e);
    std::vector<NodeIndex> subset{*g.index_of("big"), *g.index_of("edge"), *g.index_of("f0")};
    auto kept = regular_filter(g, subset, 1000);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(g.node(kept[0]).id, "edge");
    EXPECT_TRUE(regular_filter(g, {}, 1000).empty());
}

TEST(Readers, EdgesAndMetadata) {
    std::istringstream csv("follower_id,followed_id\na,b\n\n b , c \n");
    auto e = read_edges_csv(csv);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_EQ(e[1].follower, "b");
    EXPECT_EQ(e[1].followed, "c");
    std::istringstream bad("a,b,c\n");
    EXPECT_THROW(read_edges_csv(bad), ParseError);

    std::istringstream meta(R"({"id":"d1","role":"dealer","cohort":"drug"})" "\n" R"({"id":"x"})" "\n");
    auto m = read_node_metadata(meta);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m[0].role, Role::dealer);
    EXPECT_EQ(m[1].cohort, Cohort::unlabeled);
    std::istringstream badmeta(R"({"id":"x","role":"boss"})" "\n");
    EXPECT_THROW(read_node_metadata(badmeta), ParseError);
}
