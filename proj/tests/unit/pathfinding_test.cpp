#include <doctest.h>

#include <random>

#include "brute_force.hpp"
#include "hubsim/nav_graph.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("path to self has one node and zero length") {
    NavGraph g;
    g.add_node(0, {0, 0});
    const auto p = shortest_path(g, 0, 0);
    REQUIRE(p);
    CHECK(p->nodes == std::vector<NodeId>{0});
    CHECK(p->length() == 0.0);
}

TEST_CASE("unit square opposite corners go through the smaller intermediate id") {
    NavGraph g;
    g.add_node(0, {0, 0});
    g.add_node(0, {1, 0});
    g.add_node(0, {1, 1});
    g.add_node(0, {0, 1});
    g.add_undirected_edge(0, 1, 1.0);
    g.add_undirected_edge(1, 2, 1.0);
    g.add_undirected_edge(2, 3, 1.0);
    g.add_undirected_edge(3, 0, 1.0);
    const auto p = shortest_path(g, 0, 2);
    REQUIRE(p);
    CHECK(p->length() == 2.0);
    CHECK(p->nodes == std::vector<NodeId>{0, 1, 2});
    CHECK(p->nodes == brute_force_path(g, 0, 2, {}).nodes);
}

TEST_CASE("excluded connectors are impassable") {
    NavGraph g;
    g.add_node(0, {0, 0});
    g.add_node(-1, {0, 0});
    g.add_undirected_edge(0, 1, 10.0, "E");
    CHECK_FALSE(shortest_path(g, 0, 1, {"E"}).has_value());
    const auto p = shortest_path(g, 0, 1);
    REQUIRE(p);
    CHECK(p->length() == 10.0);
}

TEST_CASE("zero-length edges are rejected") {
    NavGraph g;
    g.add_node(0, {0, 0});
    g.add_node(0, {1, 0});
    CHECK_THROWS_AS(g.add_edge(0, 1, 0.0), NavGraphError);
}

TEST_CASE("shortest path equals brute-force enumeration on 200 random graphs") {
    std::mt19937_64 gen(20240501);
    for (int trial = 0; trial < 200; ++trial) {
        const NavGraph g = random_graph(gen);
        const std::set<std::string> exclude = trial % 2 == 0 ? std::set<std::string>{} : std::set<std::string>{"C"};
        REQUIRE(compare_with_brute_force(g, exclude) == 0);
    }
}
