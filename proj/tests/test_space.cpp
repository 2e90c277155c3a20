#include <catch2/catch_amalgamated.hpp>

#include <bvcert/json_io.hpp>
#include <bvcert/space.hpp>

#include "oracle.hpp"

#include <algorithm>
#include <vector>

using namespace bvcert;

TEST_CASE("two-point space basics") {
    metric_measure_space s = testkit::make_s2_graph();
    REQUIRE(s.n == 2);
    REQUIRE(s.d(0, 1) == 1.0);
    REQUIRE(s.d(1, 0) == 1.0);
    REQUIRE(s.diameter == 1.0);
    REQUIRE(s.total_mass == 2.0);
    REQUIRE(s.graph_backed);
    REQUIRE(s.labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("open balls use strict inequality") {
    metric_measure_space s = testkit::make_s2_graph();
    REQUIRE(resolve_ball(s, 0, 1.0).members == std::vector<int>{0});
    REQUIRE(resolve_ball(s, 0, 1.5).members == std::vector<int>{0, 1});
    REQUIRE_THROWS_AS(resolve_ball(s, 0, 0.0), input_error);
    REQUIRE_THROWS_AS(resolve_ball(s, 0, -1.0), input_error);
    REQUIRE_THROWS_AS(resolve_ball(s, 2, 1.0), input_error);
}

TEST_CASE("balls match a direct filter on a random space") {
    metric_measure_space s = testkit::random_lattice_space(11, 10);
    testkit::rng64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        int x = rng.below(s.n);
        double r = (1 + rng.below(128)) / 64.0;
        std::vector<int> expect;
        for (int y = 0; y < s.n; ++y)
            if (s.d(x, y) < r) expect.push_back(y);
        REQUIRE(resolve_ball(s, x, r).members == expect);
    }
}

TEST_CASE("balls grow with the radius") {
    metric_measure_space s = testkit::random_lattice_space(13, 20);
    testkit::rng64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        int x = rng.below(s.n);
        double r1 = (1 + rng.below(128)) / 64.0;
        double r2 = r1 + (1 + rng.below(64)) / 64.0;
        ball small = resolve_ball(s, x, r1);
        ball large = resolve_ball(s, x, r2);
        REQUIRE(std::includes(large.members.begin(), large.members.end(), small.members.begin(),
                              small.members.end()));
    }
}

TEST_CASE("candidate radii list the reachable thresholds") {
    metric_measure_space s = testkit::make_s2_graph();
    REQUIRE(candidate_radii(s, 0, 1.0) == std::vector<double>{0.0});
    REQUIRE(candidate_radii(s, 0, 2.0) == std::vector<double>{0.0, 1.0});
    REQUIRE_THROWS_AS(candidate_radii(s, 0, 0.0), input_error);
    REQUIRE_THROWS_AS(candidate_radii(s, -1, 1.0), input_error);
}

TEST_CASE("realizable families are complete and exact") {
    metric_measure_space s = testkit::random_lattice_space(21, 14);
    for (int x = 0; x < s.n; ++x) {
        std::vector<double> t = distance_breakpoints(s, x);
        REQUIRE(std::is_sorted(t.begin(), t.end()));
        REQUIRE(t.front() == 0.0);

        // one ball per threshold, realizing the closed set {d <= t}
        std::vector<ball> family = realizable_balls(s, x);
        REQUIRE(family.size() == t.size());
        for (size_t j = 0; j < t.size(); ++j) {
            std::vector<int> expect;
            for (int y = 0; y < s.n; ++y)
                if (s.d(x, y) <= t[j]) expect.push_back(y);
            REQUIRE(family[j].members == expect);
        }
        for (size_t j = 0; j + 1 < family.size(); ++j)
            REQUIRE(family[j].members.size() < family[j + 1].members.size());

        // a dense radius sweep produces no set outside the family
        for (int k = 1; k <= 2000; ++k) {
            ball b = resolve_ball(s, x, (s.diameter + 1.0) * k / 2000.0);
            bool known = false;
            for (const auto& f : family) known = known || f.members == b.members;
            REQUIRE(known);
        }
    }
}

TEST_CASE("canonical radii sit inside the realizing intervals") {
    metric_measure_space s = testkit::make_s2_graph();
    std::vector<ball> family = realizable_balls(s, 0);
    REQUIRE(family.size() == 2);
    REQUIRE(family[0].radius == 0.5);
    REQUIRE(family[1].radius == 1.5);
}

TEST_CASE("graph metric is the shortest-path length") {
    metric_measure_space path =
        make_graph_space("p3", 3, {{0, 1, 1.0}, {1, 2, 1.0}}, {1.0, 1.0, 1.0}, {"a", "b", "c"});
    REQUIRE(path.d(0, 2) == 2.0);

    // the direct edge is longer than the detour
    metric_measure_space tri = make_graph_space(
        "t3", 3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 3.0}}, {1.0, 1.0, 1.0});
    REQUIRE(tri.d(0, 2) == 2.0);
    REQUIRE(tri.diameter == 2.0);

    REQUIRE_THROWS_WITH(make_graph_space("bad", 3, {{0, 1, 1.0}}, {1.0, 1.0, 1.0}),
                        Catch::Matchers::ContainsSubstring("not connected"));
    REQUIRE_THROWS_AS(make_graph_space("loop", 2, {{0, 0, 1.0}}, {1.0, 1.0}), input_error);
    REQUIRE_THROWS_AS(make_graph_space("neg", 2, {{0, 1, -1.0}}, {1.0, 1.0}), input_error);
}

TEST_CASE("matrix validation rejects malformed input") {
    REQUIRE_THROWS_AS(make_matrix_space("asym", 2, {0.0, 1.0, 2.0, 0.0}, {1.0, 1.0}), input_error);
    REQUIRE_THROWS_AS(
        make_matrix_space("tri", 3, {0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0}, {1.0, 1.0, 1.0}),
        input_error);
    REQUIRE_THROWS_AS(make_matrix_space("difflen", 2, {0.0, 1.0, 1.0, 0.0}, {1.0}), input_error);
    REQUIRE_THROWS_AS(make_matrix_space("zmass", 2, {0.0, 1.0, 1.0, 0.0}, {1.0, 0.0}), input_error);
    REQUIRE_THROWS_AS(make_matrix_space("diag", 2, {0.5, 1.0, 1.0, 0.0}, {1.0, 1.0}), input_error);
    REQUIRE_THROWS_AS(make_matrix_space("dup", 2, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0}), input_error);
    // an edge may not undercut the ambient distance it joins
    REQUIRE_THROWS_AS(
        make_matrix_space("short", 2, {0.0, 1.0, 1.0, 0.0}, {1.0, 1.0}, {{0, 1, 0.5}}),
        input_error);
}

TEST_CASE("grid spaces carry the 4-neighbor length metric") {
    metric_measure_space g = make_grid_space("g22", 2, 2, 0.5, 0.5, {1.0, 1.0, 1.0, 1.0});
    REQUIRE(g.n == 4);
    REQUIRE(g.graph_backed);
    REQUIRE(g.grid.has_value());
    REQUIRE(g.d(0, 1) == 0.5);
    REQUIRE(g.d(0, 3) == 1.0); // across the diagonal, two hops
    REQUIRE(g.diameter == 1.0);
}

TEST_CASE("single-point spaces are legal") {
    metric_measure_space s = make_matrix_space("p1", 1, {0.0}, {2.0});
    REQUIRE(s.diameter == 0.0);
    REQUIRE(candidate_radii(s, 0, 5.0) == std::vector<double>{0.0});
    std::vector<ball> family = realizable_balls(s, 0);
    REQUIRE(family.size() == 1);
    REQUIRE(family[0].members == std::vector<int>{0});
}

TEST_CASE("set sums follow index order") {
    metric_measure_space s = testkit::make_s2_graph();
    REQUIRE(set_mass(s, {0, 1}) == 2.0);
    point_measure nu{{3.0, 0.0}};
    REQUIRE(set_measure(nu, {0, 1}) == 3.0);
    REQUIRE(set_measure(nu, {1}) == 0.0);
}

TEST_CASE("documents load and round-trip") {
    space_document doc = load_space_document_file(testkit::data_file("s2.json"));
    REQUIRE(doc.space.n == 2);
    REQUIRE(doc.space.d(0, 1) == 1.0);
    REQUIRE(doc.functions.count("u") == 1);
    REQUIRE(doc.functions.count("flat") == 1);
    REQUIRE(doc.measures.count("nu") == 1);
    REQUIRE(doc.measures.count("spike") == 1);
    REQUIRE(doc.measures.at("spike").masses == std::vector<double>{3.0, 0.0});

    space_document again = load_space_document(document_to_json(doc));
    REQUIRE(again.space.dist == doc.space.dist);
    REQUIRE(again.space.mass == doc.space.mass);
    REQUIRE(again.space.labels == doc.space.labels);
    REQUIRE(again.functions.at("u").values == doc.functions.at("u").values);
    REQUIRE(again.measures.at("nu").masses == doc.measures.at("nu").masses);
}

TEST_CASE("document validation points at the offending field") {
    json bad = json::object();
    bad["name"] = "x";
    REQUIRE_THROWS_WITH(load_space_document(bad), Catch::Matchers::ContainsSubstring("metric"));
    bad["metric"] = {{"type", "matrix"}, {"d", json::array({json::array({0.0, 1.0}),
                                                            json::array({1.0, 0.0})})}};
    REQUIRE_THROWS_WITH(load_space_document(bad), Catch::Matchers::ContainsSubstring("mu"));
    bad["mu"] = json::array({1.0, 1.0});
    REQUIRE_NOTHROW(load_space_document(bad));
    bad["functions"] = {{"u", json::array({1.0})}}; // wrong length
    REQUIRE_THROWS_AS(load_space_document(bad), input_error);
}

TEST_CASE("identical documents produce identical spaces") {
    json j = parse_json_file(testkit::data_file("path11.json"));
    space_document a = load_space_document(j);
    space_document b = load_space_document(j);
    REQUIRE(a.space.dist == b.space.dist);
    REQUIRE(a.space.mass == b.space.mass);
    REQUIRE(a.space.diameter == b.space.diameter);
}
