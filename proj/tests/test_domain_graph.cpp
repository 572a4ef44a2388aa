#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "npc/domain_graph.hpp"
#include "support.hpp"

using namespace npc;

TEST_CASE("path graph distances and mesh scale") {
  const DomainGraph g = build_path(3, 1.0);
  CHECK(g.vertex_count() == 3);
  CHECK(graph_distance(g, 0, 2) == doctest::Approx(2.0));
  CHECK(graph_distance(build_path(2, 0.5), 0, 1) == doctest::Approx(0.5));
  CHECK(build_path(5, 1.0).mesh_scale() == 1.0);
  CHECK(g.measure(1) == 1.0);
  CHECK(g.curvature_k() == 0.0);
  CHECK_THROWS_AS(build_path(1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_path(4, 0.0), InvalidArgument);
}

TEST_CASE("path conductance gives the second difference") {
  const DomainGraph g = build_path(4, 0.25);
  for (const Edge& e : g.edges()) CHECK(e.conductance == doctest::Approx(4.0));
  CHECK(g.measure(2) == 0.25);
}

TEST_CASE("torus grid matches Floyd-Warshall") {
  const DomainGraph g = build_torus_grid(4, 4, 1.0);
  CHECK(g.vertex_count() == 16);
  const auto fw = testing::floyd_warshall(g);
  double diameter = 0.0;
  for (int x = 0; x < 16; ++x)
    for (int y = 0; y < 16; ++y) {
      CHECK(graph_distance(g, x, y) == doctest::Approx(fw[x][y]));
      diameter = std::max(diameter, fw[x][y]);
    }
  CHECK(diameter == 4.0);
  CHECK(graph_distance(g, torus_vertex(4, 0, 0), torus_vertex(4, 2, 2)) == 4.0);
  const DomainGraph small = build_torus_grid(3, 3, 1.0);
  for (int x = 0; x < 9; ++x) CHECK(small.degree(x) == 4);
  CHECK(build_torus_grid(8, 8, 0.5).mesh_scale() == 0.5);
  CHECK_THROWS_AS(build_torus_grid(2, 5, 1.0), InvalidArgument);
}

TEST_CASE("hyperbolic disk audit") {
  const DomainGraph g = build_hyperbolic_disk(1.0, 0.2);
  CHECK(g.curvature_k() == -1.0);
  for (const Edge& e : g.edges()) {
    CHECK(e.length >= 0.1);
    CHECK(e.length <= 0.4);
    CHECK(e.conductance > 0.0);
  }
  const double area = 2.0 * std::numbers::pi * (std::cosh(1.0) - 1.0);
  CHECK(std::abs(g.total_measure() - area) <= 0.1 * area);
  const DomainGraph tiny = build_hyperbolic_disk(0.3, 0.2);
  CHECK(tiny.measure(0) > 0.0);
  CHECK_THROWS_AS(build_hyperbolic_disk(0.2, 0.3), InvalidArgument);
  CHECK_THROWS_AS(build_hyperbolic_disk(40.0, 0.01), InvalidArgument);
}

TEST_CASE("hyperbolic disk distances are metric") {
  const DomainGraph g = build_hyperbolic_disk(0.8, 0.2);
  const auto fw = testing::floyd_warshall(g);
  const int n = g.vertex_count();
  for (int x = 0; x < n; x += 3)
    for (int y = 0; y < n; y += 5) CHECK(g.distance(x, y) == doctest::Approx(fw[x][y]).epsilon(1e-12));
}

TEST_CASE("metric properties on random samples") {
  const DomainGraph g = build_torus_grid(7, 5, 0.3);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
  for (int k = 0; k < 500; ++k) {
    const int x = pick(rng), y = pick(rng), z = pick(rng);
    CHECK(g.distance(x, x) == 0.0);
    CHECK(g.distance(x, y) == g.distance(y, x));
    CHECK(g.distance(x, z) <= g.distance(x, y) + g.distance(y, z) + 1e-12);
  }
}

TEST_CASE("balls and boundary split") {
  const DomainGraph g = build_path(5, 1.0);
  const VertexSubset b = ball(g, 2, 1.5);
  CHECK(b.members() == std::vector<Vertex>{1, 2, 3});
  CHECK(b.boundary() == std::vector<Vertex>{1, 3});
  CHECK(b.interior() == std::vector<Vertex>{2});
  CHECK(ball(g, 2, 0.0).empty());
  const DomainGraph t = build_torus_grid(8, 8, 1.0);
  const VertexSubset all = ball(t, 0, 10.0);
  CHECK(all.size() == 64);
  CHECK(all.boundary().empty());
  CHECK(b.subset_of(VertexSubset::all(g)));
}

TEST_CASE("boundary is exactly the members with an outside neighbor") {
  const DomainGraph g = build_torus_grid(9, 9, 1.0);
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<bool> mask(g.vertex_count());
    for (int x = 0; x < g.vertex_count(); ++x) mask[x] = coin(rng);
    const VertexSubset s(g, mask);
    for (int x = 0; x < g.vertex_count(); ++x) {
      bool outside = false;
      for (const Neighbor& nb : g.neighbors(x)) outside = outside || !mask[nb.v];
      CHECK(s.is_boundary(x) == (mask[x] && outside));
      CHECK(s.is_interior(x) == (mask[x] && !outside));
    }
  }
}

TEST_CASE("invalid graphs are rejected") {
  CHECK_THROWS_AS(DomainGraph({1.0, 1.0}, {{0, 0, 1.0, 1.0}}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DomainGraph({1.0, 1.0}, {{0, 1, -1.0, 1.0}}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DomainGraph({1.0, 1.0}, {{0, 1, 1.0, 0.0}}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DomainGraph({1.0, 0.0}, {{0, 1, 1.0, 1.0}}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DomainGraph({1.0, 1.0, 1.0}, {{0, 1, 1.0, 1.0}}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DomainGraph({1.0, 1.0}, {{0, 1, 1.0, 1.0}, {1, 0, 1.0, 1.0}}, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("graph JSON round trip") {
  const DomainGraph g = build_hyperbolic_disk(0.6, 0.2);
  const nlohmann::json j = to_json(g);
  const DomainGraph back = graph_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back == g);
  CHECK(back.mesh_scale() == g.mesh_scale());
  nlohmann::json bad = j;
  bad["scale"] = 123.0;
  CHECK_THROWS_AS(graph_from_json(bad), InvalidArgument);
  nlohmann::json missing = j;
  missing.erase("edges");
  CHECK_THROWS(graph_from_json(missing));
}
