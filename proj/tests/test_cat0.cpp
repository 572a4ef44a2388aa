#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "npc/cat0.hpp"

using namespace npc;

namespace {

std::vector<TargetSpacePtr> all_spaces() {
  return {make_euclidean(3), make_tripod(), make_random_tree(5, 42), make_hyperbolic(),
          make_product(make_euclidean(1), make_tripod())};
}

double objective(const TargetSpace& s, const std::vector<TargetPoint>& pts, const std::vector<double>& w,
                 const TargetPoint& z) {
  double v = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) v += w[i] * std::pow(s.distance(z, pts[i]), 2);
  return v;
}

// Tree distance by splitting the edges at both points and running Floyd-Warshall
// on the refined tree.
double tree_distance_oracle(const MetricTree& t, const TargetPoint& p, const TargetPoint& q) {
  const int n = t.vertex_count();
  const int P = n, Q = n + 1;
  std::vector<std::vector<double>> d(n + 2, std::vector<double>(n + 2, std::numeric_limits<double>::infinity()));
  auto link = [&](int a, int b, double len) {
    d[a][b] = std::min(d[a][b], len);
    d[b][a] = std::min(d[b][a], len);
  };
  const int ep = static_cast<int>(p[0]), eq = static_cast<int>(q[0]);
  for (int e = 0; e < static_cast<int>(t.edges().size()); ++e) {
    const TreeEdge& te = t.edges()[e];
    std::vector<std::pair<double, int>> cuts{{0.0, te.a}, {te.length, te.b}};
    if (e == ep) cuts.push_back({p[1], P});
    if (e == eq) cuts.push_back({q[1], Q});
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) link(cuts[k].second, cuts[k + 1].second, cuts[k + 1].first - cuts[k].first);
  }
  for (int i = 0; i < n + 2; ++i) d[i][i] = 0.0;
  for (int k = 0; k < n + 2; ++k)
    for (int i = 0; i < n + 2; ++i)
      for (int j = 0; j < n + 2; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d[P][Q];
}

}  // namespace

TEST_CASE("distance examples") {
  const auto h = make_hyperbolic();
  const TargetPoint o{1.0, 0.0, 0.0};
  const TargetPoint q{std::cosh(1.0), std::sinh(1.0), 0.0};
  CHECK(distance(*h, o, q) == doctest::Approx(1.0).epsilon(1e-14));
  const auto tri = make_tripod();
  const auto& tree = static_cast<const MetricTree&>(*tri);
  CHECK(distance(*tri, tree.vertex_point(1), tree.vertex_point(2)) == doctest::Approx(2.0));
  std::mt19937_64 rng(1);
  for (const auto& s : all_spaces()) {
    const TargetPoint p = sample_point(*s, rng);
    CHECK(distance(*s, p, p) == 0.0);
  }
}

TEST_CASE("hyperbolic distance agrees with arccosh of the Minkowski product") {
  const HyperbolicPlane h;
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const TargetPoint p = sample_point(h, rng, 2.0);
    const TargetPoint q = sample_point(h, rng, 2.0);
    const double c = p[0] * q[0] - p[1] * q[1] - p[2] * q[2];
    const double d = std::acosh(std::max(1.0, c));
    if (d > 1e-3) CHECK(h.distance(p, q) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("tree distance matches the refined-tree oracle") {
  for (const auto& s : {make_tripod(), make_random_tree(5, 42), make_random_tree(9, 7)}) {
    const auto& t = static_cast<const MetricTree&>(*s);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 300; ++k) {
      const TargetPoint p = sample_point(t, rng);
      const TargetPoint q = sample_point(t, rng);
      CHECK(t.distance(p, q) == doctest::Approx(tree_distance_oracle(t, p, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("geodesic examples") {
  const auto e = make_euclidean(2);
  const TargetPoint g = geodesic_point(*e, TargetPoint{0.0, 0.0}, TargetPoint{2.0, 0.0}, 0.25);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.0));
  const auto tri = make_tripod();
  const auto& tree = static_cast<const MetricTree&>(*tri);
  CHECK(geodesic_point(*tri, tree.vertex_point(1), tree.vertex_point(2), 0.5) == tree.vertex_point(0));
  const auto h = make_hyperbolic();
  const TargetPoint o = HyperbolicPlane::origin();
  const TargetPoint q = HyperbolicPlane::from_polar(1.0, 0.7);
  const TargetPoint m = geodesic_point(*h, o, q, 0.5);
  CHECK(h->distance(o, m) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h->distance(q, m) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(geodesic_point(*h, o, q, 1.5), InvalidArgument);
  CHECK_THROWS_AS(geodesic_point(*h, o, q, -0.1), InvalidArgument);
  CHECK(geodesic_point(*h, q, q, 0.3) == q);
}

TEST_CASE("geodesics have constant speed") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& s : all_spaces()) {
    for (int k = 0; k < 1000; ++k) {
      const TargetPoint p = sample_point(*s, rng);
      const TargetPoint q = sample_point(*s, rng);
      const double t = unit(rng), u = unit(rng);
      const double d = s->distance(p, q);
      const TargetPoint gt = s->geodesic(p, q, t);
      const TargetPoint gu = s->geodesic(p, q, u);
      s->validate(gt);
      CHECK(std::abs(s->distance(gt, gu) - std::abs(t - u) * d) <= 1e-9);
    }
    const TargetPoint p = sample_point(*s, rng);
    const TargetPoint q = sample_point(*s, rng);
    CHECK(s->distance(s->geodesic(p, q, 0.0), p) <= 1e-12);
    CHECK(s->distance(s->geodesic(p, q, 1.0), q) <= 1e-12);
  }
}

TEST_CASE("comparison inequality examples") {
  const auto e = make_euclidean(2);
  const CheckReport r = check_cat0_comparison(*e, TargetPoint{0.0, 1.0}, TargetPoint{-1.0, 0.0}, TargetPoint{1.0, 0.0}, 0.5);
  CHECK(r.pass);
  CHECK(std::abs(r.measured.at("slack")) <= 1e-12);
  const auto h = make_hyperbolic();
  const CheckReport big = check_cat0_comparison(*h, HyperbolicPlane::from_polar(3.0, 0.0),
                                                HyperbolicPlane::from_polar(3.0, 2.1), HyperbolicPlane::from_polar(3.0, 4.2), 0.5);
  CHECK(big.pass);
  CHECK(big.measured.at("slack") > 0.1);
}

TEST_CASE("comparison inequality on random samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& s : all_spaces()) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2000; ++k) {
      const auto r = check_cat0_comparison(*s, sample_point(*s, rng), sample_point(*s, rng), sample_point(*s, rng), unit(rng));
      worst = std::min(worst, r.measured.at("slack"));
    }
    CHECK(worst >= -1e-9);
  }
}

TEST_CASE("tree comparison inequality over discretized positions") {
  // Exhaustive over a lattice of positions on the tripod.
  const auto s = make_tripod();
  const auto& t = static_cast<const MetricTree&>(*s);
  std::vector<TargetPoint> pts;
  for (int e = 0; e < 3; ++e)
    for (int k = 0; k <= 4; ++k) pts.push_back(t.point(e, k / 4.0));
  for (const auto& z : pts)
    for (const auto& p : pts)
      for (const auto& q : pts) CHECK(check_cat0_comparison(t, z, p, q, 0.5).pass);
}

TEST_CASE("quadrilateral inequality") {
  std::mt19937_64 rng(6);
  for (const auto& s : all_spaces()) {
    for (int k = 0; k < 2000; ++k) {
      const auto r = check_quadrilateral(*s, sample_point(*s, rng), sample_point(*s, rng), sample_point(*s, rng),
                                         sample_point(*s, rng));
      CHECK(r.measured.at("slack") >= -1e-9);
    }
    const TargetPoint p = sample_point(*s, rng);
    const TargetPoint r = sample_point(*s, rng);
    CHECK(check_quadrilateral(*s, p, p, r, r).pass);
  }
}

TEST_CASE("quadrilateral inequality is an identity in the line when p, q, r, s are collinear") {
  // In R with q = 0, r = 2, p = s = 1: both sides equal -4.
  const auto e = make_euclidean(1);
  const auto rep = check_quadrilateral(*e, TargetPoint{1.0}, TargetPoint{0.0}, TargetPoint{2.0}, TargetPoint{1.0});
  CHECK(rep.pass);
  CHECK(std::abs(rep.measured.at("slack")) <= 1e-12);
}

TEST_CASE("distance convexity") {
  std::mt19937_64 rng(7);
  for (const auto& s : all_spaces())
    for (int k = 0; k < 200; ++k)
      CHECK(check_distance_convexity(*s, sample_point(*s, rng), sample_point(*s, rng), sample_point(*s, rng), 16).pass);
  const auto e = make_euclidean(1);
  const auto r = check_distance_convexity(*e, TargetPoint{0.5}, TargetPoint{0.0}, TargetPoint{2.0}, 8);
  CHECK(r.pass);
  CHECK(std::abs(r.measured.at("convexity_slack")) <= 1e-12);
  CHECK(check_distance_convexity(*e, TargetPoint{3.0}, TargetPoint{1.0}, TargetPoint{1.0}, 8).pass);
}

TEST_CASE("barycenter examples") {
  const auto e = make_euclidean(2);
  const std::vector<TargetPoint> two{TargetPoint{0.0, 0.0}, TargetPoint{2.0, 0.0}};
  const std::vector<double> w{1.0, 1.0};
  CHECK(weighted_barycenter(*e, two, w) == TargetPoint{1.0, 0.0});
  const auto h = make_hyperbolic();
  const std::vector<TargetPoint> one{HyperbolicPlane::from_polar(1.3, 2.0)};
  CHECK(weighted_barycenter(*h, one, std::vector<double>{2.0}) == one[0]);
  const auto tri = make_tripod();
  const auto& t = static_cast<const MetricTree&>(*tri);
  const std::vector<TargetPoint> tips{t.vertex_point(1), t.vertex_point(2), t.vertex_point(3)};
  CHECK(weighted_barycenter(*tri, tips, std::vector<double>{1, 1, 1}) == t.vertex_point(0));
  CHECK_THROWS_AS(weighted_barycenter(*e, std::vector<TargetPoint>{}, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(weighted_barycenter(*e, two, std::vector<double>{1.0, 0.0}), InvalidArgument);
}

TEST_CASE("tree barycenter matches exhaustive search") {
  for (const auto& s : {make_tripod(), make_random_tree(5, 42)}) {
    const auto& t = static_cast<const MetricTree&>(*s);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> wd(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<TargetPoint> pts;
      std::vector<double> w;
      for (int k = 0; k < 4; ++k) {
        pts.push_back(sample_point(t, rng));
        w.push_back(wd(rng));
      }
      const TargetPoint b = t.barycenter(pts, w, nullptr);
      const double fb = objective(t, pts, w, b);
      double best = std::numeric_limits<double>::infinity();
      for (int e = 0; e < static_cast<int>(t.edges().size()); ++e)
        for (int k = 0; k <= 2000; ++k) best = std::min(best, objective(t, pts, w, t.point(e, t.edges()[e].length * k / 2000.0)));
      CHECK(fb <= best + 1e-12);
      CHECK(fb >= best - 1e-5);
    }
  }
}

TEST_CASE("barycenter optimality on every space") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> wd(0.1, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& s : all_spaces()) {
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<TargetPoint> pts;
      std::vector<double> w;
      for (int k = 0; k < 5; ++k) {
        pts.push_back(sample_point(*s, rng));
        w.push_back(wd(rng));
      }
      const TargetPoint b = weighted_barycenter(*s, pts, w);
      const double fb = objective(*s, pts, w, b);
      double wsum = 0.0;
      for (double x : w) wsum += x;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(fb <= objective(*s, pts, w, pts[i]) + 1e-12);
        // Moving a little toward any input point does not help.
        const TargetPoint step = s->geodesic(b, pts[i], std::min(1.0, 1e-3 / std::max(1e-300, s->distance(b, pts[i]))));
        CHECK(objective(*s, pts, w, step) >= fb - 1e-10);
      }
      // Jensen for the convex function d(., p).
      const TargetPoint p = sample_point(*s, rng);
      double avg = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) avg += w[i] * s->distance(pts[i], p) / wsum;
      CHECK(s->distance(b, p) <= avg + 1e-8);
    }
  }
}

TEST_CASE("validation rejects foreign points") {
  const auto h = make_hyperbolic();
  CHECK_THROWS_AS(h->validate(TargetPoint{2.0, 0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(distance(*h, TargetPoint{1.0, 0.0}, HyperbolicPlane::origin()), InvalidArgument);
  const auto tri = make_tripod();
  CHECK_THROWS_AS(tri->validate(TargetPoint{3.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(tri->validate(TargetPoint{0.0, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(tri->validate(TargetPoint{0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(make_tree(3, {{0, 1, 1.0}, {1, 0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(make_tree(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(make_tree(3, {{0, 1, 1.0}, {1, 2, 0.0}}), InvalidArgument);
}

TEST_CASE("target space JSON round trip") {
  std::mt19937_64 rng(10);
  for (const auto& s : all_spaces()) {
    const nlohmann::json j = s->to_json();
    const TargetSpacePtr back = space_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back->to_json() == j);
    for (int k = 0; k < 20; ++k) {
      const TargetPoint p = sample_point(*s, rng);
      const TargetPoint q = back->point_from_json(nlohmann::json::parse(s->point_to_json(p).dump()));
      CHECK(s->distance(p, q) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(space_from_json(nlohmann::json{{"kind", "sphere"}}), InvalidArgument);
}
