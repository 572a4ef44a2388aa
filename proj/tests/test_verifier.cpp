#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "npc/verifier.hpp"
#include "support.hpp"

using namespace npc;

namespace {

std::shared_ptr<const DomainGraph> shared(DomainGraph g) { return std::make_shared<const DomainGraph>(std::move(g)); }

// u(x) = a (x - center) on a path, as a map into the real line.
MapField centered_line(const DomainGraph& g, double a, double center) {
  ScalarField f(g.vertex_count());
  for (Vertex x = 0; x < g.vertex_count(); ++x) f[x] = a * (g.positions()[x][0] - center);
  return scalar_map(f);
}

// Path vertices [lo, hi] as a region.
VertexSubset path_range(const DomainGraph& g, int lo, int hi) {
  std::vector<bool> mask(g.vertex_count(), false);
  for (int i = lo; i <= hi; ++i) mask[i] = true;
  return VertexSubset(g, std::move(mask));
}

SolveResult solved_box(std::shared_ptr<const DomainGraph> g, int nx, int lo, int hi, TargetSpacePtr space,
                       std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  VertexSubset U = torus_box(*g, nx, lo, hi, lo, hi);
  std::vector<std::optional<TargetPoint>> bnd(g->vertex_count());
  for (Vertex x : U.boundary()) bnd[x] = sample_point(*space, rng, scale);
  SolverParams params;
  params.tolerance = 1e-11;
  return solve_dirichlet(DirichletProblem(std::move(g), std::move(U), std::move(space), std::move(bnd), params));
}

}  // namespace

TEST_CASE("FourierField is seeded and bounded") {
  const FourierField a(2, 4, 7), b(2, 4, 7), c(2, 4, 8);
  CHECK(a.components() == 2);
  CHECK(a(1, 0.3, -0.2) == b(1, 0.3, -0.2));
  CHECK(a(1, 0.3, -0.2) != c(1, 0.3, -0.2));
  const double bound = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4;
  for (double x = -2.0; x <= 2.0; x += 0.37) CHECK(std::abs(a(0, x, 0.5 * x)) <= bound);
  CHECK_THROWS_AS(FourierField(0, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(a(2, 0.0, 0.0), std::out_of_range);
}

TEST_CASE("energy scales follow the mesh") {
  const DomainGraph g = build_path(11, 0.2);
  const auto s = energy_scales(g, {});
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(0.9));
  CHECK(s[2] == doctest::Approx(0.5));
}

TEST_CASE("subharmonicity on solved maps") {
  auto g = shared(build_torus_grid(12, 12, 1.0));
  const VertexSubset U = torus_box(*g, 12, 1, 10, 1, 10);

  SUBCASE("scalar harmonic extension, p = 0") {
    std::mt19937_64 rng(3);
    std::vector<std::optional<TargetPoint>> bnd(g->vertex_count());
    for (Vertex x : U.boundary()) bnd[x] = sample_point(*make_euclidean(1), rng);
    const MapField u = linear_oracle(DirichletProblem(g, U, make_euclidean(1), bnd));
    const CheckReport r = check_subharmonicity(*g, u, U, {TargetPoint{0.0}});
    CHECK(r.pass);
    CHECK(r.gate == GateClass::Exact);
    CHECK(r.tolerance <= 1e-8);
    // Oracle: |u| evaluated directly; Jensen for |·| keeps its Laplacian non-negative.
    ScalarField abs_u(g->vertex_count());
    for (Vertex x = 0; x < g->vertex_count(); ++x) abs_u[x] = std::abs(u[x][0]);
    const ScalarField lap = laplacian_apply(*g, abs_u);
    double min_lap = 1e300;
    for (Vertex x : U.interior()) min_lap = std::min(min_lap, lap[x]);
    CHECK(r.measured.at("min_laplacian") == doctest::Approx(min_lap));
    CHECK(min_lap >= -1e-10);
  }

  SUBCASE("constant map") {
    const auto tripod = make_tripod();
    const auto& T = static_cast<const MetricTree&>(*tripod);
    const MapField u = constant_map(tripod, g->vertex_count(), T.point(0, 0.4));
    const CheckReport r = check_subharmonicity(*g, u, U, {T.vertex_point(2)});
    CHECK(r.pass);
    CHECK(r.measured.at("min_laplacian") == 0.0);
  }

  SUBCASE("tripod and hyperbolic targets with many probes") {
    for (const auto& space : {make_tripod(), make_hyperbolic()}) {
      const SolveResult s = solved_box(g, 12, 1, 10, space, 11);
      REQUIRE(s.converged);
      auto probes = farthest_point_probes(s.u, 32);
      if (space->kind() == TargetSpace::Kind::Tree) probes.push_back(static_cast<const MetricTree&>(*space).vertex_point(0));
      const CheckReport r = check_subharmonicity(*g, s.u, U, probes);
      CHECK(r.pass);
      CHECK(r.observations == static_cast<long>(probes.size() * U.interior().size()));
    }
  }

  SUBCASE("unsolved maps are rejected") {
    const DomainGraph path = build_path(21, 0.1);
    const VertexSubset P = path_range(path, 1, 19);
    ScalarField f(21);
    for (int i = 0; i < 21; ++i) f[i] = 5.0 - (0.1 * i - 1.0) * (0.1 * i - 1.0);
    const MapField u = scalar_map(f);
    CHECK_THROWS_AS(check_subharmonicity(path, u, P, {TargetPoint{0.0}}), InvalidArgument);
    // Past the residual gate the local-residual allowance absorbs the whole
    // defect of a scalar map: Δf = -2 and (Σw/m)·|f - mean of neighbors| = 2.
    VerifierOptions loose;
    loose.residual_limit = 1e9;
    const CheckReport r = check_subharmonicity(path, u, P, {TargetPoint{0.0}}, loose);
    CHECK(r.measured.at("min_laplacian") == doctest::Approx(-2.0));
    CHECK(std::abs(r.max_violation) <= 1e-10);
  }
}

TEST_CASE("convexity Laplacian for a line on a fine path") {
  // Δ(u²) = 2a² exactly; with d = 1 the right side is 2·3·e₂² and e₂² ≈ a²/3.
  const DomainGraph g = build_path(401, 0.005);
  const VertexSubset U = path_range(g, 1, 399);
  const double a = 1.7;
  const MapField u = centered_line(g, a, 1.0);
  const ScalarField lap = laplacian_apply(g, distance_field(u, TargetPoint{0.0}).cwiseAbs2());
  for (Vertex x : U.interior()) CHECK(lap[x] == doctest::Approx(2 * a * a).epsilon(1e-9));
  const CheckReport r = check_convexity_laplacian(g, u, U, {TargetPoint{0.0}}, 2.0);
  CHECK(r.pass);
  CHECK(r.gate == GateClass::Trend);
  CHECK(r.measured.at("pass_rate") == 1.0);
  CHECK(r.measured.at("checked") > 300);

  const CheckReport constant =
      check_convexity_laplacian(g, constant_map(make_euclidean(1), 401, TargetPoint{2.0}), U, {TargetPoint{0.0}}, 2.0);
  CHECK(constant.pass);
  CHECK(constant.max_violation <= 0.0);

  // Demanding twice the convexity is violated by a margin of order one.
  const CheckReport greedy = check_convexity_laplacian(g, u, U, {TargetPoint{0.0}}, 4.0);
  CHECK_FALSE(greedy.pass);
  CHECK(greedy.measured.at("pass_rate") == 0.0);
}

TEST_CASE("ball constants of a line in closed form") {
  // Path of length 4 centered at 2; u(x) = a (x - 2).
  const DomainGraph g = build_path(801, 0.005);
  const VertexSubset U = path_range(g, 1, 799);
  const double a = 0.8, r = 0.5, lambda = 0.5;
  const MapField u = centered_line(g, a, 2.0);
  const Vertex c = 400;

  SUBCASE("reverse Poincaré: 4λ(1-λ)²") {
    const CheckReport rp = check_reverse_poincare(g, u, U, c, r, lambda);
    CHECK(rp.pass);
    CHECK(rp.measured.at("c_emp") == doctest::Approx(4 * lambda * (1 - lambda) * (1 - lambda)).epsilon(0.03));
    // The barycenter is 0 and the moment is Σ (a x)² h over the open ball.
    double moment = 0.0;
    for (int i = 301; i <= 499; ++i) moment += a * a * (0.005 * (i - 400)) * (0.005 * (i - 400)) * 0.005;
    CHECK(rp.measured.at("rhs") == doctest::Approx(moment).epsilon(1e-9));
  }

  SUBCASE("Lipschitz estimate: √3 / 2") {
    const CheckReport le = check_lipschitz_estimate(g, u, U, c, r);
    CHECK(le.measured.at("lip") == doctest::Approx(a).epsilon(1e-12));
    CHECK(le.measured.at("c_emp") == doctest::Approx(std::sqrt(3.0) / 2).epsilon(0.02));
    const CheckReport nested = check_lipschitz_nested(g, u, U, c, {0.25, 0.5});
    CHECK(nested.measured.size() == 2);
    for (const auto& [key, value] : nested.measured) CHECK(value == doctest::Approx(std::sqrt(3.0) / 2).epsilon(0.03));
    CHECK(std::abs(nested.max_violation) < 0.03);
  }

  SUBCASE("local boundedness: sup over avg of a line") {
    const CheckReport lb = check_local_boundedness(g, u, U, c, r, lambda, {TargetPoint{0.0}});
    // sup over |x| < λr is a(λr - h); the root mean square over |x| < r is about a r / √3.
    CHECK(lb.measured.at("c_emp") == doctest::Approx(lambda * std::sqrt(3.0)).epsilon(0.02));
    CHECK(lb.pass);
  }

  SUBCASE("constant maps give zero constants") {
    const MapField k = constant_map(make_euclidean(1), 801, TargetPoint{1.0});
    CHECK(check_reverse_poincare(g, k, U, c, r, lambda).measured.at("c_emp") == 0.0);
    CHECK(check_lipschitz_estimate(g, k, U, c, r).measured.at("c_emp") == 0.0);
    CHECK(check_local_boundedness(g, k, U, c, r, lambda, {TargetPoint{1.0}}).measured.at("c_emp") == 0.0);
  }

  SUBCASE("balls must stay inside the region") {
    const VertexSubset middle = path_range(g, 100, 700);
    CHECK_NOTHROW(check_lipschitz_estimate(g, u, middle, 400, r));
    CHECK_THROWS_AS(check_lipschitz_estimate(g, u, middle, 250, r), InvalidArgument);
    CHECK_THROWS_AS(check_local_boundedness(g, u, middle, 600, r, lambda, {TargetPoint{0.0}}), InvalidArgument);
    CHECK_THROWS_AS(check_reverse_poincare(g, u, middle, 150, r, lambda), InvalidArgument);
    CHECK_THROWS_AS(check_reverse_poincare(g, u, U, c, r, 1.0), InvalidArgument);
  }
}

TEST_CASE("min_second_moment never beats the exhaustive grid minimum") {
  const DomainGraph g = build_path(41, 0.1);
  std::mt19937_64 rng(5);
  ScalarField f = testing::random_field(41, rng);
  const MapField u = scalar_map(f);
  const auto ballv = g.within(20, 1.0);
  TargetPoint best;
  const double value = min_second_moment(g, u, ballv, 16, &best);
  // Oracle: the weighted mean minimizes the quadratic exactly.
  double mw = 0.0, m = 0.0;
  for (const auto& rv : ballv) {
    mw += f[rv.v] * g.measure(rv.v);
    m += g.measure(rv.v);
  }
  double oracle = 0.0;
  for (const auto& rv : ballv) oracle += (f[rv.v] - mw / m) * (f[rv.v] - mw / m) * g.measure(rv.v);
  CHECK(value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(best[0] == doctest::Approx(mw / m));
}

TEST_CASE("ZZZ check") {
  auto g = shared(build_torus_grid(24, 24, 1.0 / 12));
  const VertexSubset U = torus_box(*g, 24, 1, 22, 1, 22);

  SUBCASE("linear map on a flat torus: constant slope, no violations") {
    ScalarField f(g->vertex_count());
    for (Vertex x = 0; x < g->vertex_count(); ++x) f[x] = 0.7 * g->positions()[x][0] - 0.2;
    const CheckReport r = check_zzz(*g, scalar_map(f), U);
    CHECK(r.pass);
    CHECK(r.max_violation == 0.0);
    // Box 1..22 has interior 2..21; vertices with all neighbors interior are 3..20.
    CHECK(r.measured.at("checked") == doctest::Approx(18.0 * 18.0));
  }

  SUBCASE("scalar harmonic extension passes, a sine profile fails") {
    const FourierField data(1, 2, 4);
    ScalarField b = ScalarField::Zero(g->vertex_count());
    for (Vertex x : U.boundary()) b[x] = data(0, g->positions()[x][0], g->positions()[x][1]);
    const ScalarField h = solve_poisson(*g, U, b, ScalarField::Zero(g->vertex_count()));
    const CheckReport good = check_zzz(*g, scalar_map(h), U);
    CHECK(good.pass);
    CHECK(good.measured.at("violation_fraction") <= 0.05);

    ScalarField s(g->vertex_count());
    for (Vertex x = 0; x < g->vertex_count(); ++x) s[x] = std::sin(M_PI * g->positions()[x][0]);
    const CheckReport bad = check_zzz(*g, scalar_map(s), U);
    CHECK_FALSE(bad.pass);
    CHECK(bad.measured.at("violation_fraction") > 0.2);
  }
}

TEST_CASE("Rademacher check") {
  SUBCASE("one-dimensional saturation") {
    const DomainGraph g = build_path(61, 0.05);
    const VertexSubset U = path_range(g, 0, 60);
    std::mt19937_64 rng(8);
    const MapField u = scalar_map(testing::random_field(61, rng));
    const CheckReport r = check_rademacher(g, u, U, u.values);
    CHECK(r.pass);
    CHECK(std::abs(r.measured.at("median_gap")) <= 1e-12);
    CHECK(r.measured.at("exact_excess") <= 1e-12);
  }

  SUBCASE("tripod map with farthest-point probes") {
    auto g = shared(build_torus_grid(16, 16, 0.125));
    const SolveResult s = solved_box(g, 16, 1, 14, make_tripod(), 21, 0.8);
    const VertexSubset U = torus_box(*g, 16, 1, 14, 1, 14);
    const CheckReport r = check_rademacher(*g, s.u, U, farthest_point_probes(s.u, 32));
    CHECK(r.measured.at("exact_excess") <= 1e-12);
    CHECK(r.pass);
  }

  SUBCASE("constant map") {
    const DomainGraph g = build_path(5, 1.0);
    const CheckReport r = check_rademacher(g, constant_map(make_euclidean(2), 5, TargetPoint{1.0, 2.0}),
                                           VertexSubset::all(g), {TargetPoint{0.0, 0.0}});
    CHECK(r.pass);
    CHECK(r.observations == 0);
  }
}

TEST_CASE("solve_poisson matches a dense solve") {
  auto g = build_torus_grid(10, 10, 0.3);
  const VertexSubset U = torus_box(g, 10, 1, 8, 2, 7);
  std::mt19937_64 rng(13);
  const ScalarField b = testing::random_field(g.vertex_count(), rng);
  const ScalarField src = testing::random_field(g.vertex_count(), rng);
  const ScalarField f = solve_poisson(g, U, b, src);
  // Oracle: rows of the dense generator at interior vertices, unknowns restricted to the interior.
  const Eigen::MatrixXd L = testing::dense_generator(g);
  const auto& in = U.interior();
  const int m = static_cast<int>(in.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    rhs[i] = src[in[i]];
    for (Vertex y = 0; y < g.vertex_count(); ++y)
      if (!U.is_interior(y)) rhs[i] -= L(in[i], y) * b[y];
    for (int j = 0; j < m; ++j) A(i, j) = L(in[i], in[j]);
  }
  const Eigen::VectorXd x = A.partialPivLu().solve(rhs);
  for (int i = 0; i < m; ++i) CHECK(f[in[i]] == doctest::Approx(x[i]).epsilon(1e-9));
  for (Vertex y : U.boundary()) CHECK(f[y] == b[y]);
  const ScalarField lap = laplacian_apply(g, f);
  for (Vertex y : in) CHECK(lap[y] == doctest::Approx(src[y]).epsilon(1e-8));
}

TEST_CASE("sup bound for subsolutions") {
  auto g = build_torus_grid(32, 32, 1.0 / 16);
  const VertexSubset U = torus_box(g, 32, 2, 30, 2, 30);
  const Vertex c = torus_vertex(32, 16, 16);
  const ScalarField zero = ScalarField::Zero(g.vertex_count());

  SUBCASE("f ≤ 0 has a zero left side") {
    const CheckReport r = check_moser_conclusion(g, ScalarField::Constant(g.vertex_count(), -1.0), U, c, 0.5, 0.5,
                                                 0.5, 0.0, 0.0, {1.0, 1.0});
    CHECK(r.pass);
    CHECK(r.measured.at("sup_positive") == 0.0);
  }

  SUBCASE("β > 0 and f ≡ 0") {
    const CheckReport r = check_moser_conclusion(g, zero, U, c, 0.5, 0.25, 0.5, 0.0, 1.0, {1.0, 0.5});
    CHECK(r.pass);
    CHECK(r.measured.at("beta_term") == doctest::Approx(0.25));
    CHECK(r.max_violation == doctest::Approx(-0.125));
  }

  SUBCASE("harmonic data and constants") {
    const FourierField data(1, 3, 2);
    ScalarField b = zero;
    for (Vertex x : U.boundary()) b[x] = 0.3 + data(0, g.positions()[x][0], g.positions()[x][1]);
    const ScalarField f = solve_poisson(g, U, b, zero);
    const MoserMeasurement m = measure_moser(g, f, U, c, 0.5, 0.5, 0.5, 0.0, 0.0);
    // Oracle: direct loops over the balls.
    double sup = 0.0, acc = 0.0, mass = 0.0;
    for (const auto& rv : g.within(c, 0.25)) sup = std::max(sup, f[rv.v]);
    for (const auto& rv : g.within(c, 0.5)) {
      acc += std::max(0.0, f[rv.v]) * g.measure(rv.v);
      mass += g.measure(rv.v);
    }
    CHECK(m.sup_positive == doctest::Approx(sup));
    CHECK(m.average_positive == doctest::Approx(acc / mass));
    CHECK(m.precondition_violation <= 1e-9);
    CHECK(check_moser_conclusion(g, f, U, c, 0.5, 0.5, 0.5, 0.0, 0.0, {sup / (acc / mass) * 1.01, 0.0}).pass);
    CHECK_FALSE(check_moser_conclusion(g, f, U, c, 0.5, 0.5, 0.5, 0.0, 0.0, {sup / (acc / mass) * 0.99, 0.0}).pass);
  }

  SUBCASE("precondition failure is reported") {
    ScalarField f(g.vertex_count());
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
      const double dx = g.positions()[x][0] - 1.0, dy = g.positions()[x][1] - 1.0;
      f[x] = 1.0 - 4.0 * (dx * dx + dy * dy);
    }
    const CheckReport r = check_moser_conclusion(g, f, U, c, 0.5, 0.5, 0.5, 0.0, 0.0, {100.0, 100.0});
    CHECK_FALSE(r.pass);
    CHECK(r.measured.at("precondition_violation") == doctest::Approx(16.0).epsilon(1e-9));
    REQUIRE_FALSE(r.notes.empty());
    CHECK(r.notes[0].find("precondition") != std::string::npos);
  }
}

TEST_CASE("Liouville experiment") {
  const CheckReport bounded = liouville_experiment({16, 32, 64}, 0.0);
  CHECK(bounded.pass);
  CHECK(bounded.measured.at("decay_16_32") >= 1.8);
  CHECK(bounded.measured.at("decay_32_64") >= 1.8);
  CHECK(bounded.measured.at("lip_L=64") < bounded.measured.at("lip_L=16"));

  const CheckReport root = liouville_experiment({16, 32, 64}, 0.5);
  CHECK(root.measured.at("decay_32_64") == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
  CHECK(root.measured.at("threshold") == doctest::Approx(1.8 / std::sqrt(2.0)));

  CHECK_THROWS_AS(liouville_experiment({16, 32}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(liouville_experiment({16}, 0.0), InvalidArgument);
}

TEST_CASE("auxiliary split") {
  SUBCASE("line into the real line: parallelogram structure") {
    const DomainGraph g = build_path(21, 0.1);
    const MapField u = centered_line(g, 1.3, 1.0);
    const VertexSubset inner = path_range(g, 4, 16);
    const CheckReport r = check_auxiliary_split(g, u, inner, {{6, 13}, {10, 10}, {15, 5}});
    CHECK(r.pass);
    CHECK(r.gate == GateClass::Exact);
    // With u(x̄) = 0, u(ȳ) = D and p = D/2 the numerator is z² - (z - D/2)² + D²/4 = zD,
    // so F_{x̄ȳ}(z) = σ (u(z) - u(x̄)) with σ the sign of u(ȳ) - u(x̄), and the split
    // reads -|u(x) - u(y)| ≤ σ (u(x) - u(y)): equality on half of B'×B'.
    CHECK(r.max_violation == doctest::Approx(0.0).scale(1.0));
    std::mt19937_64 rng(2);
    const MapField v = scalar_map(testing::random_field(21, rng));
    auto F = [&](Vertex z, Vertex xb, Vertex yb) {
      const double D = std::abs(v[yb][0] - v[xb][0]);
      const double p = 0.5 * (v[xb][0] + v[yb][0]);
      return (std::pow(v[z][0] - v[xb][0], 2) - std::pow(v[z][0] - p, 2) + D * D / 4) / D;
    };
    const double sigma = v[13][0] > v[6][0] ? 1.0 : -1.0;
    for (Vertex z : inner.members()) CHECK(F(z, 6, 13) == doctest::Approx(sigma * (v[z][0] - v[6][0])));
    CHECK(check_auxiliary_split(g, v, inner, {{6, 13}}).max_violation == doctest::Approx(0.0).scale(1.0));
    CHECK(r.measured.at("pairs") == 3.0);
  }

  SUBCASE("tripod map, exhaustive") {
    auto g = shared(build_torus_grid(12, 12, 1.0));
    const SolveResult s = solved_box(g, 12, 1, 10, make_tripod(), 17, 1.0);
    const VertexSubset inner = torus_box(*g, 12, 3, 8, 3, 8);
    std::vector<std::pair<Vertex, Vertex>> pairs;
    for (Vertex a : inner.members())
      for (Vertex b : inner.members())
        if ((a + 3 * b) % 11 == 0) pairs.emplace_back(a, b);
    const CheckReport r = check_auxiliary_split(*g, s.u, inner, pairs);
    CHECK(r.pass);
    CHECK(r.observations == static_cast<long>(pairs.size() * (inner.size() * inner.size() + 1)));
  }

  SUBCASE("pairs must lie in the inner set") {
    const DomainGraph g = build_path(11, 0.1);
    const VertexSubset inner = path_range(g, 2, 8);
    CHECK_THROWS_AS(check_auxiliary_split(g, centered_line(g, 1.0, 0.5), inner, {{0, 5}}), InvalidArgument);
  }
}
