#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "npc/laplacian.hpp"
#include "support.hpp"

using namespace npc;

TEST_CASE("laplacian of a quadratic on a path is its second derivative") {
  const DomainGraph g = build_path(21, 0.1);
  ScalarField f(21);
  for (int i = 0; i < 21; ++i) f[i] = 0.5 * (0.1 * i) * (0.1 * i);
  const ScalarField lf = laplacian_apply(g, f);
  for (int i = 1; i < 20; ++i) CHECK(lf[i] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tilde_delta(g, f, 7) == doctest::Approx(lf[7]));
}

TEST_CASE("heat semigroup agrees with the matrix exponential") {
  std::mt19937_64 rng(5);
  for (const DomainGraph& g : {build_path(30, 0.2), build_torus_grid(6, 5, 0.5), build_hyperbolic_disk(0.6, 0.2)}) {
    const Eigen::MatrixXd L = testing::dense_generator(g);
    const ScalarField f = testing::random_field(g.vertex_count(), rng);
    for (double t : {0.01, 0.3, 2.0}) {
      const Eigen::MatrixXd E = (t * L).exp();
      const ScalarField expected = E * f;
      const ScalarField got = heat_semigroup(g, f, t);
      CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-10);
      const ScalarField rho = heat_kernel(g, 3, t);
      for (int y = 0; y < g.vertex_count(); ++y) CHECK(rho[y] == doctest::Approx(E(3, y) / g.measure(y)).epsilon(1e-8));
    }
  }
}

TEST_CASE("heat semigroup basic behavior") {
  const DomainGraph g = build_path(10, 0.5);
  const ScalarField ones = ScalarField::Ones(10);
  CHECK((heat_semigroup(g, ones, 1.7) - ones).cwiseAbs().maxCoeff() <= 1e-12);
  std::mt19937_64 rng(1);
  const ScalarField f = testing::random_field(10, rng);
  CHECK(heat_semigroup(g, f, 0.0) == f);
  CHECK_THROWS_AS(heat_semigroup(g, f, -1.0), InvalidArgument);
  const ScalarField rho = heat_kernel(g, 4, 0.8);
  double mass = 0.0;
  for (int y = 0; y < 10; ++y) mass += rho[y] * g.measure(y);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.minCoeff() >= 0.0);
}

TEST_CASE("two-vertex heat kernel closed form") {
  // m = (1, 1), w = 1: ρ_t[0](1) = (1 - e^{-2t}) / 2.
  const DomainGraph g({1.0, 1.0}, {{0, 1, 1.0, 1.0}}, 0.0, 1.0);
  for (double t : {0.1, 1.0, 3.0}) CHECK(heat_kernel(g, 0, t)[1] == doctest::Approx((1 - std::exp(-2 * t)) / 2));
}

TEST_CASE("Crank-Nicolson matches the spectral route on smooth data") {
  const DomainGraph g = build_torus_grid(24, 24, 1.0 / 12.0);
  ScalarField f(g.vertex_count());
  for (int j = 0; j < 24; ++j)
    for (int i = 0; i < 24; ++i)
      f[torus_vertex(24, i, j)] = std::cos(2 * M_PI * i / 24.0) + 0.5 * std::sin(2 * M_PI * j / 24.0);
  const HeatSemigroup spectral(g, HeatSemigroup::Method::Spectral);
  const HeatSemigroup cn(g, HeatSemigroup::Method::CrankNicolson);
  const ScalarField a = spectral.apply(f, 0.05);
  const ScalarField b = cn.apply(f, 0.05);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("exact heat gates on random fields") {
  std::mt19937_64 rng(21);
  for (const DomainGraph& g : {build_path(50, 0.1), build_torus_grid(16, 16, 0.25)}) {
    const HeatSemigroup heat(g);
    for (int trial = 0; trial < 20; ++trial) {
      const ScalarField f = testing::random_field(g.vertex_count(), rng);
      const ScalarField h = testing::random_field(g.vertex_count(), rng);
      const CheckReport sym = check_heat_symmetry(heat, g, f, h, 0.37);
      CHECK(sym.pass);
      const ScalarField upper = f.array() + 0.1 + testing::random_field(g.vertex_count(), rng, 0.0, 1.0).array();
      const CheckReport mp = check_maximum_principle(heat, f, upper, 0.21);
      CHECK(mp.pass);
      CHECK(mp.measured.at("violations") == 0.0);
    }
  }
}

TEST_CASE("verify_claim and Duhamel bound") {
  const DomainGraph g = build_path(50, 0.1);
  std::mt19937_64 rng(8);
  const ScalarField f = testing::random_field(50, rng);
  const ScalarField lf = laplacian_apply(g, f);
  LaplacianBoundClaim claim{f, lf, BoundDirection::Upper, VertexSubset::all(g), 1e-12};
  CHECK(verify_claim(g, claim).pass);
  claim.bound = lf.array() - 1.0;
  const CheckReport broken = verify_claim(g, claim);
  CHECK_FALSE(broken.pass);
  CHECK(broken.max_violation == doctest::Approx(1.0));

  claim.bound = lf.array() + 0.5;
  const CheckReport duhamel = check_duhamel_bound(g, claim, 0.3);
  CHECK(duhamel.pass);
  claim.direction = BoundDirection::Lower;
  claim.bound = lf.array() - 0.5;
  CHECK(check_duhamel_bound(g, claim, 0.3).pass);
}

TEST_CASE("Duhamel bound is tight for the exact Laplacian of a rough field") {
  std::mt19937_64 rng(10);
  for (const DomainGraph& g : {build_path(50, 0.1), build_torus_grid(16, 16, 0.25)}) {
    const HeatSemigroup heat(g);
    for (int trial = 0; trial < 5; ++trial) {
      const ScalarField f = testing::random_field(g.vertex_count(), rng);
      const LaplacianBoundClaim claim{f, laplacian_apply(g, f), BoundDirection::Upper, VertexSubset::all(g), 1e-12};
      const CheckReport r = check_duhamel_bound(heat, g, claim, 0.3);
      CHECK(r.pass);
      // 64 requested steps would under-resolve modes decaying like exp(-2 Σw/m · s).
      CHECK(r.measured.at("quadrature_steps") > 64);
      CHECK(std::abs(r.max_violation) <= r.tolerance);
    }
  }
}

TEST_CASE("min stability") {
  std::mt19937_64 rng(9);
  const DomainGraph g = build_torus_grid(16, 16, 0.25);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField f1 = testing::random_field(g.vertex_count(), rng);
    const ScalarField f2 = testing::random_field(g.vertex_count(), rng);
    const CheckReport r =
        check_min_stability(g, f1, f2, laplacian_apply(g, f1), laplacian_apply(g, f2), VertexSubset::all(g));
    CHECK(r.pass);
  }
}

TEST_CASE("laplacian comparison diagnostic") {
  const DomainGraph g = build_path(41, 1.0);
  const CheckReport r = laplacian_comparison_diag(g, 20, 10.0);
  CHECK(r.gate == GateClass::Diagnostic);
  CHECK(r.measured.at("max_laplacian_half_sq_distance") == doctest::Approx(1.0));
  CHECK(r.measured.at("smooth_model_value") == doctest::Approx(1.0));
  CHECK_THROWS_AS(laplacian_comparison_diag(g, 20, 0.5), InvalidArgument);
  const DomainGraph h = build_hyperbolic_disk(1.5, 0.15);
  const CheckReport rh = laplacian_comparison_diag(h, 0, 1.0);
  CHECK(std::isfinite(rh.measured.at("max_laplacian_half_sq_distance")));
}
