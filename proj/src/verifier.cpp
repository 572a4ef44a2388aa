#include "npc/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "npc/parallel.hpp"

namespace npc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_inputs(const DomainGraph& g, const MapField& u, const VertexSubset& U, const char* what) {
  if (!u.space) throw InvalidArgument(std::string(what) + ": map has no target");
  if (u.size() != g.vertex_count()) throw InvalidArgument(std::string(what) + ": map does not match the graph");
  if (U.universe() != static_cast<std::size_t>(g.vertex_count()))
    throw InvalidArgument(std::string(what) + ": region does not match the graph");
}

// Vertices of B_r(center), throwing unless every one lies in U.
std::vector<ReachedVertex> ball_inside(const DomainGraph& g, const VertexSubset& U, Vertex center, double r,
                                       const char* what) {
  if (!g.valid_vertex(center)) throw InvalidArgument(std::string(what) + ": invalid center");
  if (!(r > 0.0)) throw InvalidArgument(std::string(what) + ": radius must be positive");
  auto reached = g.within(center, r);
  for (const ReachedVertex& rv : reached)
    if (!U.contains(rv.v)) throw InvalidArgument(std::string(what) + ": ball leaves the region");
  return reached;
}

void require_lambda(double lambda, const char* what) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument(std::string(what) + ": lambda must lie in (0, 1)");
}

double local_residual(const DomainGraph& g, const MapField& u, Vertex x) {
  std::vector<TargetPoint> pts;
  std::vector<double> w;
  for (const Neighbor& nb : g.neighbors(x)) {
    pts.push_back(u[nb.v]);
    w.push_back(nb.conductance);
  }
  return u.target().distance(u[x], u.target().barycenter(pts, w, &u[x]));
}

double conductance_sum(const DomainGraph& g, Vertex x) {
  double s = 0.0;
  for (const Neighbor& nb : g.neighbors(x)) s += nb.conductance;
  return s;
}

double ball_measure(const DomainGraph& g, const std::vector<ReachedVertex>& ball) {
  double m = 0.0;
  for (const ReachedVertex& rv : ball) m += g.measure(rv.v);
  return m;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

double lipschitz_constant_on(const DomainGraph& g, const MapField& u, const std::vector<ReachedVertex>& ball) {
  double lip = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i)
    for (std::size_t j = i + 1; j < ball.size(); ++j) {
      const Vertex a = ball[i].v, b = ball[j].v;
      lip = std::max(lip, u.target().distance(u[a], u[b]) / g.distance(a, b));
    }
  return lip;
}

}  // namespace

FourierField::FourierField(int components, int modes, std::uint64_t seed) : components_(components) {
  if (components < 1 || modes < 1) throw InvalidArgument("FourierField: need at least one component and mode");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  waves_.resize(components);
  for (int k = 0; k < components; ++k)
    for (int m = 1; m <= modes; ++m) {
      const double a = unit(rng) / m;
      const double theta = angle(rng);
      const double phase = angle(rng);
      waves_[k].push_back({a, M_PI * m * std::cos(theta), M_PI * m * std::sin(theta), phase});
    }
}

double FourierField::operator()(int component, double x, double y) const {
  double v = 0.0;
  for (const Wave& w : waves_.at(component)) v += w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
  return v;
}

std::vector<double> energy_scales(const DomainGraph& g, const VerifierOptions& opt) {
  std::vector<double> scales;
  for (double k : opt.energy_scales_h) scales.push_back(k * g.mesh_scale());
  return scales;
}

CheckReport check_subharmonicity(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                                 const std::vector<TargetPoint>& probes, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_subharmonicity");
  if (probes.empty()) throw InvalidArgument("check_subharmonicity: need at least one probe");
  const double res = residual(g, u, U);
  if (res > opt.residual_limit) throw InvalidArgument("check_subharmonicity: map is not solved (residual " + std::to_string(res) + ")");
  CheckReport rep("subharmonicity", GateClass::Exact);
  rep.tolerance = 1e-8;
  const auto& interior = U.interior();
  std::vector<double> allowance(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k)
    allowance[k] = conductance_sum(g, interior[k]) / g.measure(interior[k]) * local_residual(g, u, interior[k]);
  double min_lap = kInf;
  for (const TargetPoint& p : probes) {
    const ScalarField lap = laplacian_apply(g, distance_field(u, p));
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const Vertex x = interior[k];
      min_lap = std::min(min_lap, lap[x]);
      rep.observe(-lap[x] - allowance[k], x);
    }
  }
  rep.measured["min_laplacian"] = min_lap;
  rep.measured["residual"] = res;
  rep.measured["probes"] = static_cast<double>(probes.size());
  rep.settle();
  return rep;
}

CheckReport check_convexity_laplacian(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                                      const std::vector<TargetPoint>& probes, double lambda2,
                                      const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_convexity_laplacian");
  if (probes.empty()) throw InvalidArgument("check_convexity_laplacian: need at least one probe");
  CheckReport rep("convexity_laplacian", GateClass::Trend);
  rep.tolerance = opt.c_convexity;
  const EnergyProfile e = energy_density(g, u, U, energy_scales(g, opt));
  const ScalarField lip = lip_slope(g, u);
  const double h = g.mesh_scale();
  const double dim = g.dimension_n();
  long checked = 0, failed = 0;
  for (const TargetPoint& p : probes) {
    const ScalarField phi = distance_field(u, p);
    const ScalarField lap = laplacian_apply(g, phi.cwiseProduct(phi));
    for (Vertex x : U.interior()) {
      if (!e.defined[x]) continue;
      const double deficit = lambda2 * (dim + 2.0) * e.e2_squared[x] - lap[x];
      const double scale = std::max(h * lip[x] * lip[x], 1e-12);
      rep.observe(deficit / scale, x);
      ++checked;
      if (deficit > opt.c_convexity * scale) ++failed;
    }
  }
  if (checked == 0) rep.note("no interior vertex has a defined energy density");
  rep.measured["checked"] = static_cast<double>(checked);
  rep.measured["pass_rate"] = checked > 0 ? 1.0 - static_cast<double>(failed) / checked : 1.0;
  rep.settle();
  return rep;
}

CheckReport check_local_boundedness(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                    double r, double lambda, const std::vector<TargetPoint>& probes) {
  require_inputs(g, u, U, "check_local_boundedness");
  require_lambda(lambda, "check_local_boundedness");
  if (probes.empty()) throw InvalidArgument("check_local_boundedness: need at least one probe");
  ball_inside(g, U, center, 2.0 * r, "check_local_boundedness");
  const auto outer = g.within(center, r);
  const auto inner = g.within(center, lambda * r);
  const double mass = ball_measure(g, outer);
  CheckReport rep("local_boundedness", GateClass::Trend);
  rep.tolerance = 0.0;
  double worst = 0.0, best = kInf;
  for (const TargetPoint& o : probes) {
    double sup = 0.0;
    for (const ReachedVertex& rv : inner) sup = std::max(sup, u.target().distance(u[rv.v], o));
    double acc = 0.0;
    for (const ReachedVertex& rv : outer) {
      const double d = u.target().distance(u[rv.v], o);
      acc += d * d * g.measure(rv.v);
    }
    const double avg = std::sqrt(acc / mass);
    const double c = sup == 0.0 ? 0.0 : (avg > 0.0 ? sup / avg : kInf);
    worst = std::max(worst, c);
    best = std::min(best, c);
  }
  rep.measured["c_emp"] = worst;
  rep.measured["c_emp_min"] = best;
  // The gate is finiteness; stability is judged across refinement levels.
  rep.observe(std::isfinite(worst) ? 0.0 : kInf, center);
  rep.settle();
  return rep;
}

double min_second_moment(const DomainGraph& g, const MapField& u, const std::vector<ReachedVertex>& ball, int probes,
                         TargetPoint* best) {
  if (ball.empty()) throw InvalidArgument("min_second_moment: empty ball");
  const TargetSpace& Y = u.target();
  std::vector<TargetPoint> pts;
  std::vector<double> w;
  for (const ReachedVertex& rv : ball) {
    pts.push_back(u[rv.v]);
    w.push_back(g.measure(rv.v));
  }
  const auto moment = [&](const TargetPoint& o) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double d = Y.distance(pts[k], o);
      acc += static_cast<long double>(d) * d * w[k];
    }
    return static_cast<double>(acc);
  };
  TargetPoint center = Y.barycenter(pts, w);
  double value = moment(center);
  TargetPoint arg = center;
  // Perturbations towards far image points, found by farthest-point sampling.
  std::vector<double> nearest(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) nearest[k] = Y.distance(pts[k], center);
  for (int i = 0; i < probes; ++i) {
    const auto far = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    if (nearest[far] <= 0.0) break;
    const TargetPoint cand = Y.geodesic(center, pts[far], 0.05);
    const double v = moment(cand);
    if (v < value) {
      value = v;
      arg = cand;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) nearest[k] = std::min(nearest[k], Y.distance(pts[k], pts[far]));
  }
  if (best) *best = arg;
  return value;
}

CheckReport check_reverse_poincare(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                   double r, double lambda, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_reverse_poincare");
  require_lambda(lambda, "check_reverse_poincare");
  const auto outer = ball_inside(g, U, center, r, "check_reverse_poincare");
  const auto inner = g.within(center, lambda * r);
  const EnergyProfile e = energy_density(g, u, U, energy_scales(g, opt));
  const ScalarField lip = lip_slope(g, u);
  double lhs = 0.0;
  for (const ReachedVertex& rv : inner) {
    if (!e.defined[rv.v]) throw InvalidArgument("check_reverse_poincare: energy density undefined inside the inner ball");
    lhs += (e.e2_squared[rv.v] + lip[rv.v] * lip[rv.v]) * g.measure(rv.v);
  }
  const double rhs = min_second_moment(g, u, outer, opt.perturbation_probes);
  CheckReport rep("reverse_poincare", GateClass::Trend);
  rep.tolerance = 0.0;
  rep.measured["lhs"] = lhs;
  rep.measured["rhs"] = rhs;
  if (rhs <= 0.0 && lhs > 0.0) {
    rep.note("zero right side with positive energy: the map cannot be solved");
    rep.observe(kInf, center);
    rep.measured["c_emp"] = kInf;
  } else {
    const double c = rhs > 0.0 ? lhs * r * r * (1.0 - lambda) * (1.0 - lambda) / rhs : 0.0;
    rep.measured["c_emp"] = c;
    rep.observe(std::isfinite(c) ? 0.0 : kInf, center);
  }
  rep.settle();
  return rep;
}

namespace {

double lipschitz_c_emp(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center, double r,
                       const VerifierOptions& opt, double* lip_out) {
  const auto twice = ball_inside(g, U, center, 2.0 * r, "check_lipschitz_estimate");
  const double lip = lipschitz_constant_on(g, u, g.within(center, r));
  const double avg = std::sqrt(min_second_moment(g, u, twice, opt.perturbation_probes) / ball_measure(g, twice));
  if (lip_out) *lip_out = lip;
  if (lip == 0.0) return 0.0;
  return avg > 0.0 ? r * lip / avg : kInf;
}

}  // namespace

CheckReport check_lipschitz_estimate(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                     double r, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_lipschitz_estimate");
  CheckReport rep("lipschitz_estimate", GateClass::Trend);
  rep.tolerance = 0.0;
  double lip = 0.0;
  const double c = lipschitz_c_emp(g, u, U, center, r, opt, &lip);
  rep.measured["lip"] = lip;
  rep.measured["c_emp"] = c;
  rep.observe(std::isfinite(c) ? 0.0 : kInf, center);
  rep.settle();
  return rep;
}

CheckReport check_lipschitz_nested(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                   std::vector<double> radii, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_lipschitz_nested");
  if (radii.size() < 2) throw InvalidArgument("check_lipschitz_nested: need at least two radii");
  std::sort(radii.begin(), radii.end());
  CheckReport rep("lipschitz_nested", GateClass::Trend);
  rep.tolerance = 0.0;
  double previous = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double c = lipschitz_c_emp(g, u, U, center, radii[k], opt, nullptr);
    rep.measured["c_emp_r=" + std::to_string(radii[k])] = c;
    // Relative increase of C_emp from the previous (smaller) radius.
    if (k > 0) rep.observe(previous > 0.0 ? c / previous - 1.0 : (c > 0.0 ? kInf : 0.0), center);
    previous = c;
  }
  rep.settle();
  return rep;
}

CheckReport check_zzz(const DomainGraph& g, const MapField& u, const VertexSubset& U, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_zzz");
  const double K = g.curvature_k();
  CheckReport rep("zzz", K == 0.0 ? GateClass::Trend : GateClass::Diagnostic);
  if (K != 0.0) rep.notes.push_back("nominal curvature: recorded as a diagnostic");
  rep.tolerance = opt.zzz_fraction;
  const ScalarField lip = lip_slope(g, u);
  const ScalarField half_sq = 0.5 * lip.cwiseProduct(lip);
  const ScalarField lap = laplacian_apply(g, half_sq);
  const double h = g.mesh_scale();
  long checked = 0, failed = 0;
  double worst = -kInf;
  for (Vertex x : U.interior()) {
    bool deep = true;
    for (const Neighbor& nb : g.neighbors(x)) deep = deep && U.is_interior(nb.v);
    if (!deep) continue;
    ++checked;
    const double deficit = K * lip[x] * lip[x] - lap[x];
    const double eps = opt.c_zzz * h * lip[x] * lip[x];
    worst = std::max(worst, deficit / std::max(h * lip[x] * lip[x], 1e-12));
    if (deficit > eps + 1e-12) {
      ++failed;
      if (rep.witnesses.size() < 64) rep.witnesses.push_back(x);
    }
  }
  const double fraction = checked > 0 ? static_cast<double>(failed) / checked : 0.0;
  rep.observations = checked;
  rep.max_violation = fraction;
  rep.measured["violation_fraction"] = fraction;
  rep.measured["max_normalized_deficit"] = checked > 0 ? worst : 0.0;
  rep.measured["checked"] = static_cast<double>(checked);
  rep.settle();
  return rep;
}

CheckReport check_rademacher(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                             const std::vector<TargetPoint>& probes, const VerifierOptions& opt) {
  require_inputs(g, u, U, "check_rademacher");
  CheckReport rep("rademacher", GateClass::Trend);
  rep.tolerance = opt.rademacher_gap;
  const ScalarField wg = weak_gradient(g, u, probes);
  const ScalarField lip = lip_slope(g, u);
  double exact = -kInf;
  for (Vertex x : U.members()) exact = std::max(exact, wg[x] - lip[x]);
  std::vector<double> gaps;
  for (Vertex x : U.interior())
    if (lip[x] > 0.0) gaps.push_back((lip[x] - wg[x]) / lip[x]);
  const double med = median(gaps);
  const double exact_tol = 1e-12 * std::max(1.0, lip.maxCoeff());
  rep.observations = static_cast<long>(gaps.size());
  rep.max_violation = med;
  rep.measured["median_gap"] = med;
  rep.measured["max_gap"] = gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
  rep.measured["exact_excess"] = exact;
  rep.measured["probes"] = static_cast<double>(probes.size());
  rep.settle();
  if (exact > exact_tol) {
    rep.pass = false;
    rep.note("weak gradient exceeds lip somewhere");
  }
  return rep;
}

MoserMeasurement measure_moser(const DomainGraph& g, const ScalarField& f, const VertexSubset& U, Vertex center,
                               double R, double r, double lambda, double alpha, double beta) {
  require_field(g, f, "measure_moser");
  require_lambda(lambda, "measure_moser");
  if (!(R > 0.0) || !(r > 0.0) || r > R) throw InvalidArgument("measure_moser: need 0 < r <= R");
  const auto outer = ball_inside(g, U, center, r, "measure_moser");
  MoserMeasurement m;
  const ScalarField lap = laplacian_apply(g, f);
  m.precondition_violation = -kInf;
  for (Vertex x : U.interior())
    m.precondition_violation = std::max(m.precondition_violation, -(alpha * f[x] + beta) / (R * R) - lap[x]);
  for (const ReachedVertex& rv : g.within(center, lambda * r)) m.sup_positive = std::max(m.sup_positive, f[rv.v]);
  double acc = 0.0;
  for (const ReachedVertex& rv : outer) acc += std::max(0.0, f[rv.v]) * g.measure(rv.v);
  m.average_positive = acc / ball_measure(g, outer);
  m.beta_term = beta * r * r / (R * R);
  return m;
}

CheckReport check_moser_conclusion(const DomainGraph& g, const ScalarField& f, const VertexSubset& U, Vertex center,
                                   double R, double r, double lambda, double alpha, double beta,
                                   const MoserConstants& constants) {
  const MoserMeasurement m = measure_moser(g, f, U, center, R, r, lambda, alpha, beta);
  CheckReport rep("moser_conclusion", GateClass::Trend);
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  rep.tolerance = 1e-12 * scale;
  rep.measured["sup_positive"] = m.sup_positive;
  rep.measured["average_positive"] = m.average_positive;
  rep.measured["beta_term"] = m.beta_term;
  rep.measured["C1"] = constants.C1;
  rep.measured["C2"] = constants.C2;
  rep.measured["precondition_violation"] = m.precondition_violation;
  rep.observe(m.sup_positive - (constants.C1 * m.average_positive + m.beta_term * constants.C2), center);
  rep.settle();
  // Tolerance of the pointwise precondition, relative to the Laplacian scale.
  const double lap_scale = std::max(1.0, laplacian_apply(g, f).cwiseAbs().maxCoeff());
  if (m.precondition_violation > 1e-9 * lap_scale) {
    rep.pass = false;
    rep.note("precondition failure: the differential inequality does not hold on U");
  }
  return rep;
}

ScalarField solve_poisson(const DomainGraph& g, const VertexSubset& U, const ScalarField& boundary,
                          const ScalarField& source) {
  require_field(g, boundary, "solve_poisson");
  require_field(g, source, "solve_poisson");
  const auto& interior = U.interior();
  if (interior.empty()) throw InvalidArgument("solve_poisson: region has no interior");
  std::vector<int> index(g.vertex_count(), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) index[interior[k]] = static_cast<int>(k);
  const int m = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs(m);
  for (int k = 0; k < m; ++k) {
    const Vertex x = interior[k];
    // Σ w (f(y) - f(x)) = m(x) · source(x), written as A f = b with A positive definite.
    double diag = 0.0;
    rhs[k] = -g.measure(x) * source[x];
    for (const Neighbor& nb : g.neighbors(x)) {
      diag += nb.conductance;
      if (index[nb.v] >= 0) triplets.emplace_back(k, index[nb.v], -nb.conductance);
      else rhs[k] += nb.conductance * boundary[nb.v];
    }
    triplets.emplace_back(k, k, diag);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw ConvergenceError("solve_poisson: factorization failed", 0.0);
  const Eigen::VectorXd sol = solver.solve(rhs);
  ScalarField f = boundary;
  for (int k = 0; k < m; ++k) f[interior[k]] = sol[k];
  return f;
}

CheckReport liouville_experiment(const std::vector<int>& sizes, double boundary_scale_exponent, std::uint64_t seed) {
  if (sizes.size() < 2) throw InvalidArgument("liouville_experiment: need at least two sizes");
  if (!(boundary_scale_exponent < 1.0)) throw InvalidArgument("liouville_experiment: exponent must be sublinear");
  std::vector<int> L = sizes;
  std::sort(L.begin(), L.end());
  CheckReport rep("liouville", GateClass::Trend);
  rep.tolerance = 0.0;
  const FourierField data(1, 3, seed);
  // Expected decay is 2^(1 - exponent) per doubling; 1.8 at exponent 0 leaves
  // a 10% margin, and the threshold scales with the same power.
  const double threshold = 1.8 * std::pow(2.0, -boundary_scale_exponent);
  rep.measured["threshold"] = threshold;
  std::vector<double> lips;
  for (int n : L) {
    if (n < 8) throw InvalidArgument("liouville_experiment: sizes must be at least 8");
    const DomainGraph g = build_torus_grid(n, n, 1.0);
    const VertexSubset U = torus_box(g, n, 1, n - 1, 1, n - 1);
    ScalarField b = ScalarField::Zero(g.vertex_count());
    const double amp = std::pow(static_cast<double>(n), boundary_scale_exponent);
    for (Vertex x : U.boundary()) b[x] = amp * data(0, g.positions()[x][0] / n, g.positions()[x][1] / n);
    const ScalarField f = solve_poisson(g, U, b, ScalarField::Zero(g.vertex_count()));
    double lip = 0.0;
    for (int j = n / 4; j <= 3 * n / 4; ++j)
      for (int i = n / 4; i <= 3 * n / 4; ++i) {
        const Vertex x = torus_vertex(n, i, j);
        for (const Neighbor& nb : g.neighbors(x)) lip = std::max(lip, std::abs(f[nb.v] - f[x]) / nb.length);
      }
    lips.push_back(lip);
    rep.measured["lip_L=" + std::to_string(n)] = lip;
  }
  for (std::size_t k = 1; k < L.size(); ++k) {
    // Decay normalized to one doubling of L.
    const double doublings = std::log2(static_cast<double>(L[k]) / L[k - 1]);
    const double decay = lips[k] > 0.0 ? std::pow(lips[k - 1] / lips[k], 1.0 / doublings) : kInf;
    rep.measured["decay_" + std::to_string(L[k - 1]) + "_" + std::to_string(L[k])] = decay;
    rep.observe(threshold - decay);
  }
  rep.settle();
  return rep;
}

CheckReport check_auxiliary_split(const DomainGraph& g, const MapField& u, const VertexSubset& inner,
                                  const std::vector<std::pair<Vertex, Vertex>>& pairs) {
  require_inputs(g, u, inner, "check_auxiliary_split");
  const TargetSpace& Y = u.target();
  const auto& members = inner.members();
  double diameter = 0.0;
  for (Vertex x : members)
    for (Vertex y : members) diameter = std::max(diameter, Y.distance(u[x], u[y]));
  CheckReport rep("auxiliary_split", GateClass::Exact);
  rep.tolerance = 1e-9 * std::max(1.0, diameter * diameter);
  double max_lap_f = -kInf;
  const int n = g.vertex_count();
  for (const auto& [xb, yb] : pairs) {
    if (!inner.contains(xb) || !inner.contains(yb)) throw InvalidArgument("check_auxiliary_split: pair outside B'");
    const double D = Y.distance(u[xb], u[yb]);
    ScalarField F1 = ScalarField::Zero(n), F2 = ScalarField::Zero(n);
    if (D > 0.0) {
      const TargetPoint p = Y.geodesic(u[xb], u[yb], 0.5);
      for (Vertex z : members) {
        const double dp = Y.distance(u[z], p);
        const double dx = Y.distance(u[z], u[xb]);
        const double dy = Y.distance(u[z], u[yb]);
        F1[z] = (dx * dx - dp * dp + D * D / 4.0) / D;
        F2[z] = (dy * dy - dp * dp + D * D / 4.0) / D;
      }
    }
    for (Vertex x : members)
      for (Vertex y : members) rep.observe(-Y.distance(u[x], u[y]) - (-D + F1[x] + F2[y]), x);
    rep.observe(std::abs(-D - (-D + F1[xb] + F2[yb])), xb);
    bool neighbors_inside = true;
    for (const Neighbor& nb : g.neighbors(xb)) neighbors_inside = neighbors_inside && inner.contains(nb.v);
    if (neighbors_inside && D > 0.0) max_lap_f = std::max(max_lap_f, laplacian_apply(g, F1)[xb]);
  }
  rep.measured["max_laplacian_F_at_xbar"] = std::isfinite(max_lap_f) ? max_lap_f : 0.0;
  rep.measured["pairs"] = static_cast<double>(pairs.size());
  rep.settle();
  return rep;
}

}  // namespace npc
