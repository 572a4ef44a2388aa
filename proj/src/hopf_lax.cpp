#include "npc/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "npc/parallel.hpp"

namespace npc {
namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd distance_table(const DomainGraph& g) {
  const int n = g.vertex_count();
  Eigen::MatrixXd d(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t x) {
    for (Vertex y = 0; y < n; ++y) d(static_cast<Eigen::Index>(x), y) = g.distance(static_cast<Vertex>(x), y);
  });
  return d;
}

void require_two_var(const DomainGraph& g, const TwoVarFunction& f) {
  if (f.size() != g.vertex_count()) throw InvalidArgument("two-variable function does not match the graph");
}

double tie_band(double value) { return kTieTolerance * std::max(1.0, std::abs(value)); }

ScalarField hopf_lax_with(const Eigen::MatrixXd& d, const ScalarField& f, double t) {
  const Eigen::Index n = f.size();
  ScalarField q(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
    const auto x = static_cast<Eigen::Index>(xi);
    double best = kInf;
    for (Eigen::Index y = 0; y < n; ++y) best = std::min(best, f[y] + d(x, y) * d(x, y) / (2.0 * t));
    q[x] = best;
  });
  return q;
}

HopfLaxResult evolve_with(const Eigen::MatrixXd& d, const TwoVarFunction& f, double t) {
  const int n = f.size();
  HopfLaxResult r;
  r.t = t;
  r.value.resize(n);
  r.d_minus.resize(n);
  r.d_plus.resize(n);
  r.argmins.assign(n, {});
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
    const auto x = static_cast<Vertex>(xi);
    double best = kInf;
    for (Vertex y = 0; y < n; ++y) best = std::min(best, f(x, y) + d(x, y) * d(x, y) / (2.0 * t));
    const double band = tie_band(best);
    double lo = kInf;
    double hi = 0.0;
    for (Vertex y = 0; y < n; ++y) {
      if (f(x, y) + d(x, y) * d(x, y) / (2.0 * t) <= best + band) {
        r.argmins[x].push_back(y);
        lo = std::min(lo, d(x, y));
        hi = std::max(hi, d(x, y));
      }
    }
    r.value[x] = best;
    r.d_minus[x] = lo;
    r.d_plus[x] = hi;
  });
  return r;
}

double tilt_with(const DomainGraph& g, const TwoVarFunction& f, Vertex x, double radius) {
  double best = 0.0;
  bool any = false;
  // `within` is strict; the tiny widening admits vertices at distance exactly `radius`.
  for (const ReachedVertex& rv : g.within(x, radius * (1.0 + 1e-12))) {
    if (rv.v == x) continue;
    any = true;
    best = std::max(best, std::max(0.0, -f(x, rv.v)) / rv.distance);
  }
  if (!any) throw InvalidArgument("tilt: no vertex within the radius");
  return best;
}

double edge_lip(const DomainGraph& g, const ScalarField& h, Vertex x) {
  double best = 0.0;
  for (const Neighbor& nb : g.neighbors(x)) best = std::max(best, std::abs(h[nb.v] - h[x]) / nb.length);
  return best;
}

double sup_norm(const ScalarField& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

}  // namespace

double oscillation(const ScalarField& f) { return f.size() == 0 ? 0.0 : f.maxCoeff() - f.minCoeff(); }

ScalarField hopf_lax(const DomainGraph& g, const ScalarField& f, double t) {
  require_field(g, f, "hopf_lax");
  if (!(t >= 0.0)) throw InvalidArgument("hopf_lax: t must be nonnegative");
  if (t == 0.0) return f;
  if (std::isinf(t)) return ScalarField::Constant(f.size(), f.minCoeff());
  return hopf_lax_with(distance_table(g), f, t);
}

TwoVarFunction::TwoVarFunction(Eigen::MatrixXd table) : table_(std::move(table)) {
  if (table_.rows() != table_.cols() || table_.rows() == 0) throw InvalidArgument("TwoVarFunction: table must be square and nonempty");
  if (!table_.allFinite()) throw InvalidArgument("TwoVarFunction: values must be finite");
}

TwoVarFunction TwoVarFunction::negative_distance(const DomainGraph& g) { return TwoVarFunction(-distance_table(g)); }

TwoVarFunction TwoVarFunction::difference(const ScalarField& h) {
  const Eigen::Index n = h.size();
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) t(x, y) = h[y] - h[x];
  return TwoVarFunction(std::move(t));
}

TwoVarFunction TwoVarFunction::negative_map_distance(const MapField& u, const VertexSubset& inner, double clamp) {
  if (!u.space) throw InvalidArgument("negative_map_distance: map has no target");
  if (inner.universe() != static_cast<std::size_t>(u.size())) throw InvalidArgument("negative_map_distance: subset does not match the map");
  const int n = u.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  double largest = 0.0;
  for (Vertex x : inner.members())
    for (Vertex y : inner.members()) {
      t(x, y) = -u.target().distance(u[x], u[y]);
      largest = std::max(largest, -t(x, y));
    }
  const double c = clamp < 0.0 ? largest : clamp;
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = 0; y < n; ++y)
      if (!inner.contains(x) || !inner.contains(y)) t(x, y) = -c;
  return TwoVarFunction(std::move(t));
}

CheckReport check_reverse_triangle(const TwoVarFunction& f, int samples, std::uint64_t seed) {
  CheckReport rep("reverse_triangle", GateClass::Exact);
  const int n = f.size();
  rep.tolerance = 1e-12 * std::max(1.0, f.table().cwiseAbs().maxCoeff());
  auto visit = [&](Vertex x, Vertex y, Vertex z) { rep.observe(f(x, y) + f(y, z) - f(x, z), x); };
  if (n <= 64) {
    for (Vertex x = 0; x < n; ++x)
      for (Vertex y = 0; y < n; ++y)
        for (Vertex z = 0; z < n; ++z) visit(x, y, z);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Vertex> pick(0, n - 1);
    for (int k = 0; k < samples; ++k) {
      const Vertex x = pick(rng);
      const Vertex y = pick(rng);
      visit(x, y, pick(rng));
    }
  }
  rep.settle();
  return rep;
}

HopfLaxResult two_var_evolve(const DomainGraph& g, const TwoVarFunction& f, double t) {
  require_two_var(g, f);
  if (!(t > 0.0)) throw InvalidArgument("two_var_evolve: t must be positive");
  return evolve_with(distance_table(g), f, t);
}

void write_time_sweep_csv(std::ostream& out, const std::vector<HopfLaxResult>& sweep) {
  out << "t,vertex,f_t,Dminus,Dplus,argmin_count\n";
  out.precision(17);
  for (const HopfLaxResult& r : sweep)
    for (Eigen::Index x = 0; x < r.value.size(); ++x)
      out << r.t << ',' << x << ',' << r.value[x] << ',' << r.d_minus[x] << ',' << r.d_plus[x] << ','
          << r.argmins[x].size() << '\n';
}

nlohmann::json to_json(const HopfLaxResult& r) {
  const auto vec = [](const ScalarField& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"t", r.t}, {"value", vec(r.value)}, {"argmins", r.argmins}, {"d_minus", vec(r.d_minus)}, {"d_plus", vec(r.d_plus)}};
}

double tilt(const DomainGraph& g, const TwoVarFunction& f, Vertex x, double radius) {
  require_two_var(g, f);
  if (!g.valid_vertex(x)) throw InvalidArgument("tilt: invalid vertex");
  if (!(radius > 0.0)) throw InvalidArgument("tilt: radius must be positive");
  return tilt_with(g, f, x, radius);
}

double descending_slope(const DomainGraph& g, const ScalarField& h, Vertex x) {
  double best = 0.0;
  for (const Neighbor& nb : g.neighbors(x)) best = std::max(best, std::max(0.0, h[x] - h[nb.v]) / nb.length);
  return best;
}

CheckReport check_time_derivative(const DomainGraph& g, const TwoVarFunction& f, Vertex x, double t, double dt) {
  require_two_var(g, f);
  if (!g.valid_vertex(x)) throw InvalidArgument("check_time_derivative: invalid vertex");
  if (!(dt > 0.0) || !(dt < t)) throw InvalidArgument("check_time_derivative: need 0 < dt < t");
  CheckReport rep("time_derivative", GateClass::Trend);
  rep.tolerance = 0.05;
  const Eigen::MatrixXd d = distance_table(g);
  const HopfLaxResult now = evolve_with(d, f, t);
  const double before = evolve_with(d, f, t - dt).value[x];
  const double after = evolve_with(d, f, t + dt).value[x];
  const double right = (after - now.value[x]) / dt;
  const double left = (now.value[x] - before) / dt;
  const double claim_right = -now.d_plus[x] * now.d_plus[x] / (2.0 * t * t);
  const double claim_left = -now.d_minus[x] * now.d_minus[x] / (2.0 * t * t);
  rep.measured["right_quotient"] = right;
  rep.measured["left_quotient"] = left;
  rep.measured["claimed_right"] = claim_right;
  rep.measured["claimed_left"] = claim_left;
  rep.measured["d_minus"] = now.d_minus[x];
  rep.measured["d_plus"] = now.d_plus[x];
  if (now.d_minus[x] == now.d_plus[x]) {
    rep.observe(std::abs(right - claim_right) / std::max(std::abs(claim_right), dt), x);
    rep.observe(std::abs(left - claim_left) / std::max(std::abs(claim_left), dt), x);
  } else {
    rep.note("D- differs from D+ at this vertex; the quotients are recorded but not gated");
  }
  rep.settle();
  return rep;
}

CheckReport check_dpm_monotonicity(const DomainGraph& g, const TwoVarFunction& f, std::vector<double> times) {
  require_two_var(g, f);
  if (times.empty()) throw InvalidArgument("check_dpm_monotonicity: need at least one time");
  for (double t : times)
    if (!(t > 0.0)) throw InvalidArgument("check_dpm_monotonicity: times must be positive");
  std::sort(times.begin(), times.end());
  CheckReport rep("dpm_monotonicity", GateClass::Exact);
  rep.tolerance = 1e-12;
  const Eigen::MatrixXd d = distance_table(g);
  HopfLaxResult prev;
  for (std::size_t k = 0; k < times.size(); ++k) {
    HopfLaxResult cur = evolve_with(d, f, times[k]);
    const double scale = std::max(1.0, d.maxCoeff());
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
      rep.observe((cur.d_minus[x] - cur.d_plus[x]) / scale, x);
      if (k > 0) rep.observe((prev.d_plus[x] - cur.d_minus[x]) / scale, x);
    }
    prev = std::move(cur);
  }
  rep.settle();
  return rep;
}

CheckReport check_slope_bound(const DomainGraph& g, const TwoVarFunction& f, double t) {
  require_two_var(g, f);
  if (!(t > 0.0)) throw InvalidArgument("check_slope_bound: t must be positive");
  CheckReport rep("slope_bound", GateClass::Trend);
  const double h = g.mesh_scale();
  rep.tolerance = 2.0 * h / t;
  const HopfLaxResult r = two_var_evolve(g, f, t);
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    const double rhs = descending_slope(g, r.value, x) + tilt_with(g, f, x, h);
    rep.observe(r.d_plus[x] / t - rhs, x);
  }
  rep.settle();
  return rep;
}

namespace {

// ½ Σ_k (|∂⁻ f_{s_k}| + tilt)² Δs at every vertex, midpoint rule on `steps` cells.
ScalarField integral_rhs(const DomainGraph& g, const Eigen::MatrixXd& d, const TwoVarFunction& f,
                         const ScalarField& tilts, double t, int steps) {
  const double ds = t / steps;
  ScalarField acc = ScalarField::Zero(g.vertex_count());
  for (int k = 0; k < steps; ++k) {
    const HopfLaxResult r = evolve_with(d, f, (k + 0.5) * ds);
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
      const double a = descending_slope(g, r.value, x) + tilts[x];
      acc[x] += 0.5 * a * a * ds;
    }
  }
  return acc;
}

}  // namespace

CheckReport check_integral_bound(const DomainGraph& g, const TwoVarFunction& f, double t, int steps) {
  require_two_var(g, f);
  if (!(t > 0.0)) throw InvalidArgument("check_integral_bound: t must be positive");
  if (steps < 2) throw InvalidArgument("check_integral_bound: need at least two quadrature steps");
  CheckReport rep("integral_bound", GateClass::Trend);
  const Eigen::MatrixXd d = distance_table(g);
  const int n = g.vertex_count();
  ScalarField tilts(n);
  for (Vertex x = 0; x < n; ++x) tilts[x] = tilt_with(g, f, x, g.mesh_scale());
  const ScalarField fine = integral_rhs(g, d, f, tilts, t, steps);
  const ScalarField coarse = integral_rhs(g, d, f, tilts, t, steps / 2);
  const double quad_error = (fine - coarse).cwiseAbs().maxCoeff();
  // Additive slack of one mesh step, in the units of f (slope times length).
  rep.tolerance = g.mesh_scale() * (1.0 + tilts.maxCoeff()) + quad_error;
  const HopfLaxResult r = evolve_with(d, f, t);
  double lhs_max = 0.0;
  for (Vertex x = 0; x < n; ++x) {
    const double lhs = std::abs(f(x, x) - r.value[x]);
    lhs_max = std::max(lhs_max, lhs);
    rep.observe(lhs - fine[x], x);
  }
  rep.measured["quadrature_error"] = quad_error;
  rep.measured["max_lhs"] = lhs_max;
  rep.measured["max_rhs"] = fine.maxCoeff();
  rep.settle();
  return rep;
}

CheckReport check_duality(const DomainGraph& g, const TwoVarFunction& f, Vertex x, const std::vector<double>& t_grid) {
  require_two_var(g, f);
  if (!g.valid_vertex(x)) throw InvalidArgument("check_duality: invalid vertex");
  if (t_grid.empty()) throw InvalidArgument("check_duality: empty time grid");
  const double h = g.mesh_scale();
  for (double t : t_grid)
    if (!(t >= h * h)) throw InvalidArgument("check_duality: times must not go below mesh_scale^2");
  CheckReport rep("duality", GateClass::Trend);
  rep.tolerance = 0.10;
  const Eigen::MatrixXd d = distance_table(g);

  std::vector<double> neg_ratio, dminus, dplus;
  for (double t : t_grid) {
    const HopfLaxResult r = evolve_with(d, f, t);
    neg_ratio.push_back(-r.value[x] / t);
    dminus.push_back(r.d_minus[x] * r.d_minus[x] / (2.0 * t * t));
    dplus.push_back(r.d_plus[x] * r.d_plus[x] / (2.0 * t * t));
  }
  // Least-squares line in t, evaluated at t = 0.
  const auto extrapolate = [&](const std::vector<double>& v) {
    const std::size_t m = t_grid.size();
    if (m == 1) return v.front();
    double mt = 0.0, mv = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      mt += t_grid[k] / m;
      mv += v[k] / m;
    }
    double stt = 0.0, stv = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      stt += (t_grid[k] - mt) * (t_grid[k] - mt);
      stv += (t_grid[k] - mt) * (v[k] - mv);
    }
    return stt > 0.0 ? mv - (stv / stt) * mt : mv;
  };
  const double tl = tilt_with(g, f, x, h);
  const double target = 0.5 * tl * tl;
  const double denom = std::max(target, 1e-9);
  const double a = extrapolate(neg_ratio);
  const double b = extrapolate(dminus);
  const double c = extrapolate(dplus);
  rep.observe(std::abs(a - target) / denom, x);
  rep.observe(std::abs(b - target) / denom, x);
  rep.observe(std::abs(c - target) / denom, x);
  rep.measured["tilt"] = tl;
  rep.measured["half_tilt_squared"] = target;
  rep.measured["limit_neg_ft_over_t"] = a;
  rep.measured["limit_dminus_sq_over_2t2"] = b;
  rep.measured["limit_dplus_sq_over_2t2"] = c;
  rep.measured["max_neg_ft_over_t"] = *std::max_element(neg_ratio.begin(), neg_ratio.end());
  for (int mult : {2, 4}) {
    bool reachable = false;
    for (const ReachedVertex& rv : g.within(x, mult * h * (1.0 + 1e-12))) reachable = reachable || rv.v != x;
    if (reachable) rep.measured["tilt_radius_" + std::to_string(mult) + "h"] = tilt_with(g, f, x, mult * h);
  }
  rep.settle();
  return rep;
}

CheckReport check_hopflax_lip(const DomainGraph& g, const ScalarField& f, double t) {
  require_field(g, f, "check_hopflax_lip");
  if (!(t > 0.0)) throw InvalidArgument("check_hopflax_lip: t must be positive");
  CheckReport rep("hopflax_lip", GateClass::Exact);
  const double osc = oscillation(f);
  const double h = g.mesh_scale();
  const double r = std::sqrt(2.0 * t * osc);
  // Minimizers lie within r of x and d²/2t has slope at most r/t on B_r; a
  // graph step adds up to h/(2t), so 3h/t leaves room.
  const double bound = osc == 0.0 ? 0.0 : (r / t) * (1.0 + 3.0 * h / (r + 1e-12));
  const ScalarField q = hopf_lax(g, f, t);
  double lip = 0.0;
  for (const Edge& e : g.edges()) lip = std::max(lip, std::abs(q[e.a] - q[e.b]) / e.length);
  rep.tolerance = 1e-12 * std::max(1.0, bound);
  rep.observe(lip - bound);
  rep.measured["lip"] = lip;
  rep.measured["bound"] = bound;
  rep.measured["continuum_bound"] = r / t;
  rep.measured["oscillation"] = osc;
  if (osc == 0.0) rep.note("constant data: trivial pass");
  rep.settle();
  return rep;
}

CheckReport check_hamilton_jacobi(const DomainGraph& g, const ScalarField& f, double t, double dt) {
  require_field(g, f, "check_hamilton_jacobi");
  if (!(dt > 0.0) || !(dt < t)) throw InvalidArgument("check_hamilton_jacobi: need 0 < dt < t");
  CheckReport rep("hamilton_jacobi", GateClass::Trend);
  rep.tolerance = 2.0;
  const Eigen::MatrixXd d = distance_table(g);
  const ScalarField q = hopf_lax_with(d, f, t);
  const ScalarField qp = hopf_lax_with(d, f, t + dt);
  const ScalarField qm = hopf_lax_with(d, f, t - dt);
  const ProxResult prox = prox_map(g, f, t);
  const double h = g.mesh_scale();

  // A vertex sits on a shock when its minimizer is not unique or jumps by
  // more than a few mesh steps relative to a neighbor's.
  const int n = g.vertex_count();
  double worst_abs = 0.0;
  long shocks = 0;
  for (Vertex x = 0; x < n; ++x) {
    bool shock = prox.multiplicity[x] > 1;
    for (const Neighbor& nb : g.neighbors(x))
      shock = shock || d(prox.minimizer[x], prox.minimizer[nb.v]) > 4.0 * h;
    const double lip = edge_lip(g, q, x);
    const double res = std::abs((qp[x] - qm[x]) / (2.0 * dt) + 0.5 * lip * lip);
    if (shock) {
      ++shocks;
      continue;
    }
    worst_abs = std::max(worst_abs, res);
    rep.observe(res / ((h + dt) * (lip / t + lip * lip) + 1e-12), x);
  }
  rep.measured["max_abs_residual"] = worst_abs;
  rep.measured["shock_vertices"] = static_cast<double>(shocks);
  if (shocks > 0) rep.note("shock vertices are excluded from the gate");
  rep.settle();
  return rep;
}

CheckReport check_hopflax_basics(const DomainGraph& g, const ScalarField& f, double t, double s) {
  require_field(g, f, "check_hopflax_basics");
  if (!(t > 0.0) || !(s > 0.0)) throw InvalidArgument("check_hopflax_basics: times must be positive");
  CheckReport rep("hopflax_basics", GateClass::Exact);
  rep.tolerance = 1e-12 * std::max(1.0, sup_norm(f));
  const Eigen::MatrixXd d = distance_table(g);
  const ScalarField qt = hopf_lax_with(d, f, t);
  const ScalarField qts = hopf_lax_with(d, f, t + s);
  const ScalarField composed = hopf_lax_with(d, hopf_lax_with(d, f, s), t);
  rep.observe(oscillation(qt) - oscillation(f));
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    rep.observe(f.minCoeff() - qt[x], x);
    rep.observe(qt[x] - f.maxCoeff(), x);
    rep.observe(qt[x] - f[x], x);
    rep.observe(qts[x] - qt[x], x);
    rep.observe(qts[x] - composed[x], x);
  }
  rep.measured["oscillation_f"] = oscillation(f);
  rep.measured["oscillation_qt"] = oscillation(qt);
  rep.settle();
  return rep;
}

ProxResult prox_map(const DomainGraph& g, const ScalarField& f, double T, double smoothing_radius) {
  require_field(g, f, "prox_map");
  if (!(T > 0.0)) throw InvalidArgument("prox_map: T must be positive");
  if (smoothing_radius < 0.0) throw InvalidArgument("prox_map: smoothing radius must be nonnegative");
  const Eigen::MatrixXd d = distance_table(g);
  const int n = g.vertex_count();
  ProxResult r;
  r.T = T;
  r.value.resize(n);
  r.minimizer.assign(n, 0);
  r.multiplicity.assign(n, 0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
    const auto x = static_cast<Vertex>(xi);
    double best = kInf;
    for (Vertex y = 0; y < n; ++y) best = std::min(best, f[y] + d(x, y) * d(x, y) / (2.0 * T));
    const double band = tie_band(best);
    int count = 0;
    Vertex chosen = -1;
    for (Vertex y = 0; y < n; ++y) {
      if (f[y] + d(x, y) * d(x, y) / (2.0 * T) <= best + band) {
        if (chosen < 0) chosen = y;
        ++count;
      }
    }
    r.value[x] = best;
    r.minimizer[x] = chosen;
    r.multiplicity[x] = count;
  });
  ScalarField pushed = ScalarField::Zero(n);
  for (Vertex y = 0; y < n; ++y) pushed[r.minimizer[y]] += g.measure(y);
  r.density.resize(n);
  for (Vertex x = 0; x < n; ++x) r.density[x] = pushed[x] / g.measure(x);
  r.smoothing_radius = smoothing_radius;
  if (smoothing_radius > 0.0) {
    r.smoothed_density.resize(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
      double mass = 0.0, vol = 0.0;
      for (const ReachedVertex& rv : g.within(static_cast<Vertex>(xi), smoothing_radius)) {
        mass += pushed[rv.v];
        vol += g.measure(rv.v);
      }
      r.smoothed_density[static_cast<Eigen::Index>(xi)] = mass / vol;
    });
  }
  return r;
}

nlohmann::json to_json(const ProxResult& r) {
  const auto vec = [](const ScalarField& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j = {{"T", r.T},
                      {"value", vec(r.value)},
                      {"minimizer", r.minimizer},
                      {"multiplicity", r.multiplicity},
                      {"density", vec(r.density)},
                      {"smoothing_radius", r.smoothing_radius}};
  if (r.smoothed_density.size() > 0) j["smoothed_density"] = vec(r.smoothed_density);
  return j;
}

CheckReport check_prox_identities(const DomainGraph& g, const ScalarField& f, const ProxResult& prox) {
  require_field(g, f, "check_prox_identities");
  if (prox.value.size() != f.size()) throw InvalidArgument("check_prox_identities: prox result does not match");
  CheckReport rep("prox_identities", GateClass::Exact);
  rep.tolerance = 1e-12 * std::max(1.0, sup_norm(f));
  const ScalarField q = hopf_lax(g, f, prox.T);
  const double osc = oscillation(f);
  int unique = 0;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    const Vertex y = prox.minimizer[x];
    const double dxy = g.distance(x, y);
    rep.observe(std::abs(q[x] - (f[y] + dxy * dxy / (2.0 * prox.T))), x);
    rep.observe(dxy * dxy - 2.0 * prox.T * osc, x);
    if (prox.multiplicity[x] < 1) rep.observe(kInf, x);
    if (prox.multiplicity[x] == 1) ++unique;
  }
  rep.measured["unique_fraction"] = static_cast<double>(unique) / g.vertex_count();
  rep.settle();
  return rep;
}

double path_density_fit(const DomainGraph& g, const ProxResult& prox, double lo, double hi) {
  const int n = g.vertex_count();
  if (static_cast<int>(prox.minimizer.size()) != n) throw InvalidArgument("path_density_fit: prox result does not match");
  for (const Edge& e : g.edges())
    if (std::abs(e.a - e.b) != 1) throw InvalidArgument("path_density_fit: graph is not a path in index order");
  std::vector<double> pushed(n, 0.0);
  for (Vertex y = 0; y < n; ++y) pushed[prox.minimizer[y]] += g.measure(y);
  double cum_mass = 0.0, cum_measure = 0.0, pos = 0.0;
  std::vector<double> xs, ys;
  for (Vertex x = 0; x < n; ++x) {
    if (x > 0) pos += g.distance(x - 1, x);
    cum_mass += pushed[x];
    cum_measure += g.measure(x);
    if (pos >= lo && pos <= hi) {
      xs.push_back(cum_measure);
      ys.push_back(cum_mass);
    }
  }
  if (xs.size() < 2) throw InvalidArgument("path_density_fit: window holds fewer than two vertices");
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / m;
    my += ys[k] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  return sxy / sxx;
}

CheckReport check_pushforward_bound(const DomainGraph& g, const ScalarField& f, const ProxResult& prox, double C,
                                    double K, double osc, double allowance) {
  require_field(g, f, "check_pushforward_bound");
  if (prox.density.size() != f.size()) throw InvalidArgument("check_pushforward_bound: prox result does not match");
  if (!(allowance >= 0.0)) throw InvalidArgument("check_pushforward_bound: allowance must be nonnegative");
  const ScalarField lap = laplacian_apply(g, f);
  const double pre_tol = 1e-9 * std::max(1.0, std::abs(C));
  for (Vertex x = 0; x < g.vertex_count(); ++x)
    if (lap[x] > C + pre_tol)
      throw InvalidArgument("check_pushforward_bound: precondition Δf <= C fails at vertex " + std::to_string(x));

  CheckReport rep("pushforward_bound", GateClass::Trend);
  rep.tolerance = allowance;
  const double rate = C + 2.0 * std::max(0.0, -K) * osc;
  const double bound = std::exp(prox.T * rate);
  const ScalarField& density = prox.smoothed_density.size() > 0 ? prox.smoothed_density : prox.density;
  Eigen::Index arg = 0;
  const double max_density = density.maxCoeff(&arg);
  const double ratio = max_density / bound;
  rep.observe(ratio - 1.0, static_cast<Vertex>(arg));
  rep.measured["max_density"] = max_density;
  rep.measured["max_raw_density"] = prox.density.maxCoeff();
  rep.measured["bound"] = bound;
  rep.measured["ratio"] = ratio;
  rep.measured["allowance_usage"] = allowance > 0.0 ? std::max(0.0, ratio - 1.0) / allowance : (ratio > 1.0 ? kInf : 0.0);

  const ScalarField lap_q = laplacian_apply(g, prox.value);
  double excess = -kInf;
  long above = 0;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    excess = std::max(excess, lap_q[x] - rate);
    if (lap_q[x] > rate + pre_tol) ++above;
  }
  rep.measured["laplacian_qt_max_excess"] = excess;
  rep.measured["laplacian_qt_excess_fraction"] = static_cast<double>(above) / g.vertex_count();
  rep.settle();
  return rep;
}

CheckReport check_key_pointwise_bound(const DomainGraph& g, const ScalarField& f, double t,
                                      const std::vector<double>& s_grid) {
  require_field(g, f, "check_key_pointwise_bound");
  if (!(t > 0.0)) throw InvalidArgument("check_key_pointwise_bound: t must be positive");
  if (s_grid.empty()) throw InvalidArgument("check_key_pointwise_bound: empty s grid");
  const double K = g.curvature_k();
  CheckReport rep("key_pointwise_bound", K == 0.0 ? GateClass::Exact : GateClass::Diagnostic);
  rep.tolerance = 1e-8 * std::max(1.0, sup_norm(f));
  const Eigen::MatrixXd d = distance_table(g);
  const int n = g.vertex_count();
  const ScalarField q = hopf_lax_with(d, f, t);
  std::vector<std::vector<Vertex>> argmins(n);
  for (Vertex x = 0; x < n; ++x) {
    const double band = tie_band(q[x]);
    for (Vertex y = 0; y < n; ++y)
      if (f[y] + d(x, y) * d(x, y) / (2.0 * t) <= q[x] + band) argmins[x].push_back(y);
  }
  const HeatSemigroup heat(g);
  for (double s : s_grid) {
    if (!(s >= 0.0)) throw InvalidArgument("check_key_pointwise_bound: s must be nonnegative");
    const ScalarField hq = heat.apply(q, s);
    const ScalarField hf = heat.apply(f, s);
    const double factor = std::exp(-2.0 * K * s);
    double worst = -kInf;
    for (Vertex x = 0; x < n; ++x)
      for (Vertex y : argmins[x]) {
        const double v = hq[x] - hf[y] - factor * d(x, y) * d(x, y) / (2.0 * t);
        worst = std::max(worst, v);
        rep.observe(v, x);
      }
    rep.measured["max_violation_s=" + std::to_string(s)] = worst;
  }
  if (rep.gate == GateClass::Diagnostic) {
    rep.note("nominal curvature is nonzero: values are recorded, not gated");
    rep.pass = true;
  } else {
    rep.settle();
  }
  return rep;
}

}  // namespace npc
