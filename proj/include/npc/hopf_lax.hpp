#pragma once

#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npc/check_report.hpp"
#include "npc/energy.hpp"
#include "npc/laplacian.hpp"

namespace npc {

// Hopf-Lax semigroup Q_t f(x) = min_y f(y) + d²(x, y) / (2t), by exhaustive
// enumeration. Q_0 f = f.
ScalarField hopf_lax(const DomainGraph& g, const ScalarField& f, double t);

double oscillation(const ScalarField& f);

// f(x, y) on vertex pairs, stored densely. The reverse triangle inequality
// f(x, z) >= f(x, y) + f(y, z) is expected but only checked on request.
class TwoVarFunction {
 public:
  explicit TwoVarFunction(Eigen::MatrixXd table);

  // f(x, y) = -d(x, y).
  static TwoVarFunction negative_distance(const DomainGraph& g);
  // f(x, y) = h(y) - h(x); then f_t = Q_t h - h.
  static TwoVarFunction difference(const ScalarField& h);
  // f(x, y) = -d_Y(u(x), u(y)) for x, y in `inner`, and -clamp otherwise.
  // A negative clamp selects the largest distance among pairs in `inner`.
  static TwoVarFunction negative_map_distance(const MapField& u, const VertexSubset& inner, double clamp = -1.0);

  [[nodiscard]] int size() const { return static_cast<int>(table_.rows()); }
  [[nodiscard]] double operator()(Vertex x, Vertex y) const { return table_(x, y); }
  [[nodiscard]] const Eigen::MatrixXd& table() const { return table_; }

 private:
  Eigen::MatrixXd table_;
};

// Exhaustive reverse-triangle check over all triples (n <= 64) or `samples`
// random triples.
CheckReport check_reverse_triangle(const TwoVarFunction& f, int samples = 20000, std::uint64_t seed = 1);

struct HopfLaxResult {
  double t = 0.0;
  ScalarField value;                          // f_t
  std::vector<std::vector<Vertex>> argmins;   // ascending vertex ids
  ScalarField d_minus;
  ScalarField d_plus;
};

// f_t(x) = min_y f(x, y) + d²(x, y) / (2t); the argmin set collects every y
// within 1e-12 · max(1, |f_t(x)|) of the minimum.
HopfLaxResult two_var_evolve(const DomainGraph& g, const TwoVarFunction& f, double t);

// Time-sweep table rows (t, vertex, f_t, Dminus, Dplus, argmin_count).
void write_time_sweep_csv(std::ostream& out, const std::vector<HopfLaxResult>& sweep);
nlohmann::json to_json(const HopfLaxResult& r);

// max over y != x with d(x, y) <= radius of f(x, y)⁻ / d(x, y).
double tilt(const DomainGraph& g, const TwoVarFunction& f, Vertex x, double radius);

// max over neighbors of (h(x) - h(y))⁺ / ℓ_xy.
double descending_slope(const DomainGraph& g, const ScalarField& h, Vertex x);

// One-sided difference quotients of t -> f_t(x) against -(D∓)² / (2t²).
CheckReport check_time_derivative(const DomainGraph& g, const TwoVarFunction& f, Vertex x, double t, double dt);
// D⁻_t <= D⁺_t <= D⁻_s for consecutive times t < s of `times`, at every vertex.
CheckReport check_dpm_monotonicity(const DomainGraph& g, const TwoVarFunction& f, std::vector<double> times);
// D⁺_t / t <= |∂⁻ f_t| + tilt(f) + 2 h / t at every vertex.
CheckReport check_slope_bound(const DomainGraph& g, const TwoVarFunction& f, double t);
// |f_0 - f_t| <= ½ ∫_0^t (|∂⁻ f_s| + tilt f)² ds + h, midpoint rule in s.
CheckReport check_integral_bound(const DomainGraph& g, const TwoVarFunction& f, double t, int steps);
// Small-t limits of -f_t/t and D±²/(2t²) against ½ tilt² at x.
CheckReport check_duality(const DomainGraph& g, const TwoVarFunction& f, Vertex x, const std::vector<double>& t_grid);

// Lip(Q_t f) over edges against √(2t Osc f) (1 + 3h / √(2t Osc f + ε)).
CheckReport check_hopflax_lip(const DomainGraph& g, const ScalarField& f, double t);
// Central difference of Q_t f in t against -½ lip²(Q_t f), away from shocks.
CheckReport check_hamilton_jacobi(const DomainGraph& g, const ScalarField& f, double t, double dt);
// Osc(Q_t f) <= Osc f, inf f <= Q_t f <= sup f, Q_{t+s} f <= Q_t Q_s f and
// monotonicity in t.
CheckReport check_hopflax_basics(const DomainGraph& g, const ScalarField& f, double t, double s);

struct ProxResult {
  double T = 0.0;
  ScalarField value;                 // Q_T f
  std::vector<Vertex> minimizer;     // lowest-index minimizer
  std::vector<int> multiplicity;     // number of minimizers
  ScalarField density;               // Σ_{F(y) = x} m(y) / m(x)
  double smoothing_radius = 0.0;
  ScalarField smoothed_density;      // pushforward mass of B_ρ(x) / m(B_ρ(x)); empty if ρ = 0
};

// Pointwise minimizers of f(y) + d²(x, y) / (2T). A positive smoothing radius
// also records the pushforward density averaged over balls of that radius.
ProxResult prox_map(const DomainGraph& g, const ScalarField& f, double T, double smoothing_radius = 0.0);
nlohmann::json to_json(const ProxResult& r);

// Minimal-value identity and the range bound d²(x, F_T x) <= 2T Osc f, exact.
CheckReport check_prox_identities(const DomainGraph& g, const ScalarField& f, const ProxResult& prox);

// Density of the pushforward on a path graph, estimated as the slope of the
// least-squares line of cumulative pushforward mass against cumulative
// measure, over vertices whose position lies in [lo, hi].
double path_density_fit(const DomainGraph& g, const ProxResult& prox, double lo, double hi);

// Pushforward bound max density <= e^{T(C + 2K⁻ osc)} (1 + allowance). Uses
// the smoothed density when the prox result has one. The precondition Δf <= C
// is verified first; Δ(Q_T f) <= C + 2K⁻ osc is recorded alongside.
CheckReport check_pushforward_bound(const DomainGraph& g, const ScalarField& f, const ProxResult& prox, double C,
                                    double K, double osc, double allowance = 0.25);

// h_s(Q_t f)(x) <= h_s f(y) + e^{-2Ks} d²(x, y) / (2t) for every x and every
// minimizer y of Q_t f(x), for each s in s_grid. Exact gate when K = 0,
// diagnostic otherwise.
CheckReport check_key_pointwise_bound(const DomainGraph& g, const ScalarField& f, double t,
                                      const std::vector<double>& s_grid);

}  // namespace npc
