#pragma once

#include <utility>
#include <vector>

#include "npc/energy.hpp"
#include "npc/harmonic.hpp"
#include "npc/hopf_lax.hpp"

namespace npc {

/// Seeded smooth function R² → R^k built from cosine plane waves: component k
/// is Σ_{m=1..modes} a_km / m · cos(π m ⟨ω_km, (x, y)⟩ + φ_km) with a_km
/// uniform in [-1, 1], ω_km a uniform unit vector and φ_km a uniform phase.
class FourierField {
 public:
  FourierField(int components, int modes, std::uint64_t seed);
  [[nodiscard]] double operator()(int component, double x, double y) const;
  [[nodiscard]] int components() const { return components_; }

 private:
  struct Wave {
    double amplitude, kx, ky, phase;
  };
  int components_;
  std::vector<std::vector<Wave>> waves_;
};

/// Per-check tuning shared by the scenario runner and the direct API.
struct VerifierOptions {
  /// Energy-density scales as multiples of the mesh scale, decreasing.
  std::vector<double> energy_scales_h{4.5, 3.5, 2.5};
  /// tol(h) = c · h · lip² for the convexity-Laplacian check.
  double c_convexity = 1.0;
  /// ε(h) = c · h · lip² for the ZZZ check.
  double c_zzz = 1.0;
  /// Allowed fraction of ZZZ violations.
  double zzz_fraction = 0.05;
  /// Maps with a larger barycenter residual are rejected as unsolved.
  double residual_limit = 1e-9;
  /// Rademacher median relative gap limit.
  double rademacher_gap = 0.10;
  /// Perturbation probes added to the barycenter when approximating inf over o.
  int perturbation_probes = 16;
};

/// Scales for energy_density on `g` from the multiples in `opt`.
std::vector<double> energy_scales(const DomainGraph& g, const VerifierOptions& opt);

/// Δ d_Y(u(·), p) ≥ 0 at interior vertices for every probe. On a solved map
/// this is the discrete Jensen inequality for the barycenter fixed point, up
/// to -(Σ_y w_xy / m(x)) · (local residual), which is subtracted before the
/// 1e-8 gate. Throws if the map's residual exceeds `opt.residual_limit`.
CheckReport check_subharmonicity(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                                 const std::vector<TargetPoint>& probes, const VerifierOptions& opt = {});

/// Δ d_Y²(u(·), p) ≥ λ (d + 2) e₂² - c h lip² at interior vertices where e₂ is defined.
CheckReport check_convexity_laplacian(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                                      const std::vector<TargetPoint>& probes, double lambda2,
                                      const VerifierOptions& opt = {});

/// sup_{B_λr} d_Y(u, o) ≤ C √(avg_{B_r} d_Y²(u, o)); records C_emp over probes.
/// Requires B_2r(center) ⊂ U.
CheckReport check_local_boundedness(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                    double r, double lambda, const std::vector<TargetPoint>& probes);

/// c_emp = r² (1-λ)² ∫_{B_λr}(e₂² + lip²) / inf_o ∫_{B_r} d_Y²(u, o).
/// The infimum is approximated by the barycenter of u over B_r and a few
/// perturbations of it towards far image points.
CheckReport check_reverse_poincare(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                   double r, double lambda, const VerifierOptions& opt = {});

/// C_emp = r · Lip(u|B_r) / inf_o √(avg_{B_2r} d_Y²(u, o)), Lip over all vertex
/// pairs of B_r with graph distances. Requires B_2r(center) ⊂ U.
CheckReport check_lipschitz_estimate(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                     double r, const VerifierOptions& opt = {});

/// C_emp for nested radii; records whether it is non-increasing in r.
CheckReport check_lipschitz_nested(const DomainGraph& g, const MapField& u, const VertexSubset& U, Vertex center,
                                   std::vector<double> radii, const VerifierOptions& opt = {});

/// Δ(lip²/2) ≥ K lip² - c h lip² at vertices whose neighbors are all interior.
/// max_violation is the violation fraction; the gate is opt.zzz_fraction.
/// On graphs with nonzero nominal curvature the report is a diagnostic.
CheckReport check_zzz(const DomainGraph& g, const MapField& u, const VertexSubset& U, const VerifierOptions& opt = {});

/// weak_gradient ≤ lip_slope everywhere (exact), and the median relative gap
/// over interior vertices with positive lip is at most opt.rademacher_gap.
CheckReport check_rademacher(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                             const std::vector<TargetPoint>& probes, const VerifierOptions& opt = {});

/// Constants of the sup bound for subsolutions.
struct MoserConstants {
  double C1 = 0.0;
  double C2 = 0.0;
};

/// Measured sides of the sup bound, before comparing with constants.
struct MoserMeasurement {
  double sup_positive = 0.0;      ///< max over B_λr of f⁺
  double average_positive = 0.0;  ///< average of f⁺ over B_r
  double beta_term = 0.0;         ///< β r² / R²
  double precondition_violation = 0.0;  ///< max over interior of -R⁻²(αf + β) - Δf
};

MoserMeasurement measure_moser(const DomainGraph& g, const ScalarField& f, const VertexSubset& U, Vertex center,
                               double R, double r, double lambda, double alpha, double beta);

/// ‖f⁺‖_{L∞(B_λr)} ≤ C1 avg_{B_r} f⁺ + β (r²/R²) C2, after verifying
/// Δf ≥ -R⁻²(αf + β) on the interior of U (failure is reported, not thrown).
CheckReport check_moser_conclusion(const DomainGraph& g, const ScalarField& f, const VertexSubset& U, Vertex center,
                                   double R, double r, double lambda, double alpha, double beta,
                                   const MoserConstants& constants);

/// Harmonic extensions on L×L flat tori (spacing 1, box [1, L-1]²) with
/// boundary oscillation ∝ L^exponent; the max lip over the central L/2 box
/// must drop by ≥ 1.8 · 2^(-exponent) per doubling of L (1.8 for bounded data).
CheckReport liouville_experiment(const std::vector<int>& sizes, double boundary_scale_exponent,
                                 std::uint64_t seed = 1);

/// f(x, y) ≤ f(x̄, ȳ) + F_{x̄ȳ}(x) + F_{ȳx̄}(y) over B'×B' with f = -d_u,
/// where F_{x̄ȳ}(z) = (d_u²(z, x̄) - d²(u(z), p) + D²/4) / D, D = d_u(x̄, ȳ)
/// and p the midpoint of u(x̄), u(ȳ). Equality at (x̄, ȳ) is checked too.
/// Δ F_{x̄ȳ}(x̄) is recorded as a diagnostic.
CheckReport check_auxiliary_split(const DomainGraph& g, const MapField& u, const VertexSubset& inner,
                                  const std::vector<std::pair<Vertex, Vertex>>& pairs);

/// Solves Δf = source on the interior of U with f = boundary on ∂U (sparse LDLT).
ScalarField solve_poisson(const DomainGraph& g, const VertexSubset& U, const ScalarField& boundary,
                          const ScalarField& source);

/// Approximate argmin over o of Σ_{ball} d²(u, o) m: the barycenter plus
/// `probes` perturbations. Returns the minimal value and writes the point.
double min_second_moment(const DomainGraph& g, const MapField& u, const std::vector<ReachedVertex>& ball, int probes,
                         TargetPoint* best = nullptr);

}  // namespace npc
