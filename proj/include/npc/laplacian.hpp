#pragma once

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "npc/check_report.hpp"
#include "npc/domain_graph.hpp"

namespace npc {

/// Per-vertex real values.
using ScalarField = Eigen::VectorXd;

/// Throws InvalidArgument unless `f` has one finite value per vertex.
void require_field(const DomainGraph& g, const ScalarField& f, const char* what);

/// Δf(x) = m(x)^-1 Σ_y w_xy (f(y) - f(x)).
ScalarField laplacian_apply(const DomainGraph& g, const ScalarField& f);

/// Pointwise upper Laplacian (limsup of (h_t f - f)/t at t = 0). On a finite
/// graph the limit exists and equals Δf(x), so distributional and pointwise
/// Laplacian bounds coincide.
double tilde_delta(const DomainGraph& g, const ScalarField& f, Vertex x);

/// Heat semigroup h_t = exp(tΔ) on a graph.
///
/// Graphs with at most `kSpectralLimit` vertices use a dense
/// eigendecomposition of the symmetrized generator M^{-1/2} L M^{-1/2};
/// larger graphs use Crank-Nicolson with step <= mesh_scale^2 / 32.
class HeatSemigroup {
 public:
  enum class Method { Auto, Spectral, CrankNicolson };
  static constexpr int kSpectralLimit = 2048;

  explicit HeatSemigroup(const DomainGraph& g, Method method = Method::Auto);

  [[nodiscard]] Method method() const { return method_; }
  [[nodiscard]] int vertex_count() const { return static_cast<int>(measure_.size()); }

  /// h_t f. Throws for t < 0.
  [[nodiscard]] ScalarField apply(const ScalarField& f, double t) const;
  /// Density ρ_t[x] of h_t δ_x with respect to the vertex measure.
  [[nodiscard]] ScalarField kernel(Vertex x, double t) const;

 private:
  Method method_;
  Eigen::VectorXd measure_;
  // Spectral route.
  Eigen::VectorXd sqrt_measure_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  // Crank-Nicolson route: M u' = A u with A the conductance Laplacian.
  Eigen::SparseMatrix<double> stiffness_;
  double max_step_ = 0.0;
};

ScalarField heat_semigroup(const DomainGraph& g, const ScalarField& f, double t);
ScalarField heat_kernel(const DomainGraph& g, Vertex x, double t);

enum class BoundDirection { Upper, Lower };

/// Claim "Δf <= bound" (Upper) or "Δf >= bound" (Lower) on `region`.
struct LaplacianBoundClaim {
  ScalarField f;
  ScalarField bound;
  BoundDirection direction = BoundDirection::Upper;
  VertexSubset region;
  double tolerance = 0.0;
};

/// Checks the claim pointwise on its region (interior and boundary members).
CheckReport verify_claim(const DomainGraph& g, const LaplacianBoundClaim& claim);

/// |Σ f·h_t h·m - Σ h·h_t f·m| <= 1e-10 · scale.
CheckReport check_heat_symmetry(const HeatSemigroup& heat, const DomainGraph& g, const ScalarField& f,
                                const ScalarField& h, double t);
CheckReport check_heat_symmetry(const DomainGraph& g, const ScalarField& f, const ScalarField& h, double t);

/// Weak maximum principle: inf f <= h_t f <= sup f, and order preservation
/// against `upper` whenever f <= upper pointwise.
CheckReport check_maximum_principle(const HeatSemigroup& heat, const ScalarField& f, const ScalarField& upper,
                                    double t);

/// h_t f - f <= ∫_0^t h_s g ds (or >= for Lower claims), with composite
/// Simpson quadrature in s; the error estimate comes from step halving.
/// `quad_steps` is raised until the step resolves the fastest heat mode.
CheckReport check_duhamel_bound(const HeatSemigroup& heat, const DomainGraph& g, const LaplacianBoundClaim& claim,
                                double t, int quad_steps = 64);
CheckReport check_duhamel_bound(const DomainGraph& g, const LaplacianBoundClaim& claim, double t,
                                int quad_steps = 64);

/// Δ(f1 ∧ f2) <= χ_{f1<=f2} g1 + χ_{f2<f1} g2 on `region`, given Δf_i <= g_i there.
CheckReport check_min_stability(const DomainGraph& g, const ScalarField& f1, const ScalarField& f2,
                                const ScalarField& g1, const ScalarField& g2, const VertexSubset& region);

/// Max over B_R(center) of Δ(½ d²(·, center)). Diagnostic only.
CheckReport laplacian_comparison_diag(const DomainGraph& g, Vertex center, double radius);

}  // namespace npc
