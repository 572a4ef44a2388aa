#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npc/energy.hpp"

namespace npc {

struct SolverParams {
  enum class Mode { GaussSeidel, Jacobi };
  enum class Start { BoundaryBarycenter, RandomBoundaryValue };

  int max_sweeps = 100000;
  double tolerance = 1e-10;
  Mode mode = Mode::GaussSeidel;
  Start start = Start::BoundaryBarycenter;
  /// Seeds the random start. Sweeps always visit interior vertices in
  /// ascending index order.
  std::uint64_t seed = 0;
};

/// Minimize the discrete energy over maps U -> Y with prescribed values on ∂U.
/// `boundary[x]` holds a value exactly when x is a boundary vertex of U.
struct DirichletProblem {
  std::shared_ptr<const DomainGraph> graph;
  VertexSubset region;
  TargetSpacePtr space;
  std::vector<std::optional<TargetPoint>> boundary;
  SolverParams params;

  DirichletProblem(std::shared_ptr<const DomainGraph> graph, VertexSubset region, TargetSpacePtr space,
                   std::vector<std::optional<TargetPoint>> boundary, SolverParams params = {});
};

/// Boundary values taken from `u` on ∂U.
std::vector<std::optional<TargetPoint>> boundary_from_map(const VertexSubset& U, const MapField& u);

struct SolveResult {
  MapField u;
  double residual = 0.0;
  std::vector<double> energy_trace;  ///< energy before the first sweep, then after each sweep
  int sweeps = 0;
  bool converged = false;
};

/// Barycenter sweeps until residual <= tolerance or max_sweeps is reached (then
/// `converged` is false). Values outside U are set to the first boundary value.
/// A non-null `initial` map replaces the configured start on interior vertices.
SolveResult solve_dirichlet(const DirichletProblem& p, const MapField* initial = nullptr);

/// max over interior x of d_Y(u(x), conductance-weighted barycenter of u on the neighbors of x).
double residual(const DomainGraph& g, const MapField& u, const VertexSubset& U);

/// Exact discrete-harmonic extension for Euclidean targets (sparse LDLT per component).
MapField linear_oracle(const DirichletProblem& p);

nlohmann::json to_json(const SolverParams& params);
SolverParams solver_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DirichletProblem& p);
DirichletProblem problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolveResult& r);
SolveResult result_from_json(const nlohmann::json& j);

}  // namespace npc
