#include "npc/harmonic.hpp"

#include <algorithm>
#include <random>

#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include "npc/parallel.hpp"

namespace npc {
namespace {

// Conductance-weighted barycenter of the neighbor values of x.
TargetPoint local_barycenter(const DomainGraph& g, const MapField& u, Vertex x) {
  std::vector<TargetPoint> points;
  std::vector<double> weights;
  for (const Neighbor& nb : g.neighbors(x)) {
    points.push_back(u[nb.v]);
    weights.push_back(nb.conductance);
  }
  return u.target().barycenter(points, weights, &u[x]);
}

}  // namespace

DirichletProblem::DirichletProblem(std::shared_ptr<const DomainGraph> graph_, VertexSubset region_,
                                   TargetSpacePtr space_, std::vector<std::optional<TargetPoint>> boundary_,
                                   SolverParams params_)
    : graph(std::move(graph_)),
      region(std::move(region_)),
      space(std::move(space_)),
      boundary(std::move(boundary_)),
      params(params_) {
  if (!graph || !space) throw InvalidArgument("DirichletProblem: null graph or target");
  const int n = graph->vertex_count();
  if (region.universe() != static_cast<std::size_t>(n)) throw InvalidArgument("DirichletProblem: region does not match graph");
  if (static_cast<int>(boundary.size()) != n) throw InvalidArgument("DirichletProblem: boundary table size mismatch");
  if (region.interior().empty()) throw InvalidArgument("DirichletProblem: region has no interior vertices");
  if (region.boundary().empty()) throw InvalidArgument("DirichletProblem: region has no boundary vertices");
  for (Vertex x = 0; x < n; ++x) {
    if (boundary[x].has_value() != region.is_boundary(x))
      throw InvalidArgument("DirichletProblem: boundary values must be given exactly on boundary vertices");
    if (boundary[x]) space->validate(*boundary[x]);
  }
  if (params.max_sweeps < 1 || !(params.tolerance > 0.0)) throw InvalidArgument("DirichletProblem: bad solver parameters");
}

std::vector<std::optional<TargetPoint>> boundary_from_map(const VertexSubset& U, const MapField& u) {
  std::vector<std::optional<TargetPoint>> out(u.size());
  for (Vertex x : U.boundary()) out[x] = u[x];
  return out;
}

double residual(const DomainGraph& g, const MapField& u, const VertexSubset& U) {
  double worst = 0.0;
  for (Vertex x : U.interior()) worst = std::max(worst, u.target().distance(u[x], local_barycenter(g, u, x)));
  return worst;
}

SolveResult solve_dirichlet(const DirichletProblem& p, const MapField* initial) {
  const DomainGraph& g = *p.graph;
  const TargetSpace& Y = *p.space;
  const auto& bnd = p.region.boundary();

  std::vector<TargetPoint> bvalues;
  for (Vertex x : bnd) bvalues.push_back(*p.boundary[x]);
  TargetPoint start;
  if (p.params.start == SolverParams::Start::BoundaryBarycenter) {
    const std::vector<double> ones(bvalues.size(), 1.0);
    start = Y.barycenter(bvalues, ones);
  }
  std::mt19937_64 rng(p.params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, bvalues.size() - 1);

  if (initial && (initial->size() != g.vertex_count() || !initial->space || initial->space->to_json() != Y.to_json()))
    throw InvalidArgument("solve_dirichlet: initial map does not match the problem");
  std::vector<TargetPoint> values(g.vertex_count(), bvalues.front());
  for (Vertex x : p.region.members()) {
    if (p.region.is_boundary(x)) values[x] = *p.boundary[x];
    else if (initial) values[x] = (*initial)[x];
    else values[x] = p.params.start == SolverParams::Start::BoundaryBarycenter ? start : bvalues[pick(rng)];
  }
  SolveResult result;
  result.u = MapField(p.space, std::move(values));
  MapField& u = result.u;
  result.energy_trace.push_back(dirichlet_energy(g, u, p.region));

  const auto& interior = p.region.interior();
  std::vector<TargetPoint> next;
  for (int sweep = 1; sweep <= p.params.max_sweeps; ++sweep) {
    double moved = 0.0;
    if (p.params.mode == SolverParams::Mode::GaussSeidel) {
      for (Vertex x : interior) {
        const TargetPoint b = local_barycenter(g, u, x);
        moved = std::max(moved, Y.distance(u[x], b));
        u[x] = b;
      }
    } else {
      next = u.values;
      std::vector<double> move(interior.size(), 0.0);
      parallel_for(interior.size(), [&](std::size_t k) {
        const Vertex x = interior[k];
        next[x] = local_barycenter(g, u, x);
        move[k] = Y.distance(u[x], next[x]);
      });
      for (double m : move) moved = std::max(moved, m);
      u.values.swap(next);
    }
    result.sweeps = sweep;
    result.energy_trace.push_back(dirichlet_energy(g, u, p.region));
    if (moved <= p.params.tolerance) {
      result.residual = residual(g, u, p.region);
      if (result.residual <= p.params.tolerance) {
        result.converged = true;
        return result;
      }
    }
  }
  result.residual = residual(g, u, p.region);
  result.converged = result.residual <= p.params.tolerance;
  return result;
}

MapField linear_oracle(const DirichletProblem& p) {
  if (p.space->kind() != TargetSpace::Kind::Euclidean) throw InvalidArgument("linear_oracle: target must be Euclidean");
  const DomainGraph& g = *p.graph;
  const int dim = p.space->coord_count();
  const auto& interior = p.region.interior();
  std::vector<int> index(g.vertex_count(), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) index[interior[k]] = static_cast<int>(k);

  const int m = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, dim);
  for (int k = 0; k < m; ++k) {
    const Vertex x = interior[k];
    double diag = 0.0;
    for (const Neighbor& nb : g.neighbors(x)) {
      diag += nb.conductance;
      if (index[nb.v] >= 0) {
        triplets.emplace_back(k, index[nb.v], -nb.conductance);
      } else {
        const TargetPoint& b = *p.boundary[nb.v];
        for (int i = 0; i < dim; ++i) rhs(k, i) += nb.conductance * b[i];
      }
    }
    triplets.emplace_back(k, k, diag);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw ConvergenceError("linear_oracle: factorization failed", 0.0);
  const Eigen::MatrixXd sol = solver.solve(rhs);

  std::vector<TargetPoint> values(g.vertex_count(), *p.boundary[p.region.boundary().front()]);
  for (Vertex x : p.region.boundary()) values[x] = *p.boundary[x];
  for (int k = 0; k < m; ++k) {
    TargetPoint q = TargetPoint::zeros(dim);
    for (int i = 0; i < dim; ++i) q[i] = sol(k, i);
    values[interior[k]] = q;
  }
  return MapField(p.space, std::move(values));
}

nlohmann::json to_json(const SolverParams& params) {
  return {{"max_sweeps", params.max_sweeps},
          {"tolerance", params.tolerance},
          {"mode", params.mode == SolverParams::Mode::GaussSeidel ? "gauss_seidel" : "jacobi"},
          {"start", params.start == SolverParams::Start::BoundaryBarycenter ? "boundary_barycenter" : "random_boundary_value"},
          {"seed", params.seed}};
}

SolverParams solver_params_from_json(const nlohmann::json& pj) {
  SolverParams params;
  params.max_sweeps = pj.value("max_sweeps", params.max_sweeps);
  params.tolerance = pj.value("tolerance", params.tolerance);
  const std::string mode = pj.value("mode", std::string("gauss_seidel"));
  if (mode == "jacobi") params.mode = SolverParams::Mode::Jacobi;
  else if (mode != "gauss_seidel") throw InvalidArgument("problem: unknown solver mode " + mode);
  const std::string start = pj.value("start", std::string("boundary_barycenter"));
  if (start == "random_boundary_value") params.start = SolverParams::Start::RandomBoundaryValue;
  else if (start != "boundary_barycenter") throw InvalidArgument("problem: unknown start " + start);
  params.seed = pj.value("seed", params.seed);
  return params;
}

nlohmann::json to_json(const DirichletProblem& p) {
  nlohmann::json bnd = nlohmann::json::array();
  for (Vertex x : p.region.boundary()) bnd.push_back({{"vertex", x}, {"point", p.space->point_to_json(*p.boundary[x])}});
  return {{"graph", to_json(*p.graph)},
          {"region", p.region.members()},
          {"space", p.space->to_json()},
          {"boundary", bnd},
          {"params", to_json(p.params)}};
}

DirichletProblem problem_from_json(const nlohmann::json& j) {
  auto graph = std::make_shared<const DomainGraph>(graph_from_json(j.at("graph")));
  std::vector<bool> mask(graph->vertex_count(), false);
  for (const auto& v : j.at("region")) {
    const int x = v.get<int>();
    if (!graph->valid_vertex(x)) throw InvalidArgument("problem: region vertex out of range");
    mask[x] = true;
  }
  VertexSubset region(*graph, std::move(mask));
  TargetSpacePtr space = space_from_json(j.at("space"));
  std::vector<std::optional<TargetPoint>> boundary(graph->vertex_count());
  for (const auto& b : j.at("boundary")) {
    const int x = b.at("vertex").get<int>();
    if (!graph->valid_vertex(x)) throw InvalidArgument("problem: boundary vertex out of range");
    boundary[x] = space->point_from_json(b.at("point"));
  }
  const SolverParams params = j.contains("params") ? solver_params_from_json(j.at("params")) : SolverParams{};
  return DirichletProblem(std::move(graph), std::move(region), std::move(space), std::move(boundary), params);
}

nlohmann::json to_json(const SolveResult& r) {
  return {{"u", to_json(r.u)},
          {"residual", r.residual},
          {"energy_trace", r.energy_trace},
          {"sweeps", r.sweeps},
          {"converged", r.converged}};
}

SolveResult result_from_json(const nlohmann::json& j) {
  SolveResult r;
  r.u = map_from_json(j.at("u"));
  r.residual = j.at("residual").get<double>();
  r.energy_trace = j.at("energy_trace").get<std::vector<double>>();
  r.sweeps = j.at("sweeps").get<int>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

}  // namespace npc
