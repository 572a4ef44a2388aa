#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "npc/verifier.hpp"

namespace npc {

// A scenario fixes a domain family, a target, boundary data and a list of
// checks. Lengths are physical, so the same scenario can be instantiated at
// several mesh spacings.

struct GraphSpec {
  std::string family = "torus";  // "torus" (side), "path" (length) or "hyperbolic" (disk radius)
  double size = 2.0;
  double spacing = 0.0625;
};

DomainGraph build_graph(const GraphSpec& spec);

// Planar coordinates used to place regions, balls and boundary data: grid
// coordinates on tori and paths, the spatial hyperboloid coordinates on disks.
std::array<double, 2> planar_position(const DomainGraph& g, Vertex v);
Vertex nearest_vertex(const DomainGraph& g, const std::array<double, 2>& point);

struct RegionSpec {
  std::string kind = "box";  // "box", "ball" or "all"
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.0;
};

VertexSubset build_region(const DomainGraph& g, const RegionSpec& spec);

struct BoundarySpec {
  std::string family = "fourier";  // "fourier", "affine" or "constant"
  double amplitude = 1.0;
  int modes = 3;
  std::uint64_t seed = 1;
  std::array<double, 2> slope{1.0, 0.0};  // affine family, first coordinate only
};

// The boundary family evaluated at every vertex. Fourier data reach a tree
// target by folding the plane onto the legs at tree vertex 0, and the
// hyperbolic plane through the exponential map at the origin.
MapField boundary_map(const DomainGraph& g, const TargetSpacePtr& space, const BoundarySpec& spec);

struct BallSpec {
  std::array<double, 2> center{1.0, 1.0};
  double radius = 0.25;
  double lambda = 0.5;
};

struct CheckSpec {
  std::string name;
  nlohmann::json options = nlohmann::json::object();
};

const std::vector<std::string>& known_checks();

struct Scenario {
  std::string name = "scenario";
  GraphSpec graph;
  nlohmann::json target = {{"kind", "euclidean"}, {"dim", 1}};
  RegionSpec region;
  BoundarySpec boundary;
  SolverParams solver;
  BallSpec ball;
  int probes = 32;
  VerifierOptions options;
  std::vector<CheckSpec> checks;
  std::vector<double> refinement;  // mesh spacings, coarse to fine
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

// Frozen empirical constants, fitted once on calibration seeds.
struct Calibration {
  double margin = 1.5;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, double> constants;          // check name -> max allowed c_emp
  std::map<std::string, MoserConstants> moser;      // graph family -> (C1, C2)
  double moser_lambda = 0.5;
};

nlohmann::json to_json(const Calibration& c);
Calibration calibration_from_json(const nlohmann::json& j);
Calibration load_calibration(const std::string& path);
// data/calibration.json in the source tree.
std::string default_calibration_path();

struct SolvedScenario {
  Scenario scenario;
  std::shared_ptr<const DomainGraph> graph;
  VertexSubset region;
  SolveResult solve;
  Vertex center = 0;
  std::vector<TargetPoint> probes;  // farthest-point sample of the solution's image
};

// Builds the Dirichlet problem at the scenario's spacing and solves it. A
// coarser solution, if given, seeds the interior by nearest-position lookup.
SolvedScenario solve_scenario(const Scenario& s, const SolvedScenario* coarse = nullptr);

// One check by name. Constants in `cal`, when present, are compared with the
// measured c_emp (or, for the sup bound, used as C1 and C2).
CheckReport run_check(const SolvedScenario& s, const CheckSpec& check, const Calibration* cal = nullptr);
std::vector<CheckReport> run_checks(const SolvedScenario& s, const Calibration* cal = nullptr);

// A report counts as a hard gate unless it is diagnostic.
bool all_hard_gates_pass(const std::vector<CheckReport>& reports);

struct RefinementLevel {
  double spacing = 0.0;
  int sweeps = 0;
  double residual = 0.0;
  std::map<std::string, double> constants;  // reverse_poincare, lipschitz_estimate, local_boundedness, zzz, rademacher
};

struct RefinementStudy {
  std::string scenario;
  std::vector<RefinementLevel> levels;  // decreasing mesh scale
  std::vector<CheckReport> trends;
};

// Solves the scenario at its first `levels` refinement spacings (warm-started
// from the previous level) and evaluates the trend criteria.
RefinementStudy refine(const Scenario& s, int levels);
nlohmann::json to_json(const RefinementStudy& r);
void write_refinement_csv(std::ostream& out, const RefinementStudy& r);

// Scalar instances for the sup-bound constants: harmonic (β = 0) or
// Poisson subsolutions Δf = -β/R² with Fourier boundary data.
struct MoserInstance {
  std::shared_ptr<const DomainGraph> graph;
  VertexSubset region;
  ScalarField f;
  Vertex center = 0;
  double R = 0.0;
  double r = 0.0;
  double lambda = 0.5;
  double beta = 0.0;
};

const std::vector<std::string>& moser_families();
MoserInstance moser_instance(const std::string& family, std::uint64_t seed, double beta);

// Scenarios whose constants are calibrated and then checked on fresh seeds.
std::vector<Scenario> calibration_suite();
Scenario with_seed(const Scenario& s, std::uint64_t seed);
Scenario at_spacing(const Scenario& s, double spacing);

// Fits constants: max over seeds × margin.
Calibration calibrate(const std::vector<Scenario>& suite, const std::vector<std::uint64_t>& seeds, double margin = 1.5);

// CheckReports as a flat CSV table (name, gate, pass, max_violation, tolerance, observations, measured...).
void write_reports_csv(std::ostream& out, const std::vector<CheckReport>& reports);

}  // namespace npc
