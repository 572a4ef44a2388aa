#include "npc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "npc/parallel.hpp"

#ifndef NPC_DEFAULT_CALIBRATION
#define NPC_DEFAULT_CALIBRATION "data/calibration.json"
#endif

namespace npc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<double, 2> pair_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("scenario: expected a pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json to_json(const VerifierOptions& o) {
  return {{"energy_scales_h", o.energy_scales_h},     {"c_convexity", o.c_convexity},
          {"c_zzz", o.c_zzz},                         {"zzz_fraction", o.zzz_fraction},
          {"residual_limit", o.residual_limit},       {"rademacher_gap", o.rademacher_gap},
          {"perturbation_probes", o.perturbation_probes}};
}

// Fields present in `j` override `base`.
VerifierOptions options_from_json(const nlohmann::json& j, VerifierOptions base = {}) {
  base.energy_scales_h = j.value("energy_scales_h", base.energy_scales_h);
  base.c_convexity = j.value("c_convexity", base.c_convexity);
  base.c_zzz = j.value("c_zzz", base.c_zzz);
  base.zzz_fraction = j.value("zzz_fraction", base.zzz_fraction);
  base.residual_limit = j.value("residual_limit", base.residual_limit);
  base.rademacher_gap = j.value("rademacher_gap", base.rademacher_gap);
  base.perturbation_probes = j.value("perturbation_probes", base.perturbation_probes);
  return base;
}

// Runs task(i) for i in [0, count) on up to worker_count() threads and
// rethrows the first exception after all workers have joined.
template <class Task>
void run_tasks(std::size_t count, Task&& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Evenly spread vertex pairs of `inner` for the auxiliary split, including
// one degenerate pair.
std::vector<std::pair<Vertex, Vertex>> spread_pairs(const VertexSubset& inner, int count) {
  const auto& m = inner.members();
  std::vector<std::pair<Vertex, Vertex>> pairs;
  if (m.empty() || count <= 0) return pairs;
  pairs.emplace_back(m.front(), m.front());
  for (int k = 1; k < count; ++k) {
    const std::size_t a = (static_cast<std::size_t>(k) * 7919) % m.size();
    const std::size_t b = (static_cast<std::size_t>(k) * 104729 + m.size() / 2) % m.size();
    pairs.emplace_back(m[a], m[b]);
  }
  return pairs;
}

CheckReport failed_report(const std::string& name, const std::string& why) {
  CheckReport rep(name, GateClass::Exact);
  rep.pass = false;
  rep.max_violation = kInf;
  rep.note("error: " + why);
  return rep;
}

// Compares a measured constant with its frozen value, when one exists.
void apply_frozen(CheckReport& rep, const SolvedScenario& s, const Calibration* cal) {
  if (!cal) return;
  const std::string key = s.scenario.name + "/" + rep.name;
  auto it = cal->constants.find(key);
  if (it == cal->constants.end()) it = cal->constants.find(rep.name);
  if (it == cal->constants.end()) return;
  const double c = rep.measured.at("c_emp");
  rep.measured["frozen"] = it->second;
  rep.tolerance = 0.0;
  // The frozen comparison replaces the finiteness gate.
  rep.max_violation = std::isfinite(c) ? c - it->second : kInf;
  if (rep.max_violation > 0.0) rep.witnesses = {s.center};
  rep.settle();
}

double ratio_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 1.0;
  return *lo > 0.0 ? *hi / *lo : kInf;
}

}  // namespace

DomainGraph build_graph(const GraphSpec& spec) {
  if (!(spec.spacing > 0.0) || !(spec.size > 0.0)) throw InvalidArgument("build_graph: size and spacing must be positive");
  if (spec.family == "torus") {
    const int n = static_cast<int>(std::lround(spec.size / spec.spacing));
    return build_torus_grid(n, n, spec.spacing);
  }
  if (spec.family == "path") return build_path(static_cast<int>(std::lround(spec.size / spec.spacing)) + 1, spec.spacing);
  if (spec.family == "hyperbolic") return build_hyperbolic_disk(spec.size, spec.spacing);
  throw InvalidArgument("build_graph: unknown family " + spec.family);
}

std::array<double, 2> planar_position(const DomainGraph& g, Vertex v) {
  if (!g.has_positions()) throw InvalidArgument("planar_position: graph has no positions");
  const auto& p = g.positions().at(v);
  // Disk generators store hyperboloid coordinates with p[0] = cosh(radius).
  if (g.curvature_k() < 0.0) return {p[1], p[2]};
  return {p[0], p[1]};
}

Vertex nearest_vertex(const DomainGraph& g, const std::array<double, 2>& point) {
  Vertex best = 0;
  double bd = kInf;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto q = planar_position(g, v);
    const double d = std::hypot(q[0] - point[0], q[1] - point[1]);
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

VertexSubset build_region(const DomainGraph& g, const RegionSpec& spec) {
  if (spec.kind == "all") return VertexSubset::all(g);
  if (spec.kind == "ball") return ball(g, nearest_vertex(g, spec.center), spec.radius);
  if (spec.kind != "box") throw InvalidArgument("build_region: unknown kind " + spec.kind);
  std::vector<bool> mask(g.vertex_count(), false);
  const double eps = 1e-9;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto p = planar_position(g, v);
    mask[v] = p[0] >= spec.lo[0] - eps && p[0] <= spec.hi[0] + eps && p[1] >= spec.lo[1] - eps && p[1] <= spec.hi[1] + eps;
  }
  return VertexSubset(g, std::move(mask));
}

namespace {

// Planar vector data with `components` entries at (x, y).
std::vector<double> raw_data(const BoundarySpec& spec, const FourierField* field, int components, double x, double y) {
  std::vector<double> v(components, 0.0);
  if (spec.family == "fourier") {
    for (int k = 0; k < components; ++k) v[k] = spec.amplitude * (*field)(k, x, y);
  } else if (spec.family == "affine") {
    v[0] = spec.amplitude * (spec.slope[0] * x + spec.slope[1] * y);
  } else if (spec.family == "constant") {
    v[0] = spec.amplitude;
  } else {
    throw InvalidArgument("boundary_map: unknown family " + spec.family);
  }
  return v;
}

int data_components(const TargetSpace& Y) {
  switch (Y.kind()) {
    case TargetSpace::Kind::Euclidean:
      return Y.coord_count();
    case TargetSpace::Kind::Tree:
    case TargetSpace::Kind::Hyperbolic:
      return 2;
    case TargetSpace::Kind::Product: {
      const auto& P = static_cast<const ProductSpace&>(Y);
      return data_components(P.first()) + data_components(P.second());
    }
  }
  return 0;
}

// Sends planar data to the target. Tree: the angle picks one of the k legs at
// tree vertex 0 and the offset |v|·|sin(kθ/2)| vanishes on sector edges, so
// the fold is continuous.
TargetPoint place(const TargetSpace& Y, const double* v) {
  switch (Y.kind()) {
    case TargetSpace::Kind::Euclidean: {
      TargetPoint p = TargetPoint::zeros(Y.coord_count());
      for (int i = 0; i < Y.coord_count(); ++i) p[i] = v[i];
      return p;
    }
    case TargetSpace::Kind::Tree: {
      const auto& T = static_cast<const MetricTree&>(Y);
      std::vector<int> legs;
      for (int e = 0; e < static_cast<int>(T.edges().size()); ++e)
        if (T.edges()[e].a == 0 || T.edges()[e].b == 0) legs.push_back(e);
      const int k = static_cast<int>(legs.size());
      double theta = std::atan2(v[1], v[0]);
      if (theta < 0.0) theta += 2.0 * M_PI;
      const int sector = std::min(k - 1, static_cast<int>(theta / (2.0 * M_PI / k)));
      const TreeEdge& e = T.edges()[legs[sector]];
      const double offset = std::min(e.length, std::hypot(v[0], v[1]) * std::abs(std::sin(k * theta / 2.0)));
      return T.point(legs[sector], e.a == 0 ? offset : e.length - offset);
    }
    case TargetSpace::Kind::Hyperbolic:
      return HyperbolicPlane::from_polar(std::hypot(v[0], v[1]), std::atan2(v[1], v[0]));
    case TargetSpace::Kind::Product: {
      const auto& P = static_cast<const ProductSpace&>(Y);
      return P.join(place(P.first(), v), place(P.second(), v + data_components(P.first())));
    }
  }
  throw InvalidArgument("boundary_map: unsupported target");
}

}  // namespace

MapField boundary_map(const DomainGraph& g, const TargetSpacePtr& space, const BoundarySpec& spec) {
  if (!space) throw InvalidArgument("boundary_map: no target");
  const int components = data_components(*space);
  std::unique_ptr<FourierField> field;
  if (spec.family == "fourier") field = std::make_unique<FourierField>(components, spec.modes, spec.seed);
  std::vector<TargetPoint> values(g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto p = planar_position(g, v);
    const std::vector<double> data = raw_data(spec, field.get(), components, p[0], p[1]);
    values[v] = place(*space, data.data());
  }
  return MapField(space, std::move(values));
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "subharmonicity", "convexity_laplacian", "local_boundedness", "reverse_poincare", "lipschitz_estimate",
      "lipschitz_nested", "zzz", "rademacher", "auxiliary_split", "moser_conclusion", "liouville"};
  return names;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckSpec& c : s.checks) checks.push_back({{"name", c.name}, {"options", c.options}});
  return {{"name", s.name},
          {"graph", {{"family", s.graph.family}, {"size", s.graph.size}, {"spacing", s.graph.spacing}}},
          {"target", s.target},
          {"region",
           {{"kind", s.region.kind}, {"lo", s.region.lo}, {"hi", s.region.hi}, {"center", s.region.center},
            {"radius", s.region.radius}}},
          {"boundary",
           {{"family", s.boundary.family}, {"amplitude", s.boundary.amplitude}, {"modes", s.boundary.modes},
            {"seed", s.boundary.seed}, {"slope", s.boundary.slope}}},
          {"solver", to_json(s.solver)},
          {"ball", {{"center", s.ball.center}, {"radius", s.ball.radius}, {"lambda", s.ball.lambda}}},
          {"probes", s.probes},
          {"options", to_json(s.options)},
          {"checks", checks},
          {"refinement", s.refinement}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario: expected an object");
  Scenario s;
  s.name = j.value("name", s.name);
  if (j.contains("graph")) {
    const auto& gj = j.at("graph");
    s.graph.family = gj.value("family", s.graph.family);
    s.graph.size = gj.value("size", s.graph.size);
    s.graph.spacing = gj.value("spacing", s.graph.spacing);
  }
  if (j.contains("target")) s.target = j.at("target");
  if (j.contains("region")) {
    const auto& rj = j.at("region");
    s.region.kind = rj.value("kind", s.region.kind);
    if (rj.contains("lo")) s.region.lo = pair_from_json(rj.at("lo"));
    if (rj.contains("hi")) s.region.hi = pair_from_json(rj.at("hi"));
    if (rj.contains("center")) s.region.center = pair_from_json(rj.at("center"));
    s.region.radius = rj.value("radius", s.region.radius);
  }
  if (j.contains("boundary")) {
    const auto& bj = j.at("boundary");
    s.boundary.family = bj.value("family", s.boundary.family);
    s.boundary.amplitude = bj.value("amplitude", s.boundary.amplitude);
    s.boundary.modes = bj.value("modes", s.boundary.modes);
    s.boundary.seed = bj.value("seed", s.boundary.seed);
    if (bj.contains("slope")) s.boundary.slope = pair_from_json(bj.at("slope"));
  }
  if (j.contains("solver")) s.solver = solver_params_from_json(j.at("solver"));
  if (j.contains("ball")) {
    const auto& bj = j.at("ball");
    if (bj.contains("center")) s.ball.center = pair_from_json(bj.at("center"));
    s.ball.radius = bj.value("radius", s.ball.radius);
    s.ball.lambda = bj.value("lambda", s.ball.lambda);
  }
  s.probes = j.value("probes", s.probes);
  if (j.contains("options")) s.options = options_from_json(j.at("options"));
  if (j.contains("checks")) {
    for (const auto& c : j.at("checks")) {
      CheckSpec spec;
      if (c.is_string()) {
        spec.name = c.get<std::string>();
      } else {
        spec.name = c.at("name").get<std::string>();
        if (c.contains("options")) spec.options = c.at("options");
      }
      if (std::find(known_checks().begin(), known_checks().end(), spec.name) == known_checks().end())
        throw InvalidArgument("scenario: unknown check " + spec.name);
      s.checks.push_back(std::move(spec));
    }
  }
  s.refinement = j.value("refinement", s.refinement);
  if (s.probes < 1) throw InvalidArgument("scenario: probes must be positive");
  space_from_json(s.target);  // validates the target description
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_scenario: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("load_scenario: " + std::string(e.what()));
  }
  return scenario_from_json(j);
}

nlohmann::json to_json(const Calibration& c) {
  nlohmann::json moser = nlohmann::json::object();
  for (const auto& [family, k] : c.moser) moser[family] = {{"C1", k.C1}, {"C2", k.C2}};
  return {{"margin", c.margin},
          {"seeds", c.seeds},
          {"constants", c.constants},
          {"moser", moser},
          {"moser_lambda", c.moser_lambda}};
}

Calibration calibration_from_json(const nlohmann::json& j) {
  Calibration c;
  c.margin = j.value("margin", c.margin);
  c.seeds = j.value("seeds", c.seeds);
  if (j.contains("constants")) c.constants = j.at("constants").get<std::map<std::string, double>>();
  if (j.contains("moser"))
    for (const auto& [family, k] : j.at("moser").items()) c.moser[family] = {k.at("C1").get<double>(), k.at("C2").get<double>()};
  c.moser_lambda = j.value("moser_lambda", c.moser_lambda);
  return c;
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_calibration: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("load_calibration: " + std::string(e.what()));
  }
  return calibration_from_json(j);
}

std::string default_calibration_path() { return NPC_DEFAULT_CALIBRATION; }

SolvedScenario solve_scenario(const Scenario& s, const SolvedScenario* coarse) {
  SolvedScenario out;
  out.scenario = s;
  auto graph = std::make_shared<const DomainGraph>(build_graph(s.graph));
  out.graph = graph;
  out.region = build_region(*graph, s.region);
  if (out.region.interior().empty()) throw InvalidArgument("solve_scenario: region has no interior");
  TargetSpacePtr space = space_from_json(s.target);
  const MapField data = boundary_map(*graph, space, s.boundary);
  DirichletProblem problem(graph, out.region, space, boundary_from_map(out.region, data), s.solver);
  MapField initial;
  if (coarse) {
    if (coarse->solve.u.space->to_json() != space->to_json())
      throw InvalidArgument("solve_scenario: coarse solution has a different target");
    std::vector<TargetPoint> values(graph->vertex_count());
    for (Vertex v = 0; v < graph->vertex_count(); ++v)
      values[v] = coarse->solve.u[nearest_vertex(*coarse->graph, planar_position(*graph, v))];
    initial = MapField(space, std::move(values));
  }
  out.solve = solve_dirichlet(problem, coarse ? &initial : nullptr);
  out.center = nearest_vertex(*graph, s.ball.center);
  out.probes = farthest_point_probes(out.solve.u, s.probes, out.center);
  return out;
}

CheckReport run_check(const SolvedScenario& s, const CheckSpec& check, const Calibration* cal) {
  const Scenario& sc = s.scenario;
  const DomainGraph& g = *s.graph;
  const MapField& u = s.solve.u;
  const VerifierOptions opt = options_from_json(check.options, sc.options);
  const double r = check.options.value("radius", sc.ball.radius);
  const double lambda = check.options.value("lambda", sc.ball.lambda);
  try {
    CheckReport rep;
    if (check.name == "subharmonicity") {
      rep = check_subharmonicity(g, u, s.region, s.probes, opt);
    } else if (check.name == "convexity_laplacian") {
      rep = check_convexity_laplacian(g, u, s.region, s.probes, check.options.value("lambda2", 2.0), opt);
    } else if (check.name == "local_boundedness") {
      rep = check_local_boundedness(g, u, s.region, s.center, r, lambda, s.probes);
      apply_frozen(rep, s, cal);
    } else if (check.name == "reverse_poincare") {
      rep = check_reverse_poincare(g, u, s.region, s.center, r, lambda, opt);
      apply_frozen(rep, s, cal);
    } else if (check.name == "lipschitz_estimate") {
      rep = check_lipschitz_estimate(g, u, s.region, s.center, r, opt);
      apply_frozen(rep, s, cal);
    } else if (check.name == "lipschitz_nested") {
      const std::vector<double> radii = check.options.value("radii", std::vector<double>{0.5 * r, 0.75 * r, r});
      rep = check_lipschitz_nested(g, u, s.region, s.center, radii, opt);
    } else if (check.name == "zzz") {
      rep = check_zzz(g, u, s.region, opt);
    } else if (check.name == "rademacher") {
      rep = check_rademacher(g, u, s.region, s.probes, opt);
    } else if (check.name == "auxiliary_split") {
      const VertexSubset inner = ball(g, s.center, r);
      rep = check_auxiliary_split(g, u, inner, spread_pairs(inner, check.options.value("pairs", 8)));
    } else if (check.name == "moser_conclusion") {
      if (u.target().kind() != TargetSpace::Kind::Euclidean || u.target().coord_count() != 1)
        throw InvalidArgument("moser_conclusion: needs a Euclidean(1) target");
      const double R = check.options.value("R", r);
      const double alpha = check.options.value("alpha", 0.0);
      const double beta = check.options.value("beta", 0.0);
      const MoserConstants* frozen = nullptr;
      if (cal) {
        const auto it = cal->moser.find(sc.graph.family);
        if (it != cal->moser.end()) frozen = &it->second;
      }
      rep = check_moser_conclusion(g, scalar_values(u), s.region, s.center, R, r, lambda, alpha, beta,
                                   frozen ? *frozen : MoserConstants{});
      if (!frozen) {
        rep.gate = GateClass::Diagnostic;
        rep.pass = true;
        rep.note("no frozen constants for this graph family; sides recorded only");
      }
    } else if (check.name == "liouville") {
      rep = liouville_experiment(check.options.value("sizes", std::vector<int>{16, 32, 64}),
                                 check.options.value("exponent", 0.0), check.options.value("seed", std::uint64_t{1}));
    } else {
      throw InvalidArgument("unknown check " + check.name);
    }
    return rep;
  } catch (const InvalidArgument& e) {
    return failed_report(check.name, e.what());
  } catch (const ConvergenceError& e) {
    return failed_report(check.name, e.what());
  }
}

std::vector<CheckReport> run_checks(const SolvedScenario& s, const Calibration* cal) {
  std::vector<CheckSpec> checks = s.scenario.checks;
  if (checks.empty())
    for (const char* name : {"subharmonicity", "convexity_laplacian", "local_boundedness", "reverse_poincare",
                             "lipschitz_estimate", "zzz", "rademacher", "auxiliary_split"})
      checks.push_back({name, nlohmann::json::object()});
  std::vector<CheckReport> reports(checks.size());
  run_tasks(checks.size(), [&](std::size_t i) { reports[i] = run_check(s, checks[i], cal); });
  return reports;
}

bool all_hard_gates_pass(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.gate == GateClass::Diagnostic || r.pass; });
}

RefinementStudy refine(const Scenario& s, int levels) {
  if (levels < 1) throw InvalidArgument("refine: need at least one level");
  std::vector<double> spacings = s.refinement;
  if (spacings.empty()) spacings.push_back(s.graph.spacing);
  if (static_cast<std::size_t>(levels) > spacings.size())
    throw InvalidArgument("refine: scenario lists only " + std::to_string(spacings.size()) + " spacings");
  spacings.resize(levels);
  for (std::size_t k = 1; k < spacings.size(); ++k)
    if (!(spacings[k] < spacings[k - 1])) throw InvalidArgument("refine: spacings must decrease");

  RefinementStudy study;
  study.scenario = s.name;
  std::unique_ptr<SolvedScenario> previous;
  for (double h : spacings) {
    auto solved = std::make_unique<SolvedScenario>(solve_scenario(at_spacing(s, h), previous.get()));
    const DomainGraph& g = *solved->graph;
    const MapField& u = solved->solve.u;
    const BallSpec& b = s.ball;
    RefinementLevel level;
    level.spacing = g.mesh_scale();
    level.sweeps = solved->solve.sweeps;
    level.residual = solved->solve.residual;
    level.constants["reverse_poincare"] =
        check_reverse_poincare(g, u, solved->region, solved->center, b.radius, b.lambda, s.options).measured.at("c_emp");
    level.constants["lipschitz_estimate"] =
        check_lipschitz_estimate(g, u, solved->region, solved->center, b.radius, s.options).measured.at("c_emp");
    level.constants["local_boundedness"] =
        check_local_boundedness(g, u, solved->region, solved->center, b.radius, b.lambda, solved->probes)
            .measured.at("c_emp");
    level.constants["zzz"] = check_zzz(g, u, solved->region, s.options).measured.at("violation_fraction");
    level.constants["rademacher"] =
        check_rademacher(g, u, solved->region, solved->probes, s.options).measured.at("median_gap");
    level.constants["convexity_pass_rate"] =
        check_convexity_laplacian(g, u, solved->region, solved->probes, 2.0, s.options).measured.at("pass_rate");
    study.levels.push_back(std::move(level));
    previous = std::move(solved);
  }

  auto series = [&](const std::string& key) {
    std::vector<double> v;
    for (const RefinementLevel& l : study.levels) v.push_back(l.constants.at(key));
    return v;
  };
  // Empirical constants: bounded variation across levels.
  for (const auto& [key, limit] : {std::pair<std::string, double>{"reverse_poincare", 2.0},
                                   {"lipschitz_estimate", 2.0},
                                   {"local_boundedness", 1.5}}) {
    CheckReport rep(key + "_stability", GateClass::Trend);
    const double spread = ratio_spread(series(key));
    rep.tolerance = limit;
    rep.observe(spread);
    rep.measured["max_over_min"] = spread;
    rep.settle();
    if (spread >= limit) rep.pass = false;
    study.trends.push_back(rep);
  }
  {
    const auto z = series("zzz");
    // Only flat domains carry the gate; on curved meshes the max-slope field
    // is too irregular for its discrete Laplacian to mean much.
    const bool flat = build_graph(s.graph).curvature_k() == 0.0;
    CheckReport rep("zzz_trend", flat ? GateClass::Trend : GateClass::Diagnostic);
    rep.tolerance = s.options.zzz_fraction;
    rep.observe(z.back());
    for (std::size_t k = 1; k < z.size(); ++k)
      if (z[k] > z[k - 1]) {
        rep.pass = false;
        rep.note("violation fraction increased between levels " + std::to_string(k - 1) + " and " + std::to_string(k));
      }
    rep.measured["finest_fraction"] = z.back();
    const bool monotone = rep.notes.empty();
    rep.settle();
    rep.pass = rep.pass && monotone;
    if (!flat) {
      rep.note("curved domain: recorded only");
      rep.pass = true;
    }
    study.trends.push_back(rep);
  }
  {
    const auto gap = series("rademacher");
    CheckReport rep("rademacher_trend", GateClass::Trend);
    rep.tolerance = s.options.rademacher_gap;
    rep.observe(gap.back());
    rep.measured["finest_median_gap"] = gap.back();
    rep.settle();
    study.trends.push_back(rep);
  }
  {
    const auto rate = series("convexity_pass_rate");
    CheckReport rep("convexity_trend", GateClass::Diagnostic);
    rep.measured["finest_pass_rate"] = rate.back();
    rep.measured["coarsest_pass_rate"] = rate.front();
    study.trends.push_back(rep);
  }
  return study;
}

nlohmann::json to_json(const RefinementStudy& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const RefinementLevel& l : r.levels)
    levels.push_back({{"spacing", l.spacing}, {"sweeps", l.sweeps}, {"residual", l.residual}, {"constants", l.constants}});
  nlohmann::json trends = nlohmann::json::array();
  for (const CheckReport& t : r.trends) trends.push_back(to_json(t));
  return {{"scenario", r.scenario}, {"levels", levels}, {"trends", trends}};
}

void write_refinement_csv(std::ostream& out, const RefinementStudy& r) {
  out << "level,spacing,sweeps,residual,quantity,value\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < r.levels.size(); ++k)
    for (const auto& [name, value] : r.levels[k].constants)
      out << k << ',' << r.levels[k].spacing << ',' << r.levels[k].sweeps << ',' << r.levels[k].residual << ','
          << name << ',' << value << '\n';
}

const std::vector<std::string>& moser_families() {
  static const std::vector<std::string> families{"torus", "hyperbolic"};
  return families;
}

MoserInstance moser_instance(const std::string& family, std::uint64_t seed, double beta) {
  MoserInstance inst;
  inst.beta = beta;
  inst.lambda = 0.5;
  std::shared_ptr<const DomainGraph> g;
  if (family == "torus") {
    g = std::make_shared<const DomainGraph>(build_torus_grid(32, 32, 1.0 / 16.0));
    inst.region = build_region(*g, {"box", {0.125, 0.125}, {1.875, 1.875}, {}, 0.0});
    inst.center = nearest_vertex(*g, {1.0, 1.0});
    inst.R = inst.r = 0.5;
  } else if (family == "hyperbolic") {
    g = std::make_shared<const DomainGraph>(build_hyperbolic_disk(1.5, 0.15));
    inst.region = ball(*g, 0, 1.2);
    inst.center = 0;
    inst.R = inst.r = 0.6;
  } else {
    throw InvalidArgument("moser_instance: unknown family " + family);
  }
  inst.graph = g;
  const FourierField data(1, 3, seed);
  const ScalarField source = ScalarField::Constant(g->vertex_count(), -beta / (inst.R * inst.R));
  // Subsolution instances lower weak boundary data below the bump created by
  // the source, so f⁺ concentrates near the center and the β term matters.
  double amplitude = 1.0, offset = 0.0;
  if (beta > 0.0) {
    const ScalarField bump = solve_poisson(*g, inst.region, ScalarField::Zero(g->vertex_count()), source);
    std::mt19937_64 rng(seed);
    amplitude = 0.2;
    offset = std::uniform_real_distribution<double>(0.3, 1.0)(rng) * bump.maxCoeff();
  }
  ScalarField boundary = ScalarField::Zero(g->vertex_count());
  for (Vertex v : inst.region.boundary()) {
    const auto p = planar_position(*g, v);
    boundary[v] = amplitude * data(0, p[0], p[1]) - offset;
  }
  inst.f = solve_poisson(*g, inst.region, boundary, source);
  return inst;
}

Scenario with_seed(const Scenario& s, std::uint64_t seed) {
  Scenario out = s;
  out.boundary.seed = seed;
  return out;
}

Scenario at_spacing(const Scenario& s, double spacing) {
  Scenario out = s;
  out.graph.spacing = spacing;
  return out;
}

std::vector<Scenario> calibration_suite() {
  std::vector<Scenario> suite;
  auto torus = [](const std::string& name, nlohmann::json target, double amplitude) {
    Scenario s;
    s.name = name;
    s.graph = {"torus", 2.0, 1.0 / 16.0};
    s.target = std::move(target);
    s.region.kind = "box";
    s.region.lo = {0.125, 0.125};
    s.region.hi = {1.875, 1.875};
    s.boundary.amplitude = amplitude;
    s.ball = {{1.0, 1.0}, 0.25, 0.5};
    s.refinement = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0};
    return s;
  };
  suite.push_back(torus("torus_euclidean2", {{"kind", "euclidean"}, {"dim", 2}}, 1.0));
  suite.push_back(torus("torus_tripod", make_tripod()->to_json(), 1.5));
  suite.push_back(torus("torus_hyperbolic", make_hyperbolic()->to_json(), 1.0));
  Scenario disk;
  disk.name = "disk_euclidean1";
  disk.graph = {"hyperbolic", 1.5, 0.075};
  disk.target = {{"kind", "euclidean"}, {"dim", 1}};
  disk.region.kind = "ball";
  disk.region.center = {0.0, 0.0};
  disk.region.radius = 1.4;
  disk.ball = {{0.0, 0.0}, 0.5, 0.5};
  disk.refinement = {0.1, 0.075, 0.05};
  suite.push_back(disk);
  return suite;
}

Calibration calibrate(const std::vector<Scenario>& suite, const std::vector<std::uint64_t>& seeds, double margin) {
  if (seeds.empty()) throw InvalidArgument("calibrate: need at least one seed");
  if (!(margin >= 1.0)) throw InvalidArgument("calibrate: margin must be at least 1");
  Calibration cal;
  cal.margin = margin;
  cal.seeds = seeds;
  const std::vector<std::string> fitted{"reverse_poincare", "lipschitz_estimate", "local_boundedness"};
  for (const Scenario& sc : suite) {
    std::vector<std::map<std::string, double>> per_seed(seeds.size());
    run_tasks(seeds.size(), [&](std::size_t i) {
      const SolvedScenario solved = solve_scenario(with_seed(sc, seeds[i]));
      for (const std::string& name : fitted)
        per_seed[i][name] = run_check(solved, {name, nlohmann::json::object()}, nullptr).measured.at("c_emp");
    });
    for (const std::string& name : fitted) {
      double worst = 0.0;
      for (const auto& m : per_seed) worst = std::max(worst, m.at(name));
      cal.constants[sc.name + "/" + name] = worst * margin;
    }
  }
  // Sup-bound constants: C1 from harmonic instances (odd seeds), then C2 from
  // the excess of the Poisson instances (even seeds) over the raw C1 fit.
  for (const std::string& family : moser_families()) {
    std::vector<MoserMeasurement> meas(seeds.size());
    run_tasks(seeds.size(), [&](std::size_t i) {
      const double beta = seeds[i] % 2 == 1 ? 0.0 : 1.0;
      const MoserInstance inst = moser_instance(family, seeds[i], beta);
      meas[i] = measure_moser(*inst.graph, inst.f, inst.region, inst.center, inst.R, inst.r, inst.lambda, 0.0, beta);
    });
    double c1 = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i)
      if (meas[i].beta_term == 0.0 && meas[i].average_positive > 0.0)
        c1 = std::max(c1, meas[i].sup_positive / meas[i].average_positive);
    double c2 = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i)
      if (meas[i].beta_term > 0.0)
        c2 = std::max(c2, (meas[i].sup_positive - c1 * meas[i].average_positive) / meas[i].beta_term);
    cal.moser[family] = {c1 * margin, std::max(c2, 0.0) * margin};
  }
  cal.moser_lambda = 0.5;
  return cal;
}

void write_reports_csv(std::ostream& out, const std::vector<CheckReport>& reports) {
  out << "name,gate,pass,max_violation,tolerance,observations,quantity,value\n";
  out << std::setprecision(17);
  for (const CheckReport& r : reports) {
    const auto prefix = [&] {
      out << r.name << ',' << to_string(r.gate) << ',' << (r.pass ? "true" : "false") << ',' << r.max_violation << ','
          << r.tolerance << ',' << r.observations << ',';
    };
    if (r.measured.empty()) {
      prefix();
      out << ",\n";
    }
    for (const auto& [name, value] : r.measured) {
      prefix();
      out << name << ',' << value << '\n';
    }
  }
}

}  // namespace npc
