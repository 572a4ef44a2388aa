#include "npc/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "npc/parallel.hpp"

namespace npc {
namespace {

void require_map(const DomainGraph& g, const MapField& u) {
  if (!u.space) throw InvalidArgument("map has no target space");
  if (u.size() != g.vertex_count()) throw InvalidArgument("map size does not match the graph");
}

void require_region(const DomainGraph& g, const VertexSubset& U) {
  if (U.universe() != static_cast<std::size_t>(g.vertex_count()))
    throw InvalidArgument("region does not belong to the graph");
}

}  // namespace

MapField::MapField(TargetSpacePtr space_, std::vector<TargetPoint> values_)
    : space(std::move(space_)), values(std::move(values_)) {
  if (!space) throw InvalidArgument("MapField: null target space");
  for (const TargetPoint& p : values) space->validate(p);
}

MapField constant_map(TargetSpacePtr space, int vertex_count, const TargetPoint& p) {
  return MapField(std::move(space), std::vector<TargetPoint>(vertex_count, p));
}

MapField scalar_map(const ScalarField& f) {
  std::vector<TargetPoint> values;
  values.reserve(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) values.push_back(TargetPoint{f[i]});
  return MapField(make_euclidean(1), std::move(values));
}

ScalarField scalar_values(const MapField& u) {
  if (!u.space || u.space->kind() != TargetSpace::Kind::Euclidean || u.space->coord_count() != 1)
    throw InvalidArgument("scalar_values: map is not real-valued");
  ScalarField f(u.size());
  for (int x = 0; x < u.size(); ++x) f[x] = u[x][0];
  return f;
}

ScalarField distance_field(const MapField& u, const TargetPoint& p) {
  u.target().validate(p);
  ScalarField f(u.size());
  for (int x = 0; x < u.size(); ++x) f[x] = u.target().distance(u[x], p);
  return f;
}

nlohmann::json to_json(const MapField& u) {
  nlohmann::json values = nlohmann::json::array();
  for (const TargetPoint& p : u.values) values.push_back(u.target().point_to_json(p));
  return {{"space", u.target().to_json()}, {"values", values}};
}

MapField map_from_json(const nlohmann::json& j) {
  TargetSpacePtr space = space_from_json(j.at("space"));
  std::vector<TargetPoint> values;
  for (const auto& p : j.at("values")) values.push_back(space->point_from_json(p));
  return MapField(std::move(space), std::move(values));
}

ScalarField ks_density(const DomainGraph& g, const MapField& u, const VertexSubset& U, double r) {
  require_map(g, u);
  require_region(g, U);
  if (!(r > 0.0)) throw InvalidArgument("ks_density: scale must be positive");
  ScalarField out = ScalarField::Zero(g.vertex_count());
  const TargetSpace& Y = u.target();
  parallel_for(U.members().size(), [&](std::size_t k) {
    const Vertex x = U.members()[k];
    const auto reached = g.within(x, r);
    double mass = 0.0;
    double acc = 0.0;
    for (const ReachedVertex& rv : reached) {
      if (!U.contains(rv.v)) return;
      const double d = Y.distance(u[x], u[rv.v]);
      mass += g.measure(rv.v);
      acc += d * d * g.measure(rv.v);
    }
    out[x] = acc / (mass * r * r);
  });
  return out;
}

EnergyProfile energy_density(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                             const std::vector<double>& scales) {
  if (scales.size() < 3) throw InvalidArgument("energy_density: need at least three scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 2.0 * g.mesh_scale())) throw InvalidArgument("energy_density: scales must exceed twice the mesh scale");
    if (i > 0 && !(scales[i] < scales[i - 1])) throw InvalidArgument("energy_density: scales must be strictly decreasing");
  }
  EnergyProfile p;
  p.scales = scales;
  for (double r : scales) p.ks_squared.push_back(ks_density(g, u, U, r));
  const int n = g.vertex_count();
  p.e2_squared = ScalarField::Zero(n);
  p.e2 = ScalarField::Zero(n);
  p.fit_residual = ScalarField::Zero(n);
  p.defined.assign(n, false);

  // Least-squares line through the three smallest scales.
  const std::size_t k0 = scales.size() - 3;
  double mr = 0.0;
  for (std::size_t k = k0; k < scales.size(); ++k) mr += scales[k] / 3.0;
  double srr = 0.0;
  for (std::size_t k = k0; k < scales.size(); ++k) srr += (scales[k] - mr) * (scales[k] - mr);
  const VertexSubset inner = ks_interior(g, U, scales[k0]);
  for (Vertex x : inner.members()) {
    double my = 0.0;
    for (std::size_t k = k0; k < scales.size(); ++k) my += p.ks_squared[k][x] / 3.0;
    double sry = 0.0;
    for (std::size_t k = k0; k < scales.size(); ++k) sry += (scales[k] - mr) * (p.ks_squared[k][x] - my);
    const double slope = sry / srr;
    const double intercept = my - slope * mr;
    double rss = 0.0;
    for (std::size_t k = k0; k < scales.size(); ++k) {
      const double e = p.ks_squared[k][x] - (intercept + slope * scales[k]);
      rss += e * e;
    }
    p.defined[x] = true;
    p.e2_squared[x] = std::max(0.0, intercept);
    p.e2[x] = std::sqrt(p.e2_squared[x]);
    p.fit_residual[x] = std::sqrt(rss / 3.0);
  }
  return p;
}

VertexSubset ks_interior(const DomainGraph& g, const VertexSubset& U, double r) {
  require_region(g, U);
  std::vector<char> inside(g.vertex_count(), 0);
  parallel_for(U.members().size(), [&](std::size_t k) {
    const Vertex x = U.members()[k];
    for (const ReachedVertex& rv : g.within(x, r))
      if (!U.contains(rv.v)) return;
    inside[x] = 1;
  });
  return VertexSubset(g, std::vector<bool>(inside.begin(), inside.end()));
}

void write_energy_csv(std::ostream& out, const EnergyProfile& profile) {
  out << "vertex,scale,ks_density,e2_extrapolated,fit_residual\n";
  out.precision(17);
  const Eigen::Index n = profile.e2.size();
  for (Eigen::Index x = 0; x < n; ++x)
    for (std::size_t k = 0; k < profile.scales.size(); ++k)
      out << x << ',' << profile.scales[k] << ',' << std::sqrt(profile.ks_squared[k][x]) << ',' << profile.e2[x] << ','
          << profile.fit_residual[x] << '\n';
}

double heat_kernel_energy(const HeatSemigroup& heat, const DomainGraph& g, const MapField& u, Vertex x, double t) {
  require_map(g, u);
  if (!g.valid_vertex(x)) throw InvalidArgument("heat_kernel_energy: invalid vertex");
  if (!(t > 0.0)) throw InvalidArgument("heat_kernel_energy: t must be positive");
  const ScalarField rho = heat.kernel(x, t);
  double acc = 0.0;
  for (Vertex y = 0; y < g.vertex_count(); ++y) {
    const double d = u.target().distance(u[x], u[y]);
    acc += d * d * rho[y] * g.measure(y);
  }
  return acc / t;
}

double heat_kernel_energy(const DomainGraph& g, const MapField& u, Vertex x, double t) {
  return heat_kernel_energy(HeatSemigroup(g), g, u, x, t);
}

ScalarField lip_slope(const DomainGraph& g, const MapField& u) {
  require_map(g, u);
  ScalarField out = ScalarField::Zero(g.vertex_count());
  for (Vertex x = 0; x < g.vertex_count(); ++x)
    for (const Neighbor& nb : g.neighbors(x))
      out[x] = std::max(out[x], u.target().distance(u[x], u[nb.v]) / nb.length);
  return out;
}

ScalarField weak_gradient(const DomainGraph& g, const MapField& u, const std::vector<TargetPoint>& probes) {
  require_map(g, u);
  if (probes.empty()) throw InvalidArgument("weak_gradient: need at least one probe");
  ScalarField out = ScalarField::Zero(g.vertex_count());
  for (const TargetPoint& p : probes) {
    const ScalarField phi = distance_field(u, p);
    for (Vertex x = 0; x < g.vertex_count(); ++x)
      for (const Neighbor& nb : g.neighbors(x)) out[x] = std::max(out[x], std::abs(phi[nb.v] - phi[x]) / nb.length);
  }
  return out;
}

std::vector<TargetPoint> farthest_point_probes(const MapField& u, int count, Vertex first) {
  if (count < 1) throw InvalidArgument("farthest_point_probes: count must be positive");
  if (first < 0 || first >= u.size()) throw InvalidArgument("farthest_point_probes: invalid start vertex");
  std::vector<TargetPoint> probes{u[first]};
  ScalarField nearest = distance_field(u, u[first]);
  while (static_cast<int>(probes.size()) < count) {
    Eigen::Index far = 0;
    if (nearest.maxCoeff(&far) <= 0.0) break;
    probes.push_back(u[static_cast<Vertex>(far)]);
    nearest = nearest.cwiseMin(distance_field(u, probes.back()));
  }
  return probes;
}

double probe_cover_radius(const MapField& u, const std::vector<TargetPoint>& probes) {
  double radius = 0.0;
  for (int x = 0; x < u.size(); ++x) {
    double best = std::numeric_limits<double>::infinity();
    for (const TargetPoint& p : probes) best = std::min(best, u.target().distance(u[x], p));
    radius = std::max(radius, best);
  }
  return radius;
}

double dirichlet_energy(const DomainGraph& g, const MapField& u, const VertexSubset& U) {
  require_map(g, u);
  require_region(g, U);
  long double acc = 0.0L;
  for (const Edge& e : g.edges()) {
    if (!U.contains(e.a) || !U.contains(e.b)) continue;
    const double d = u.target().distance(u[e.a], u[e.b]);
    acc += static_cast<long double>(e.conductance) * d * d;
  }
  return static_cast<double>(0.5L * acc);
}

MapField interpolate_maps(const MapField& u0, const MapField& u1, double t) {
  if (u0.size() != u1.size()) throw InvalidArgument("interpolate_maps: maps differ in size");
  if (!u0.space || !u1.space || u0.space->to_json() != u1.space->to_json())
    throw InvalidArgument("interpolate_maps: maps have different targets");
  std::vector<TargetPoint> values;
  values.reserve(u0.size());
  for (int x = 0; x < u0.size(); ++x) values.push_back(geodesic_point(u0.target(), u0[x], u1[x], t));
  return MapField(u0.space, std::move(values));
}

}  // namespace npc
