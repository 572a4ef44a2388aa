#pragma once

#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npc/cat0.hpp"
#include "npc/domain_graph.hpp"
#include "npc/laplacian.hpp"

namespace npc {

// A map from the vertices of a graph into a target space.
struct MapField {
  TargetSpacePtr space;
  std::vector<TargetPoint> values;

  MapField() = default;
  // Validates every value against `space`.
  MapField(TargetSpacePtr space, std::vector<TargetPoint> values);

  [[nodiscard]] int size() const { return static_cast<int>(values.size()); }
  const TargetPoint& operator[](Vertex x) const { return values[x]; }
  TargetPoint& operator[](Vertex x) { return values[x]; }
  [[nodiscard]] const TargetSpace& target() const { return *space; }
};

MapField constant_map(TargetSpacePtr space, int vertex_count, const TargetPoint& p);
// Wraps a scalar field as a map into the real line.
MapField scalar_map(const ScalarField& f);
// The first coordinate of a map into Euclidean(1).
ScalarField scalar_values(const MapField& u);
// x -> d_Y(u(x), p).
ScalarField distance_field(const MapField& u, const TargetPoint& p);

nlohmann::json to_json(const MapField& u);
MapField map_from_json(const nlohmann::json& j);

// Squared approximate energy density at scale r:
//   ks²(x) = m(B_r(x))⁻¹ Σ_{y ∈ B_r(x)} d_Y²(u(x), u(y)) m(y) / r²,
// set to zero when B_r(x) is not contained in U. Balls are open.
ScalarField ks_density(const DomainGraph& g, const MapField& u, const VertexSubset& U, double r);

// Members x of U with B_r(x) ⊂ U.
VertexSubset ks_interior(const DomainGraph& g, const VertexSubset& U, double r);

// ks² at several scales plus its small-scale limit. `e2` is the square root
// of the extrapolated ks², which is fitted linearly in r over the three
// smallest scales. `defined[x]` is false where the largest fitted scale's
// ball leaves U; e2 and fit_residual are zero there.
struct EnergyProfile {
  std::vector<double> scales;            // strictly decreasing
  std::vector<ScalarField> ks_squared;   // one field per scale
  ScalarField e2_squared;
  ScalarField e2;
  ScalarField fit_residual;              // RMS residual of the linear fit
  std::vector<bool> defined;
};

EnergyProfile energy_density(const DomainGraph& g, const MapField& u, const VertexSubset& U,
                             const std::vector<double>& scales);

// Writes rows (vertex, scale, ks_density, e2_extrapolated, fit_residual),
// where ks_density is the square root of ks² at that scale.
void write_energy_csv(std::ostream& out, const EnergyProfile& profile);

// (1/t) Σ_y d_Y²(u(x), u(y)) ρ_t[x](y) m(y).
double heat_kernel_energy(const DomainGraph& g, const MapField& u, Vertex x, double t);
double heat_kernel_energy(const HeatSemigroup& heat, const DomainGraph& g, const MapField& u, Vertex x, double t);

// Largest neighbor slope max_y d_Y(u(y), u(x)) / ℓ_xy.
ScalarField lip_slope(const DomainGraph& g, const MapField& u);

// max over probes p of the neighbor slope of the scalar field d_Y(u(·), p).
ScalarField weak_gradient(const DomainGraph& g, const MapField& u, const std::vector<TargetPoint>& probes);

// Farthest-point sample of the image of u, seeded with u(first).
std::vector<TargetPoint> farthest_point_probes(const MapField& u, int count, Vertex first = 0);
// Largest distance from an image point to its nearest probe.
double probe_cover_radius(const MapField& u, const std::vector<TargetPoint>& probes);

// ½ Σ_{edges xy ⊂ U} w_xy d_Y²(u(x), u(y)), each undirected edge counted once.
double dirichlet_energy(const DomainGraph& g, const MapField& u, const VertexSubset& U);

// x -> geodesic_point(u0(x), u1(x), t).
MapField interpolate_maps(const MapField& u0, const MapField& u1, double t);

}  // namespace npc
