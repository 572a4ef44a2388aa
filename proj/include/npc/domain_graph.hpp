#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace npc {

using Vertex = int;

/// Thrown for malformed inputs to any public operation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Edge {
  Vertex a = 0;
  Vertex b = 0;
  double length = 1.0;
  double conductance = 1.0;
};

/// One adjacency slot of a vertex.
struct Neighbor {
  Vertex v = 0;
  double length = 0.0;
  double conductance = 0.0;
};

/// Vertex within a metric ball, with its distance from the center.
struct ReachedVertex {
  Vertex v = 0;
  double distance = 0.0;
};

/// A finite weighted graph standing in for a metric-measure space.
///
/// Each undirected edge is stored once in `edges()`; the adjacency lists are
/// symmetric. The graph is immutable after construction. The all-pairs
/// distance matrix is computed lazily (and only for graphs with at most
/// `kAllPairsLimit` vertices); every other query runs Dijkstra on demand.
class DomainGraph {
 public:
  static constexpr std::size_t kAllPairsLimit = 4096;

  DomainGraph(std::vector<double> measure, std::vector<Edge> edges,
              double curvature_k, double dimension_n,
              std::vector<std::array<double, 3>> positions = {});

  [[nodiscard]] int vertex_count() const { return static_cast<int>(measure_.size()); }
  [[nodiscard]] std::span<const double> measure() const { return measure_; }
  [[nodiscard]] double measure(Vertex x) const { return measure_[x]; }
  [[nodiscard]] std::span<const Edge> edges() const { return edges_; }
  [[nodiscard]] std::span<const Neighbor> neighbors(Vertex x) const {
    return {adjacency_.data() + offsets_[x], adjacency_.data() + offsets_[x + 1]};
  }
  [[nodiscard]] int degree(Vertex x) const { return offsets_[x + 1] - offsets_[x]; }
  [[nodiscard]] double curvature_k() const { return curvature_k_; }
  [[nodiscard]] double dimension_n() const { return dimension_n_; }
  [[nodiscard]] double mesh_scale() const { return mesh_scale_; }
  [[nodiscard]] double total_measure() const;

  /// Embedding coordinates supplied by the generator (empty if unknown).
  /// Used only to evaluate boundary-data families consistently across
  /// refinement levels; never for metric computations.
  [[nodiscard]] const std::vector<std::array<double, 3>>& positions() const { return positions_; }
  [[nodiscard]] bool has_positions() const { return !positions_.empty(); }

  [[nodiscard]] double distance(Vertex x, Vertex y) const;
  [[nodiscard]] std::vector<double> distances_from(Vertex source) const;
  /// Vertices at distance strictly less than `radius`, in order of discovery.
  [[nodiscard]] std::vector<ReachedVertex> within(Vertex center, double radius) const;
  [[nodiscard]] bool valid_vertex(Vertex x) const { return x >= 0 && x < vertex_count(); }

  friend bool operator==(const DomainGraph& lhs, const DomainGraph& rhs);

 private:
  const std::vector<double>& all_pairs() const;

  std::vector<double> measure_;
  std::vector<Edge> edges_;
  std::vector<int> offsets_;
  std::vector<Neighbor> adjacency_;
  double curvature_k_ = 0.0;
  double dimension_n_ = 1.0;
  double mesh_scale_ = 0.0;
  std::vector<std::array<double, 3>> positions_;

  struct AllPairsCache {
    std::once_flag once;
    std::vector<double> table;
  };
  // Shared between copies: the graph is immutable, so the table is too.
  std::shared_ptr<AllPairsCache> all_pairs_ = std::make_shared<AllPairsCache>();
};

/// Membership mask over the vertices of a graph, split into interior and
/// boundary. Boundary vertices are exactly the members adjacent to a
/// non-member.
class VertexSubset {
 public:
  VertexSubset() = default;
  VertexSubset(const DomainGraph& g, std::vector<bool> mask);

  static VertexSubset all(const DomainGraph& g);

  [[nodiscard]] bool contains(Vertex x) const { return mask_[x]; }
  [[nodiscard]] bool is_boundary(Vertex x) const { return boundary_[x]; }
  [[nodiscard]] bool is_interior(Vertex x) const { return mask_[x] && !boundary_[x]; }
  [[nodiscard]] const std::vector<Vertex>& members() const { return members_; }
  [[nodiscard]] const std::vector<Vertex>& interior() const { return interior_; }
  [[nodiscard]] const std::vector<Vertex>& boundary() const { return boundary_list_; }
  [[nodiscard]] std::size_t size() const { return members_.size(); }
  [[nodiscard]] bool empty() const { return members_.empty(); }
  [[nodiscard]] std::size_t universe() const { return mask_.size(); }
  [[nodiscard]] const std::vector<bool>& mask() const { return mask_; }

  /// True when every member of `*this` belongs to `other`.
  [[nodiscard]] bool subset_of(const VertexSubset& other) const;

 private:
  std::vector<bool> mask_;
  std::vector<bool> boundary_;
  std::vector<Vertex> members_;
  std::vector<Vertex> interior_;
  std::vector<Vertex> boundary_list_;
};

DomainGraph build_path(int n, double spacing);
DomainGraph build_torus_grid(int nx, int ny, double spacing);
DomainGraph build_hyperbolic_disk(double radius, double spacing);

/// Vertex id of grid node (i, j) in a torus built by build_torus_grid.
inline Vertex torus_vertex(int nx, int i, int j) { return i + nx * j; }

double graph_distance(const DomainGraph& g, Vertex x, Vertex y);
VertexSubset ball(const DomainGraph& g, Vertex center, double r);

/// Rectangle [i0, i1] x [j0, j1] of grid indices on a torus graph.
VertexSubset torus_box(const DomainGraph& g, int nx, int i0, int i1, int j0, int j1);

nlohmann::json to_json(const DomainGraph& g);
DomainGraph graph_from_json(const nlohmann::json& j);

}  // namespace npc
