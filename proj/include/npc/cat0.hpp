#pragma once

#include <array>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npc/check_report.hpp"

namespace npc {

inline constexpr int kMaxPointCoords = 8;

/// Coordinates of a point of some TargetSpace. The owning space gives them
/// meaning:
///  - Euclidean(d): the d coordinates;
///  - MetricTree: (edge id, offset along the edge from its first endpoint);
///  - HyperbolicPlane: hyperboloid coordinates (x0, x1, x2), x0 >= 1;
///  - Product(A, B): A's coordinates followed by B's.
struct TargetPoint {
  std::array<double, kMaxPointCoords> c{};
  int size = 0;

  TargetPoint() = default;
  TargetPoint(std::initializer_list<double> values);
  static TargetPoint zeros(int n);

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }
  friend bool operator==(const TargetPoint& a, const TargetPoint& b);
};

/// A CAT(0) geodesic space. Implementations are immutable.
class TargetSpace {
 public:
  enum class Kind { Euclidean, Tree, Hyperbolic, Product };

  virtual ~TargetSpace() = default;

  [[nodiscard]] virtual Kind kind() const = 0;
  [[nodiscard]] virtual int coord_count() const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;

  /// Throws InvalidArgument if `p` is not a valid point of this space.
  virtual void validate(const TargetPoint& p) const = 0;
  [[nodiscard]] virtual double distance(const TargetPoint& p, const TargetPoint& q) const = 0;
  /// Constant-speed geodesic from p (t = 0) to q (t = 1); t is not range-checked.
  [[nodiscard]] virtual TargetPoint geodesic(const TargetPoint& p, const TargetPoint& q, double t) const = 0;
  /// argmin of Σ w_i d²(·, p_i). `hint` may seed iterative methods.
  [[nodiscard]] virtual TargetPoint barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                               const TargetPoint* hint = nullptr) const = 0;

  [[nodiscard]] virtual nlohmann::json to_json() const = 0;
  [[nodiscard]] virtual nlohmann::json point_to_json(const TargetPoint& p) const = 0;
  [[nodiscard]] virtual TargetPoint point_from_json(const nlohmann::json& j) const = 0;
};

using TargetSpacePtr = std::shared_ptr<const TargetSpace>;

class EuclideanSpace final : public TargetSpace {
 public:
  explicit EuclideanSpace(int dim);
  [[nodiscard]] int dim() const { return dim_; }

  [[nodiscard]] Kind kind() const override { return Kind::Euclidean; }
  [[nodiscard]] int coord_count() const override { return dim_; }
  [[nodiscard]] std::string describe() const override;
  void validate(const TargetPoint& p) const override;
  [[nodiscard]] double distance(const TargetPoint& p, const TargetPoint& q) const override;
  [[nodiscard]] TargetPoint geodesic(const TargetPoint& p, const TargetPoint& q, double t) const override;
  [[nodiscard]] TargetPoint barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                       const TargetPoint* hint) const override;
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] nlohmann::json point_to_json(const TargetPoint& p) const override;
  [[nodiscard]] TargetPoint point_from_json(const nlohmann::json& j) const override;

 private:
  int dim_;
};

struct TreeEdge {
  int a = 0;
  int b = 0;
  double length = 1.0;
};

/// Finite metric tree. A point lying on a tree vertex is stored on the
/// vertex's lowest-indexed incident edge (offset 0 or the edge length).
class MetricTree final : public TargetSpace {
 public:
  MetricTree(int vertex_count, std::vector<TreeEdge> edges);

  [[nodiscard]] int vertex_count() const { return vertex_count_; }
  [[nodiscard]] const std::vector<TreeEdge>& edges() const { return edges_; }
  [[nodiscard]] double vertex_distance(int u, int v) const { return vdist_[u * vertex_count_ + v]; }
  [[nodiscard]] TargetPoint vertex_point(int v) const;
  [[nodiscard]] TargetPoint point(int edge, double offset) const;

  [[nodiscard]] Kind kind() const override { return Kind::Tree; }
  [[nodiscard]] int coord_count() const override { return 2; }
  [[nodiscard]] std::string describe() const override;
  void validate(const TargetPoint& p) const override;
  [[nodiscard]] double distance(const TargetPoint& p, const TargetPoint& q) const override;
  [[nodiscard]] TargetPoint geodesic(const TargetPoint& p, const TargetPoint& q, double t) const override;
  [[nodiscard]] TargetPoint barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                       const TargetPoint* hint) const override;
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] nlohmann::json point_to_json(const TargetPoint& p) const override;
  [[nodiscard]] TargetPoint point_from_json(const nlohmann::json& j) const override;

 private:
  [[nodiscard]] double to_vertex(const TargetPoint& p, int v) const;
  [[nodiscard]] TargetPoint canonical(int edge, double offset) const;

  int vertex_count_;
  std::vector<TreeEdge> edges_;
  std::vector<double> vdist_;
  std::vector<int> next_hop_;          // next_hop_[u * n + v]: neighbor of u towards v
  std::vector<int> edge_between_;      // edge_between_[u * n + v] for adjacent u, v, else -1
  std::vector<int> lowest_edge_;       // per vertex
};

/// Hyperbolic plane of curvature -1 in the hyperboloid model.
class HyperbolicPlane final : public TargetSpace {
 public:
  [[nodiscard]] static TargetPoint from_polar(double radius, double angle);
  /// Lifts (x1, x2) to the hyperboloid.
  [[nodiscard]] static TargetPoint lift(double x1, double x2);
  [[nodiscard]] static TargetPoint origin() { return lift(0.0, 0.0); }

  [[nodiscard]] Kind kind() const override { return Kind::Hyperbolic; }
  [[nodiscard]] int coord_count() const override { return 3; }
  [[nodiscard]] std::string describe() const override { return "hyperbolic"; }
  void validate(const TargetPoint& p) const override;
  [[nodiscard]] double distance(const TargetPoint& p, const TargetPoint& q) const override;
  [[nodiscard]] TargetPoint geodesic(const TargetPoint& p, const TargetPoint& q, double t) const override;
  [[nodiscard]] TargetPoint barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                       const TargetPoint* hint) const override;
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] nlohmann::json point_to_json(const TargetPoint& p) const override;
  [[nodiscard]] TargetPoint point_from_json(const nlohmann::json& j) const override;
};

/// ℓ² product of two CAT(0) spaces.
class ProductSpace final : public TargetSpace {
 public:
  ProductSpace(TargetSpacePtr first, TargetSpacePtr second);

  [[nodiscard]] const TargetSpace& first() const { return *first_; }
  [[nodiscard]] const TargetSpace& second() const { return *second_; }
  [[nodiscard]] TargetPoint join(const TargetPoint& a, const TargetPoint& b) const;
  [[nodiscard]] TargetPoint first_part(const TargetPoint& p) const;
  [[nodiscard]] TargetPoint second_part(const TargetPoint& p) const;

  [[nodiscard]] Kind kind() const override { return Kind::Product; }
  [[nodiscard]] int coord_count() const override { return first_->coord_count() + second_->coord_count(); }
  [[nodiscard]] std::string describe() const override;
  void validate(const TargetPoint& p) const override;
  [[nodiscard]] double distance(const TargetPoint& p, const TargetPoint& q) const override;
  [[nodiscard]] TargetPoint geodesic(const TargetPoint& p, const TargetPoint& q, double t) const override;
  [[nodiscard]] TargetPoint barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                       const TargetPoint* hint) const override;
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] nlohmann::json point_to_json(const TargetPoint& p) const override;
  [[nodiscard]] TargetPoint point_from_json(const nlohmann::json& j) const override;

 private:
  TargetSpacePtr first_;
  TargetSpacePtr second_;
};

TargetSpacePtr make_euclidean(int dim);
TargetSpacePtr make_tree(int vertex_count, std::vector<TreeEdge> edges);
/// Three unit edges joined at vertex 0; leaves are vertices 1, 2, 3.
TargetSpacePtr make_tripod(double leg = 1.0);
TargetSpacePtr make_hyperbolic();
TargetSpacePtr make_product(TargetSpacePtr first, TargetSpacePtr second);

/// Random tree with `edge_count` edges: vertex k+1 hangs off a uniformly chosen
/// earlier vertex, lengths uniform in [0.5, 2].
TargetSpacePtr make_random_tree(int edge_count, std::uint64_t seed);

TargetSpacePtr space_from_json(const nlohmann::json& j);

/// Random point for property tests: Euclidean coordinates uniform in
/// [-scale, scale]; tree points uniform over (edge, offset); hyperbolic points
/// at radius uniform in [0, 2 scale]; products sample each factor.
TargetPoint sample_point(const TargetSpace& s, std::mt19937_64& rng, double scale = 1.0);

/// Thrown when an iterative barycenter does not converge.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

double distance(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q);
/// Throws InvalidArgument for t outside [0, 1].
TargetPoint geodesic_point(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q, double t);
/// Throws InvalidArgument for empty input or non-positive weights.
TargetPoint weighted_barycenter(const TargetSpace& s, std::span<const TargetPoint> points,
                                std::span<const double> weights);

/// d²(z, γ_t) <= (1-t) d²(z, p) + t d²(z, q) - t(1-t) d²(p, q).
CheckReport check_cat0_comparison(const TargetSpace& s, const TargetPoint& z, const TargetPoint& p,
                                  const TargetPoint& q, double t);
/// (|ps|-|qr|)|qr| >= (|pm|²-|pq|²-|mq|²) + (|sm|²-|sr|²-|mr|²), m the midpoint of q, r.
CheckReport check_quadrilateral(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q,
                                const TargetPoint& r, const TargetPoint& fourth);
/// Convexity of d(·, p) and 2-convexity of d²(·, p) along the geodesic a -> b.
CheckReport check_distance_convexity(const TargetSpace& s, const TargetPoint& p, const TargetPoint& a,
                                     const TargetPoint& b, int samples);

}  // namespace npc
