#include "npc/cat0.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace npc {
namespace {

constexpr double kSlackTolerance = 1e-9;

double sq(double x) { return x * x; }

void check_weights(std::span<const TargetPoint> points, std::span<const double> weights) {
  if (points.empty()) throw InvalidArgument("barycenter: need at least one point");
  if (points.size() != weights.size()) throw InvalidArgument("barycenter: points and weights differ in length");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("barycenter: weights must be positive");
}

// Minkowski bilinear form with signature (-, +, +).
double minkowski(const TargetPoint& p, const TargetPoint& q) { return -p[0] * q[0] + p[1] * q[1] + p[2] * q[2]; }

TargetPoint renormalize(const TargetPoint& p) { return HyperbolicPlane::lift(p[1], p[2]); }

// log_z(p) in the tangent plane at z, and its length.
TargetPoint hyperbolic_log(const HyperbolicPlane& h, const TargetPoint& z, const TargetPoint& p, double* len) {
  const double d = h.distance(z, p);
  *len = d;
  TargetPoint v = TargetPoint::zeros(3);
  if (d == 0.0) return v;
  const double c = std::cosh(d);
  const double scale = d / std::sinh(d);
  for (int i = 0; i < 3; ++i) v[i] = scale * (p[i] - c * z[i]);
  return v;
}

TargetPoint hyperbolic_exp(const TargetPoint& z, const TargetPoint& v) {
  const double n2 = std::max(0.0, minkowski(v, v));
  const double n = std::sqrt(n2);
  if (n == 0.0) return z;
  TargetPoint out = TargetPoint::zeros(3);
  const double ch = std::cosh(n);
  const double sh = std::sinh(n) / n;
  for (int i = 0; i < 3; ++i) out[i] = ch * z[i] + sh * v[i];
  return renormalize(out);
}

}  // namespace

TargetPoint::TargetPoint(std::initializer_list<double> values) {
  if (values.size() > kMaxPointCoords) throw InvalidArgument("TargetPoint: too many coordinates");
  size = static_cast<int>(values.size());
  std::copy(values.begin(), values.end(), c.begin());
}

TargetPoint TargetPoint::zeros(int n) {
  if (n < 0 || n > kMaxPointCoords) throw InvalidArgument("TargetPoint: bad coordinate count");
  TargetPoint p;
  p.size = n;
  return p;
}

bool operator==(const TargetPoint& a, const TargetPoint& b) {
  return a.size == b.size && std::equal(a.c.begin(), a.c.begin() + a.size, b.c.begin());
}

// ---------------------------------------------------------------- Euclidean

EuclideanSpace::EuclideanSpace(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxPointCoords) throw InvalidArgument("EuclideanSpace: dimension out of range");
}

std::string EuclideanSpace::describe() const { return "euclidean(" + std::to_string(dim_) + ")"; }

void EuclideanSpace::validate(const TargetPoint& p) const {
  if (p.size != dim_) throw InvalidArgument("EuclideanSpace: point has wrong dimension");
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(p[i])) throw InvalidArgument("EuclideanSpace: non-finite coordinate");
}

double EuclideanSpace::distance(const TargetPoint& p, const TargetPoint& q) const {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) acc += sq(p[i] - q[i]);
  return std::sqrt(acc);
}

TargetPoint EuclideanSpace::geodesic(const TargetPoint& p, const TargetPoint& q, double t) const {
  TargetPoint out = TargetPoint::zeros(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = (1.0 - t) * p[i] + t * q[i];
  return out;
}

TargetPoint EuclideanSpace::barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                       const TargetPoint*) const {
  check_weights(points, weights);
  TargetPoint out = TargetPoint::zeros(dim_);
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    total += weights[k];
    for (int i = 0; i < dim_; ++i) out[i] += weights[k] * points[k][i];
  }
  for (int i = 0; i < dim_; ++i) out[i] /= total;
  return out;
}

nlohmann::json EuclideanSpace::to_json() const { return {{"kind", "euclidean"}, {"dim", dim_}}; }

nlohmann::json EuclideanSpace::point_to_json(const TargetPoint& p) const {
  return {{"kind", "euclidean"}, {"coords", std::vector<double>(p.c.begin(), p.c.begin() + p.size)}};
}

TargetPoint EuclideanSpace::point_from_json(const nlohmann::json& j) const {
  const auto coords = j.at("coords").get<std::vector<double>>();
  if (static_cast<int>(coords.size()) != dim_) throw InvalidArgument("euclidean point: wrong dimension");
  TargetPoint p = TargetPoint::zeros(dim_);
  std::copy(coords.begin(), coords.end(), p.c.begin());
  return p;
}

// ---------------------------------------------------------------- Tree

MetricTree::MetricTree(int vertex_count, std::vector<TreeEdge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  const int n = vertex_count_;
  if (n < 2) throw InvalidArgument("MetricTree: need at least two vertices");
  if (static_cast<int>(edges_.size()) != n - 1) throw InvalidArgument("MetricTree: a tree has n-1 edges");
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const TreeEdge& te = edges_[e];
    if (te.a < 0 || te.a >= n || te.b < 0 || te.b >= n || te.a == te.b)
      throw InvalidArgument("MetricTree: bad edge endpoints");
    if (!(te.length > 0.0) || !std::isfinite(te.length)) throw InvalidArgument("MetricTree: lengths must be positive");
    adj[te.a].emplace_back(te.b, e);
    adj[te.b].emplace_back(te.a, e);
  }
  const double inf = std::numeric_limits<double>::infinity();
  vdist_.assign(static_cast<std::size_t>(n) * n, inf);
  next_hop_.assign(static_cast<std::size_t>(n) * n, -1);
  edge_between_.assign(static_cast<std::size_t>(n) * n, -1);
  lowest_edge_.assign(n, -1);
  for (int v = 0; v < n; ++v)
    for (const auto& [w, e] : adj[v]) {
      edge_between_[v * n + w] = e;
      if (lowest_edge_[v] < 0 || e < lowest_edge_[v]) lowest_edge_[v] = e;
    }
  // From each root, walk the tree; first_step records the root's neighbor
  // through which each vertex is reached.
  for (int root = 0; root < n; ++root) {
    std::vector<int> first_step(n, -1);
    std::vector<int> stack{root};
    vdist_[root * n + root] = 0.0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& [w, e] : adj[u]) {
        if (vdist_[root * n + w] != inf) continue;
        vdist_[root * n + w] = vdist_[root * n + u] + edges_[e].length;
        first_step[w] = (u == root) ? w : first_step[u];
        stack.push_back(w);
      }
    }
    for (int v = 0; v < n; ++v) {
      if (vdist_[root * n + v] == inf) throw InvalidArgument("MetricTree: edges do not form a connected tree");
      next_hop_[root * n + v] = first_step[v];
    }
  }
}

std::string MetricTree::describe() const {
  return "tree(" + std::to_string(vertex_count_) + " vertices)";
}

TargetPoint MetricTree::vertex_point(int v) const {
  if (v < 0 || v >= vertex_count_) throw InvalidArgument("MetricTree: vertex out of range");
  const int e = lowest_edge_[v];
  return TargetPoint{static_cast<double>(e), edges_[e].a == v ? 0.0 : edges_[e].length};
}

TargetPoint MetricTree::canonical(int edge, double offset) const {
  const TreeEdge& te = edges_[edge];
  if (offset <= 0.0) return vertex_point(te.a);
  if (offset >= te.length) return vertex_point(te.b);
  return TargetPoint{static_cast<double>(edge), offset};
}

TargetPoint MetricTree::point(int edge, double offset) const {
  if (edge < 0 || edge >= static_cast<int>(edges_.size())) throw InvalidArgument("MetricTree: edge out of range");
  if (offset < -1e-10 || offset > edges_[edge].length + 1e-10) throw InvalidArgument("MetricTree: offset out of range");
  return canonical(edge, std::clamp(offset, 0.0, edges_[edge].length));
}

void MetricTree::validate(const TargetPoint& p) const {
  if (p.size != 2) throw InvalidArgument("MetricTree: point must be (edge, offset)");
  const double e = p[0];
  if (e != std::floor(e) || e < 0 || e >= static_cast<double>(edges_.size()))
    throw InvalidArgument("MetricTree: invalid edge id");
  const double len = edges_[static_cast<int>(e)].length;
  if (!(p[1] >= -1e-10 && p[1] <= len + 1e-10)) throw InvalidArgument("MetricTree: offset outside edge bounds");
}

double MetricTree::to_vertex(const TargetPoint& p, int v) const {
  const TreeEdge& te = edges_[static_cast<int>(p[0])];
  const double s = p[1];
  return std::min(s + vertex_distance(te.a, v), te.length - s + vertex_distance(te.b, v));
}

double MetricTree::distance(const TargetPoint& p, const TargetPoint& q) const {
  const int e1 = static_cast<int>(p[0]);
  const int e2 = static_cast<int>(q[0]);
  if (e1 == e2) return std::abs(p[1] - q[1]);
  const TreeEdge& t2 = edges_[e2];
  return std::min(to_vertex(p, t2.a) + q[1], to_vertex(p, t2.b) + t2.length - q[1]);
}

TargetPoint MetricTree::geodesic(const TargetPoint& p, const TargetPoint& q, double t) const {
  const int e1 = static_cast<int>(p[0]);
  const int e2 = static_cast<int>(q[0]);
  if (e1 == e2) return canonical(e1, (1.0 - t) * p[1] + t * q[1]);
  const TreeEdge& t1 = edges_[e1];
  const TreeEdge& t2 = edges_[e2];
  // Exit vertex of p's edge and entry vertex of q's edge on the shortest path.
  double best = std::numeric_limits<double>::infinity();
  int exit_v = t1.a;
  int entry_v = t2.a;
  for (int x : {t1.a, t1.b}) {
    const double off1 = x == t1.a ? p[1] : t1.length - p[1];
    for (int y : {t2.a, t2.b}) {
      const double off2 = y == t2.a ? q[1] : t2.length - q[1];
      const double total = off1 + vertex_distance(x, y) + off2;
      if (total < best) {
        best = total;
        exit_v = x;
        entry_v = y;
      }
    }
  }
  double tau = t * best;
  const double off1 = exit_v == t1.a ? p[1] : t1.length - p[1];
  if (tau <= off1) return canonical(e1, exit_v == t1.a ? p[1] - tau : p[1] + tau);
  tau -= off1;
  int cur = exit_v;
  while (cur != entry_v) {
    const int nxt = next_hop_[cur * vertex_count_ + entry_v];
    const int e = edge_between_[cur * vertex_count_ + nxt];
    const double len = edges_[e].length;
    if (tau <= len) return canonical(e, edges_[e].a == cur ? tau : len - tau);
    tau -= len;
    cur = nxt;
  }
  const double off2 = entry_v == t2.a ? q[1] : t2.length - q[1];
  tau = std::min(tau, off2);
  return canonical(e2, entry_v == t2.a ? tau : t2.length - tau);
}

TargetPoint MetricTree::barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                   const TargetPoint*) const {
  check_weights(points, weights);
  double total = 0.0;
  for (double w : weights) total += w;
  double best_value = std::numeric_limits<double>::infinity();
  TargetPoint best;
  std::vector<double> pos(points.size());
  // On each edge the objective is Σ w (s - c_i)² with c_i the signed position
  // of p_i along the edge's line; its minimizer is a clamped weighted mean.
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const TreeEdge& te = edges_[e];
    double mean = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const TargetPoint& p = points[k];
      if (static_cast<int>(p[0]) == e) {
        pos[k] = p[1];
      } else {
        const double da = to_vertex(p, te.a);
        const double db = to_vertex(p, te.b);
        pos[k] = da <= db ? -da : te.length + db;
      }
      mean += weights[k] * pos[k];
    }
    const double s = std::clamp(mean / total, 0.0, te.length);
    double value = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) value += weights[k] * sq(s - pos[k]);
    // Strict improvement keeps ties on the lowest-indexed edge.
    if (value < best_value * (1.0 - 1e-14) - 1e-300) {
      best_value = value;
      best = canonical(e, s);
    }
  }
  return best;
}

nlohmann::json MetricTree::to_json() const {
  nlohmann::json edges = nlohmann::json::array();
  for (const TreeEdge& e : edges_) edges.push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}});
  return {{"kind", "tree"}, {"vertices", vertex_count_}, {"edges", edges}};
}

nlohmann::json MetricTree::point_to_json(const TargetPoint& p) const {
  return {{"kind", "tree"}, {"edge", static_cast<int>(p[0])}, {"offset", p[1]}};
}

TargetPoint MetricTree::point_from_json(const nlohmann::json& j) const {
  return point(j.at("edge").get<int>(), j.at("offset").get<double>());
}

// ---------------------------------------------------------------- Hyperbolic

TargetPoint HyperbolicPlane::lift(double x1, double x2) {
  return TargetPoint{std::sqrt(1.0 + x1 * x1 + x2 * x2), x1, x2};
}

TargetPoint HyperbolicPlane::from_polar(double radius, double angle) {
  return lift(std::sinh(radius) * std::cos(angle), std::sinh(radius) * std::sin(angle));
}

void HyperbolicPlane::validate(const TargetPoint& p) const {
  if (p.size != 3) throw InvalidArgument("HyperbolicPlane: point must have three coordinates");
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(p[i])) throw InvalidArgument("HyperbolicPlane: non-finite coordinate");
  if (p[0] < 1.0 - 1e-10) throw InvalidArgument("HyperbolicPlane: leading coordinate must be >= 1");
  const double defect = -minkowski(p, p) - 1.0;
  if (std::abs(defect) > 1e-10 * std::max(1.0, p[0] * p[0]))
    throw InvalidArgument("HyperbolicPlane: point is not on the hyperboloid");
}

double HyperbolicPlane::distance(const TargetPoint& p, const TargetPoint& q) const {
  // 2 asinh(|p - q|_M / 2) avoids the cancellation of acosh near 1.
  const double chord2 = sq(p[1] - q[1]) + sq(p[2] - q[2]) - sq(p[0] - q[0]);
  return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, chord2)));
}

TargetPoint HyperbolicPlane::geodesic(const TargetPoint& p, const TargetPoint& q, double t) const {
  const double len = distance(p, q);
  if (len == 0.0) return p;
  const double sl = std::sinh(len);
  const double a = std::sinh((1.0 - t) * len) / sl;
  const double b = std::sinh(t * len) / sl;
  TargetPoint out = TargetPoint::zeros(3);
  for (int i = 0; i < 3; ++i) out[i] = a * p[i] + b * q[i];
  return renormalize(out);
}

TargetPoint HyperbolicPlane::barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                        const TargetPoint* hint) const {
  check_weights(points, weights);
  if (points.size() == 1) return points[0];
  double total = 0.0;
  for (double w : weights) total += w;
  auto objective = [&](const TargetPoint& z) {
    double v = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) v += weights[k] * sq(distance(z, points[k]));
    return v;
  };
  TargetPoint z = hint ? *hint : points[0];
  double residual = std::numeric_limits<double>::infinity();
  // Karcher fixed-point iteration z <- exp_z(mean of log_z p_i); the step
  // length is half the Riemannian gradient norm divided by the total weight.
  for (int iter = 0; iter < 10000; ++iter) {
    TargetPoint v = TargetPoint::zeros(3);
    for (std::size_t k = 0; k < points.size(); ++k) {
      double len = 0.0;
      const TargetPoint lg = hyperbolic_log(*this, z, points[k], &len);
      for (int i = 0; i < 3; ++i) v[i] += weights[k] * lg[i] / total;
    }
    residual = std::sqrt(std::max(0.0, minkowski(v, v)));
    if (residual <= 1e-13) return z;
    const TargetPoint next = hyperbolic_exp(z, v);
    if (residual <= 1e-10 && objective(next) >= objective(z)) return z;
    z = next;
  }
  if (residual <= 1e-10) return z;
  throw ConvergenceError("HyperbolicPlane: barycenter did not converge", residual);
}

nlohmann::json HyperbolicPlane::to_json() const { return {{"kind", "hyperbolic"}}; }

nlohmann::json HyperbolicPlane::point_to_json(const TargetPoint& p) const {
  return {{"kind", "hyperbolic"}, {"x", {p[0], p[1], p[2]}}};
}

TargetPoint HyperbolicPlane::point_from_json(const nlohmann::json& j) const {
  const auto x = j.at("x").get<std::array<double, 3>>();
  TargetPoint p{x[0], x[1], x[2]};
  validate(p);
  return renormalize(p);
}

// ---------------------------------------------------------------- Product

ProductSpace::ProductSpace(TargetSpacePtr first, TargetSpacePtr second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (!first_ || !second_) throw InvalidArgument("ProductSpace: null factor");
  if (first_->coord_count() + second_->coord_count() > kMaxPointCoords)
    throw InvalidArgument("ProductSpace: too many coordinates");
}

std::string ProductSpace::describe() const {
  return "product(" + first_->describe() + ", " + second_->describe() + ")";
}

TargetPoint ProductSpace::join(const TargetPoint& a, const TargetPoint& b) const {
  TargetPoint out = TargetPoint::zeros(coord_count());
  std::copy(a.c.begin(), a.c.begin() + a.size, out.c.begin());
  std::copy(b.c.begin(), b.c.begin() + b.size, out.c.begin() + a.size);
  return out;
}

TargetPoint ProductSpace::first_part(const TargetPoint& p) const {
  TargetPoint out = TargetPoint::zeros(first_->coord_count());
  std::copy(p.c.begin(), p.c.begin() + out.size, out.c.begin());
  return out;
}

TargetPoint ProductSpace::second_part(const TargetPoint& p) const {
  TargetPoint out = TargetPoint::zeros(second_->coord_count());
  const int off = first_->coord_count();
  std::copy(p.c.begin() + off, p.c.begin() + off + out.size, out.c.begin());
  return out;
}

void ProductSpace::validate(const TargetPoint& p) const {
  if (p.size != coord_count()) throw InvalidArgument("ProductSpace: wrong coordinate count");
  first_->validate(first_part(p));
  second_->validate(second_part(p));
}

double ProductSpace::distance(const TargetPoint& p, const TargetPoint& q) const {
  return std::hypot(first_->distance(first_part(p), first_part(q)), second_->distance(second_part(p), second_part(q)));
}

TargetPoint ProductSpace::geodesic(const TargetPoint& p, const TargetPoint& q, double t) const {
  return join(first_->geodesic(first_part(p), first_part(q), t), second_->geodesic(second_part(p), second_part(q), t));
}

TargetPoint ProductSpace::barycenter(std::span<const TargetPoint> points, std::span<const double> weights,
                                     const TargetPoint* hint) const {
  check_weights(points, weights);
  // The objective splits into independent factor objectives.
  std::vector<TargetPoint> a;
  std::vector<TargetPoint> b;
  a.reserve(points.size());
  b.reserve(points.size());
  for (const TargetPoint& p : points) {
    a.push_back(first_part(p));
    b.push_back(second_part(p));
  }
  TargetPoint ha;
  TargetPoint hb;
  if (hint) {
    ha = first_part(*hint);
    hb = second_part(*hint);
  }
  return join(first_->barycenter(a, weights, hint ? &ha : nullptr), second_->barycenter(b, weights, hint ? &hb : nullptr));
}

nlohmann::json ProductSpace::to_json() const {
  return {{"kind", "product"}, {"factors", {first_->to_json(), second_->to_json()}}};
}

nlohmann::json ProductSpace::point_to_json(const TargetPoint& p) const {
  return {{"kind", "product"}, {"a", first_->point_to_json(first_part(p))}, {"b", second_->point_to_json(second_part(p))}};
}

TargetPoint ProductSpace::point_from_json(const nlohmann::json& j) const {
  return join(first_->point_from_json(j.at("a")), second_->point_from_json(j.at("b")));
}

// ---------------------------------------------------------------- factories

TargetSpacePtr make_euclidean(int dim) { return std::make_shared<EuclideanSpace>(dim); }

TargetSpacePtr make_tree(int vertex_count, std::vector<TreeEdge> edges) {
  return std::make_shared<MetricTree>(vertex_count, std::move(edges));
}

TargetSpacePtr make_tripod(double leg) { return make_tree(4, {{0, 1, leg}, {0, 2, leg}, {0, 3, leg}}); }

TargetSpacePtr make_hyperbolic() { return std::make_shared<HyperbolicPlane>(); }

TargetSpacePtr make_product(TargetSpacePtr first, TargetSpacePtr second) {
  return std::make_shared<ProductSpace>(std::move(first), std::move(second));
}

TargetSpacePtr make_random_tree(int edge_count, std::uint64_t seed) {
  if (edge_count < 1) throw InvalidArgument("make_random_tree: need at least one edge");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> len(0.5, 2.0);
  std::vector<TreeEdge> edges;
  for (int k = 0; k < edge_count; ++k) {
    std::uniform_int_distribution<int> parent(0, k);
    edges.push_back({parent(rng), k + 1, len(rng)});
  }
  return make_tree(edge_count + 1, std::move(edges));
}

TargetPoint sample_point(const TargetSpace& s, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (s.kind()) {
    case TargetSpace::Kind::Euclidean: {
      TargetPoint p = TargetPoint::zeros(s.coord_count());
      for (int i = 0; i < p.size; ++i) p[i] = scale * (2.0 * unit(rng) - 1.0);
      return p;
    }
    case TargetSpace::Kind::Tree: {
      const auto& tree = static_cast<const MetricTree&>(s);
      std::uniform_int_distribution<int> edge(0, static_cast<int>(tree.edges().size()) - 1);
      const int e = edge(rng);
      return tree.point(e, unit(rng) * tree.edges()[e].length);
    }
    case TargetSpace::Kind::Hyperbolic:
      return HyperbolicPlane::from_polar(2.0 * scale * unit(rng), 2.0 * std::numbers::pi * unit(rng));
    case TargetSpace::Kind::Product: {
      const auto& prod = static_cast<const ProductSpace&>(s);
      const TargetPoint a = sample_point(prod.first(), rng, scale);
      return prod.join(a, sample_point(prod.second(), rng, scale));
    }
  }
  throw InvalidArgument("sample_point: unknown space kind");
}

TargetSpacePtr space_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "euclidean") return make_euclidean(j.at("dim").get<int>());
  if (kind == "hyperbolic") return make_hyperbolic();
  if (kind == "tree") {
    std::vector<TreeEdge> edges;
    for (const auto& e : j.at("edges"))
      edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(), e.at("length").get<double>()});
    return make_tree(j.at("vertices").get<int>(), std::move(edges));
  }
  if (kind == "product") {
    const auto& f = j.at("factors");
    if (f.size() != 2) throw InvalidArgument("product space needs two factors");
    return make_product(space_from_json(f[0]), space_from_json(f[1]));
  }
  throw InvalidArgument("unknown target space kind: " + kind);
}

// ---------------------------------------------------------------- operations

double distance(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q) {
  s.validate(p);
  s.validate(q);
  return s.distance(p, q);
}

TargetPoint geodesic_point(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("geodesic_point: t must lie in [0, 1]");
  s.validate(p);
  s.validate(q);
  return s.geodesic(p, q, t);
}

TargetPoint weighted_barycenter(const TargetSpace& s, std::span<const TargetPoint> points,
                                std::span<const double> weights) {
  check_weights(points, weights);
  for (const TargetPoint& p : points) s.validate(p);
  return s.barycenter(points, weights);
}

CheckReport check_cat0_comparison(const TargetSpace& s, const TargetPoint& z, const TargetPoint& p,
                                  const TargetPoint& q, double t) {
  const TargetPoint mid = geodesic_point(s, p, q, t);
  s.validate(z);
  CheckReport report("cat0_comparison", GateClass::Exact);
  report.tolerance = kSlackTolerance;
  const double lhs = sq(s.distance(z, mid));
  const double rhs = (1.0 - t) * sq(s.distance(z, p)) + t * sq(s.distance(z, q)) - t * (1.0 - t) * sq(s.distance(p, q));
  report.observe(lhs - rhs);
  report.measured["slack"] = rhs - lhs;
  report.settle();
  return report;
}

CheckReport check_quadrilateral(const TargetSpace& s, const TargetPoint& p, const TargetPoint& q,
                                const TargetPoint& r, const TargetPoint& fourth) {
  for (const TargetPoint* x : {&p, &q, &r, &fourth}) s.validate(*x);
  CheckReport report("quadrilateral", GateClass::Exact);
  report.tolerance = kSlackTolerance;
  const TargetPoint m = s.geodesic(q, r, 0.5);
  const double qr = s.distance(q, r);
  const double lhs = (s.distance(p, fourth) - qr) * qr;
  const double rhs = (sq(s.distance(p, m)) - sq(s.distance(p, q)) - sq(s.distance(m, q))) +
                     (sq(s.distance(fourth, m)) - sq(s.distance(fourth, r)) - sq(s.distance(m, r)));
  report.observe(rhs - lhs);
  report.measured["slack"] = lhs - rhs;
  report.settle();
  return report;
}

CheckReport check_distance_convexity(const TargetSpace& s, const TargetPoint& p, const TargetPoint& a,
                                     const TargetPoint& b, int samples) {
  if (samples < 1) throw InvalidArgument("check_distance_convexity: need at least one sample");
  for (const TargetPoint* x : {&p, &a, &b}) s.validate(*x);
  CheckReport report("distance_convexity", GateClass::Exact);
  report.tolerance = kSlackTolerance;
  const double da = s.distance(a, p);
  const double db = s.distance(b, p);
  const double dab = s.distance(a, b);
  double convex_slack = std::numeric_limits<double>::infinity();
  double two_convex_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= samples; ++k) {
    const double t = static_cast<double>(k) / samples;
    const double d = s.distance(s.geodesic(a, b, t), p);
    const double c1 = (1.0 - t) * da + t * db - d;
    const double c2 = (1.0 - t) * da * da + t * db * db - t * (1.0 - t) * dab * dab - d * d;
    convex_slack = std::min(convex_slack, c1);
    two_convex_slack = std::min(two_convex_slack, c2);
    report.observe(-std::min(c1, c2));
  }
  report.measured["convexity_slack"] = convex_slack;
  report.measured["two_convexity_slack"] = two_convex_slack;
  report.settle();
  return report;
}

}  // namespace npc
