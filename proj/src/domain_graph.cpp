#include "npc/domain_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace npc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using HeapItem = std::pair<double, Vertex>;
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

bool is_connected(int n, const std::vector<int>& offsets, const std::vector<Neighbor>& adj) {
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::vector<Vertex> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const Vertex x = stack.back();
    stack.pop_back();
    for (int k = offsets[x]; k < offsets[x + 1]; ++k) {
      const Vertex y = adj[k].v;
      if (!seen[y]) {
        seen[y] = true;
        ++count;
        stack.push_back(y);
      }
    }
  }
  return count == n;
}

// Hyperbolic distance between points given in geodesic polar coordinates.
double hyperbolic_polar_distance(double r1, double t1, double r2, double t2) {
  const double c = std::cosh(r1) * std::cosh(r2) - std::sinh(r1) * std::sinh(r2) * std::cos(t1 - t2);
  return std::acosh(std::max(1.0, c));
}

}  // namespace

DomainGraph::DomainGraph(std::vector<double> measure, std::vector<Edge> edges, double curvature_k,
                         double dimension_n, std::vector<std::array<double, 3>> positions)
    : measure_(std::move(measure)),
      edges_(std::move(edges)),
      curvature_k_(curvature_k),
      dimension_n_(dimension_n),
      positions_(std::move(positions)) {
  const int n = vertex_count();
  if (n < 1) throw InvalidArgument("DomainGraph: no vertices");
  if (!(dimension_n_ >= 1.0)) throw InvalidArgument("DomainGraph: dimension_n must be >= 1");
  if (!positions_.empty() && static_cast<int>(positions_.size()) != n)
    throw InvalidArgument("DomainGraph: positions size mismatch");
  for (double m : measure_)
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("DomainGraph: measure must be positive");

  std::vector<int> degree(n, 0);
  for (const Edge& e : edges_) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) throw InvalidArgument("DomainGraph: edge endpoint out of range");
    if (e.a == e.b) throw InvalidArgument("DomainGraph: self-loop");
    if (!(e.length > 0.0) || !(e.conductance > 0.0))
      throw InvalidArgument("DomainGraph: edge length and conductance must be positive");
    ++degree[e.a];
    ++degree[e.b];
    mesh_scale_ = std::max(mesh_scale_, e.length);
  }
  offsets_.assign(n + 1, 0);
  for (int x = 0; x < n; ++x) offsets_[x + 1] = offsets_[x] + degree[x];
  adjacency_.resize(offsets_[n]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.a]++] = {e.b, e.length, e.conductance};
    adjacency_[fill[e.b]++] = {e.a, e.length, e.conductance};
  }
  for (int x = 0; x < n; ++x) {
    auto first = adjacency_.begin() + offsets_[x];
    auto last = adjacency_.begin() + offsets_[x + 1];
    std::sort(first, last, [](const Neighbor& l, const Neighbor& r) { return l.v < r.v; });
    if (std::adjacent_find(first, last, [](const Neighbor& l, const Neighbor& r) { return l.v == r.v; }) != last)
      throw InvalidArgument("DomainGraph: duplicate edge");
  }
  if (!is_connected(n, offsets_, adjacency_)) throw InvalidArgument("DomainGraph: graph is not connected");
  if (n == 1) mesh_scale_ = 0.0;
}

double DomainGraph::total_measure() const { return std::accumulate(measure_.begin(), measure_.end(), 0.0); }

std::vector<double> DomainGraph::distances_from(Vertex source) const {
  if (!valid_vertex(source)) throw InvalidArgument("distances_from: invalid vertex");
  std::vector<double> dist(vertex_count(), kInf);
  MinHeap heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (const Neighbor& nb : neighbors(x)) {
      const double cand = d + nb.length;
      if (cand < dist[nb.v]) {
        dist[nb.v] = cand;
        heap.emplace(cand, nb.v);
      }
    }
  }
  return dist;
}

std::vector<ReachedVertex> DomainGraph::within(Vertex center, double radius) const {
  if (!valid_vertex(center)) throw InvalidArgument("within: invalid vertex");
  std::vector<ReachedVertex> out;
  if (!(radius > 0.0)) return out;
  std::unordered_map<Vertex, double> best;
  MinHeap heap;
  best[center] = 0.0;
  heap.emplace(0.0, center);
  while (!heap.empty()) {
    const auto [d, x] = heap.top();
    heap.pop();
    if (d > best[x]) continue;
    out.push_back({x, d});
    for (const Neighbor& nb : neighbors(x)) {
      const double cand = d + nb.length;
      if (!(cand < radius)) continue;
      auto [it, inserted] = best.try_emplace(nb.v, cand);
      if (inserted || cand < it->second) {
        it->second = cand;
        heap.emplace(cand, nb.v);
      }
    }
  }
  return out;
}

const std::vector<double>& DomainGraph::all_pairs() const {
  std::call_once(all_pairs_->once, [this] {
    const int n = vertex_count();
    auto& table = all_pairs_->table;
    table.resize(static_cast<std::size_t>(n) * n);
    for (Vertex x = 0; x < n; ++x) {
      const auto row = distances_from(x);
      std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>(x) * n);
    }
  });
  return all_pairs_->table;
}

double DomainGraph::distance(Vertex x, Vertex y) const {
  if (!valid_vertex(x) || !valid_vertex(y)) throw InvalidArgument("distance: invalid vertex");
  if (x == y) return 0.0;
  if (static_cast<std::size_t>(vertex_count()) <= kAllPairsLimit) {
    return all_pairs()[static_cast<std::size_t>(x) * vertex_count() + y];
  }
  return distances_from(x)[y];
}

bool operator==(const DomainGraph& lhs, const DomainGraph& rhs) {
  if (lhs.measure_ != rhs.measure_ || lhs.edges_.size() != rhs.edges_.size()) return false;
  for (std::size_t k = 0; k < lhs.edges_.size(); ++k) {
    const Edge& a = lhs.edges_[k];
    const Edge& b = rhs.edges_[k];
    if (a.a != b.a || a.b != b.b || a.length != b.length || a.conductance != b.conductance) return false;
  }
  return lhs.curvature_k_ == rhs.curvature_k_ && lhs.dimension_n_ == rhs.dimension_n_ &&
         lhs.positions_ == rhs.positions_;
}

VertexSubset::VertexSubset(const DomainGraph& g, std::vector<bool> mask) : mask_(std::move(mask)) {
  const int n = g.vertex_count();
  if (static_cast<int>(mask_.size()) != n) throw InvalidArgument("VertexSubset: mask size mismatch");
  boundary_.assign(n, false);
  for (Vertex x = 0; x < n; ++x) {
    if (!mask_[x]) continue;
    members_.push_back(x);
    for (const Neighbor& nb : g.neighbors(x)) {
      if (!mask_[nb.v]) {
        boundary_[x] = true;
        break;
      }
    }
    if (boundary_[x]) boundary_list_.push_back(x);
    else interior_.push_back(x);
  }
}

VertexSubset VertexSubset::all(const DomainGraph& g) { return VertexSubset(g, std::vector<bool>(g.vertex_count(), true)); }

bool VertexSubset::subset_of(const VertexSubset& other) const {
  if (other.mask_.size() != mask_.size()) return false;
  return std::all_of(members_.begin(), members_.end(), [&](Vertex x) { return other.mask_[x]; });
}

DomainGraph build_path(int n, double spacing) {
  if (n < 2) throw InvalidArgument("build_path: need at least 2 vertices");
  if (!(spacing > 0.0)) throw InvalidArgument("build_path: spacing must be positive");
  std::vector<double> measure(n, spacing);
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  // Conductance 1/spacing makes the Laplacian a spacing^-2 second difference.
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, spacing, 1.0 / spacing});
  std::vector<std::array<double, 3>> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = {i * spacing, 0.0, 0.0};
  return DomainGraph(std::move(measure), std::move(edges), 0.0, 1.0, std::move(pos));
}

DomainGraph build_torus_grid(int nx, int ny, double spacing) {
  if (nx < 3 || ny < 3) throw InvalidArgument("build_torus_grid: sizes must be at least 3");
  if (!(spacing > 0.0)) throw InvalidArgument("build_torus_grid: spacing must be positive");
  const int n = nx * ny;
  std::vector<double> measure(n, spacing * spacing);
  std::vector<Edge> edges;
  edges.reserve(2 * static_cast<std::size_t>(n));
  std::vector<std::array<double, 3>> pos(n);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vertex v = torus_vertex(nx, i, j);
      pos[v] = {i * spacing, j * spacing, 0.0};
      edges.push_back({v, torus_vertex(nx, (i + 1) % nx, j), spacing, 1.0});
      edges.push_back({v, torus_vertex(nx, i, (j + 1) % ny), spacing, 1.0});
    }
  }
  return DomainGraph(std::move(measure), std::move(edges), 0.0, 2.0, std::move(pos));
}

DomainGraph build_hyperbolic_disk(double radius, double spacing) {
  if (!(spacing > 0.0) || !(radius > spacing))
    throw InvalidArgument("build_hyperbolic_disk: need radius > spacing > 0");
  const int rings = static_cast<int>(std::floor(radius / spacing + 1e-9));
  auto ring_size = [&](int k) {
    if (k == 0) return 1;
    const double circumference = 2.0 * std::numbers::pi * std::sinh(k * spacing);
    return std::max(6, static_cast<int>(std::lround(circumference / spacing)));
  };
  double estimate = 0.0;
  for (int k = 0; k <= rings; ++k) {
    estimate += ring_size(k);
    if (estimate > 1e6) throw InvalidArgument("build_hyperbolic_disk: mesh would exceed 10^6 vertices");
  }

  // Vertices on concentric geodesic circles; alternate rings are rotated by
  // half a step.
  std::vector<std::vector<Vertex>> ring_ids(rings + 1);
  std::vector<double> rad;
  std::vector<double> ang;
  for (int k = 0; k <= rings; ++k) {
    const int count = ring_size(k);
    const double offset = (k % 2 == 1) ? std::numbers::pi / count : 0.0;
    for (int j = 0; j < count; ++j) {
      ring_ids[k].push_back(static_cast<Vertex>(rad.size()));
      rad.push_back(k * spacing);
      ang.push_back(k == 0 ? 0.0 : offset + 2.0 * std::numbers::pi * j / count);
    }
  }
  const int n = static_cast<int>(rad.size());

  std::vector<std::array<Vertex, 3>> triangles;
  for (int j = 0; j < ring_size(1); ++j) {
    const auto& r1 = ring_ids[1];
    triangles.push_back({0, r1[j], r1[(j + 1) % r1.size()]});
  }
  auto wrap = [](double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    return a < 0 ? a + two_pi : a;
  };
  for (int k = 1; k < rings; ++k) {
    const auto& inner = ring_ids[k];
    const auto& outer = ring_ids[k + 1];
    const int ni = static_cast<int>(inner.size());
    const int no = static_cast<int>(outer.size());
    // Zipper triangulation: advance on whichever ring has the smaller next
    // (unwrapped) angle.
    const double base = ang[inner[0]];
    auto rel = [&](Vertex v) { return wrap(ang[v] - base); };
    int jo0 = 0;
    for (int j = 0; j < no; ++j)
      if (rel(outer[j]) < rel(outer[jo0])) jo0 = j;
    const double two_pi = 2.0 * std::numbers::pi;
    auto inner_angle = [&](int a) { return a < ni ? rel(inner[a]) : two_pi; };
    auto outer_angle = [&](int b) { return b < no ? rel(outer[(jo0 + b) % no]) : two_pi + rel(outer[jo0]); };
    int a = 0;
    int b = 0;
    while (a < ni || b < no) {
      const Vertex vi = inner[a % ni];
      const Vertex vo = outer[(jo0 + b) % no];
      const bool take_inner = b == no || (a < ni && inner_angle(a + 1) <= outer_angle(b + 1));
      if (take_inner) {
        triangles.push_back({vi, inner[(a + 1) % ni], vo});
        ++a;
      } else {
        triangles.push_back({vi, outer[(jo0 + b + 1) % no], vo});
        ++b;
      }
    }
  }

  auto dist = [&](Vertex p, Vertex q) { return hyperbolic_polar_distance(rad[p], ang[p], rad[q], ang[q]); };

  std::vector<double> measure(n, 0.0);
  std::vector<std::pair<std::pair<Vertex, Vertex>, double>> cot;
  cot.reserve(triangles.size() * 3);
  for (const auto& t : triangles) {
    const double la = dist(t[1], t[2]);
    const double lb = dist(t[0], t[2]);
    const double lc = dist(t[0], t[1]);
    // Hyperbolic angles via the hyperbolic law of cosines; area = pi - sum.
    auto hangle = [](double opp, double s1, double s2) {
      const double c = (std::cosh(s1) * std::cosh(s2) - std::cosh(opp)) / (std::sinh(s1) * std::sinh(s2));
      return std::acos(std::clamp(c, -1.0, 1.0));
    };
    const double area = std::max(0.0, std::numbers::pi - hangle(la, lb, lc) - hangle(lb, la, lc) - hangle(lc, la, lb));
    for (Vertex v : t) measure[v] += area / 3.0;
    // Cotangent weights of the Euclidean triangle with the same side lengths.
    auto ecot = [](double opp, double s1, double s2) {
      const double c = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      return c / s;
    };
    auto key = [](Vertex p, Vertex q) { return std::make_pair(std::min(p, q), std::max(p, q)); };
    cot.push_back({key(t[1], t[2]), ecot(la, lb, lc)});
    cot.push_back({key(t[0], t[2]), ecot(lb, la, lc)});
    cot.push_back({key(t[0], t[1]), ecot(lc, la, lb)});
  }
  std::sort(cot.begin(), cot.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < cot.size();) {
    std::size_t e = k;
    double w = 0.0;
    while (e < cot.size() && cot[e].first == cot[k].first) w += 0.5 * cot[e++].second;
    const auto [p, q] = cot[k].first;
    // Non-positive cotangent weights (obtuse pairs) are floored to keep the
    // generator a Markov generator.
    edges.push_back({p, q, dist(p, q), std::max(w, 0.05)});
    k = e;
  }
  std::vector<std::array<double, 3>> pos(n);
  for (int v = 0; v < n; ++v)
    pos[v] = {std::cosh(rad[v]), std::sinh(rad[v]) * std::cos(ang[v]), std::sinh(rad[v]) * std::sin(ang[v])};
  return DomainGraph(std::move(measure), std::move(edges), -1.0, 2.0, std::move(pos));
}

double graph_distance(const DomainGraph& g, Vertex x, Vertex y) { return g.distance(x, y); }

VertexSubset ball(const DomainGraph& g, Vertex center, double r) {
  if (!(r >= 0.0)) throw InvalidArgument("ball: radius must be non-negative");
  std::vector<bool> mask(g.vertex_count(), false);
  for (const ReachedVertex& rv : g.within(center, r)) mask[rv.v] = true;
  return VertexSubset(g, std::move(mask));
}

VertexSubset torus_box(const DomainGraph& g, int nx, int i0, int i1, int j0, int j1) {
  if (nx <= 0 || g.vertex_count() % nx != 0) throw InvalidArgument("torus_box: nx does not match the graph");
  const int ny = g.vertex_count() / nx;
  if (i0 < 0 || j0 < 0 || i1 >= nx || j1 >= ny || i0 > i1 || j0 > j1) throw InvalidArgument("torus_box: bad range");
  std::vector<bool> mask(g.vertex_count(), false);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) mask[torus_vertex(nx, i, j)] = true;
  return VertexSubset(g, std::move(mask));
}

nlohmann::json to_json(const DomainGraph& g) {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (Vertex x = 0; x < g.vertex_count(); ++x) verts.push_back({{"id", x}, {"measure", g.measure(x)}});
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges())
    edges.push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}, {"conductance", e.conductance}});
  j["k"] = g.curvature_k();
  j["n"] = g.dimension_n();
  j["scale"] = g.mesh_scale();
  if (g.has_positions()) j["positions"] = g.positions();
  return j;
}

DomainGraph graph_from_json(const nlohmann::json& j) {
  const auto& verts = j.at("vertices");
  std::vector<double> measure(verts.size());
  for (const auto& v : verts) {
    const int id = v.at("id").get<int>();
    if (id < 0 || id >= static_cast<int>(measure.size())) throw InvalidArgument("graph_from_json: bad vertex id");
    measure[id] = v.at("measure").get<double>();
  }
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(), e.at("length").get<double>(),
                     e.at("conductance").get<double>()});
  std::vector<std::array<double, 3>> pos;
  if (j.contains("positions")) pos = j.at("positions").get<std::vector<std::array<double, 3>>>();
  DomainGraph g(std::move(measure), std::move(edges), j.at("k").get<double>(), j.at("n").get<double>(), std::move(pos));
  if (j.contains("scale") && std::abs(j.at("scale").get<double>() - g.mesh_scale()) > 1e-12 * (1.0 + g.mesh_scale()))
    throw InvalidArgument("graph_from_json: scale does not match the maximum edge length");
  return g;
}

}  // namespace npc
