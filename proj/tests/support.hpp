#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "npc/domain_graph.hpp"
#include "npc/laplacian.hpp"

namespace npc::testing {

inline ScalarField random_field(int n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(n);
  for (int i = 0; i < n; ++i) f[i] = d(rng);
  return f;
}

// All-pairs shortest paths by Floyd-Warshall, independent of the library's Dijkstra.
inline std::vector<std::vector<double>> floyd_warshall(const DomainGraph& g) {
  const int n = g.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Edge& e : g.edges()) {
    d[e.a][e.b] = std::min(d[e.a][e.b], e.length);
    d[e.b][e.a] = std::min(d[e.b][e.a], e.length);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Dense generator L with (Lf)(x) = m(x)^-1 Σ w (f(y) - f(x)).
inline Eigen::MatrixXd dense_generator(const DomainGraph& g) {
  const int n = g.vertex_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    L(e.a, e.b) += e.conductance / g.measure(e.a);
    L(e.a, e.a) -= e.conductance / g.measure(e.a);
    L(e.b, e.a) += e.conductance / g.measure(e.b);
    L(e.b, e.b) -= e.conductance / g.measure(e.b);
  }
  return L;
}

}  // namespace npc::testing
