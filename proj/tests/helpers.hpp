#pragma once

#include <random>

#include <Eigen/Eigenvalues>

#include "forge/graph.hpp"

namespace testutil {

inline forge::Graph triangle() { return forge::Graph(3, {{0, 1}, {0, 2}, {1, 2}}); }
inline forge::Graph path3() { return forge::Graph(3, {{0, 1}, {1, 2}}); }

// Every pair included with probability `density`; may be disconnected.
inline forge::Graph random_graph(int n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<forge::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return forge::Graph(n, std::move(edges));
}

inline forge::Vector random_binary(int m, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  forge::Vector s(m);
  for (int l = 0; l < m; ++l) s[l] = coin(rng) ? 1.0 : 0.0;
  return s;
}

inline forge::Vector random_uniform(int m, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  forge::Vector p(m);
  for (int l = 0; l < m; ++l) p[l] = u(rng);
  return p;
}

// Independent reference eigensolve.
inline forge::Vector reference_eigenvalues(const forge::Matrix& a) {
  Eigen::SelfAdjointEigenSolver<forge::Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace testutil
