#include "forge/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "forge/error.hpp"

namespace forge {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

Graph::Graph(int num_nodes, std::vector<Edge> edges) : n_(num_nodes), edges_(std::move(edges)) {
  if (n_ < 1) fail(ErrorKind::domain, "graph needs at least one node");
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.v >= n_ || e.u >= n_ || e.v < 0)
      fail(ErrorKind::domain, "edge endpoint out of range: (" + std::to_string(e.u + 1) + "," +
                                  std::to_string(e.v + 1) + ")");
    if (e.u == e.v) fail(ErrorKind::domain, "self-loop at node " + std::to_string(e.u + 1));
    if (e.u > e.v)
      fail(ErrorKind::domain, "edge endpoints must satisfy i < j: (" + std::to_string(e.u + 1) +
                                  "," + std::to_string(e.v + 1) + ")");
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end())
    fail(ErrorKind::domain, "duplicate edge (" + std::to_string(dup->u + 1) + "," +
                                std::to_string(dup->v + 1) + ")");
}

Graph Graph::complete(int num_nodes) {
  std::vector<Edge> edges;
  for (int i = 0; i < num_nodes; ++i)
    for (int j = i + 1; j < num_nodes; ++j) edges.push_back({i, j});
  return Graph(num_nodes, std::move(edges));
}

std::optional<int> Graph::edge_index(int u, int v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{u, v});
  if (it == edges_.end() || *it != Edge{u, v}) return std::nullopt;
  return static_cast<int>(it - edges_.begin());
}

Graph Graph::subgraph(const Vector& indicator) const {
  if (indicator.size() != num_edges()) fail(ErrorKind::dimension, "indicator length != edge count");
  std::vector<Edge> kept;
  for (int l = 0; l < num_edges(); ++l)
    if (indicator[l] > 0.5) kept.push_back(edge(l));
  return Graph(n_, std::move(kept));
}

Matrix incidence_matrix(const Graph& g) {
  Matrix e = Matrix::Zero(g.num_nodes(), g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    e(g.edge(l).u, l) = -1.0;
    e(g.edge(l).v, l) = 1.0;
  }
  return e;
}

Matrix laplacian(const Graph& g, const Vector& w) {
  if (w.size() != g.num_edges())
    fail(ErrorKind::dimension, "weight vector has length " + std::to_string(w.size()) +
                                   ", graph has " + std::to_string(g.num_edges()) + " edges");
  // Accumulate w_l e_l e_l^T directly; same result as E diag(w) E^T.
  Matrix lap = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto [i, j] = g.edge(l);
    lap(i, i) += w[l];
    lap(j, j) += w[l];
    lap(i, j) -= w[l];
    lap(j, i) -= w[l];
  }
  return lap;
}

Vector expected_weights(const Vector& s, const Vector& p) {
  if (s.size() != p.size()) fail(ErrorKind::dimension, "s and p lengths differ");
  Vector w(s.size());
  for (Eigen::Index l = 0; l < s.size(); ++l) {
    if (!(p[l] >= 0.0 && p[l] <= 1.0))
      fail(ErrorKind::domain, "attack probability outside [0,1] at edge " + std::to_string(l + 1));
    if (!(s[l] >= 0.0 && s[l] <= 1.0))
      fail(ErrorKind::domain, "protection entry outside [0,1] at edge " + std::to_string(l + 1));
    w[l] = (s[l] - 1.0) * p[l] + 1.0;
  }
  return w;
}

bool is_connected(const Graph& g, const Vector& indicator) {
  if (indicator.size() != g.num_edges()) fail(ErrorKind::dimension, "indicator length != edge count");
  DisjointSets sets(g.num_nodes());
  int components = g.num_nodes();
  for (int l = 0; l < g.num_edges(); ++l)
    if (indicator[l] > 0.5 && sets.unite(g.edge(l).u, g.edge(l).v)) --components;
  return components == 1;
}

bool is_connected(const Graph& g) { return is_connected(g, Vector::Ones(g.num_edges())); }

}  // namespace forge
