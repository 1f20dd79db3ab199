#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace forge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Undirected edge with 0-based endpoints, u < v.
struct Edge {
  int u = 0;
  int v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph. Edges are kept in lexicographic order; the
/// position of an edge in that order is its index everywhere else.
class Graph {
 public:
  Graph() = default;
  /// Throws domain errors on self-loops, duplicates, u > v or out-of-range
  /// endpoints. Input order does not matter.
  Graph(int num_nodes, std::vector<Edge> edges);

  static Graph complete(int num_nodes);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int l) const { return edges_[static_cast<std::size_t>(l)]; }
  std::optional<int> edge_index(int u, int v) const;

  /// Graph on the same nodes restricted to edges with indicator > 0.5.
  Graph subgraph(const Vector& indicator) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

/// n x m matrix with -1 at the lower endpoint and +1 at the upper one.
Matrix incidence_matrix(const Graph& g);

/// E diag(w) E^T. Throws a dimension error when w.size() != m.
Matrix laplacian(const Graph& g, const Vector& w);

/// Effective edge weights (s_l - 1) p_l + 1 under protection s and attack
/// probabilities p. s may be relaxed to [0,1].
Vector expected_weights(const Vector& s, const Vector& p);

/// True when the edges with indicator > 0.5 connect all nodes.
bool is_connected(const Graph& g, const Vector& indicator);
bool is_connected(const Graph& g);

}  // namespace forge
