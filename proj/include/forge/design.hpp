#pragma once

#include <string>
#include <vector>

#include "forge/constraints.hpp"
#include "forge/graph.hpp"
#include "forge/sdp.hpp"

namespace forge {

/// Edge-addition instance: grow the initial edges of `graph` (the complete
/// candidate set) by at most k edges, keeping the indicator in X.
struct DesignProblem {
  Graph graph;
  std::vector<int> initial_edges;
  int k = 0;
  LinearConstraintSet X;

  /// Builds the problem, pinning the initial edges in X. Throws a domain
  /// error on repeated/out-of-range initial edges or k + |E0| > m.
  static DesignProblem make(Graph graph, std::vector<int> initial_edges, int k, LinearConstraintSet X);
  /// Same with X = [0,1]^m.
  static DesignProblem make(Graph graph, std::vector<int> initial_edges, int k);

  Vector initial_indicator() const;
};

struct DesignResult {
  std::string strategy;
  std::vector<int> added_edges;
  /// lambda2 after each addition.
  std::vector<double> lambda2_trace;
  double initial_lambda2 = 0.0;
  double final_lambda2 = 0.0;
  /// Relaxed optimum of every solve (relaxation strategies only).
  std::vector<double> relaxation_values;
  /// Fewer than k edges were added because nothing feasible remained.
  bool stopped_early = false;
};

/// Result of the rank-relaxed lift over the edges still undecided.
struct RelaxedLift {
  double alpha = 0.0;
  /// y = 2x - 1 over all m edges (decided edges at exactly +-1).
  Vector y;
  /// Full (m+1) x (m+1) lifted matrix [[Y, y], [y^T, 1]].
  Matrix lifted;
  SolveStatus status = SolveStatus::optimal;
  int iterations = 0;
};

/// Relaxation of the binary edge choice with weights w_off + (w_on - w_off)
/// x_l. Edges with decided[l] = +1 / -1 are fixed on / off; the remaining
/// ones share `budget` additions and the constraints of X (evaluated at the
/// x indicator). Used for design (w_off = 0, w_on = 1) and for the
/// coordinator's relaxed protection problem.
RelaxedLift solve_lifted_relaxation(const Graph& g, const Vector& w_off, const Vector& w_on,
                                    const std::vector<int>& decided, int budget,
                                    const LinearConstraintSet& X, const SolverSettings& settings = {});

/// Orthonormal basis of the complement of the ones vector (n x (n-1)).
Matrix ones_complement_basis(int n);

/// Adds the feasible absent edge with the largest Fiedler score, k times.
DesignResult greedy_fiedler(const DesignProblem& dp);
/// Solves the LMI over [0,1]^m ∩ X each step and adds the largest x_l.
DesignResult convex_hull_relax(const DesignProblem& dp, const SolverSettings& settings = {});
/// Solves the rank-relaxed lift each step and adds the largest y_l.
DesignResult sdp_relax(const DesignProblem& dp, const SolverSettings& settings = {});
/// Exhaustive search over all feasible sets of at most k additions.
DesignResult brute_force_design(const DesignProblem& dp);

/// True when edge l is absent in `current` and adding it keeps the upper
/// bounds, forbidden set, budget and degree caps of X.
bool can_add(const LinearConstraintSet& X, const Vector& current, int l);

}  // namespace forge
