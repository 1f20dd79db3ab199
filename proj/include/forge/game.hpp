#pragma once

#include <variant>

#include "forge/constraints.hpp"
#include "forge/graph.hpp"

namespace forge {

/// Attacker feasible set: box ∩ budget, or an explicit list of extreme points.
using AttackerSet = std::variant<LinearConstraintSet, VertexList>;

/// Coordinator protects edges (binary s ∈ S), attacker removes edges with
/// probabilities p ∈ P. Edge weights are (s_l - 1) p_l + 1.
struct GameInstance {
  Graph graph;
  LinearConstraintSet S;
  AttackerSet P;

  /// Throws an infeasible error if S has no binary point or P is empty,
  /// dimension errors on size mismatches.
  static GameInstance make(Graph graph, LinearConstraintSet S, AttackerSet P);
};

struct GameValue {
  Vector s_star;
  Vector p_star;
  double alpha = 0.0;
};

/// A best response and its value.
struct Response {
  Vector play;
  double alpha = 0.0;
};

/// Extreme points of P, sorted lexicographically.
VertexList attacker_vertices(const GameInstance& gi);
/// Membership in P (convex hull of the list for explicit vertices).
bool attacker_contains(const GameInstance& gi, const Vector& p);

/// Exact coordinator best response by enumerating S; lexicographically
/// smallest s on ties.
Response solve_p2(const GameInstance& gi, const Vector& p);

struct RelaxedResponse {
  Vector s;
  double alpha = 0.0;
  /// Optimum of the relaxation; an upper bound on the exact best response.
  double bound = 0.0;
  bool exact = false;
};

/// Coordinator response from the lifted relaxation in s, rounded by taking
/// edges in decreasing y order while S stays satisfied. Not exact; meant for
/// sets S too large to enumerate.
RelaxedResponse solve_p2_relaxed(const GameInstance& gi, const Vector& p);

/// Exact attacker best response: alpha is concave in p, so its minimum over
/// P sits at an extreme point. Lexicographically smallest vertex on ties.
Response solve_p3(const GameInstance& gi, const Vector& s);

/// True iff s is a best response to p and p is a best response to s, both
/// within 1e-8 in value.
bool check_nash(const GameInstance& gi, const Vector& s, const Vector& p);

/// True iff the protected edges alone connect every node.
bool deterministic_connectivity(const GameInstance& gi, const Vector& s);

/// max over s ∈ S of min over vertices of P of alpha(s, p).
GameValue preventive_oracle(const GameInstance& gi);

}  // namespace forge
