#pragma once

#include <optional>
#include <set>
#include <vector>

#include "forge/graph.hpp"

namespace forge {

inline constexpr double kMembershipTol = 1e-9;

/// Cap on the number of edges incident to one node that may be selected.
struct DegreeCap {
  int node = 0;
  double cap = 0.0;
  std::vector<int> edges;  // indices of edges incident to `node`
};

/// Box, optional budget, optional degree caps, and index sets pinned to the
/// lower bound (forbidden) or to one (fixed_one). Indices are 0-based.
/// Describes X (edge additions), S' (protections) and P (attacks).
class LinearConstraintSet {
 public:
  LinearConstraintSet() = default;
  /// Throws a domain error unless lower <= upper componentwise.
  LinearConstraintSet(Vector lower, Vector upper);

  static LinearConstraintSet box(int m, double lower, double upper);

  LinearConstraintSet& with_budget(double cap);
  LinearConstraintSet& with_degree_cap(const Graph& g, int node, double cap);
  LinearConstraintSet& forbid(int l);
  LinearConstraintSet& fix_one(int l);

  int size() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::optional<double>& budget() const { return budget_; }
  const std::vector<DegreeCap>& degree_caps() const { return degree_caps_; }
  const std::set<int>& forbidden() const { return forbidden_; }
  const std::set<int>& fixed_one() const { return fixed_one_; }

  /// Bounds with forbidden/fixed indices collapsed to single values.
  Vector effective_lower() const;
  Vector effective_upper() const;

 private:
  void check_index(int l) const;

  Vector lower_;
  Vector upper_;
  std::optional<double> budget_;
  std::vector<DegreeCap> degree_caps_;
  std::set<int> forbidden_;
  std::set<int> fixed_one_;
};

/// Exact membership up to kMembershipTol. Throws a dimension error on a
/// length mismatch.
bool contains(const LinearConstraintSet& cs, const Vector& z);

using VertexList = std::vector<Vector>;

/// Extreme points of box ∩ {sum z <= budget}: box vertices under the budget
/// plus budget-hyperplane crossings of box edges. Deduplicated and sorted
/// lexicographically. Infeasible error on an empty polytope, unsupported
/// error when degree caps are present, size error above 20 coordinates.
VertexList enumerate_vertices(const LinearConstraintSet& cs);

/// All binary members in lexicographic order. Size error when more than 25
/// coordinates are free.
std::vector<Vector> enumerate_binary(const LinearConstraintSet& cs);

/// Lexicographic order with kMembershipTol slack.
bool lex_less(const Vector& a, const Vector& b);

}  // namespace forge
