#include "forge/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forge/error.hpp"

namespace forge {

namespace {

constexpr int kMaxVertexDim = 20;
constexpr int kMaxBinaryFree = 25;

bool near(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() <= kMembershipTol;
}

}  // namespace

LinearConstraintSet::LinearConstraintSet(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) fail(ErrorKind::dimension, "lower/upper lengths differ");
  for (Eigen::Index l = 0; l < lower_.size(); ++l)
    if (!(lower_[l] <= upper_[l]))
      fail(ErrorKind::domain, "lower > upper at index " + std::to_string(l + 1));
}

LinearConstraintSet LinearConstraintSet::box(int m, double lower, double upper) {
  return LinearConstraintSet(Vector::Constant(m, lower), Vector::Constant(m, upper));
}

LinearConstraintSet& LinearConstraintSet::with_budget(double cap) {
  budget_ = cap;
  return *this;
}

LinearConstraintSet& LinearConstraintSet::with_degree_cap(const Graph& g, int node, double cap) {
  if (g.num_edges() != size()) fail(ErrorKind::dimension, "degree cap graph does not match set size");
  if (node < 0 || node >= g.num_nodes()) fail(ErrorKind::domain, "degree cap node out of range");
  DegreeCap dc{node, cap, {}};
  for (int l = 0; l < g.num_edges(); ++l)
    if (g.edge(l).u == node || g.edge(l).v == node) dc.edges.push_back(l);
  std::erase_if(degree_caps_, [&](const DegreeCap& d) { return d.node == node; });
  degree_caps_.push_back(std::move(dc));
  std::sort(degree_caps_.begin(), degree_caps_.end(),
            [](const DegreeCap& a, const DegreeCap& b) { return a.node < b.node; });
  return *this;
}

void LinearConstraintSet::check_index(int l) const {
  if (l < 0 || l >= size()) fail(ErrorKind::domain, "edge index out of range: " + std::to_string(l + 1));
}

LinearConstraintSet& LinearConstraintSet::forbid(int l) {
  check_index(l);
  if (fixed_one_.contains(l))
    fail(ErrorKind::domain, "edge " + std::to_string(l + 1) + " is both forbidden and fixed");
  forbidden_.insert(l);
  return *this;
}

LinearConstraintSet& LinearConstraintSet::fix_one(int l) {
  check_index(l);
  if (forbidden_.contains(l))
    fail(ErrorKind::domain, "edge " + std::to_string(l + 1) + " is both forbidden and fixed");
  fixed_one_.insert(l);
  return *this;
}

Vector LinearConstraintSet::effective_lower() const {
  Vector lo = lower_;
  for (int l : fixed_one_) lo[l] = 1.0;
  return lo;
}

Vector LinearConstraintSet::effective_upper() const {
  Vector hi = upper_;
  for (int l : forbidden_) hi[l] = lower_[l];
  for (int l : fixed_one_) hi[l] = 1.0;
  return hi;
}

bool contains(const LinearConstraintSet& cs, const Vector& z) {
  if (z.size() != cs.size())
    fail(ErrorKind::dimension, "vector length " + std::to_string(z.size()) + " != constraint size " +
                                   std::to_string(cs.size()));
  for (int l = 0; l < cs.size(); ++l) {
    if (z[l] < cs.lower()[l] - kMembershipTol || z[l] > cs.upper()[l] + kMembershipTol) return false;
  }
  for (int l : cs.forbidden())
    if (std::abs(z[l] - cs.lower()[l]) > kMembershipTol) return false;
  for (int l : cs.fixed_one())
    if (std::abs(z[l] - 1.0) > kMembershipTol) return false;
  if (cs.budget() && z.sum() > *cs.budget() + kMembershipTol) return false;
  for (const DegreeCap& dc : cs.degree_caps()) {
    double total = 0.0;
    for (int l : dc.edges) total += z[l];
    if (total > dc.cap + kMembershipTol) return false;
  }
  return true;
}

bool lex_less(const Vector& a, const Vector& b) {
  const Eigen::Index n = std::min(a.size(), b.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] < b[i] - kMembershipTol) return true;
    if (a[i] > b[i] + kMembershipTol) return false;
  }
  return a.size() < b.size();
}

VertexList enumerate_vertices(const LinearConstraintSet& cs) {
  if (!cs.degree_caps().empty())
    fail(ErrorKind::unsupported, "vertex enumeration supports box and budget constraints only");
  const int m = cs.size();
  if (m > kMaxVertexDim) fail(ErrorKind::size, "vertex enumeration limited to 20 coordinates");

  const Vector lo = cs.effective_lower();
  const Vector hi = cs.effective_upper();
  for (int l = 0; l < m; ++l)
    if (lo[l] > hi[l] + kMembershipTol) fail(ErrorKind::infeasible, "fixed index outside its bounds");

  std::vector<int> free;
  for (int l = 0; l < m; ++l)
    if (hi[l] - lo[l] > kMembershipTol) free.push_back(l);
  const int f = static_cast<int>(free.size());
  const double cap = cs.budget().value_or(std::numeric_limits<double>::infinity());

  VertexList out;
  const std::uint64_t corners = std::uint64_t{1} << f;
  for (std::uint64_t mask = 0; mask < corners; ++mask) {
    Vector z = lo;
    for (int b = 0; b < f; ++b)
      if (mask >> b & 1U) z[free[b]] = hi[free[b]];
    const double total = z.sum();
    if (total <= cap + kMembershipTol) out.push_back(z);

    if (!cs.budget()) continue;
    // Budget hyperplane crossing along each box edge leaving this corner
    // through a coordinate currently at its lower bound.
    for (int b = 0; b < f; ++b) {
      if (mask >> b & 1U) continue;
      const int l = free[b];
      const double value = cap - (total - lo[l]);
      if (value > lo[l] + kMembershipTol && value < hi[l] - kMembershipTol) {
        Vector crossing = z;
        crossing[l] = value;
        out.push_back(std::move(crossing));
      }
    }
  }
  if (out.empty()) fail(ErrorKind::infeasible, "attacker polytope is empty");

  std::sort(out.begin(), out.end(), lex_less);
  out.erase(std::unique(out.begin(), out.end(), near), out.end());
  return out;
}

std::vector<Vector> enumerate_binary(const LinearConstraintSet& cs) {
  const int m = cs.size();
  std::vector<double> value_lo(static_cast<std::size_t>(m)), value_hi(static_cast<std::size_t>(m));
  int free_count = 0;
  for (int l = 0; l < m; ++l) {
    const bool zero_ok = cs.lower()[l] <= kMembershipTol && !cs.fixed_one().contains(l);
    const bool one_ok = cs.upper()[l] >= 1.0 - kMembershipTol && cs.lower()[l] <= 1.0 + kMembershipTol &&
                        (!cs.forbidden().contains(l) || std::abs(cs.lower()[l] - 1.0) <= kMembershipTol);
    if (!zero_ok && !one_ok) return {};
    value_lo[l] = zero_ok ? 0.0 : 1.0;
    value_hi[l] = one_ok ? 1.0 : 0.0;
    if (value_lo[l] != value_hi[l]) ++free_count;
  }
  if (free_count > kMaxBinaryFree)
    fail(ErrorKind::size, std::to_string(free_count) + " free binary coordinates exceed the cap of 25");

  // Depth-first in index order, 0 before 1, gives lexicographic output.
  // Budget and degree caps only grow along a branch, so they prune.
  std::vector<Vector> out;
  Vector z = Vector::Zero(m);
  std::vector<double> degree_load(cs.degree_caps().size(), 0.0);
  std::vector<std::vector<int>> caps_of_edge(static_cast<std::size_t>(m));
  for (std::size_t c = 0; c < cs.degree_caps().size(); ++c)
    for (int l : cs.degree_caps()[c].edges) caps_of_edge[l].push_back(static_cast<int>(c));
  const double cap = cs.budget().value_or(std::numeric_limits<double>::infinity());

  auto recurse = [&](auto&& self, int l, double total) -> void {
    if (l == m) {
      out.push_back(z);
      return;
    }
    for (double value : {value_lo[l], value_hi[l]}) {
      if (value == 1.0) {
        if (total + 1.0 > cap + kMembershipTol) continue;
        bool ok = true;
        for (int c : caps_of_edge[l])
          if (degree_load[c] + 1.0 > cs.degree_caps()[c].cap + kMembershipTol) ok = false;
        if (!ok) continue;
        for (int c : caps_of_edge[l]) degree_load[c] += 1.0;
        z[l] = 1.0;
        self(self, l + 1, total + 1.0);
        z[l] = 0.0;
        for (int c : caps_of_edge[l]) degree_load[c] -= 1.0;
      } else {
        self(self, l + 1, total);
      }
      if (value_lo[l] == value_hi[l]) break;
    }
  };
  recurse(recurse, 0, 0.0);
  return out;
}

}  // namespace forge
