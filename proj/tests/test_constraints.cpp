#include <doctest.h>

#include <algorithm>
#include <set>

#include "forge/constraints.hpp"
#include "forge/error.hpp"
#include "helpers.hpp"

using namespace forge;

namespace {

bool same_list(const VertexList& a, const VertexList& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] - b[i]).cwiseAbs().maxCoeff() > 1e-9) return false;
  return true;
}

// Brute-force extreme points: every choice of m linearly independent active
// constraints among {z_l = lo_l, z_l = hi_l, sum z = budget}, solved and
// filtered for feasibility.
VertexList active_set_vertices(const LinearConstraintSet& cs) {
  const int m = cs.size();
  std::vector<std::pair<Vector, double>> rows;
  for (int l = 0; l < m; ++l) {
    Vector e = Vector::Zero(m);
    e[l] = 1.0;
    rows.push_back({e, cs.lower()[l]});
    rows.push_back({e, cs.upper()[l]});
  }
  if (cs.budget()) rows.push_back({Vector::Ones(m), *cs.budget()});
  VertexList out;
  const int r = static_cast<int>(rows.size());
  std::vector<int> pick(static_cast<std::size_t>(m));
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == m) {
      Matrix a(m, m);
      Vector b(m);
      for (int i = 0; i < m; ++i) {
        a.row(i) = rows[pick[i]].first.transpose();
        b[i] = rows[pick[i]].second;
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (lu.rank() < m) return;
      const Vector z = lu.solve(b);
      if (!contains(cs, z)) return;
      for (const Vector& v : out)
        if ((v - z).cwiseAbs().maxCoeff() <= 1e-9) return;
      out.push_back(z);
      return;
    }
    for (int i = start; i < r; ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  visit(visit, 0, 0);
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

}  // namespace

TEST_CASE("set construction invariants") {
  CHECK_THROWS_AS(LinearConstraintSet(Vector::Ones(2), Vector::Zero(2)), Error);
  LinearConstraintSet cs = LinearConstraintSet::box(3, 0, 1);
  cs.forbid(0);
  CHECK_THROWS_AS(cs.fix_one(0), Error);
  cs.fix_one(1);
  CHECK_THROWS_AS(cs.forbid(1), Error);
  CHECK_THROWS_AS(cs.forbid(3), Error);
  CHECK(cs.effective_upper()[0] == 0.0);
  CHECK(cs.effective_lower()[1] == 1.0);
}

TEST_CASE("contains") {
  CHECK(contains(LinearConstraintSet::box(4, 0, 1), Vector::Zero(4)));
  LinearConstraintSet p = LinearConstraintSet::box(11, 0.25, 0.75).with_budget(4.25);
  CHECK_FALSE(contains(p, Vector::Constant(11, 0.75)));
  CHECK(contains(p, Vector::Constant(11, 0.25)));

  const Graph star(3, {{0, 1}, {0, 2}, {1, 2}});
  LinearConstraintSet capped = LinearConstraintSet::box(3, 0, 1).with_degree_cap(star, 0, 1);
  CHECK_FALSE(contains(capped, Vector{{1.0, 1.0, 0.0}}));
  CHECK(contains(capped, Vector{{1.0, 0.0, 1.0}}));

  LinearConstraintSet pinned = LinearConstraintSet::box(2, 0, 1).fix_one(0).forbid(1);
  CHECK(contains(pinned, Vector{{1.0, 0.0}}));
  CHECK_FALSE(contains(pinned, Vector{{0.0, 0.0}}));
  CHECK_FALSE(contains(pinned, Vector{{1.0, 0.5}}));
  CHECK(contains(pinned, Vector{{1.0 - 1e-10, 1e-10}}));
  CHECK_THROWS_AS(contains(pinned, Vector::Zero(3)), Error);
}

TEST_CASE("enumerate_vertices examples") {
  CHECK(same_list(enumerate_vertices(LinearConstraintSet::box(2, 0, 1)),
                  {Vector{{0.0, 0.0}}, Vector{{0.0, 1.0}}, Vector{{1.0, 0.0}}, Vector{{1.0, 1.0}}}));
  CHECK(same_list(enumerate_vertices(LinearConstraintSet::box(2, 0.25, 0.75).with_budget(1.0)),
                  {Vector{{0.25, 0.25}}, Vector{{0.25, 0.75}}, Vector{{0.75, 0.25}}}));
  CHECK(same_list(enumerate_vertices(LinearConstraintSet::box(2, 0, 1).with_budget(0.5)),
                  {Vector{{0.0, 0.0}}, Vector{{0.0, 0.5}}, Vector{{0.5, 0.0}}}));
}

TEST_CASE("enumerate_vertices errors") {
  CHECK_THROWS_AS(enumerate_vertices(LinearConstraintSet::box(2, 0.5, 1).with_budget(0.5)), Error);
  try {
    enumerate_vertices(LinearConstraintSet::box(2, 0.5, 1).with_budget(0.5));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
  }
  const Graph g = testutil::triangle();
  try {
    enumerate_vertices(LinearConstraintSet::box(3, 0, 1).with_degree_cap(g, 0, 1));
    FAIL("expected unsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported);
  }
  try {
    enumerate_vertices(LinearConstraintSet::box(21, 0, 1));
    FAIL("expected size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
}

TEST_CASE("enumerate_vertices agrees with active-set oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 3;
    Vector lo(m), hi(m);
    for (int l = 0; l < m; ++l) {
      const double a = u(rng), b = u(rng);
      lo[l] = std::min(a, b);
      hi[l] = std::max(a, b);
    }
    LinearConstraintSet cs(lo, hi);
    if (trial % 4 != 0) cs.with_budget(lo.sum() + u(rng) * (hi.sum() - lo.sum()) * 1.2);
    const VertexList vs = enumerate_vertices(cs);
    CHECK(same_list(vs, active_set_vertices(cs)));
    for (std::size_t i = 0; i < vs.size(); ++i) {
      CHECK(contains(cs, vs[i]));
      for (std::size_t j = i + 1; j < vs.size(); ++j) CHECK(contains(cs, 0.5 * (vs[i] + vs[j])));
    }
  }
}

TEST_CASE("enumerate_binary") {
  const auto seven = enumerate_binary(LinearConstraintSet::box(3, 0, 1).with_budget(2));
  REQUIRE(seven.size() == 7);
  for (std::size_t i = 1; i < seven.size(); ++i) CHECK(lex_less(seven[i - 1], seven[i]));
  for (const Vector& z : seven) CHECK(z.sum() <= 2);

  const auto single = enumerate_binary(LinearConstraintSet::box(3, 0, 1).fix_one(0).with_budget(1));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Vector{{1.0, 0.0, 0.0}});

  CHECK(enumerate_binary(LinearConstraintSet::box(11, 0, 1).with_budget(5)).size() == 1024);

  const Graph k4 = Graph::complete(4);
  LinearConstraintSet capped = LinearConstraintSet::box(6, 0, 1).with_degree_cap(k4, 0, 1).forbid(5);
  for (const Vector& z : enumerate_binary(capped)) CHECK(contains(capped, z));
  // node 0 touches edges 0..2: at most one of them; edge 5 off; edges 3, 4 free
  CHECK(enumerate_binary(capped).size() == 4 * 4);

  try {
    enumerate_binary(LinearConstraintSet::box(26, 0, 1));
    FAIL("expected size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
  // fixed coordinates do not count toward the cap
  LinearConstraintSet mostly_fixed = LinearConstraintSet::box(30, 0, 1);
  for (int l = 0; l < 10; ++l) mostly_fixed.fix_one(l);
  CHECK(enumerate_binary(mostly_fixed.with_budget(11)).size() == 21);
}
