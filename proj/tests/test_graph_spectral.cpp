#include <doctest.h>

#include <cmath>

#include "forge/error.hpp"
#include "forge/spectral.hpp"
#include "helpers.hpp"

using namespace forge;
using testutil::path3;
using testutil::triangle;

TEST_CASE("graph canonicalizes and validates edges") {
  Graph g(4, {{2, 3}, {0, 1}, {0, 3}});
  REQUIRE(g.num_edges() == 3);
  CHECK(g.edge(0) == Edge{0, 1});
  CHECK(g.edge(1) == Edge{0, 3});
  CHECK(g.edge(2) == Edge{2, 3});
  CHECK(g.edge_index(0, 3) == 1);
  CHECK(g.edge_index(3, 0) == 1);
  CHECK_FALSE(g.edge_index(1, 2).has_value());

  CHECK_THROWS_AS(Graph(3, {{0, 0}}), Error);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {0, 1}}), Error);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), Error);
  CHECK_THROWS_AS(Graph(3, {{2, 1}}), Error);
  CHECK(Graph::complete(5).num_edges() == 10);
}

TEST_CASE("incidence matrix") {
  const Matrix single = incidence_matrix(Graph(2, {{0, 1}}));
  CHECK(single(0, 0) == -1);
  CHECK(single(1, 0) == 1);

  Matrix expected(3, 3);
  expected << -1, -1, 0, 1, 0, -1, 0, 1, 1;
  CHECK(incidence_matrix(triangle()) == expected);

  const Matrix empty = incidence_matrix(Graph(4, {}));
  CHECK(empty.rows() == 4);
  CHECK(empty.cols() == 0);
}

TEST_CASE("laplacian") {
  const Matrix k3 = laplacian(triangle(), Vector::Ones(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(k3(i, j) == (i == j ? 2.0 : -1.0));

  CHECK(laplacian(triangle(), Vector::Zero(3)).isZero());

  const Matrix p = laplacian(path3(), Vector::Ones(2));
  CHECK(p(0, 0) == 1);
  CHECK(p(1, 1) == 2);
  CHECK(p(2, 2) == 1);
  CHECK(p(0, 1) == -1);
  CHECK(p(1, 2) == -1);
  CHECK(p(0, 2) == 0);

  CHECK_THROWS_AS(laplacian(triangle(), Vector::Ones(2)), Error);
  try {
    laplacian(triangle(), Vector::Ones(2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("laplacian invariants on random weighted graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = testutil::random_graph(2 + trial % 8, 0.5, rng);
    const Vector w = testutil::random_uniform(g.num_edges(), 0.0, 2.0, rng);
    const Matrix l = laplacian(g, w);
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(testutil::reference_eigenvalues(l).minCoeff() >= -1e-9);
  }
}

TEST_CASE("expected weights") {
  const Vector p = Vector::Constant(4, 0.3);
  CHECK(expected_weights(Vector::Ones(4), p) == Vector::Ones(4));
  CHECK(expected_weights(Vector::Zero(4), Vector::Ones(4)) == Vector::Zero(4));
  CHECK(expected_weights(Vector::Zero(4), Vector::Constant(4, 0.5)) == Vector::Constant(4, 0.5));
  CHECK_THROWS_AS(expected_weights(Vector::Zero(2), Vector::Constant(2, 1.5)), Error);
  CHECK_THROWS_AS(expected_weights(Vector::Zero(2), Vector::Constant(2, -0.1)), Error);
}

TEST_CASE("fiedler examples") {
  const SpectralResult k4 = fiedler(laplacian(Graph::complete(4), Vector::Ones(6)));
  CHECK(k4.lambda2 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(k4.degenerate());

  const Graph two(4, {{0, 1}, {2, 3}});
  CHECK(std::abs(fiedler(laplacian(two, Vector::Ones(2))).lambda2) < 1e-12);

  const SpectralResult p3 = fiedler(laplacian(path3(), Vector::Ones(2)));
  CHECK(p3.lambda2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p3.multiplicity_gap == doctest::Approx(2.0).epsilon(1e-12));
  // v = (1, 0, -1)/sqrt(2) after sign normalization
  CHECK(p3.v[0] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(p3.v[1]) < 1e-12);
  CHECK(p3.v[2] == doctest::Approx(-1 / std::sqrt(2.0)));

  const SpectralResult edge = fiedler(laplacian(Graph(2, {{0, 1}}), Vector::Ones(1)));
  CHECK(edge.lambda2 == doctest::Approx(2.0));
  CHECK(std::isinf(edge.multiplicity_gap));
}

TEST_CASE("fiedler rejects invalid input") {
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(fiedler(asym), Error);
  Matrix indefinite = Matrix::Zero(2, 2);
  indefinite(0, 0) = -1.0;
  CHECK_THROWS_AS(fiedler(indefinite), Error);
  CHECK_THROWS_AS(fiedler(Matrix::Zero(1, 1)), Error);
  CHECK_THROWS_AS(fiedler(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("fiedler vector invariants and independent eigensolve agreement") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = testutil::random_graph(2 + trial % 9, 0.6, rng);
    const Vector w = testutil::random_uniform(g.num_edges(), 0.1, 1.0, rng);
    const Matrix l = laplacian(g, w);
    const SpectralResult r = fiedler(l);
    const Vector ref = testutil::reference_eigenvalues(l);
    CHECK(std::abs(r.lambda2 - ref[1]) < 1e-8);
    CHECK(std::abs(r.v.sum()) < 1e-9);
    CHECK(std::abs(r.v.norm() - 1.0) < 1e-9);
    CHECK((l * r.v - r.lambda2 * r.v).norm() < 1e-8);
    int first = 0;
    while (std::abs(r.v[first]) <= 1e-9) ++first;
    CHECK(r.v[first] > 0);
    CHECK(algebraic_connectivity(l) == doctest::Approx(r.lambda2).epsilon(1e-12));
  }
}

TEST_CASE("lambda2 positive iff connected, exhaustive on small graphs") {
  // all indicators on K4 and K5 minus edges keeps m <= 10
  for (int n = 2; n <= 5; ++n) {
    const Graph kn = Graph::complete(n);
    const int m = kn.num_edges();
    for (int mask = 0; mask < (1 << m); ++mask) {
      Vector x(m);
      for (int l = 0; l < m; ++l) x[l] = (mask >> l) & 1;
      const double lambda2 = algebraic_connectivity(laplacian(kn, x));
      CHECK((lambda2 > 1e-9) == is_connected(kn, x));
    }
  }
}

TEST_CASE("jacobi matches the reference solver") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 10;
    Matrix a = Matrix::Random(n, n);
    a = (a + a.transpose()).eval();
    const Eigensystem es = jacobi_eigensystem(a);
    CHECK((es.values - testutil::reference_eigenvalues(a)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a * es.vectors - es.vectors * es.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gradient examples") {
  // on C4 the Fiedler space is degenerate; use the path where v = (1,0,-1)/sqrt2
  const Gradient zero_p = grad_alpha_s(path3(), Vector::Zero(2), Vector::Zero(2));
  CHECK(zero_p.values.isZero());
  CHECK(grad_alpha_p(path3(), Vector::Ones(2), Vector::Constant(2, 0.5)).values.isZero());

  const Gradient gp = grad_alpha_p(path3(), Vector::Zero(2), Vector::Constant(2, 0.5));
  CHECK_FALSE(gp.degenerate);
  CHECK(gp.values[0] == doctest::Approx(-0.5));
  CHECK(gp.values[1] == doctest::Approx(-0.5));
  const Gradient gs = grad_alpha_s(path3(), Vector::Zero(2), Vector::Constant(2, 0.5));
  CHECK(gs.values[0] == doctest::Approx(0.25));

  // star K_{1,3} plus edge (1,2): node 3 hangs off the hub; the edge (1,2)
  // joins two nodes with equal Fiedler entries by symmetry
  const Graph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  const SpectralResult r = fiedler(laplacian(g, Vector::Ones(4)));
  REQUIRE_FALSE(r.degenerate());
  CHECK(std::abs(r.v[1] - r.v[2]) < 1e-9);
  CHECK(std::abs(grad_alpha_s(g, Vector::Zero(4), Vector::Constant(4, 0.5)).values[3]) < 1e-12);
  CHECK(std::abs(edge_scores(g, Vector::Ones(4))[3]) < 1e-12);

  CHECK(grad_alpha_s(Graph::complete(4), Vector::Zero(6), Vector::Constant(6, 0.5)).degenerate);
}

namespace {

double alpha_real(const Graph& g, const Vector& s, const Vector& p) {
  Vector w(s.size());
  for (Eigen::Index l = 0; l < s.size(); ++l) w[l] = (s[l] - 1.0) * p[l] + 1.0;
  return algebraic_connectivity(laplacian(g, w));
}

}  // namespace

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(21);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 30) {
    const Graph g = testutil::random_graph(5, 0.7, rng);
    if (!is_connected(g)) continue;
    const int m = g.num_edges();
    const Vector s = testutil::random_binary(m, rng);
    const Vector p = testutil::random_uniform(m, 0.05, 0.95, rng);
    const Gradient gs = grad_alpha_s(g, s, p);
    if (gs.degenerate) continue;
    const Gradient gp = grad_alpha_p(g, s, p);
    for (int l = 0; l < m; ++l) {
      Vector sp = s, sm = s, pp = p, pm = p;
      sp[l] += h;
      sm[l] -= h;
      pp[l] += h;
      pm[l] -= h;
      CHECK(std::abs((alpha_real(g, sp, p) - alpha_real(g, sm, p)) / (2 * h) - gs.values[l]) < 1e-5);
      CHECK(std::abs((alpha_real(g, s, pp) - alpha_real(g, s, pm)) / (2 * h) - gp.values[l]) < 1e-5);
      CHECK(gs.values[l] >= 0.0);
      CHECK(gp.values[l] <= 0.0);
    }
    ++checked;
  }
}

TEST_CASE("first-order concavity relation") {
  std::mt19937_64 rng(8);
  int checked = 0;
  while (checked < 40) {
    const Graph g = testutil::random_graph(6, 0.6, rng);
    const int m = g.num_edges();
    if (m == 0) continue;
    const Vector s1 = testutil::random_uniform(m, 0.0, 1.0, rng);
    const Vector s2 = testutil::random_uniform(m, 0.0, 1.0, rng);
    const Vector p1 = testutil::random_uniform(m, 0.0, 1.0, rng);
    const Vector p2 = testutil::random_uniform(m, 0.0, 1.0, rng);
    const Gradient gs = grad_alpha_s(g, s1, p1);
    if (gs.degenerate) continue;
    const double base = alpha_real(g, s1, p1);
    CHECK(alpha_real(g, s2, p1) <= base + gs.values.dot(s2 - s1) + 1e-7);
    const Gradient gp = grad_alpha_p(g, s1, p1);
    CHECK(alpha_real(g, s1, p2) <= base + gp.values.dot(p2 - p1) + 1e-7);
    ++checked;
  }
}

TEST_CASE("edge scores") {
  // path 1-2-3 as a subgraph of K3: existing edges 0.5, absent (1,3) 2
  const Vector sc = edge_scores(triangle(), Vector{{1.0, 0.0, 1.0}});
  CHECK(sc[0] == doctest::Approx(0.5));
  CHECK(sc[1] == doctest::Approx(2.0));
  CHECK(sc[2] == doctest::Approx(0.5));

  // complete graph: the multiset of scores over the symmetric orbit of v is
  // all edges; any unit v orthogonal to 1 has scores summing to n
  const Vector k5 = edge_scores(Graph::complete(5), Vector::Ones(10));
  CHECK(k5.sum() == doctest::Approx(5.0));
}
