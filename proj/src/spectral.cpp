#include "forge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "forge/error.hpp"

namespace forge {

namespace {

constexpr double kOffDiagonalTol = 1e-11;
constexpr int kMaxSweeps = 100;

Eigensystem jacobi(const Matrix& input, bool want_vectors) {
  if (input.rows() != input.cols()) fail(ErrorKind::dimension, "eigensolver needs a square matrix");
  const Eigen::Index n = input.rows();
  Matrix a = input;
  Matrix v = want_vectors ? Matrix::Identity(n, n) : Matrix();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < kOffDiagonalTol) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < kOffDiagonalTol * 1e-3) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (want_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  Eigensystem out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    if (want_vectors) out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

void check_laplacian_like(const Matrix& lap) {
  if (lap.rows() != lap.cols()) fail(ErrorKind::dimension, "matrix is not square");
  if (lap.rows() < 2) fail(ErrorKind::domain, "need at least two nodes for lambda2");
  for (Eigen::Index i = 0; i < lap.rows(); ++i)
    for (Eigen::Index j = i + 1; j < lap.cols(); ++j)
      if (std::abs(lap(i, j) - lap(j, i)) > 1e-9) fail(ErrorKind::domain, "matrix is not symmetric");
}

void check_psd(const Vector& values, const Matrix& lap) {
  const double scale = std::max(1.0, lap.diagonal().cwiseAbs().maxCoeff());
  if (values[0] < -1e-9 * scale)
    fail(ErrorKind::domain, "matrix is indefinite (min eigenvalue " + std::to_string(values[0]) + ")");
}

// Flip so the first entry above 1e-9 in magnitude is positive.
void sign_normalize(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-9) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

Vector centered_unit(Vector v) {
  v.array() -= v.mean();
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - 1e-12) return true;
    if (a[i] > b[i] + 1e-12) return false;
  }
  return false;
}

}  // namespace

Eigensystem jacobi_eigensystem(const Matrix& a) { return jacobi(a, true); }

Vector jacobi_eigenvalues(const Matrix& a) { return jacobi(a, false).values; }

SpectralResult fiedler(const Matrix& lap) {
  check_laplacian_like(lap);
  const Eigensystem eig = jacobi(lap, true);
  check_psd(eig.values, lap);

  const Eigen::Index n = lap.rows();
  SpectralResult result;
  result.lambda2 = eig.values[1];
  if (n > 2) result.multiplicity_gap = eig.values[2] - eig.values[1];

  if (!result.degenerate()) {
    result.v = centered_unit(eig.vectors.col(1));
    sign_normalize(result.v);
    return result;
  }

  // Orthonormal basis of the lambda2 eigenspace with the ones direction
  // removed, then pick the lexicographically smallest normalized member.
  std::vector<Vector> basis;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(eig.values[k] - result.lambda2) > kDegenerateGap) continue;
    Vector b = eig.vectors.col(k);
    b.array() -= b.mean();
    for (const Vector& q : basis) b -= q.dot(b) * q;
    const double norm = b.norm();
    if (norm > 1e-6) basis.push_back(b / norm);
  }
  if (basis.empty()) fail(ErrorKind::domain, "no eigenvector orthogonal to ones");
  for (Vector& b : basis) sign_normalize(b);
  result.v = *std::min_element(basis.begin(), basis.end(), lexicographically_less);
  return result;
}

double algebraic_connectivity(const Matrix& lap) {
  check_laplacian_like(lap);
  const Vector values = jacobi(lap, false).values;
  check_psd(values, lap);
  return values[1];
}

double expected_connectivity(const Graph& g, const Vector& s, const Vector& p) {
  return algebraic_connectivity(laplacian(g, expected_weights(s, p)));
}

Gradient grad_alpha_s(const Graph& g, const Vector& s, const Vector& p) {
  const SpectralResult sr = fiedler(laplacian(g, expected_weights(s, p)));
  Gradient grad{Vector(g.num_edges()), sr.degenerate()};
  for (int l = 0; l < g.num_edges(); ++l) {
    const double d = sr.v[g.edge(l).u] - sr.v[g.edge(l).v];
    grad.values[l] = p[l] * d * d;
  }
  return grad;
}

Gradient grad_alpha_p(const Graph& g, const Vector& s, const Vector& p) {
  const SpectralResult sr = fiedler(laplacian(g, expected_weights(s, p)));
  Gradient grad{Vector(g.num_edges()), sr.degenerate()};
  for (int l = 0; l < g.num_edges(); ++l) {
    const double d = sr.v[g.edge(l).u] - sr.v[g.edge(l).v];
    // -0.0 would print oddly in traces
    grad.values[l] = s[l] == 1.0 ? 0.0 : (s[l] - 1.0) * d * d;
  }
  return grad;
}

Vector edge_scores(const Graph& g, const Vector& x) {
  const SpectralResult sr = fiedler(laplacian(g, x));
  Vector scores(g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    const double d = sr.v[g.edge(l).u] - sr.v[g.edge(l).v];
    scores[l] = d * d;
  }
  return scores;
}

}  // namespace forge
