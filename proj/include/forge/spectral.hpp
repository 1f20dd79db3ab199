#pragma once

#include <limits>

#include "forge/graph.hpp"

namespace forge {

/// Eigenvalues ascending, eigenvectors as matching columns.
struct Eigensystem {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Sweeps run in fixed
/// row-major (p, q) order until every off-diagonal magnitude is below 1e-11.
Eigensystem jacobi_eigensystem(const Matrix& a);
Vector jacobi_eigenvalues(const Matrix& a);

/// Eigenvalue gap at or below which lambda2 is treated as repeated.
inline constexpr double kDegenerateGap = 1e-7;

struct SpectralResult {
  double lambda2 = 0.0;
  /// Unit Fiedler vector, orthogonal to the ones vector; its first entry
  /// exceeding 1e-9 in magnitude is positive.
  Vector v;
  /// lambda3 - lambda2, +infinity for two-node graphs.
  double multiplicity_gap = std::numeric_limits<double>::infinity();

  bool degenerate() const { return multiplicity_gap <= kDegenerateGap; }
};

/// Second-smallest eigenvalue of a symmetric PSD matrix and its eigenvector.
/// No deflation: a disconnected graph reports lambda2 = 0 exactly as the
/// eigensolver finds it. For a repeated lambda2 the vector is the
/// lexicographically smallest sign-normalized member of the computed
/// eigenspace basis (restricted to the complement of the ones vector).
/// Throws a domain error on asymmetric or indefinite input.
SpectralResult fiedler(const Matrix& lap);

/// lambda2 only; skips eigenvector accumulation.
double algebraic_connectivity(const Matrix& lap);

/// alpha(s, p): lambda2 of the expected Laplacian.
double expected_connectivity(const Graph& g, const Vector& s, const Vector& p);

struct Gradient {
  Vector values;
  /// Set when lambda2 is repeated; values are then one subgradient.
  bool degenerate = false;
};

/// d alpha / d s_l = p_l (v_i - v_j)^2.
Gradient grad_alpha_s(const Graph& g, const Vector& s, const Vector& p);
/// d alpha / d p_l = (s_l - 1)(v_i - v_j)^2, i.e. -(v_i - v_j)^2 on
/// unprotected edges and 0 on protected ones.
Gradient grad_alpha_p(const Graph& g, const Vector& s, const Vector& p);

/// (v_i - v_j)^2 for every edge of g, with v the Fiedler vector of L(x).
Vector edge_scores(const Graph& g, const Vector& x);

}  // namespace forge
