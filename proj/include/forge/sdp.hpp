#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "forge/graph.hpp"

namespace forge {

/// Reference to a decision variable: a scalar, or entry (row, col) of a
/// PSD matrix block (symmetric, so (r, c) and (c, r) are the same variable).
struct VarRef {
  int block = -1;  // -1 for scalars
  int index = 0;   // scalar index, or row for matrix entries
  int col = 0;

  static VarRef scalar(int i) { return {-1, i, 0}; }
  static VarRef entry(int block, int row, int col) { return {block, row, col}; }
  bool is_scalar() const { return block < 0; }
};

struct Term {
  VarRef var;
  double coef = 1.0;
};

/// maximize  sum of objective terms
/// s.t.      equality / inequality rows over scalars and block entries,
///           scalar bounds, PSD matrix blocks, and affine LMIs
///           F0 + sum_k z_k F_k >= 0 (each LMI owns a slack PSD block).
class ConicProgram {
 public:
  static constexpr double inf = std::numeric_limits<double>::infinity();

  int add_scalar(double lower = -inf, double upper = inf);
  int add_psd_block(int dim);
  void set_objective(std::vector<Term> terms);
  void add_equality(std::vector<Term> terms, double rhs);
  /// sum terms <= rhs
  void add_inequality(std::vector<Term> terms, double rhs);
  /// Returns the index of the slack block holding F0 + sum z_k F_k.
  int add_lmi(Matrix constant, std::vector<std::pair<VarRef, Matrix>> coefficients);

  int num_scalars() const { return static_cast<int>(scalar_lower_.size()); }
  int num_blocks() const { return static_cast<int>(block_dims_.size()); }
  int block_dim(int b) const { return block_dims_[static_cast<std::size_t>(b)]; }

  struct Row {
    std::vector<Term> terms;
    double rhs = 0.0;
    bool equality = true;
  };
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Term>& objective() const { return objective_; }
  double scalar_lower(int i) const { return scalar_lower_[static_cast<std::size_t>(i)]; }
  double scalar_upper(int i) const { return scalar_upper_[static_cast<std::size_t>(i)]; }

 private:
  void check_term(const Term& t) const;

  std::vector<double> scalar_lower_;
  std::vector<double> scalar_upper_;
  std::vector<int> block_dims_;
  std::vector<Term> objective_;
  std::vector<Row> rows_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iters };

const char* to_string(SolveStatus status);

struct ConicSolution {
  SolveStatus status = SolveStatus::max_iters;
  Vector scalars;
  std::vector<Matrix> blocks;
  double objective_value = 0.0;
  /// Relative residuals of the row-scaled standard form.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  /// Smallest eigenvalue over all PSD blocks and nonnegative parts.
  double psd_violation = 0.0;
  int iterations = 0;

  double value(VarRef v) const;
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iters = 200;
  bool verbose = false;
};

/// Primal-dual interior point method (HKM direction, Mehrotra
/// predictor-corrector) on the standard-form conversion of `prog`.
ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings = {});

/// Returns U (r x d) with U^T U = M, one row per eigenvalue above rank_tol,
/// largest first. Throws a domain error if M has an eigenvalue below
/// -rank_tol or is not symmetric.
Matrix gram_factor(const Matrix& m, double rank_tol = 1e-9);

}  // namespace forge
