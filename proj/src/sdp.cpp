#include "forge/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "forge/error.hpp"

namespace forge {

// ---------------------------------------------------------------------------
// Problem description

int ConicProgram::add_scalar(double lower, double upper) {
  if (!(lower <= upper)) fail(ErrorKind::domain, "scalar lower bound exceeds upper bound");
  scalar_lower_.push_back(lower);
  scalar_upper_.push_back(upper);
  return num_scalars() - 1;
}

int ConicProgram::add_psd_block(int dim) {
  if (dim < 1) fail(ErrorKind::dimension, "PSD block dimension must be positive");
  block_dims_.push_back(dim);
  return num_blocks() - 1;
}

void ConicProgram::check_term(const Term& t) const {
  if (t.var.is_scalar()) {
    if (t.var.index < 0 || t.var.index >= num_scalars()) fail(ErrorKind::dimension, "unknown scalar variable");
    return;
  }
  if (t.var.block >= num_blocks()) fail(ErrorKind::dimension, "unknown PSD block");
  const int d = block_dim(t.var.block);
  if (t.var.index < 0 || t.var.index >= d || t.var.col < 0 || t.var.col >= d)
    fail(ErrorKind::dimension, "block entry out of range");
}

void ConicProgram::set_objective(std::vector<Term> terms) {
  for (const Term& t : terms) check_term(t);
  objective_ = std::move(terms);
}

void ConicProgram::add_equality(std::vector<Term> terms, double rhs) {
  for (const Term& t : terms) check_term(t);
  rows_.push_back({std::move(terms), rhs, true});
}

void ConicProgram::add_inequality(std::vector<Term> terms, double rhs) {
  for (const Term& t : terms) check_term(t);
  rows_.push_back({std::move(terms), rhs, false});
}

int ConicProgram::add_lmi(Matrix constant, std::vector<std::pair<VarRef, Matrix>> coefficients) {
  const auto d = static_cast<int>(constant.rows());
  if (constant.cols() != d) fail(ErrorKind::dimension, "LMI constant is not square");
  for (const auto& [var, mat] : coefficients) {
    check_term({var, 1.0});
    if (mat.rows() != d || mat.cols() != d) fail(ErrorKind::dimension, "LMI coefficient size mismatch");
    if (!mat.isApprox(mat.transpose(), 1e-12) && (mat - mat.transpose()).norm() > 1e-12)
      fail(ErrorKind::domain, "LMI coefficient is not symmetric");
  }
  const int slack = add_psd_block(d);
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      std::vector<Term> terms{{VarRef::entry(slack, r, c), 1.0}};
      for (const auto& [var, mat] : coefficients)
        if (mat(r, c) != 0.0) terms.push_back({var, -mat(r, c)});
      rows_.push_back({std::move(terms), constant(r, c), true});
    }
  }
  return slack;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::max_iters:
      return "max_iters";
  }
  return "unknown";
}

double ConicSolution::value(VarRef v) const {
  if (v.is_scalar()) return scalars[v.index];
  return blocks[static_cast<std::size_t>(v.block)](v.index, v.col);
}

// ---------------------------------------------------------------------------
// Standard form:
//   min <C,X> + c'x + d'u  s.t.  A(X) + a x + B u = b,  X psd, x >= 0, u free.

namespace {

struct Entry {
  int block;
  int r;
  int c;  // r <= c; stands for v at (r,c) and (c,r)
  double v;
};

using SparseCol = std::vector<std::pair<int, double>>;

struct StdRow {
  std::vector<Entry> entries;
  SparseCol lp;
  SparseCol free;
  double b = 0.0;
};

struct Affine {
  double offset = 0.0;
  SparseCol lp;
  int free = -1;
};

struct StandardForm {
  std::vector<int> dims;
  int n_lp = 0;
  int n_free = 0;
  std::vector<StdRow> rows;
  std::vector<Matrix> cost;
  Vector lp_cost;
  Vector free_cost;
  std::vector<Affine> scalar_map;
  // rows touching each block: (row index, entries of that row in the block)
  std::vector<std::vector<std::pair<int, std::vector<Entry>>>> block_rows;
};

class RowBuilder {
 public:
  explicit RowBuilder(const StandardForm& sf) : sf_(sf) {}

  void add(const Term& t) {
    if (t.var.is_scalar()) {
      const Affine& a = sf_.scalar_map[static_cast<std::size_t>(t.var.index)];
      constant_ += t.coef * a.offset;
      for (const auto& [j, c] : a.lp) lp_[j] += t.coef * c;
      if (a.free >= 0) free_[a.free] += t.coef;
    } else {
      int r = t.var.index;
      int c = t.var.col;
      if (r > c) std::swap(r, c);
      entries_[{t.var.block, r, c}] += r == c ? t.coef : 0.5 * t.coef;
    }
  }
  void add_lp(int j, double c) { lp_[j] += c; }

  StdRow finish(double rhs) const {
    StdRow row;
    row.b = rhs - constant_;
    for (const auto& [key, v] : entries_)
      if (v != 0.0) row.entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
    for (const auto& [j, c] : lp_)
      if (c != 0.0) row.lp.emplace_back(j, c);
    for (const auto& [j, c] : free_)
      if (c != 0.0) row.free.emplace_back(j, c);
    return row;
  }

  const std::map<std::tuple<int, int, int>, double>& entries() const { return entries_; }
  const std::map<int, double>& lp() const { return lp_; }
  const std::map<int, double>& free() const { return free_; }

 private:
  const StandardForm& sf_;
  double constant_ = 0.0;
  std::map<std::tuple<int, int, int>, double> entries_;
  std::map<int, double> lp_;
  std::map<int, double> free_;
};

StandardForm to_standard_form(const ConicProgram& prog) {
  StandardForm sf;
  for (int b = 0; b < prog.num_blocks(); ++b) sf.dims.push_back(prog.block_dim(b));

  std::vector<StdRow> bound_rows;
  for (int i = 0; i < prog.num_scalars(); ++i) {
    const double lo = prog.scalar_lower(i);
    const double hi = prog.scalar_upper(i);
    Affine a;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      a.offset = lo;
      if (hi > lo) {
        const int x = sf.n_lp++;
        const int t = sf.n_lp++;
        a.lp = {{x, 1.0}};
        bound_rows.push_back({{}, {{x, 1.0}, {t, 1.0}}, {}, hi - lo});
      }
    } else if (std::isfinite(lo)) {
      a.offset = lo;
      a.lp = {{sf.n_lp++, 1.0}};
    } else if (std::isfinite(hi)) {
      a.offset = hi;
      a.lp = {{sf.n_lp++, -1.0}};
    } else {
      a.free = sf.n_free++;
    }
    sf.scalar_map.push_back(std::move(a));
  }

  for (const ConicProgram::Row& row : prog.rows()) {
    RowBuilder rb(sf);
    for (const Term& t : row.terms) rb.add(t);
    if (!row.equality) rb.add_lp(sf.n_lp++, 1.0);
    sf.rows.push_back(rb.finish(row.rhs));
  }
  for (StdRow& r : bound_rows) sf.rows.push_back(std::move(r));

  // Objective is negated: the user maximizes.
  for (int d : sf.dims) sf.cost.push_back(Matrix::Zero(d, d));
  sf.lp_cost = Vector::Zero(sf.n_lp);
  sf.free_cost = Vector::Zero(sf.n_free);
  {
    RowBuilder rb(sf);
    for (const Term& t : prog.objective()) rb.add(t);
    for (const auto& [key, v] : rb.entries()) {
      const auto [b, r, c] = key;
      sf.cost[b](r, c) -= v;
      if (r != c) sf.cost[b](c, r) -= v;
    }
    for (const auto& [j, c] : rb.lp()) sf.lp_cost[j] -= c;
    for (const auto& [j, c] : rb.free()) sf.free_cost[j] -= c;
  }

  // Diagonal preconditioning: every row scaled to unit norm.
  for (StdRow& r : sf.rows) {
    double norm2 = 0.0;
    for (const Entry& e : r.entries) norm2 += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
    for (const auto& [j, c] : r.lp) norm2 += c * c;
    for (const auto& [j, c] : r.free) norm2 += c * c;
    if (norm2 == 0.0) {
      if (std::abs(r.b) > 1e-12) fail(ErrorKind::infeasible, "constraint row reads 0 = nonzero");
      continue;
    }
    const double s = 1.0 / std::sqrt(norm2);
    for (Entry& e : r.entries) e.v *= s;
    for (auto& [j, c] : r.lp) c *= s;
    for (auto& [j, c] : r.free) c *= s;
    r.b *= s;
  }
  std::erase_if(sf.rows, [](const StdRow& r) { return r.entries.empty() && r.lp.empty() && r.free.empty(); });

  sf.block_rows.resize(sf.dims.size());
  for (int i = 0; i < static_cast<int>(sf.rows.size()); ++i) {
    std::map<int, std::vector<Entry>> by_block;
    for (const Entry& e : sf.rows[i].entries) by_block[e.block].push_back(e);
    for (auto& [b, es] : by_block) sf.block_rows[b].emplace_back(i, std::move(es));
  }
  return sf;
}

// ---------------------------------------------------------------------------
// Interior point iteration

struct Iterate {
  std::vector<Matrix> X, Z;
  Vector x, z, u, y;
};

struct Direction {
  std::vector<Matrix> dX, dZ;
  Vector dx, dz, du, dy;
};

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

double entry_dot(const std::vector<Entry>& es, const Matrix& m) {
  double s = 0.0;
  for (const Entry& e : es) s += e.r == e.c ? e.v * m(e.r, e.c) : e.v * (m(e.r, e.c) + m(e.c, e.r));
  return s;
}

struct Residuals {
  Vector rp;
  std::vector<Matrix> rd;
  Vector rd_lp;
  Vector rd_free;
  double pinf = 0.0;
  double dinf = 0.0;
  double gap = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;

  double worst() const { return std::max({pinf, dinf, gap}); }
};

class InteriorPoint {
 public:
  InteriorPoint(const StandardForm& sf, const SolverSettings& settings) : sf_(sf), settings_(settings) {
    mc_ = static_cast<int>(sf.rows.size());
    nblocks_ = static_cast<int>(sf.dims.size());
    degree_ = sf.n_lp;
    for (int d : sf.dims) degree_ += d;
    b_ = Vector(mc_);
    for (int i = 0; i < mc_; ++i) b_[i] = sf.rows[i].b;
    cost_norm_ = sf.lp_cost.squaredNorm() + sf.free_cost.squaredNorm();
    for (const Matrix& c : sf.cost) cost_norm_ += c.squaredNorm();
    cost_norm_ = std::sqrt(cost_norm_);
    free_cols_.resize(static_cast<std::size_t>(sf.n_free));
    lp_cols_.resize(static_cast<std::size_t>(sf.n_lp));
    for (int i = 0; i < mc_; ++i) {
      for (const auto& [j, c] : sf.rows[i].free) free_cols_[j].emplace_back(i, c);
      for (const auto& [j, c] : sf.rows[i].lp) lp_cols_[j].emplace_back(i, c);
    }
  }

  ConicSolution run();

 private:
  Vector apply_a(const std::vector<Matrix>& X, const Vector& x, const Vector& u) const {
    Vector out = Vector::Zero(mc_);
    for (int i = 0; i < mc_; ++i) {
      const StdRow& row = sf_.rows[i];
      double s = 0.0;
      for (const Entry& e : row.entries) {
        const Matrix& m = X[e.block];
        s += e.r == e.c ? e.v * m(e.r, e.c) : e.v * (m(e.r, e.c) + m(e.c, e.r));
      }
      for (const auto& [j, c] : row.lp) s += c * x[j];
      for (const auto& [j, c] : row.free) s += c * u[j];
      out[i] = s;
    }
    return out;
  }

  void apply_at(const Vector& y, std::vector<Matrix>& S, Vector& s, Vector& f) const {
    S.resize(sf_.dims.size());
    for (int k = 0; k < nblocks_; ++k) S[k] = Matrix::Zero(sf_.dims[k], sf_.dims[k]);
    s = Vector::Zero(sf_.n_lp);
    f = Vector::Zero(sf_.n_free);
    for (int i = 0; i < mc_; ++i) {
      const StdRow& row = sf_.rows[i];
      for (const Entry& e : row.entries) {
        S[e.block](e.r, e.c) += y[i] * e.v;
        if (e.r != e.c) S[e.block](e.c, e.r) += y[i] * e.v;
      }
      for (const auto& [j, c] : row.lp) s[j] += y[i] * c;
      for (const auto& [j, c] : row.free) f[j] += y[i] * c;
    }
  }

  Residuals residuals() const;
  void initialize();
  Matrix schur(const std::vector<Matrix>& zinv) const;
  void factor(const Matrix& m);
  Vector solve_augmented(const Vector& h, const Vector& r_free, Vector& du) const;
  static double max_step(const Matrix& x, const Matrix& dx);
  static double max_step(const Vector& x, const Vector& dx);

  const StandardForm& sf_;
  SolverSettings settings_;
  int mc_ = 0;
  int nblocks_ = 0;
  int degree_ = 0;
  Vector b_;
  double cost_norm_ = 0.0;
  std::vector<SparseCol> free_cols_;
  std::vector<SparseCol> lp_cols_;
  Iterate it_;
  Eigen::LLT<Matrix> chol_;
  Matrix minv_b_;                  // M^-1 B
  Eigen::LDLT<Matrix> free_schur_;  // B^T M^-1 B
};

Residuals InteriorPoint::residuals() const {
  Residuals r;
  r.rp = b_ - apply_a(it_.X, it_.x, it_.u);
  std::vector<Matrix> aty;
  Vector aty_lp, aty_free;
  apply_at(it_.y, aty, aty_lp, aty_free);
  r.rd.resize(static_cast<std::size_t>(nblocks_));
  double rd2 = 0.0;
  for (int k = 0; k < nblocks_; ++k) {
    r.rd[k] = sf_.cost[k] - it_.Z[k] - aty[k];
    rd2 += r.rd[k].squaredNorm();
  }
  r.rd_lp = sf_.lp_cost - it_.z - aty_lp;
  r.rd_free = sf_.free_cost - aty_free;
  rd2 += r.rd_lp.squaredNorm() + r.rd_free.squaredNorm();

  r.pobj = sf_.lp_cost.dot(it_.x) + sf_.free_cost.dot(it_.u);
  for (int k = 0; k < nblocks_; ++k) r.pobj += inner(sf_.cost[k], it_.X[k]);
  r.dobj = b_.dot(it_.y);
  r.pinf = r.rp.norm() / (1.0 + b_.norm());
  r.dinf = std::sqrt(rd2) / (1.0 + cost_norm_);
  r.gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

void InteriorPoint::initialize() {
  double xi = 10.0;
  double eta = std::max(10.0, cost_norm_);
  int max_dim = 1;
  for (int i = 0; i < mc_; ++i) xi = std::max(xi, 1.0 + std::abs(b_[i]));
  for (int d : sf_.dims) {
    xi = std::max(xi, std::sqrt(static_cast<double>(d)));
    eta = std::max(eta, std::sqrt(static_cast<double>(d)));
    max_dim = std::max(max_dim, d);
  }
  xi *= std::sqrt(static_cast<double>(max_dim));

  for (int d : sf_.dims) {
    it_.X.push_back(xi * Matrix::Identity(d, d));
    it_.Z.push_back(eta * Matrix::Identity(d, d));
  }
  it_.x = Vector::Constant(sf_.n_lp, xi);
  it_.z = Vector::Constant(sf_.n_lp, eta);
  it_.u = Vector::Zero(sf_.n_free);
  it_.y = Vector::Zero(mc_);
}

// M_ij = sum_k <A_ik, X_k A_jk Z_k^-1> + sum_l a_il a_jl x_l / z_l
Matrix InteriorPoint::schur(const std::vector<Matrix>& zinv) const {
  Matrix m = Matrix::Zero(mc_, mc_);
  for (int k = 0; k < nblocks_; ++k) {
    const Matrix& X = it_.X[k];
    const int d = sf_.dims[k];
    const auto& rows = sf_.block_rows[k];
    Matrix t(d, d);
    std::vector<int> slot(static_cast<std::size_t>(d), -1);
    for (const auto& [j, entries] : rows) {
      // X A_j only has columns named in A_j.
      std::vector<int> cols;
      for (const Entry& e : entries) {
        cols.push_back(e.c);
        cols.push_back(e.r);
      }
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      for (std::size_t q = 0; q < cols.size(); ++q) slot[cols[q]] = static_cast<int>(q);

      const auto width = static_cast<Eigen::Index>(cols.size());
      Matrix xa = Matrix::Zero(d, width);
      for (const Entry& e : entries) {
        xa.col(slot[e.c]) += e.v * X.col(e.r);
        if (e.r != e.c) xa.col(slot[e.r]) += e.v * X.col(e.c);
      }
      Matrix zrows(width, d);
      for (Eigen::Index q = 0; q < width; ++q) zrows.row(q) = zinv[k].row(cols[static_cast<std::size_t>(q)]);
      t.noalias() = xa * zrows;

      for (const auto& [i, ientries] : rows)
        if (i <= j) m(i, j) += entry_dot(ientries, t);
    }
  }
  for (int i = 0; i < mc_; ++i)
    for (int j = 0; j < i; ++j) m(i, j) = m(j, i);

  for (int j = 0; j < sf_.n_lp; ++j) {
    const double ratio = it_.x[j] / it_.z[j];
    for (const auto& [a, ca] : lp_cols_[j])
      for (const auto& [b, cb] : lp_cols_[j]) m(a, b) += ca * cb * ratio;
  }
  return m;
}

void InteriorPoint::factor(const Matrix& m) {
  double jitter = 0.0;
  const double scale = std::max(1.0, m.diagonal().maxCoeff());
  for (int attempt = 0; attempt < 14; ++attempt) {
    if (jitter == 0.0) {
      chol_.compute(m);
    } else {
      Matrix mm = m;
      mm.diagonal().array() += jitter;
      chol_.compute(mm);
    }
    if (chol_.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-15 * scale : jitter * 10.0;
  }
  if (chol_.info() != Eigen::Success) fail(ErrorKind::solver, "Schur complement factorization failed");

  if (sf_.n_free > 0) {
    Matrix b = Matrix::Zero(mc_, sf_.n_free);
    for (int j = 0; j < sf_.n_free; ++j)
      for (const auto& [i, c] : free_cols_[j]) b(i, j) = c;
    minv_b_ = chol_.solve(b);
    free_schur_.compute(b.transpose() * minv_b_);
  }
}

// [M B; B^T 0] [dy; du] = [h; r_free]
Vector InteriorPoint::solve_augmented(const Vector& h, const Vector& r_free, Vector& du) const {
  Vector dy = chol_.solve(h);
  if (sf_.n_free == 0) {
    du = Vector();
    return dy;
  }
  Vector bt_dy(sf_.n_free);
  for (int j = 0; j < sf_.n_free; ++j) {
    double s = 0.0;
    for (const auto& [i, c] : free_cols_[j]) s += c * dy[i];
    bt_dy[j] = s;
  }
  du = free_schur_.solve(bt_dy - r_free);
  return dy - minv_b_ * du;
}

double InteriorPoint::max_step(const Matrix& x, const Matrix& dx) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Matrix w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(w, Eigen::EigenvaluesOnly).eigenvalues()[0];
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double InteriorPoint::max_step(const Vector& x, const Vector& dx) {
  double step = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (dx[j] < 0.0) step = std::min(step, -x[j] / dx[j]);
  return step;
}

ConicSolution InteriorPoint::run() {
  initialize();
  ConicSolution sol;
  sol.status = SolveStatus::max_iters;

  Iterate best = it_;
  double best_worst = std::numeric_limits<double>::infinity();
  int stalls = 0;
  double prev_ap = 1.0;
  double prev_ad = 1.0;

  for (int iter = 0; iter <= settings_.max_iters; ++iter) {
    sol.iterations = iter;
    const Residuals res = residuals();
    if (settings_.verbose)
      std::fprintf(stderr, "ipm %3d pobj %+.10e dobj %+.10e pinf %.2e dinf %.2e gap %.2e ap %.3f ad %.3f\n", iter,
                   res.pobj, res.dobj, res.pinf, res.dinf, res.gap, prev_ap, prev_ad);
    if (res.worst() < best_worst) {
      best_worst = res.worst();
      best = it_;
    }
    if (res.worst() < settings_.tol) {
      sol.status = SolveStatus::optimal;
      break;
    }
    if (iter == settings_.max_iters) break;

    // Farkas-type certificates: an unbounded dual ray proves primal
    // infeasibility and vice versa.
    {
      std::vector<Matrix> aty;
      Vector aty_lp, aty_free;
      apply_at(it_.y, aty, aty_lp, aty_free);
      double ray = std::hypot((aty_lp + it_.z).norm(), aty_free.norm());
      for (int k = 0; k < nblocks_; ++k) ray = std::hypot(ray, (aty[k] + it_.Z[k]).norm());
      if (res.dobj > 0.0 && ray / res.dobj < 1e-9 && res.pinf > settings_.tol) {
        sol.status = SolveStatus::infeasible;
        break;
      }
      const double ax = apply_a(it_.X, it_.x, it_.u).norm();
      if (-res.pobj > 0.0 && ax / (-res.pobj) < 1e-9 && res.dinf > settings_.tol) {
        sol.status = SolveStatus::unbounded;
        break;
      }
    }

    double xz = it_.x.dot(it_.z);
    for (int k = 0; k < nblocks_; ++k) xz += inner(it_.X[k], it_.Z[k]);
    const double mu = degree_ > 0 ? xz / degree_ : 0.0;

    std::vector<Matrix> zinv(static_cast<std::size_t>(nblocks_));
    for (int k = 0; k < nblocks_; ++k) {
      Eigen::LLT<Matrix> llt(it_.Z[k]);
      zinv[k] = llt.solve(Matrix::Identity(sf_.dims[k], sf_.dims[k]));
      zinv[k] = 0.5 * (zinv[k] + zinv[k].transpose());
    }
    try {
      factor(schur(zinv));
    } catch (const Error&) {
      break;
    }

    // Newton direction toward target mu with an optional second-order term.
    auto direction = [&](double target, const Direction* pred) {
      std::vector<Matrix> r(static_cast<std::size_t>(nblocks_));
      for (int k = 0; k < nblocks_; ++k) {
        r[k] = target * zinv[k] - it_.X[k] - it_.X[k] * res.rd[k] * zinv[k];
        if (pred) r[k] -= pred->dX[k] * pred->dZ[k] * zinv[k];
      }
      Vector r_lp =
          (Vector::Constant(sf_.n_lp, target) - it_.x.cwiseProduct(res.rd_lp)).cwiseQuotient(it_.z) - it_.x;
      if (pred) r_lp -= pred->dx.cwiseProduct(pred->dz).cwiseQuotient(it_.z);

      Direction d;
      d.dy = solve_augmented(res.rp - apply_a(r, r_lp, Vector::Zero(sf_.n_free)), res.rd_free, d.du);
      if (sf_.n_free == 0) d.du = Vector::Zero(0);

      auto assemble = [&](const Vector& dy) {
        std::vector<Matrix> atdy;
        Vector atdy_lp, atdy_free;
        apply_at(dy, atdy, atdy_lp, atdy_free);
        d.dZ.resize(static_cast<std::size_t>(nblocks_));
        d.dX.resize(static_cast<std::size_t>(nblocks_));
        for (int k = 0; k < nblocks_; ++k) {
          d.dZ[k] = res.rd[k] - atdy[k];
          Matrix dx = r[k] + it_.X[k] * atdy[k] * zinv[k];
          d.dX[k] = 0.5 * (dx + dx.transpose());
        }
        d.dz = res.rd_lp - atdy_lp;
        d.dx = r_lp + it_.x.cwiseProduct(atdy_lp).cwiseQuotient(it_.z);
      };
      assemble(d.dy);
      // One refinement pass on the primal equation A(dX) + a dx + B du = rp.
      const Vector err = res.rp - apply_a(d.dX, d.dx, d.du);
      Vector ddu;
      const Vector ddy = solve_augmented(err, Vector::Zero(sf_.n_free), ddu);
      d.dy += ddy;
      if (sf_.n_free > 0) d.du += ddu;
      assemble(d.dy);
      return d;
    };
    auto steps = [&](const Direction& d, double& ap, double& ad) {
      ap = max_step(it_.x, d.dx);
      ad = max_step(it_.z, d.dz);
      for (int k = 0; k < nblocks_; ++k) {
        ap = std::min(ap, max_step(it_.X[k], d.dX[k]));
        ad = std::min(ad, max_step(it_.Z[k], d.dZ[k]));
      }
    };

    const Direction pred = direction(0.0, nullptr);
    double ap, ad;
    steps(pred, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = (it_.x + ap * pred.dx).dot(it_.z + ad * pred.dz);
    for (int k = 0; k < nblocks_; ++k) mu_aff += inner(it_.X[k] + ap * pred.dX[k], it_.Z[k] + ad * pred.dZ[k]);
    mu_aff = degree_ > 0 ? mu_aff / degree_ : 0.0;
    const double sigma = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;

    const Direction corr = direction(sigma * mu, &pred);
    steps(corr, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min(prev_ap, prev_ad);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    prev_ap = ap;
    prev_ad = ad;

    for (int k = 0; k < nblocks_; ++k) {
      it_.X[k] += ap * corr.dX[k];
      it_.Z[k] += ad * corr.dZ[k];
      it_.X[k] = 0.5 * (it_.X[k] + it_.X[k].transpose());
      it_.Z[k] = 0.5 * (it_.Z[k] + it_.Z[k].transpose());
    }
    it_.x += ap * corr.dx;
    it_.z += ad * corr.dz;
    it_.u += ap * corr.du;
    it_.y += ad * corr.dy;

    stalls = (ap < 1e-6 && ad < 1e-6) ? stalls + 1 : 0;
    if (stalls >= 3) break;
  }

  if (sol.status == SolveStatus::max_iters) {
    // Fall back to the best iterate seen; accept it at the looser level.
    it_ = best;
    if (best_worst < std::max(settings_.tol, 1e-6)) sol.status = SolveStatus::optimal;
  }
  const Residuals res = residuals();
  sol.primal_residual = res.pinf;
  sol.dual_residual = res.dinf;
  sol.relative_gap = res.gap;

  sol.psd_violation = sf_.n_lp > 0 ? it_.x.minCoeff() : std::numeric_limits<double>::infinity();
  sol.blocks = it_.X;
  for (const Matrix& X : it_.X)
    sol.psd_violation = std::min(
        sol.psd_violation, Eigen::SelfAdjointEigenSolver<Matrix>(X, Eigen::EigenvaluesOnly).eigenvalues()[0]);
  if (!std::isfinite(sol.psd_violation)) sol.psd_violation = 0.0;

  sol.scalars = Vector(static_cast<Eigen::Index>(sf_.scalar_map.size()));
  for (std::size_t i = 0; i < sf_.scalar_map.size(); ++i) {
    const Affine& a = sf_.scalar_map[i];
    double v = a.offset;
    for (const auto& [j, c] : a.lp) v += c * it_.x[j];
    if (a.free >= 0) v += it_.u[a.free];
    sol.scalars[static_cast<Eigen::Index>(i)] = v;
  }
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings) {
  if (!(settings.tol > 0.0) || settings.max_iters < 1) fail(ErrorKind::domain, "invalid solver settings");
  const StandardForm sf = to_standard_form(prog);
  ConicSolution sol;
  if (sf.rows.empty() && sf.dims.empty() && sf.n_lp == 0 && sf.n_free == 0) {
    sol.status = SolveStatus::optimal;
  } else {
    sol = InteriorPoint(sf, settings).run();
  }
  double obj = 0.0;
  for (const Term& t : prog.objective()) obj += t.coef * sol.value(t.var);
  sol.objective_value = obj;
  return sol;
}

Matrix gram_factor(const Matrix& m, double rank_tol) {
  if (m.rows() != m.cols()) fail(ErrorKind::dimension, "gram_factor needs a square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) fail(ErrorKind::domain, "matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  const Vector& values = eig.eigenvalues();
  if (values.size() > 0 && values[0] < -rank_tol)
    fail(ErrorKind::domain, "matrix is indefinite (min eigenvalue " + std::to_string(values[0]) + ")");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = values.size() - 1; k >= 0; --k)
    if (values[k] > rank_tol) kept.push_back(k);
  Matrix u(static_cast<Eigen::Index>(kept.size()), m.cols());
  for (std::size_t r = 0; r < kept.size(); ++r)
    u.row(static_cast<Eigen::Index>(r)) = std::sqrt(values[kept[r]]) * eig.eigenvectors().col(kept[r]).transpose();
  return u;
}

}  // namespace forge
