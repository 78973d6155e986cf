#pragma once

// Dense two-phase tableau simplex with Bland's pivoting rule.
//
// Sized for the small problems that appear here: per-set support
// subproblems of H-represented action sets, restricted master problems of
// the column-generation oracles and certification LPs in the tests.

#include "lcb/core.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace lcb {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-10;
  double feas_tol = 1e-9;
  int max_iterations = 0;  // 0: 50 * (rows + cols) + 1000
};

/// Result for `max c'x  s.t.  A x = b,  x >= 0`.
///
/// `duals` holds y = c_B' B^-1 in the orientation of the caller's rows. At an
/// optimum, c_j - y'a_j <= 0 for every column. When the problem is
/// infeasible it holds the phase-one duals instead, which satisfy
/// y'a_j >= 0 for every column and y'b < 0 (a Farkas certificate).
struct StandardFormResult {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  double infeasibility = 0.0;
  Vector x;
  Vector duals;
};

namespace detail {

class SimplexTableau {
 public:
  SimplexTableau(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b)
      : m_(static_cast<int>(a.rows())), n_(static_cast<int>(a.cols())),
        t_(RowMatrix::Zero(m_ + 1, n_ + m_ + 1)), basis_(m_), sign_(m_) {
    for (int i = 0; i < m_; ++i) {
      sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign_[i] * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign_[i] * b[i];
      basis_[i] = n_ + i;
    }
  }

  int rhs() const { return n_ + m_; }
  int rows() const { return m_; }
  int cols() const { return n_; }

  void pivot(int r, int q) {
    t_.row(r) /= t_(r, q);
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, q);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = q;
  }

  // Bland: lowest-index improving column, lowest-index basic variable on ratio ties.
  // Returns +1 optimal, 0 pivoted, -1 unbounded.
  int bland_step(int allowed_cols, const LpOptions& opt) {
    int q = -1;
    for (int j = 0; j < allowed_cols; ++j) {
      if (t_(m_, j) > opt.cost_tol) {
        q = j;
        break;
      }
    }
    if (q < 0) return 1;
    int r = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i) {
      const double piv = t_(i, q);
      if (piv <= opt.pivot_tol) continue;
      const double ratio = std::max(t_(i, rhs()), 0.0) / piv;
      const bool better = r < 0 || ratio < best - 1e-15;
      const bool tie = !better && ratio <= best + 1e-15 && basis_[i] < basis_[r];
      if (better || tie) {
        best = better ? ratio : std::min(best, ratio);
        r = i;
      }
    }
    if (r < 0) return -1;
    pivot(r, q);
    return 0;
  }

  void load_costs(const Vector& cost_b, const Eigen::Ref<const Vector>& cost_cols, int ncols) {
    // reduced costs r_j = c_j - c_B' B^-1 a_j, objective cell holds -c_B' x_B
    t_.row(m_).setZero();
    for (int j = 0; j < ncols; ++j) t_(m_, j) = cost_cols[j];
    for (int i = 0; i < m_; ++i) {
      if (cost_b[i] != 0.0) t_.row(m_) -= cost_b[i] * t_.row(i);
    }
    for (int i = 0; i < m_; ++i) t_(m_, basis_[i]) = 0.0;
  }

  Vector duals(const Vector& cost_b) const {
    Vector y = Vector::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      if (cost_b[i] == 0.0) continue;
      y += cost_b[i] * t_.row(i).segment(n_, m_).transpose();
    }
    for (int i = 0; i < m_; ++i) y[i] *= sign_[i];
    return y;
  }

  RowMatrix& table() { return t_; }
  const RowMatrix& table() const { return t_; }
  std::vector<int>& basis() { return basis_; }

 private:
  int m_;
  int n_;
  RowMatrix t_;
  std::vector<int> basis_;
  std::vector<double> sign_;
};

}  // namespace detail

/// maximize c'x subject to A x = b, x >= 0.
inline StandardFormResult solve_standard_form(const Eigen::Ref<const Matrix>& a,
                                              const Eigen::Ref<const Vector>& b,
                                              const Eigen::Ref<const Vector>& c,
                                              const LpOptions& opt = {}) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  StandardFormResult res;
  res.x = Vector::Zero(n);
  res.duals = Vector::Zero(m);
  if (m == 0) {
    if ((c.array() > opt.cost_tol).any()) {
      res.status = LpStatus::Unbounded;
    } else {
      res.status = LpStatus::Optimal;
    }
    return res;
  }

  detail::SimplexTableau tab(a, b);
  const int limit = opt.max_iterations > 0 ? opt.max_iterations : 50 * (m + n) + 1000;
  const double feas_tol = opt.feas_tol * (1.0 + b.cwiseAbs().maxCoeff());

  // phase one: maximize -sum(artificials)
  Vector cb = Vector::Constant(m, -1.0);
  {
    Vector cols = Vector::Zero(n + m);
    cols.tail(m).setConstant(-1.0);
    tab.load_costs(cb, cols, n + m);
  }
  int it = 0;
  for (; it < limit; ++it) {
    int s = tab.bland_step(n, opt);
    if (s == 1) break;
    if (s == -1) break;  // cannot happen in phase one
  }
  if (it >= limit) return res;

  for (int i = 0; i < m; ++i) cb[i] = tab.basis()[i] >= n ? -1.0 : 0.0;
  res.infeasibility = tab.table()(m, tab.rhs());
  if (res.infeasibility > feas_tol) {
    res.status = LpStatus::Infeasible;
    res.duals = tab.duals(cb);
    return res;
  }

  // drive zero-level artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (tab.basis()[i] < n) continue;
    int q = -1;
    double best = opt.pivot_tol;
    for (int j = 0; j < n; ++j) {
      const double v = std::abs(tab.table()(i, j));
      if (v > best) {
        best = v;
        q = j;
      }
    }
    if (q >= 0) tab.pivot(i, q);
  }

  // phase two
  for (int i = 0; i < m; ++i) {
    const int bv = tab.basis()[i];
    cb[i] = bv < n ? c[bv] : 0.0;
  }
  {
    Vector cols = Vector::Zero(n + m);
    cols.head(n) = c;
    tab.load_costs(cb, cols, n + m);
  }
  for (; it < limit; ++it) {
    int s = tab.bland_step(n, opt);
    if (s == 1) {
      res.status = LpStatus::Optimal;
      break;
    }
    if (s == -1) {
      res.status = LpStatus::Unbounded;
      return res;
    }
  }
  if (res.status != LpStatus::Optimal) return res;

  for (int i = 0; i < m; ++i) {
    const int bv = tab.basis()[i];
    cb[i] = bv < n ? c[bv] : 0.0;
    if (bv < n) res.x[bv] = std::max(tab.table()(i, tab.rhs()), 0.0);
  }
  res.objective = c.dot(res.x);
  res.duals = tab.duals(cb);
  return res;
}

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  Vector x;
};

/// Small modelling layer over `solve_standard_form`: bounded and free
/// variables, inequality rows, maximisation or minimisation.
class LinearProgram {
 public:
  explicit LinearProgram(int num_vars)
      : lower_(Vector::Zero(num_vars)),
        upper_(Vector::Constant(num_vars, std::numeric_limits<double>::infinity())),
        objective_(Vector::Zero(num_vars)) {}

  int num_vars() const { return static_cast<int>(lower_.size()); }

  void set_bounds(int j, double lo, double hi) {
    lower_[j] = lo;
    upper_[j] = hi;
  }
  void set_free(int j) {
    set_bounds(j, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }

  void add_row(const Eigen::Ref<const Vector>& coeffs, Relation rel, double rhs) {
    rows_.push_back(coeffs);
    rel_.push_back(rel);
    rhs_.push_back(rhs);
  }

  void maximize(const Eigen::Ref<const Vector>& c) {
    objective_ = c;
    maximize_ = true;
  }
  void minimize(const Eigen::Ref<const Vector>& c) {
    objective_ = c;
    maximize_ = false;
  }

  LpSolution solve(const LpOptions& opt = {}) const {
    const int nv = num_vars();
    // column map: x_j = offset_j + sum coef * std_col
    struct Map {
      double offset = 0.0;
      int pos = -1;
      int neg = -1;
    };
    std::vector<Map> map(nv);
    int ncols = 0;
    std::vector<std::pair<int, double>> upper_rows;  // (std col, bound)
    for (int j = 0; j < nv; ++j) {
      const bool lo_f = std::isfinite(lower_[j]);
      const bool hi_f = std::isfinite(upper_[j]);
      if (lo_f) {
        map[j].offset = lower_[j];
        map[j].pos = ncols++;
        if (hi_f) upper_rows.emplace_back(map[j].pos, upper_[j] - lower_[j]);
      } else if (hi_f) {
        map[j].offset = upper_[j];
        map[j].neg = ncols++;
      } else {
        map[j].pos = ncols++;
        map[j].neg = ncols++;
      }
    }
    const int nrows = static_cast<int>(rows_.size()) + static_cast<int>(upper_rows.size());
    int nslack = static_cast<int>(upper_rows.size());
    for (auto r : rel_) nslack += (r != Relation::Equal) ? 1 : 0;
    Matrix a = Matrix::Zero(nrows, ncols + nslack);
    Vector b = Vector::Zero(nrows);
    int slack = ncols;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      double rhs = rhs_[i];
      for (int j = 0; j < nv; ++j) {
        const double coef = rows_[i][j];
        if (coef == 0.0) continue;
        rhs -= coef * map[j].offset;
        if (map[j].pos >= 0) a(i, map[j].pos) += coef;
        if (map[j].neg >= 0) a(i, map[j].neg) -= coef;
      }
      if (rel_[i] == Relation::LessEqual) a(i, slack++) = 1.0;
      if (rel_[i] == Relation::GreaterEqual) a(i, slack++) = -1.0;
      b[i] = rhs;
    }
    for (std::size_t k = 0; k < upper_rows.size(); ++k) {
      const int i = static_cast<int>(rows_.size() + k);
      a(i, upper_rows[k].first) = 1.0;
      a(i, slack++) = 1.0;
      b[i] = upper_rows[k].second;
    }
    Vector c = Vector::Zero(ncols + nslack);
    const double sense = maximize_ ? 1.0 : -1.0;
    double constant = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double cj = sense * objective_[j];
      constant += cj * map[j].offset;
      if (map[j].pos >= 0) c[map[j].pos] += cj;
      if (map[j].neg >= 0) c[map[j].neg] -= cj;
    }
    StandardFormResult sf = solve_standard_form(a, b, c, opt);
    LpSolution out;
    out.status = sf.status;
    out.x = Vector::Zero(nv);
    if (sf.status != LpStatus::Optimal) return out;
    for (int j = 0; j < nv; ++j) {
      double v = map[j].offset;
      if (map[j].pos >= 0) v += sf.x[map[j].pos];
      if (map[j].neg >= 0) v -= sf.x[map[j].neg];
      out.x[j] = v;
    }
    out.objective = objective_.dot(out.x);
    return out;
  }

 private:
  Vector lower_;
  Vector upper_;
  Vector objective_;
  bool maximize_ = true;
  std::vector<Vector> rows_;
  std::vector<Relation> rel_;
  std::vector<double> rhs_;
};

}  // namespace lcb
