#pragma once

#include "lcb/core.hpp"
#include "lcb/lp.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace lcb {

struct SetArgmax {
  double value = 0.0;
  Vector point;
  int index = -1;  // row in points() (finite sets) or in vertices() (H-rep, when enumerated)
};

namespace detail {

inline double tie_slack(double v) { return kTieSlack * std::max(1.0, std::abs(v)); }

// Lexicographic order on rows; the canonical point order.
inline bool row_less(const RowMatrix& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(a, j) < m(b, j)) return true;
    if (m(a, j) > m(b, j)) return false;
  }
  return false;
}

inline RowMatrix canonical_rows(const RowMatrix& pts) {
  std::vector<Eigen::Index> order(pts.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return row_less(pts, a, b); });
  std::vector<Eigen::Index> keep;
  for (auto i : order) {
    if (!keep.empty() && !row_less(pts, keep.back(), i) && !row_less(pts, i, keep.back())) continue;
    keep.push_back(i);
  }
  RowMatrix out(keep.size(), pts.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) out.row(k) = pts.row(keep[k]);
  return out;
}

// Max of <phi, row> over a canonical point list; among values within slack of
// the maximum the lexicographically greatest row wins (the last one scanned).
inline SetArgmax scan_argmax(const RowMatrix& pts, const Eigen::Ref<const Vector>& values) {
  const double best = values.maxCoeff();
  const double slack = tie_slack(best);
  int pick = -1;
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    if (values[i] >= best - slack) {
      pick = static_cast<int>(i);
      break;
    }
  }
  SetArgmax out;
  out.index = pick;
  out.point = pts.row(pick).transpose();
  out.value = values[pick];
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// One realized context: a finite point set or an H-polytope {x : N x <= b}.
///
/// Finite sets are stored in canonical form (rows sorted lexicographically,
/// exact duplicates removed), so equal sets compare equal exactly.
class ActionSet {
 public:
  // above this many d-subsets of constraints, H-rep vertices are not enumerated
  static constexpr double kEnumerationLimit = 2e5;

  ActionSet() = default;

  static ActionSet finite(const RowMatrix& points) {
    if (points.rows() == 0) throw InvariantViolation("action set is empty");
    if (points.cols() == 0) throw DomainError("action set has dimension 0");
    if (!points.allFinite()) throw InvariantViolation("action set has non-finite coordinates");
    ActionSet s;
    s.dim_ = static_cast<int>(points.cols());
    s.points_ = detail::canonical_rows(points);
    return s;
  }

  static ActionSet finite(const std::vector<Vector>& points) {
    if (points.empty()) throw InvariantViolation("action set is empty");
    RowMatrix m(points.size(), points.front().size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != m.cols()) throw DomainError("action set points differ in dimension");
      m.row(i) = points[i].transpose();
    }
    return finite(m);
  }

  /// {x : normals.row(i) x <= offsets[i]}. Boundedness is checked here.
  static ActionSet halfspaces(const RowMatrix& normals, const Vector& offsets) {
    if (normals.rows() != offsets.size()) throw DomainError("constraint count mismatch");
    if (normals.rows() == 0 || normals.cols() == 0) throw InvariantViolation("empty constraint set");
    if (!normals.allFinite() || !offsets.allFinite())
      throw InvariantViolation("constraint data not finite");
    ActionSet s;
    s.dim_ = static_cast<int>(normals.cols());
    s.normals_ = normals;
    s.offsets_ = offsets;
    s.hrep_ = true;
    for (int k = 0; k < s.dim_; ++k) {
      Vector e = Vector::Zero(s.dim_);
      e[k] = 1.0;
      s.lp_max(e);
      s.lp_max(-e);
    }
    if (detail::binomial(static_cast<int>(normals.rows()), s.dim_) <= kEnumerationLimit)
      s.points_ = s.enumerate_vertices();
    return s;
  }

  int dim() const { return dim_; }
  bool is_hrep() const { return hrep_; }
  bool is_finite() const { return !hrep_; }
  bool has_vertices() const { return points_.rows() > 0; }

  /// Finite sets: the canonical points. H-rep: enumerated vertices (may be empty).
  const RowMatrix& points() const { return points_; }
  const RowMatrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }

  /// Number of points (finite) or constraints (H-rep).
  int size() const { return hrep_ ? static_cast<int>(normals_.rows()) : static_cast<int>(points_.rows()); }

  /// max over conv(A) of <phi, .>, lexicographic tie-break.
  SetArgmax argmax(const Eigen::Ref<const Vector>& phi) const {
    if (phi.size() != dim_) throw DomainError("direction has wrong dimension");
    if (!hrep_) {
      Vector values = points_ * phi;
      return detail::scan_argmax(points_, values);
    }
    return lp_argmax(phi);
  }

  SetArgmax argmin(const Eigen::Ref<const Vector>& phi) const {
    SetArgmax r = argmax(-phi);
    r.value = -r.value;
    return r;
  }

  /// Checks the set invariants: bounded, finite, every point within `radius`.
  void validate(double radius) const {
    if (hrep_) {
      if (has_vertices()) {
        check_radius(points_, radius);
      } else {
        double box = 0.0;
        for (int k = 0; k < dim_; ++k) {
          Vector e = Vector::Zero(dim_);
          e[k] = 1.0;
          box += std::pow(std::max(std::abs(lp_max(e).objective), std::abs(lp_max(-e).objective)), 2);
        }
        if (std::sqrt(box) > radius * (1.0 + 1e-12))
          throw InvariantViolation("H-rep action set exceeds the norm bound");
      }
      return;
    }
    check_radius(points_, radius);
  }

  double max_norm() const {
    if (has_vertices()) return points_.rowwise().norm().maxCoeff();
    double box = 0.0;
    for (int k = 0; k < dim_; ++k) {
      Vector e = Vector::Zero(dim_);
      e[k] = 1.0;
      box += std::pow(std::max(std::abs(lp_max(e).objective), std::abs(lp_max(-e).objective)), 2);
    }
    return std::sqrt(box);
  }

  /// Exact equality of representation.
  bool operator==(const ActionSet& o) const {
    if (dim_ != o.dim_ || hrep_ != o.hrep_) return false;
    if (hrep_) {
      return normals_.rows() == o.normals_.rows() && normals_ == o.normals_ && offsets_ == o.offsets_;
    }
    return points_.rows() == o.points_.rows() && points_ == o.points_;
  }

  std::size_t hash() const {
    std::size_t h = std::hash<int>()(dim_) ^ (hrep_ ? 0x9e3779b9u : 0u);
    auto mix = [&h](double v) {
      h ^= std::hash<double>()(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    const RowMatrix& m = hrep_ ? normals_ : points_;
    for (Eigen::Index i = 0; i < m.size(); ++i) mix(m.data()[i]);
    for (Eigen::Index i = 0; i < offsets_.size(); ++i) mix(offsets_[i]);
    return h;
  }

 private:
  static void check_radius(const RowMatrix& pts, double radius) {
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (pts.row(i).norm() > radius * (1.0 + 1e-12))
        throw InvariantViolation("action exceeds the norm bound " + std::to_string(radius));
    }
  }

  LpSolution lp_max(const Vector& phi) const {
    LinearProgram lp(dim_);
    for (int j = 0; j < dim_; ++j) lp.set_free(j);
    for (Eigen::Index i = 0; i < normals_.rows(); ++i)
      lp.add_row(normals_.row(i).transpose(), Relation::LessEqual, offsets_[i]);
    lp.maximize(phi);
    LpSolution s = lp.solve();
    if (s.status == LpStatus::Unbounded) throw InvariantViolation("H-rep action set is unbounded");
    if (s.status == LpStatus::Infeasible) throw InvariantViolation("H-rep action set is empty");
    if (s.status != LpStatus::Optimal) throw InternalError("LP iteration limit in H-rep subproblem");
    return s;
  }

  // LP optimum followed by lexicographic refinement over the optimal face.
  SetArgmax lp_argmax(const Vector& phi) const {
    LpSolution s = lp_max(phi);
    const double best = s.objective;
    LinearProgram lp(dim_);
    for (int j = 0; j < dim_; ++j) lp.set_free(j);
    for (Eigen::Index i = 0; i < normals_.rows(); ++i)
      lp.add_row(normals_.row(i).transpose(), Relation::LessEqual, offsets_[i]);
    lp.add_row(phi, Relation::GreaterEqual, best - detail::tie_slack(best));
    Vector x = s.x;
    for (int k = 0; k < dim_; ++k) {
      Vector e = Vector::Zero(dim_);
      e[k] = 1.0;
      lp.maximize(e);
      LpSolution r = lp.solve();
      if (r.status != LpStatus::Optimal) break;
      x = r.x;
      lp.add_row(e, Relation::GreaterEqual, r.x[k] - 1e-12 * std::max(1.0, std::abs(r.x[k])));
    }
    SetArgmax out;
    out.point = x;
    out.value = phi.dot(x);
    if (has_vertices()) {
      Eigen::Index idx = 0;
      const double dist = (points_.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&idx);
      if (std::sqrt(dist) <= 1e-7) {
        out.index = static_cast<int>(idx);
        out.point = points_.row(idx).transpose();
        out.value = phi.dot(out.point);
      }
    }
    return out;
  }

  RowMatrix enumerate_vertices() const {
    const int c = static_cast<int>(normals_.rows());
    std::vector<Vector> found;
    std::vector<int> pick(dim_);
    std::iota(pick.begin(), pick.end(), 0);
    const double scale = 1.0 + offsets_.cwiseAbs().maxCoeff();
    while (true) {
      Matrix a(dim_, dim_);
      Vector b(dim_);
      for (int r = 0; r < dim_; ++r) {
        a.row(r) = normals_.row(pick[r]);
        b[r] = offsets_[pick[r]];
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (lu.rank() == dim_) {
        Vector x = lu.solve(b);
        if (((normals_ * x - offsets_).array() <= 1e-9 * scale).all()) found.push_back(x);
      }
      int k = dim_ - 1;
      while (k >= 0 && pick[k] == c - dim_ + k) --k;
      if (k < 0) break;
      ++pick[k];
      for (int j = k + 1; j < dim_; ++j) pick[j] = pick[j - 1] + 1;
    }
    if (found.empty()) throw InvariantViolation("H-rep action set has no vertices");
    // merge numerically coincident vertices
    std::sort(found.begin(), found.end(), [](const Vector& a, const Vector& b) { return lex_less(a, b); });
    std::vector<Vector> uniq;
    for (auto& v : found) {
      bool dup = false;
      for (auto& u : uniq) {
        if ((u - v).norm() <= 1e-9 * scale) {
          dup = true;
          break;
        }
      }
      if (!dup) uniq.push_back(v);
    }
    RowMatrix m(uniq.size(), dim_);
    for (std::size_t i = 0; i < uniq.size(); ++i) m.row(i) = uniq[i].transpose();
    return detail::canonical_rows(m);
  }

  int dim_ = 0;
  bool hrep_ = false;
  RowMatrix points_;
  RowMatrix normals_;
  Vector offsets_;
};

}  // namespace lcb
