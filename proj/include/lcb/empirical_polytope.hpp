#pragma once

#include "lcb/action_set.hpp"
#include "lcb/random.hpp"

#include <unordered_map>
#include <utility>
#include <vector>

namespace lcb {

enum class Sense { Max, Min };

/// A vertex of the empirical polytope together with its per-set components.
struct Vertex {
  Vector point;
  std::vector<int> choice;  // row of each set's point list; -1 if the set has no point list
  Vector direction;         // objective (maximised) that produced the vertex
};

/// Orthonormal frame of an affine subspace through a relative-interior point.
struct AffineHull {
  Vector origin;
  Matrix basis;  // d x m

  int dim() const { return static_cast<int>(basis.cols()); }
  Vector to_local(const Eigen::Ref<const Vector>& x) const { return basis.transpose() * (x - origin); }
  Vector to_ambient(const Eigen::Ref<const Vector>& z) const { return origin + basis * z; }
  Vector residual(const Eigen::Ref<const Vector>& x) const {
    Vector r = x - origin;
    return r - basis * (basis.transpose() * r);
  }
};

/// Weighted Minkowski average of the convex hulls of sampled action sets.
/// Accessed only through its optimisation oracle; immutable once built.
class EmpiricalPolytope {
 public:
  struct Entry {
    ActionSet set;
    double weight = 0.0;
  };
  struct Support {
    double value = 0.0;
    Vector maximizer;
  };

  static constexpr double kRankTol = 1e-8;

  EmpiricalPolytope() = default;

  /// Equal weights 1/N per sample; identical sets are merged.
  static EmpiricalPolytope from_samples(const std::vector<ActionSet>& samples) {
    std::vector<std::pair<ActionSet, double>> w;
    w.reserve(samples.size());
    for (const auto& s : samples) w.emplace_back(s, 1.0);
    return from_weighted(w);
  }

  /// Weights are normalised to sum to one; identical sets are merged.
  static EmpiricalPolytope from_weighted(const std::vector<std::pair<ActionSet, double>>& items) {
    if (items.empty()) throw DomainError("empirical polytope needs at least one action set");
    EmpiricalPolytope p;
    p.dim_ = items.front().first.dim();
    std::unordered_multimap<std::size_t, std::size_t> index;
    double total = 0.0;
    for (const auto& [set, w] : items) {
      if (set.dim() != p.dim_) throw DomainError("action sets differ in dimension");
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("action set weight must be positive");
      total += w;
      const std::size_t h = set.hash();
      bool merged = false;
      auto range = index.equal_range(h);
      for (auto it = range.first; it != range.second; ++it) {
        if (p.entries_[it->second].set == set) {
          p.entries_[it->second].weight += w;
          merged = true;
          break;
        }
      }
      if (!merged) {
        index.emplace(h, p.entries_.size());
        p.entries_.push_back({set, w});
      }
    }
    for (auto& e : p.entries_) e.weight /= total;
    p.build();
    return p;
  }

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& sets() const { return entries_; }
  const AffineHull& hull() const { return hull_; }
  double radius() const { return radius_; }
  /// True when every set has an explicit point list (finite, or enumerated H-rep).
  bool has_point_lists() const { return point_lists_; }

  /// All point lists stacked; set i owns rows [offset(i), offset(i+1)).
  const RowMatrix& stacked() const { return stacked_; }
  int offset(std::size_t i) const { return offsets_[i]; }

  Support support(const Eigen::Ref<const Vector>& phi) const {
    Vertex v = optimize(phi, Sense::Max);
    Support s;
    s.maximizer = v.point;
    s.value = phi.dot(v.point);
    return s;
  }

  /// Weighted sum of per-set support values (without building the maximiser).
  double support_value(const Eigen::Ref<const Vector>& phi) const {
    if (phi.size() != dim_) throw DomainError("direction has wrong dimension");
    if (!point_lists_) return support(phi).value;
    Vector values = stacked_ * phi;
    double total = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const int lo = offsets_[i];
      const int n = offsets_[i + 1] - lo;
      total += entries_[i].weight * values.segment(lo, n).maxCoeff();
    }
    return total;
  }

  /// Vertex maximising (or minimising) <c, .>; per-set lexicographic tie-break.
  Vertex optimize(const Eigen::Ref<const Vector>& c, Sense sense = Sense::Max) const {
    if (c.size() != dim_) throw DomainError("direction has wrong dimension");
    require_finite(Vector(c), "optimize direction");
    Vertex v;
    v.direction = sense == Sense::Max ? Vector(c) : Vector(-c);
    v.point = Vector::Zero(dim_);
    v.choice.assign(entries_.size(), -1);
    if (point_lists_) {
      Vector values = stacked_ * v.direction;
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        const int lo = offsets_[i];
        const int n = offsets_[i + 1] - lo;
        const auto seg = values.segment(lo, n);
        const double best = seg.maxCoeff();
        const double slack = detail::tie_slack(best);
        int pick = n - 1;
        while (seg[pick] < best - slack) --pick;
        v.choice[i] = pick;
        v.point.noalias() += entries_[i].weight * stacked_.row(lo + pick).transpose();
      }
    } else {
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        SetArgmax a = entries_[i].set.argmax(v.direction);
        v.choice[i] = a.index;
        v.point.noalias() += entries_[i].weight * a.point;
      }
    }
    return v;
  }

  /// Point of set i selected by a vertex.
  Vector component(const Vertex& v, std::size_t i) const {
    if (v.choice[i] < 0) throw DomainError("vertex component unavailable for this action set");
    return stacked_.row(offsets_[i] + v.choice[i]).transpose();
  }

  /// Rebuild the point of a vertex from its choices (exact same summation order).
  Vector point_of(const std::vector<int>& choice) const {
    Vector p = Vector::Zero(dim_);
    for (std::size_t i = 0; i < entries_.size(); ++i)
      p.noalias() += entries_[i].weight * stacked_.row(offsets_[i] + choice[i]).transpose();
    return p;
  }

 private:
  void build() {
    point_lists_ = true;
    radius_ = 0.0;
    int rows = 0;
    offsets_.assign(1, 0);
    for (const auto& e : entries_) {
      if (!e.set.has_vertices()) point_lists_ = false;
      rows += static_cast<int>(e.set.points().rows());
      offsets_.push_back(rows);
      radius_ = std::max(radius_, e.set.max_norm());
    }
    stacked_.resize(rows, dim_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& pts = entries_[i].set.points();
      if (pts.rows() > 0) stacked_.middleRows(offsets_[i], pts.rows()) = pts;
    }
    build_hull();
  }

  // Probe the oracle along random directions, then confirm zero width along
  // every direction orthogonal to the spanned subspace.
  void build_hull() {
    Rng rng(derive_seed(0x6c6362ULL, {stream::kProbe, static_cast<std::uint64_t>(dim_)}));
    std::vector<Vector> probes;
    for (int k = 0; k < dim_; ++k) {
      Vector u = random_unit_vector(rng, dim_);
      probes.push_back(optimize(u).point);
      probes.push_back(optimize(-u).point);
    }
    Matrix basis = span_of(probes);
    for (int round = 0; round <= dim_; ++round) {
      Matrix comp = complement(basis);
      bool grew = false;
      for (Eigen::Index j = 0; j < comp.cols(); ++j) {
        Vector c = comp.col(j);
        Vector hi = optimize(c).point;
        Vector lo = optimize(-c).point;
        if (c.dot(hi - lo) > kRankTol) {
          probes.push_back(hi);
          probes.push_back(lo);
          grew = true;
        }
      }
      if (!grew) break;
      basis = span_of(probes);
    }
    Vector origin = Vector::Zero(dim_);
    for (const auto& p : probes) origin += p;
    origin /= static_cast<double>(probes.size());
    hull_.origin = origin;
    hull_.basis = basis;
  }

  Matrix span_of(const std::vector<Vector>& pts) const {
    Matrix diff(dim_, static_cast<Eigen::Index>(pts.size()) - 1);
    for (std::size_t j = 1; j < pts.size(); ++j) diff.col(j - 1) = pts[j] - pts[0];
    if (diff.cols() == 0) return Matrix(dim_, 0);
    Eigen::JacobiSVD<Matrix> svd(diff, Eigen::ComputeThinU);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > kRankTol) ++rank;
    return svd.matrixU().leftCols(rank);
  }

  Matrix complement(const Matrix& basis) const {
    const int m = static_cast<int>(basis.cols());
    if (m == dim_) return Matrix(dim_, 0);
    if (m == 0) return Matrix::Identity(dim_, dim_);
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ() * Matrix::Identity(dim_, dim_);
    return q.rightCols(dim_ - m);
  }

  int dim_ = 0;
  std::vector<Entry> entries_;
  RowMatrix stacked_;
  std::vector<int> offsets_;
  bool point_lists_ = true;
  double radius_ = 0.0;
  AffineHull hull_;
};

}  // namespace lcb
