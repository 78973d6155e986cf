#pragma once

// Oracles on the empirical polytope: separation, ray exits, Caratheodory
// decomposition and normal-cone witnesses.
//
// Everything below works in the hull frame (m = hull dimension). Membership
// and boundary questions are answered by a column-generation LP whose
// columns are vertices returned by `optimize`; its duals double as
// separating or supporting hyperplanes.

#include "lcb/empirical_polytope.hpp"
#include "lcb/lp.hpp"
#include "lcb/random.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace lcb {

struct SeparationResult {
  bool inside = true;
  Vector phi;  // unit normal when separated
  double margin = 0.0;

  static SeparationResult in() { return {}; }
  static SeparationResult out(Vector phi, double margin) { return {false, std::move(phi), margin}; }
};

struct VertexDecomposition {
  std::vector<Vertex> vertices;
  std::vector<double> weights;
  int k() const { return static_cast<int>(vertices.size()); }
  Vector combination() const {
    Vector s = Vector::Zero(vertices.front().point.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) s += weights[i] * vertices[i].point;
    return s;
  }
};

struct ConeWitness {
  Vector phi;              // ambient, norm <= 1
  double epsilon = 0.0;    // max over the polytope of <phi, psi - x> <= -epsilon
  double best_value = 0.0; // best objective reached
  int id = -1;             // creation order within the owning Geometry
  bool used_fallback = false;
};

struct RayExit {
  double t = 0.0;
  Vector normal;  // hull frame, <normal, u> = 1, supports the polytope at the exit point
  std::vector<std::pair<Vertex, double>> mix;  // exit point as a convex combination
};

struct GeometryOptions {
  int ascent_iterations_per_dim = 500;
  int witness_iterations_per_dim = 100;
  std::size_t cache_capacity = 0;  // 0: 4 (m + 1) + 8
  bool certify_vertices = true;
  std::uint64_t seed = 0x67656f6dULL;
};

namespace detail {

// Recently used vertices in hull coordinates, warm-starting the master LP.
class VertexCache {
 public:
  struct Item {
    Vector z;
    Vertex v;
    std::uint64_t used = 0;
  };

  explicit VertexCache(std::size_t cap = 16) : cap_(cap) {}

  std::size_t size() const { return items_.size(); }
  const Item& operator[](std::size_t i) const { return items_[i]; }

  int find(const Vertex& v) const {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].v.choice == v.choice && items_[i].v.point == v.point) return static_cast<int>(i);
    }
    return -1;
  }

  int add(Vector z, Vertex v) {
    int i = find(v);
    if (i >= 0) {
      touch(i);
      return i;
    }
    items_.push_back({std::move(z), std::move(v), ++tick_});
    return static_cast<int>(items_.size()) - 1;
  }

  void touch(int i) { items_[i].used = ++tick_; }

  void trim() {
    if (items_.size() <= cap_) return;
    std::vector<std::size_t> order(items_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return items_[a].used > items_[b].used; });
    order.resize(cap_);
    std::sort(order.begin(), order.end());
    std::vector<Item> kept;
    kept.reserve(cap_);
    for (auto i : order) kept.push_back(std::move(items_[i]));
    items_ = std::move(kept);
  }

 private:
  std::size_t cap_;
  std::uint64_t tick_ = 0;
  std::vector<Item> items_;
};

struct MasterResult {
  bool feasible = false;
  double objective = 0.0;
  Vector phi;   // hull frame
  double pi = 0.0;
  std::vector<std::pair<int, double>> mix;  // cache index, weight
};

}  // namespace detail

/// Oracle toolkit bound to one polytope. Holds caches (vertex columns,
/// witnesses), so one instance per thread.
class Geometry {
 public:
  explicit Geometry(const EmpiricalPolytope& poly, GeometryOptions opt = {})
      : poly_(&poly), opt_(opt), rng_(opt.seed) {
    const int m = poly.hull().dim();
    cache_ = detail::VertexCache(opt.cache_capacity > 0 ? opt.cache_capacity : 4 * (m + 1) + 8);
    scale_ = std::max(1.0, poly.radius());
    if (m == 1) {
      Vector b = poly.hull().basis.col(0);
      seg_hi_ = poly.hull().to_local(poly.optimize(b).point)[0];
      seg_lo_ = poly.hull().to_local(poly.optimize(-b).point)[0];
    }
  }

  const EmpiricalPolytope& polytope() const { return *poly_; }
  int hull_dim() const { return poly_->hull().dim(); }

  // --- separation -------------------------------------------------------

  /// g(phi) = <phi, x> - h(phi) for a unit phi.
  double gap(const Eigen::Ref<const Vector>& phi, const Eigen::Ref<const Vector>& x) const {
    return phi.dot(x) - poly_->support_value(phi);
  }

  SeparationResult separate(const Eigen::Ref<const Vector>& x) {
    if (x.size() != poly_->dim()) throw DomainError("point has wrong dimension");
    require_finite(Vector(x), "separate");
    const AffineHull& h = poly_->hull();
    Vector r = h.residual(x);
    const double rn = r.norm();
    if (rn > kGeoTol) {
      Vector phi = r / rn;
      return SeparationResult::out(phi, std::max(gap(phi, x), rn * (1.0 - 1e-12)));
    }
    const int m = h.dim();
    if (m == 0) return SeparationResult::in();
    Vector z = h.to_local(x);
    if (m == 1) {
      if (z[0] > seg_hi_ + kGeoTol) return SeparationResult::out(h.basis.col(0), z[0] - seg_hi_);
      if (z[0] < seg_lo_ - kGeoTol) return SeparationResult::out(-h.basis.col(0), seg_lo_ - z[0]);
      return SeparationResult::in();
    }
    detail::MasterResult res = master(z, nullptr);
    if (res.feasible) return SeparationResult::in();
    return ascend(x, z, res.phi);
  }

  bool contains(const Eigen::Ref<const Vector>& x) { return separate(x).inside; }

  // --- ray exits --------------------------------------------------------

  /// Largest t with z + t u in the polytope (hull frame, z inside).
  RayExit ray_exit(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u) {
    const int m = hull_dim();
    RayExit out;
    if (m == 0) return out;
    if (m == 1) {
      if (u[0] > 0) out.t = (seg_hi_ - z[0]) / u[0];
      else if (u[0] < 0) out.t = (seg_lo_ - z[0]) / u[0];
      else throw DomainError("zero ray direction");
      out.t = std::max(out.t, 0.0);
      out.normal = Vector::Constant(1, 1.0 / u[0]);
      return out;
    }
    const Vector uu = u;
    detail::MasterResult res = master(z, &uu);
    if (!res.feasible) throw InternalError("ray origin lies outside the polytope");
    out.t = std::max(res.objective, 0.0);
    out.normal = res.phi;
    for (auto [i, w] : res.mix) out.mix.emplace_back(cache_[i].v, w);
    return out;
  }

  /// Chord through z along u: (t_minus <= 0 <= t_plus).
  std::pair<double, double> chord(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u) {
    const double hi = exit_length(z, u);
    const double lo = -exit_length(z, -u);
    return {lo, hi};
  }

  /// ray_exit(z, u).t without assembling the exit combination.
  double exit_length(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u) {
    const int m = hull_dim();
    if (m == 0) return 0.0;
    if (m == 1) {
      if (u[0] > 0) return std::max((seg_hi_ - z[0]) / u[0], 0.0);
      if (u[0] < 0) return std::max((seg_lo_ - z[0]) / u[0], 0.0);
      throw DomainError("zero ray direction");
    }
    const Vector uu = u;
    detail::MasterResult res = master(z, &uu);
    if (!res.feasible) throw SamplerError("chord origin lies outside the polytope");
    return std::max(res.objective, 0.0);
  }

  /// Boundary point on the segment from the relative-interior point to x
  /// (used to pull a slightly infeasible point back into the polytope).
  Vector project_toward_center(const Eigen::Ref<const Vector>& x) {
    const AffineHull& h = poly_->hull();
    if (hull_dim() == 0) return h.origin;
    Vector z = h.to_local(x);
    const double len = z.norm();
    if (len == 0.0) return h.origin;
    Vector u = z / len;
    const double t = exit_length(Vector::Zero(hull_dim()), u);
    return h.to_ambient(std::min(t, len) * u);
  }

  // --- decomposition ----------------------------------------------------

  VertexDecomposition decompose(const Eigen::Ref<const Vector>& y) {
    SeparationResult s = separate(y);
    if (!s.inside) throw DomainError("decompose: point is outside the polytope");
    const AffineHull& h = poly_->hull();
    const int m = h.dim();
    VertexDecomposition out;
    Vector dir = random_unit_vector(rng_, poly_->dim());
    Vertex v0 = poly_->optimize(dir);
    Vector zy = h.to_local(y);
    Vector z0 = h.to_local(v0.point);
    Vector diff = zy - z0;
    const double len = diff.norm();
    if (m == 0 || len <= 1e-13 * scale_) {
      out.vertices.push_back(v0);
      out.weights.push_back(1.0);
      finish(out, y);
      return out;
    }
    Vector u = diff / len;
    std::vector<std::pair<Vertex, double>> parts;
    double t = 0.0;
    if (m == 1) {
      t = ray_exit(zy, u).t;
      const double far = u[0] > 0 ? 1.0 : -1.0;
      parts.emplace_back(poly_->optimize(far * h.basis.col(0)), 1.0);
    } else {
      detail::MasterResult res = master(zy, &u);
      if (!res.feasible) throw InternalError("decompose: membership oracle disagrees with separation");
      t = std::max(res.objective, 0.0);
      for (auto [i, w] : res.mix) parts.emplace_back(cache_[i].v, w);
    }
    const double alpha = len / (len + t);
    add_weight(out, v0, 1.0 - alpha);
    for (auto& [v, w] : parts) add_weight(out, v, alpha * w);
    finish(out, y);
    return out;
  }

  // --- normal-cone witness ----------------------------------------------

  /// phi with psi the unique minimiser of <phi, .> in every sampled set.
  ConeWitness cone_witness(const Vertex& psi) {
    if (!poly_->has_point_lists()) throw DomainError("cone witness needs explicit point lists");
    for (int c : psi.choice) {
      if (c < 0) throw DomainError("cone witness: vertex components unavailable");
    }
    auto it = witnesses_.find(psi.choice);
    if (it != witnesses_.end()) return it->second;
    ConeWitness w = compute_witness(psi);
    w.id = static_cast<int>(witnesses_.size());
    witnesses_.emplace(psi.choice, w);
    return w;
  }

  /// Witness for a bare point, which must coincide with a vertex of its own decomposition.
  ConeWitness cone_witness(const Eigen::Ref<const Vector>& psi) {
    VertexDecomposition dec = decompose(psi);
    // round-off can leave negligible weight on neighbouring vertices
    int best = 0;
    for (int k = 1; k < dec.k(); ++k)
      if (dec.weights[k] > dec.weights[best]) best = k;
    if ((dec.vertices[best].point - psi).norm() > 1e-9 * scale_) throw DomainError("cone witness: not a vertex");
    return cone_witness(dec.vertices[best]);
  }

  /// Max over the polytope of <phi, psi - x>, excluding psi's own selection in
  /// each set: f < 0 iff psi is the strict per-set argmin under phi.
  double witness_objective(const Vertex& psi, const Eigen::Ref<const Vector>& phi, Vector* subgrad = nullptr) const {
    Vector values = poly_->stacked() * phi;
    double best = -std::numeric_limits<double>::infinity();
    const auto& sets = poly_->sets();
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const int lo = poly_->offset(i);
      const int n = poly_->offset(i + 1) - lo;
      if (n < 2) continue;
      const int own = psi.choice[i];
      int arg = -1;
      double mn = std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a) {
        if (a == own) continue;
        if (values[lo + a] < mn) {
          mn = values[lo + a];
          arg = a;
        }
      }
      const double val = sets[i].weight * (values[lo + own] - mn);
      if (val > best) {
        best = val;
        if (subgrad) {
          *subgrad = sets[i].weight *
                     (poly_->stacked().row(lo + own) - poly_->stacked().row(lo + arg)).transpose();
        }
      }
    }
    return best;
  }

  std::size_t witness_count() const { return witnesses_.size(); }
  void clear_witnesses() { witnesses_.clear(); }

 private:
  void add_weight(VertexDecomposition& out, const Vertex& v, double w) {
    if (!(w > 0.0)) return;
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
      if (out.vertices[i].choice == v.choice && out.vertices[i].point == v.point) {
        out.weights[i] += w;
        return;
      }
    }
    out.vertices.push_back(v);
    out.weights.push_back(w);
  }

  void finish(VertexDecomposition& out, const Eigen::Ref<const Vector>& y) {
    // drop negligible weights, renormalise
    double total = 0.0;
    std::vector<Vertex> vs;
    std::vector<double> ws;
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
      if (out.weights[i] <= 1e-15) continue;
      vs.push_back(out.vertices[i]);
      ws.push_back(out.weights[i]);
      total += out.weights[i];
    }
    for (auto& w : ws) w /= total;
    out.vertices = std::move(vs);
    out.weights = std::move(ws);
    if (static_cast<int>(out.vertices.size()) > hull_dim() + 1)
      throw InternalError("decompose produced more than m + 1 vertices");
    const double err = (out.combination() - y).norm();
    if (err > 1e-8 * scale_) throw InternalError("decompose reconstruction error " + std::to_string(err));
    if (opt_.certify_vertices && poly_->has_point_lists()) {
      for (const auto& v : out.vertices) cone_witness(v);
    }
  }

  // Column generation over vertices: z = sum mu_k v_k (+ t u), sum mu_k = 1.
  detail::MasterResult master(const Vector& z, const Vector* u) {
    const int m = hull_dim();
    const AffineHull& h = poly_->hull();
    Vector b(m + 1);
    b.head(m) = z;
    b[m] = 1.0;
    const int extra = u ? 2 : 0;
    detail::MasterResult res;
    const int max_rounds = 200 + 50 * m;
    for (int round = 0; round < max_rounds; ++round) {
      const int k = static_cast<int>(cache_.size());
      Matrix a(m + 1, k + extra);
      Vector c = Vector::Zero(k + extra);
      for (int j = 0; j < k; ++j) {
        a.col(j).head(m) = cache_[j].z;
        a(m, j) = 1.0;
      }
      if (u) {
        a.col(k).head(m) = -*u;
        a(m, k) = 0.0;
        a.col(k + 1).head(m) = *u;
        a(m, k + 1) = 0.0;
        c[k] = 1.0;
        c[k + 1] = -1.0;
      }
      StandardFormResult sf = solve_standard_form(a, b, c);
      if (sf.status == LpStatus::IterationLimit || sf.status == LpStatus::Unbounded)
        throw InternalError("master LP failed");
      res.feasible = sf.status == LpStatus::Optimal;
      res.phi = -sf.duals.head(m);
      res.pi = sf.duals[m];
      res.objective = sf.objective;
      Vertex v = poly_->optimize(h.basis * res.phi);
      Vector zv = h.to_local(v.point);
      const double tol = 1e-10 * (1.0 + std::abs(res.pi) + res.phi.norm() * scale_);
      if (res.phi.dot(zv) <= res.pi + tol || cache_.find(v) >= 0) {
        res.mix.clear();
        for (int j = 0; j < k; ++j) {
          if (sf.x.size() > j && sf.x[j] > 0.0) {
            res.mix.emplace_back(j, sf.x[j]);
            cache_.touch(j);
          }
        }
        if (res.feasible) {
          double s = 0.0;
          for (auto& p : res.mix) s += p.second;
          for (auto& p : res.mix) p.second /= s;
        }
        trim_keep(res);
        return res;
      }
      cache_.add(std::move(zv), std::move(v));
    }
    throw InternalError("column generation did not converge");
  }

  // Trim the cache while keeping indices in `res.mix` valid.
  void trim_keep(detail::MasterResult& res) {
    if (cache_.size() <= (opt_.cache_capacity > 0 ? opt_.cache_capacity : 4 * (hull_dim() + 1) + 8)) return;
    std::vector<Vertex> keep;
    for (auto& p : res.mix) keep.push_back(cache_[p.first].v);
    cache_.trim();
    for (std::size_t i = 0; i < res.mix.size(); ++i) {
      int j = cache_.find(keep[i]);
      if (j < 0) j = cache_.add(poly_->hull().to_local(keep[i].point), keep[i]);
      res.mix[i].first = j;
    }
  }

  // Supergradient ascent on g over the unit ball, started from the LP normal.
  SeparationResult ascend(const Vector& x, const Vector& z, const Vector& farkas) {
    const AffineHull& h = poly_->hull();
    const int m = h.dim();
    Vector phi = farkas.norm() > 0 ? Vector(farkas / farkas.norm()) : Vector(z / std::max(z.norm(), 1e-300));
    Vector best_phi = phi;
    double best = -std::numeric_limits<double>::infinity();
    const int iters = opt_.ascent_iterations_per_dim * m;
    for (int k = 1; k <= iters; ++k) {
      const double nrm = phi.norm();
      if (nrm > 0) {
        Vector unit = phi / nrm;
        Vertex v = poly_->optimize(h.basis * unit);
        const double g = unit.dot(z - h.to_local(v.point));
        if (g > best) {
          best = g;
          best_phi = unit;
        }
        Vector s = z - h.to_local(v.point);
        const double sn = s.norm();
        if (sn == 0.0) break;
        phi = unit + s / (sn * std::sqrt(static_cast<double>(k)));
      } else {
        phi = best_phi;
      }
      const double pn = phi.norm();
      if (pn > 1.0) phi /= pn;
    }
    if (best <= kGeoTol) return SeparationResult::in();
    Vector amb = h.basis * best_phi;
    amb /= amb.norm();
    return SeparationResult::out(amb, std::min(best, gap(amb, x)));
  }

  ConeWitness compute_witness(const Vertex& psi) {
    const AffineHull& h = poly_->hull();
    const int m = h.dim();
    ConeWitness out;
    if (m == 0) {
      out.phi = Vector::Zero(poly_->dim());
      out.phi[0] = 1.0;
      out.epsilon = std::numeric_limits<double>::infinity();
      out.best_value = -out.epsilon;
      return out;
    }
    // subgradient descent in the hull frame
    Vector phi = -(h.basis.transpose() * psi.direction);
    if (phi.norm() < 1e-300) phi = Vector::Constant(m, 1.0);
    phi /= phi.norm();
    Vector best_phi = phi;
    double best = std::numeric_limits<double>::infinity();
    const int iters = opt_.witness_iterations_per_dim * m + 50;
    Vector g;
    for (int k = 1; k <= iters; ++k) {
      const double f = witness_objective(psi, h.basis * phi, &g);
      if (f < best) {
        best = f;
        best_phi = phi;
      }
      if (best < -1e-9) break;
      Vector gl = h.basis.transpose() * g;
      const double gn = gl.norm();
      if (gn == 0.0) break;
      phi -= gl / (gn * std::sqrt(static_cast<double>(k)));
      const double pn = phi.norm();
      if (pn > 1.0) phi /= pn;
    }
    if (best < -2e-10 && reproduces(psi, h.basis * best_phi)) {
      out.phi = h.basis * best_phi;
      out.best_value = best;
      out.epsilon = std::max(-best / 2.0, 1e-10);
      return out;
    }
    return witness_lp(psi);
  }

  // Does per-set argmin under phi select exactly psi's components?
  bool reproduces(const Vertex& psi, const Vector& phi) const {
    Vertex v = poly_->optimize(phi, Sense::Min);
    return v.choice == psi.choice;
  }

  // max eps s.t. <phi, a - psi_i> >= eps for all competitors, phi in a box;
  // rows are generated lazily from the most violated competitor per set.
  ConeWitness witness_lp(const Vertex& psi) {
    const AffineHull& h = poly_->hull();
    const int m = h.dim();
    const auto& sets = poly_->sets();
    const RowMatrix& pts = poly_->stacked();
    std::vector<std::pair<int, int>> rows;  // (set, competitor row)
    auto add_rows = [&](const Vector& phi_amb, double eps) {
      Vector values = pts * phi_amb;
      bool added = false;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        const int lo = poly_->offset(i);
        const int n = poly_->offset(i + 1) - lo;
        const int own = psi.choice[i];
        int arg = -1;
        double mn = std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
          if (a == own) continue;
          const double d = values[lo + a] - values[lo + own];
          if (d < mn) {
            mn = d;
            arg = a;
          }
        }
        if (arg < 0 || mn >= eps - 1e-13) continue;
        std::pair<int, int> r{static_cast<int>(i), lo + arg};
        if (std::find(rows.begin(), rows.end(), r) == rows.end()) {
          rows.push_back(r);
          added = true;
        }
      }
      return added;
    };
    add_rows(-psi.direction, std::numeric_limits<double>::infinity());
    Vector phi_loc = Vector::Zero(m);
    double eps = 0.0;
    for (int round = 0; round < 1000; ++round) {
      LinearProgram lp(m + 1);
      for (int j = 0; j < m; ++j) lp.set_bounds(j, -1.0, 1.0);
      lp.set_bounds(m, -std::numeric_limits<double>::infinity(), 1.0);
      for (auto [i, r] : rows) {
        Vector coef(m + 1);
        coef.head(m) = h.basis.transpose() * (pts.row(r) - pts.row(poly_->offset(i) + psi.choice[i])).transpose();
        coef[m] = -1.0;
        lp.add_row(coef, Relation::GreaterEqual, 0.0);
      }
      Vector obj = Vector::Zero(m + 1);
      obj[m] = 1.0;
      lp.maximize(obj);
      LpSolution s = lp.solve();
      if (s.status != LpStatus::Optimal) throw InternalError("witness LP failed");
      phi_loc = s.x.head(m);
      eps = s.x[m];
      if (!add_rows(h.basis * phi_loc, eps)) break;
    }
    if (eps <= 1e-12) throw DomainError("cone witness: not a vertex");
    Vector amb = h.basis * phi_loc;
    amb /= amb.norm();
    ConeWitness out;
    out.phi = amb;
    out.best_value = witness_objective(psi, amb);
    out.epsilon = std::max(-out.best_value / 2.0, 1e-10);
    out.used_fallback = true;
    if (!(out.best_value < 0.0) || !reproduces(psi, amb)) throw DomainError("cone witness: not a vertex");
    return out;
  }

  const EmpiricalPolytope* poly_;
  GeometryOptions opt_;
  Rng rng_;
  detail::VertexCache cache_;
  double scale_ = 1.0;
  double seg_lo_ = 0.0;
  double seg_hi_ = 0.0;
  std::map<std::vector<int>, ConeWitness> witnesses_;
};

// Convenience wrappers for one-off queries.

inline SeparationResult separate(const EmpiricalPolytope& p, const Eigen::Ref<const Vector>& x) {
  Geometry g(p);
  return g.separate(x);
}

inline VertexDecomposition decompose(const EmpiricalPolytope& p, const Eigen::Ref<const Vector>& y) {
  Geometry g(p);
  return g.decompose(y);
}

inline ConeWitness cone_witness(const EmpiricalPolytope& p, const Vertex& psi) {
  Geometry g(p);
  return g.cone_witness(psi);
}

}  // namespace lcb
