#pragma once

// Context distributions, oblivious adversaries, Bernoulli feedback and the
// exact comparator of the linear policy class.

#include "lcb/action_set.hpp"
#include "lcb/empirical_polytope.hpp"
#include "lcb/random.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace lcb {

class ContextDistribution {
 public:
  enum class Kind { FiniteSupport, MSet, ShortestPath, SleepingBasis };

  /// Explicit atoms with probabilities (normalised here).
  static ContextDistribution finite_support(std::vector<std::pair<ActionSet, double>> atoms) {
    if (atoms.empty()) throw DomainError("finite support needs at least one atom");
    ContextDistribution c;
    c.kind_ = Kind::FiniteSupport;
    c.dim_ = atoms.front().first.dim();
    double tot = 0.0;
    for (auto& [s, p] : atoms) {
      if (s.dim() != c.dim_) throw DomainError("atoms differ in dimension");
      if (!(p > 0.0)) throw DomainError("atom probability must be positive");
      tot += p;
    }
    if (std::abs(tot - 1.0) > 1e-9) throw DomainError("atom probabilities must sum to 1");
    for (auto& a : atoms) a.second /= tot;
    c.atoms_ = std::move(atoms);
    c.cumulative_.resize(c.atoms_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < c.atoms_.size(); ++i) c.cumulative_[i] = (acc += c.atoms_[i].second);
    return c;
  }

  /// Actions a = indicator(S) / m for m-subsets S of the available coordinates;
  /// coordinate k is available with probability avail[k] (redrawn until at
  /// least m are available).
  static ContextDistribution m_set(int m, std::vector<double> avail) {
    ContextDistribution c;
    c.kind_ = Kind::MSet;
    c.dim_ = static_cast<int>(avail.size());
    if (m < 1 || m > c.dim_) throw DomainError("m-set size out of range");
    check_probabilities(avail);
    c.m_ = m;
    c.avail_ = std::move(avail);
    return c;
  }

  /// Layered graph with `stages` layers of `width` parallel edges (d = stages *
  /// width). An action is a source-sink path as indicator / stages. Each edge
  /// is closed independently with probability `closure` (redrawn until a path
  /// exists).
  static ContextDistribution shortest_path(int stages, int width, double closure) {
    ContextDistribution c;
    c.kind_ = Kind::ShortestPath;
    if (stages < 1 || width < 1) throw DomainError("graph shape out of range");
    if (!(closure >= 0.0 && closure < 1.0)) throw DomainError("closure probability out of range");
    c.stages_ = stages;
    c.width_ = width;
    c.dim_ = stages * width;
    c.avail_.assign(c.dim_, 1.0 - closure);
    return c;
  }

  /// Available subset of {e_1, ..., e_d}, redrawn until non-empty.
  static ContextDistribution sleeping_basis(std::vector<double> avail) {
    ContextDistribution c;
    c.kind_ = Kind::SleepingBasis;
    c.dim_ = static_cast<int>(avail.size());
    check_probabilities(avail);
    c.avail_ = std::move(avail);
    return c;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool has_finite_support() const { return kind_ == Kind::FiniteSupport; }
  const std::vector<std::pair<ActionSet, double>>& atoms() const { return atoms_; }
  int stages() const { return stages_; }
  int width() const { return width_; }

  ActionSet draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (kind_) {
      case Kind::FiniteSupport: {
        const double r = u(rng);
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), r);
        std::size_t i = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
        return atoms_[i].first;
      }
      case Kind::MSet: {
        std::vector<int> open;
        do {
          open.clear();
          for (int k = 0; k < dim_; ++k)
            if (u(rng) < avail_[k]) open.push_back(k);
        } while (static_cast<int>(open.size()) < m_);
        return m_subsets(open);
      }
      case Kind::SleepingBasis: {
        std::vector<int> open;
        do {
          open.clear();
          for (int k = 0; k < dim_; ++k)
            if (u(rng) < avail_[k]) open.push_back(k);
        } while (open.empty());
        RowMatrix pts = RowMatrix::Zero(open.size(), dim_);
        for (std::size_t i = 0; i < open.size(); ++i) pts(i, open[i]) = 1.0;
        return ActionSet::finite(pts);
      }
      case Kind::ShortestPath: {
        std::vector<std::vector<int>> open(stages_);
        bool ok = false;
        while (!ok) {
          ok = true;
          for (int s = 0; s < stages_; ++s) {
            open[s].clear();
            for (int w = 0; w < width_; ++w)
              if (u(rng) < avail_[s * width_ + w]) open[s].push_back(w);
          }
          for (int s = 0; s < stages_; ++s) ok = ok && !open[s].empty();
        }
        return paths(open);
      }
    }
    throw InternalError("unknown context kind");
  }

  /// Largest number of actions any context can hold.
  int max_set_size() const {
    switch (kind_) {
      case Kind::FiniteSupport: {
        int k = 0;
        for (const auto& a : atoms_) k = std::max(k, a.first.size());
        return k;
      }
      case Kind::MSet: {
        double b = 1.0;
        for (int i = 1; i <= m_; ++i) b = b * (dim_ - m_ + i) / i;
        return static_cast<int>(std::llround(b));
      }
      case Kind::SleepingBasis:
        return dim_;
      case Kind::ShortestPath:
        return static_cast<int>(std::llround(std::pow(width_, stages_)));
    }
    return 1;
  }

  /// Smallest and largest <a, theta> over every realizable action.
  std::pair<double, double> loss_range(const Vector& theta) const {
    switch (kind_) {
      case Kind::FiniteSupport: {
        double lo = 1e300, hi = -1e300;
        for (const auto& a : atoms_) {
          lo = std::min(lo, a.first.argmin(theta).value);
          hi = std::max(hi, a.first.argmax(theta).value);
        }
        return {lo, hi};
      }
      case Kind::MSet: {
        std::vector<double> v(theta.data(), theta.data() + dim_);
        std::sort(v.begin(), v.end());
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i < m_; ++i) {
          lo += v[i];
          hi += v[dim_ - 1 - i];
        }
        return {lo / m_, hi / m_};
      }
      case Kind::SleepingBasis:
        return {theta.minCoeff(), theta.maxCoeff()};
      case Kind::ShortestPath: {
        double lo = 0.0, hi = 0.0;
        for (int s = 0; s < stages_; ++s) {
          lo += theta.segment(s * width_, width_).minCoeff();
          hi += theta.segment(s * width_, width_).maxCoeff();
        }
        return {lo / stages_, hi / stages_};
      }
    }
    return {0.0, 0.0};
  }

  /// The same context written as a flow polytope: x >= 0, closed edges at
  /// zero, each stage carrying total flow 1 / stages.
  static ActionSet path_polytope(const ActionSet& paths_set, int stages, int width) {
    const int d = stages * width;
    Vector used = paths_set.points().colwise().maxCoeff().transpose();
    std::vector<Vector> rows;
    std::vector<double> rhs;
    for (int e = 0; e < d; ++e) {
      rows.push_back(-Vector::Unit(d, e));
      rhs.push_back(0.0);
      if (used[e] <= 0.0) {
        rows.push_back(Vector::Unit(d, e));
        rhs.push_back(0.0);
      }
    }
    for (int s = 0; s < stages; ++s) {
      Vector r = Vector::Zero(d);
      r.segment(s * width, width).setOnes();
      rows.push_back(r);
      rhs.push_back(1.0 / stages);
      rows.push_back(-r);
      rhs.push_back(-1.0 / stages);
    }
    RowMatrix n(rows.size(), d);
    Vector b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      n.row(i) = rows[i].transpose();
      b[i] = rhs[i];
    }
    return ActionSet::halfspaces(n, b);
  }

 private:
  static void check_probabilities(const std::vector<double>& p) {
    if (p.empty()) throw DomainError("availability vector is empty");
    bool any = false;
    for (double x : p) {
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("availability must lie in [0, 1]");
      any = any || x > 0.0;
    }
    if (!any) throw DomainError("no coordinate can ever be available");
  }

  ActionSet m_subsets(const std::vector<int>& open) const {
    std::vector<Vector> pts;
    std::vector<int> pick(m_);
    std::iota(pick.begin(), pick.end(), 0);
    const int n = static_cast<int>(open.size());
    while (true) {
      Vector a = Vector::Zero(dim_);
      for (int k : pick) a[open[k]] = 1.0 / m_;
      pts.push_back(a);
      int k = m_ - 1;
      while (k >= 0 && pick[k] == n - m_ + k) --k;
      if (k < 0) break;
      ++pick[k];
      for (int j = k + 1; j < m_; ++j) pick[j] = pick[j - 1] + 1;
    }
    return ActionSet::finite(pts);
  }

  ActionSet paths(const std::vector<std::vector<int>>& open) const {
    std::vector<Vector> pts;
    std::vector<std::size_t> idx(stages_, 0);
    while (true) {
      Vector a = Vector::Zero(dim_);
      for (int s = 0; s < stages_; ++s) a[s * width_ + open[s][idx[s]]] = 1.0 / stages_;
      pts.push_back(a);
      int s = 0;
      while (s < stages_ && ++idx[s] == open[s].size()) idx[s++] = 0;
      if (s == stages_) break;
    }
    return ActionSet::finite(pts);
  }

  Kind kind_ = Kind::FiniteSupport;
  int dim_ = 0;
  std::vector<std::pair<ActionSet, double>> atoms_;
  std::vector<double> cumulative_;
  std::vector<double> avail_;
  int m_ = 1;
  int stages_ = 0;
  int width_ = 0;
};

/// Oblivious loss sequence theta_1..theta_T, fixed before interaction.
class Adversary {
 public:
  static Adversary constant(const Vector& theta, int horizon) {
    Adversary a;
    a.thetas_.assign(horizon, theta);
    return a;
  }

  /// Alternates between two vectors, switching `flips` times at evenly spaced rounds.
  static Adversary piecewise(const Vector& first, const Vector& second, int flips, int horizon) {
    Adversary a;
    a.thetas_.reserve(horizon);
    for (int t = 0; t < horizon; ++t) {
      const long segment = static_cast<long>(t) * (flips + 1) / horizon;
      a.thetas_.push_back(segment % 2 == 0 ? first : second);
    }
    return a;
  }

  /// center + amplitude * sin(2 pi t / period + phase_k), one phase per coordinate.
  static Adversary sinusoidal(const Vector& center, const Vector& amplitude, double period, int horizon,
                              std::uint64_t seed) {
    Adversary a;
    Rng rng(derive_seed(seed, {stream::kAdversary}));
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    Vector phase(center.size());
    for (Eigen::Index k = 0; k < phase.size(); ++k) phase[k] = ph(rng);
    for (int t = 1; t <= horizon; ++t) {
      Vector th = center;
      for (Eigen::Index k = 0; k < th.size(); ++k)
        th[k] += amplitude[k] * std::sin(2.0 * M_PI * t / period + phase[k]);
      a.thetas_.push_back(th);
    }
    return a;
  }

  /// Loss concentrated on the coordinates a pilot run used most:
  /// theta = (1 - weight) * base + weight * pilot_mean / max(pilot_mean).
  static Adversary anti_greedy(const Vector& base, const Vector& pilot_mean, double weight, int horizon) {
    const double mx = pilot_mean.cwiseAbs().maxCoeff();
    Vector against = mx > 0 ? Vector(pilot_mean.cwiseAbs() / mx) : Vector(Vector::Zero(base.size()));
    return constant((1.0 - weight) * base + weight * against, horizon);
  }

  /// Scale every theta so that realizable losses lie in [0, 1]; negative
  /// losses cannot be fixed by scaling and are rejected.
  void normalize(const ContextDistribution& dist) {
    double hi = 0.0;
    for (const auto& th : thetas_) {
      auto [lo, up] = dist.loss_range(th);
      if (lo < -1e-12) throw InvariantViolation("adversary produces negative losses");
      hi = std::max(hi, up);
    }
    scale_ = std::max(1.0, hi);
    for (auto& th : thetas_) th /= scale_;
    const double bound = std::sqrt(static_cast<double>(dist.dim()));
    for (const auto& th : thetas_)
      if (th.norm() > bound * (1.0 + 1e-12)) throw InvariantViolation("loss vector norm exceeds sqrt(d)");
  }

  int horizon() const { return static_cast<int>(thetas_.size()); }
  const Vector& theta(int t) const { return thetas_.at(t - 1); }
  const std::vector<Vector>& thetas() const { return thetas_; }
  double scale() const { return scale_; }
  Vector total() const {
    Vector s = Vector::Zero(thetas_.front().size());
    for (const auto& th : thetas_) s += th;
    return s;
  }

 private:
  std::vector<Vector> thetas_;
  double scale_ = 1.0;
};

/// Bernoulli loss with mean <a, theta>.
inline double bandit_feedback(const Vector& a, const Vector& theta, Rng& rng) {
  const double mean = a.dot(theta);
  if (!(mean >= -1e-12 && mean <= 1.0 + 1e-12)) throw InvariantViolation("expected loss outside [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < mean ? 1.0 : 0.0;
}

/// Loss of the comparator policy pi(A) = argmin_{a in A} <a, phi_star>,
/// phi_star = sum of all loss vectors.
struct ComparatorLoss {
  double realized = 0.0;                 // over the realized contexts
  double expected = 0.0;                 // in expectation over a finite support (NaN otherwise)
  std::vector<double> realized_rounds;   // per round, realized contexts
  std::vector<double> expected_rounds;   // per round, expectation
};

inline ComparatorLoss best_policy_loss(const std::vector<ActionSet>& contexts, const std::vector<Vector>& thetas,
                                       const ContextDistribution* dist = nullptr) {
  if (contexts.size() != thetas.size() && !contexts.empty())
    throw DomainError("context log and loss sequence differ in length");
  ComparatorLoss out;
  Vector phi = Vector::Zero(thetas.front().size());
  for (const auto& th : thetas) phi += th;
  for (std::size_t t = 0; t < contexts.size(); ++t) {
    const double l = contexts[t].argmin(phi).point.dot(thetas[t]);
    out.realized_rounds.push_back(l);
    out.realized += l;
  }
  if (dist && dist->has_finite_support()) {
    Vector mean_action = Vector::Zero(phi.size());
    for (const auto& [set, p] : dist->atoms()) mean_action += p * set.argmin(phi).point;
    for (const auto& th : thetas) {
      const double l = mean_action.dot(th);
      out.expected_rounds.push_back(l);
      out.expected += l;
    }
  } else {
    out.expected = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

/// Lower bound on sup over linear policies of |<Psi(pi) - Psi_hat(pi), theta>|
/// for Psi_hat built from `sample`, maximised over the given witness directions.
inline double empirical_uniform_convergence_gap(const ContextDistribution& dist, const Vector& theta,
                                                const std::vector<ActionSet>& sample,
                                                const std::vector<Vector>& dirs) {
  if (!dist.has_finite_support()) throw DomainError("uniform convergence gap needs a finite support");
  EmpiricalPolytope hat = EmpiricalPolytope::from_samples(sample);
  double gap = 0.0;
  for (const auto& phi : dirs) {
    double truth = 0.0;
    for (const auto& [set, p] : dist.atoms()) truth += p * set.argmin(phi).point.dot(theta);
    double emp = 0.0;
    for (const auto& e : hat.sets()) emp += e.weight * e.set.argmin(phi).point.dot(theta);
    gap = std::max(gap, std::abs(truth - emp));
  }
  return gap;
}

/// N fresh draws; P random unit directions plus +-theta and the 0/1 sums of
/// coordinate subsets (d <= 10).
inline double empirical_uniform_convergence_gap(const ContextDistribution& dist, const Vector& theta, int n,
                                                int probes, Rng& rng) {
  std::vector<ActionSet> sample;
  sample.reserve(n);
  for (int i = 0; i < n; ++i) sample.push_back(dist.draw(rng));
  const int d = dist.dim();
  std::vector<Vector> dirs;
  for (int k = 0; k < probes; ++k) dirs.push_back(random_unit_vector(rng, d));
  dirs.push_back(theta);
  dirs.push_back(-theta);
  if (d <= 10) {
    for (int mask = 1; mask < (1 << d); ++mask) {
      Vector v = Vector::Zero(d);
      for (int k = 0; k < d; ++k)
        if (mask & (1 << k)) v[k] = 1.0;
      dirs.push_back(v);
      dirs.push_back(-v);
    }
  }
  return empirical_uniform_convergence_gap(dist, theta, sample, dirs);
}

}  // namespace lcb
