#pragma once

// Clipped continuous exponential weights over the empirical polytope, robust
// to biased (misspecified) loss feedback.

#include "lcb/geometry.hpp"
#include "lcb/random.hpp"
#include "lcb/sampler.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lcb {

enum class PoolStrategy {
  Reweight,  // importance-reweighted particle pool, rejuvenated by hit-and-run when degenerate
  Fresh      // new hit-and-run chain every round
};

struct CewConfig {
  int horizon = 1;
  double epsilon = 0.0;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<int> samples;
  std::optional<int> burn_in;
  std::optional<int> thinning;
  std::optional<int> move_steps;
  double bonus_scale = 8.0;
  PoolStrategy pool = PoolStrategy::Reweight;
  double ess_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct CewParameters {
  int d = 0;
  int m = 0;
  int horizon = 1;
  double epsilon = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double bonus_coeff = 0.0;   // b_t = bonus_coeff * sum_{s<t}(theta_hat_s - b_s)
  double clip_radius2 = 0.0;  // d * gamma^2
  int samples = 0;
  int burn_in = 0;
  int thinning = 0;
  int move_steps = 0;
  PoolStrategy pool = PoolStrategy::Reweight;
  double ess_fraction = 0.5;
};

inline CewParameters resolve_parameters(const CewConfig& c, int d, int m) {
  if (c.horizon < 1) throw DomainError("horizon must be at least 1");
  if (!(c.epsilon >= 0.0)) throw DomainError("misspecification level must be non-negative");
  CewParameters p;
  p.d = d;
  p.m = m;
  p.horizon = c.horizon;
  p.epsilon = c.epsilon;
  const double T = c.horizon;
  p.gamma = c.gamma.value_or(10.0 * std::log(10.0 * d * T));
  p.beta = c.beta.value_or(1.0 / (double(d) * d * T * T * T * T));
  const double eta_cap = 1.0 / (d * p.gamma * p.gamma);
  p.eta = c.eta.value_or(std::min(eta_cap, std::sqrt(std::log(std::max(T, 2.0)) / (p.gamma * p.gamma * T))));
  if (!(p.gamma > 0) || !(p.beta > 0) || !(p.eta > 0)) throw DomainError("CEW parameters must be positive");
  p.bonus_coeff = c.bonus_scale * p.eta * (c.epsilon + 1.0 / (T * T));
  p.clip_radius2 = d * p.gamma * p.gamma;
  p.samples = c.samples.value_or(std::max(4000, 50 * d * d));
  p.burn_in = c.burn_in.value_or(100 * std::max(m, 1));
  p.thinning = c.thinning.value_or(10 * std::max(m, 1));
  p.move_steps = c.move_steps.value_or(p.thinning);
  p.pool = c.pool;
  p.ess_fraction = c.ess_fraction;
  if (p.samples < 1 || p.burn_in < 0 || p.thinning < 1 || p.move_steps < 1)
    throw DomainError("sampler controls out of range");
  return p;
}

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Symmetrise and zero eigenvalues below the floor.
inline Matrix floor_psd(const Matrix& s, double floor = 1e-12) {
  if (s.rows() == 0) return s;
  Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < floor) ev[i] = 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Moments weighted_moments(const RowMatrix& pts, const Vector& w) {
  Moments mo;
  const double tot = w.sum();
  mo.mean = (pts.transpose() * w) / tot;
  RowMatrix c = pts.rowwise() - mo.mean.transpose();
  mo.cov = floor_psd((c.transpose() * w.asDiagonal() * c) / tot);
  return mo;
}

inline Moments estimate_moments(const std::vector<Vector>& samples) {
  if (samples.empty()) throw DomainError("no samples");
  RowMatrix pts(samples.size(), samples.front().size());
  for (std::size_t i = 0; i < samples.size(); ++i) pts.row(i) = samples[i].transpose();
  return weighted_moments(pts, Vector::Ones(pts.rows()));
}

/// Squared Mahalanobis distances under the pseudo-inverse of sigma.
inline Vector mahalanobis2(const RowMatrix& pts, const Vector& center, const Matrix& sigma, double floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
  Vector inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > floor ? 1.0 / inv[i] : 0.0;
  RowMatrix proj = (pts.rowwise() - center.transpose()) * es.eigenvectors();
  return proj.array().square().matrix() * inv;
}

/// (beta I + sigma_hat)^{-1} (y - x) c
inline Vector regularized_estimate(const Matrix& sigma_hat, double beta, const Vector& diff, double c) {
  Matrix reg = sigma_hat + beta * Matrix::Identity(diff.size(), diff.size());
  return reg.ldlt().solve(diff * c);
}

struct ClipResult {
  std::vector<char> accepted;
  double acceptance = 0.0;  // accepted share of the pool (by weight)
  Matrix sigma_hat;         // E over accepted of (y - x)(y - x)^T
  Vector mean_hat;          // mean of the accepted part
};

inline ClipResult clip_pool(const RowMatrix& pts, const Vector& w, const Vector& x, const Matrix& sigma,
                            double radius2) {
  ClipResult r;
  Vector d2 = mahalanobis2(pts, x, sigma);
  r.accepted.assign(pts.rows(), 0);
  Vector wa = Vector::Zero(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (d2[i] <= radius2) {
      r.accepted[i] = 1;
      wa[i] = w[i];
    }
  }
  const double tot = wa.sum();
  r.acceptance = tot / w.sum();
  if (!(tot > 0.0)) throw SamplerError("every pool sample was clipped");
  r.mean_hat = (pts.transpose() * wa) / tot;
  RowMatrix c = pts.rowwise() - x.transpose();
  r.sigma_hat = floor_psd((c.transpose() * wa.asDiagonal() * c) / tot);
  return r;
}

struct ClipDraw {
  Vector y;
  Matrix sigma_hat;
  double acceptance = 0.0;
};

/// Rejection step on an i.i.d. pool: the first sample inside the clipping
/// ellipsoid is returned, with the covariance of the accepted subset.
inline ClipDraw clip_and_draw(const std::vector<Vector>& samples, const Vector& x, const Matrix& sigma,
                              double radius2) {
  RowMatrix pts(samples.size(), x.size());
  for (std::size_t i = 0; i < samples.size(); ++i) pts.row(i) = samples[i].transpose();
  ClipResult c = clip_pool(pts, Vector::Ones(pts.rows()), x, sigma, radius2);
  ClipDraw out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (c.accepted[i]) {
      out.y = samples[i];
      break;
    }
  }
  out.sigma_hat = c.sigma_hat;
  out.acceptance = c.acceptance;
  return out;
}

struct CewRound {
  int t = 0;
  Vector y;
  Vector x;
  double c = 0.0;
  double theta_hat_norm = 0.0;
  double bonus_norm = 0.0;
  double acceptance = 1.0;
  double sandwich_lo = 1.0;  // extreme generalized eigenvalues of sigma_hat against sigma
  double sandwich_hi = 1.0;
  bool rejuvenated = false;
};

class CewLearner {
 public:
  CewLearner(Geometry& geo, const CewConfig& cfg)
      : geo_(&geo), hr_(geo),
        p_(resolve_parameters(cfg, geo.polytope().dim(), geo.hull_dim())),
        learner_rng_(derive_seed(cfg.seed, {stream::kLearner})),
        sampler_rng_(derive_seed(cfg.seed, {stream::kSampler})) {
    cum_ = Vector::Zero(p_.d);
    theta_hat_ = Vector::Zero(p_.d);
  }

  const CewParameters& params() const { return p_; }
  int round() const { return t_; }
  const Vector& cumulative() const { return cum_; }
  Vector bonus() const { return p_.bonus_coeff * cum_; }
  const Vector& theta_hat() const { return theta_hat_; }
  const CewRound& last() const { return last_; }
  long long sampler_steps() const { return hr_.steps(); }
  int rejuvenations() const { return rejuvenations_; }

  /// Tilt of the current density, eta * cumulative adjusted loss.
  Vector tilt() const { return p_.eta * cum_; }

  /// Play round t: refresh the pool, estimate moments, clip and draw y_t.
  const Vector& draw() {
    const AffineHull& h = geo_->polytope().hull();
    last_ = CewRound{};
    last_.t = t_;
    if (p_.m == 0) {
      y_loc_ = Vector::Zero(0);
      x_loc_ = Vector::Zero(0);
      sigma_hat_ = Matrix::Zero(0, 0);
      last_.y = h.origin;
      last_.x = h.origin;
      pending_ = true;
      return last_.y;
    }
    Vector lambda = h.basis.transpose() * tilt();
    refresh_pool(lambda);
    Vector w = pool_weights(lambda);
    Moments mo = weighted_moments(pool_, w);
    x_loc_ = mo.mean;
    sigma_ = mo.cov;
    clip_ = clip_pool(pool_, w, x_loc_, sigma_, p_.clip_radius2);
    sigma_hat_ = clip_.sigma_hat;
    w_ = w;
    int pick = -1;
    if (p_.pool == PoolStrategy::Fresh) {
      for (std::size_t i = 0; i < clip_.accepted.size(); ++i) {
        if (clip_.accepted[i]) {
          pick = static_cast<int>(i);
          break;
        }
      }
    } else {
      pick = draw_accepted(learner_rng_);
    }
    y_loc_ = pool_.row(pick).transpose();
    last_.y = h.to_ambient(y_loc_);
    last_.x = h.to_ambient(x_loc_);
    last_.acceptance = clip_.acceptance;
    sandwich(last_);
    require_finite(last_.y, "CEW draw");
    pending_ = true;
    return last_.y;
  }

  /// Loss estimate for (y, c) against the current moments (no state change).
  Vector estimate(const Vector& y, double c) const {
    if (p_.m == 0) return Vector::Zero(p_.d);
    const AffineHull& h = geo_->polytope().hull();
    Vector yl = h.to_local(y);
    return h.basis * regularized_estimate(sigma_hat_, p_.beta, yl - x_loc_, c);
  }

  /// Another draw from the current clipped pool (testing aid; state unchanged).
  Vector redraw(Rng& rng) const {
    if (p_.m == 0) return geo_->polytope().hull().origin;
    return geo_->polytope().hull().to_ambient(pool_.row(draw_accepted(rng)).transpose());
  }

  Matrix sigma_hat_ambient() const {
    const Matrix& b = geo_->polytope().hull().basis;
    return b * sigma_hat_ * b.transpose();
  }
  Matrix sigma_ambient() const {
    const Matrix& b = geo_->polytope().hull().basis;
    return b * sigma_ * b.transpose();
  }

  void update(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("feedback must lie in [0, 1]");
    if (!pending_) throw DomainError("update without a preceding draw");
    pending_ = false;
    theta_hat_ = estimate(last_.y, c);
    Vector b = bonus();
    cum_ += theta_hat_ - b;
    require_finite(cum_, "CEW update");
    last_.c = c;
    last_.theta_hat_norm = theta_hat_.norm();
    last_.bonus_norm = b.norm();
    ++t_;
  }

 private:
  void refresh_pool(const Vector& lambda) {
    if (p_.pool == PoolStrategy::Fresh || pool_.rows() == 0) {
      auto zs = hr_.chain(Vector::Zero(p_.m), lambda, p_.samples, p_.burn_in, p_.thinning, sampler_rng_);
      pool_.resize(p_.samples, p_.m);
      for (int i = 0; i < p_.samples; ++i) pool_.row(i) = zs[i].transpose();
      lambda_ref_ = lambda;
      return;
    }
    Vector w = pool_weights(lambda);
    const double ess = 1.0 / w.squaredNorm();
    if (ess >= p_.ess_fraction * p_.samples) return;
    // systematic resampling, then hit-and-run moves under the current tilt
    RowMatrix next(p_.samples, p_.m);
    const double u0 = uniform_open(sampler_rng_) / p_.samples;
    double acc = w[0];
    int j = 0;
    for (int i = 0; i < p_.samples; ++i) {
      const double target = u0 + static_cast<double>(i) / p_.samples;
      while (acc < target && j < p_.samples - 1) acc += w[++j];
      next.row(i) = pool_.row(j);
    }
    for (int i = 0; i < p_.samples; ++i) {
      Vector z = next.row(i).transpose();
      hr_.walk(z, lambda, p_.move_steps, sampler_rng_);
      next.row(i) = z.transpose();
    }
    pool_ = std::move(next);
    lambda_ref_ = lambda;
    last_.rejuvenated = true;
    ++rejuvenations_;
  }

  // normalised importance weights of the pool for the current tilt
  Vector pool_weights(const Vector& lambda) const {
    Vector lw = -(pool_ * (lambda - lambda_ref_));
    const double mx = lw.maxCoeff();
    Vector w = (lw.array() - mx).exp().matrix();
    return w / w.sum();
  }

  int draw_accepted(Rng& rng) const {
    double tot = 0.0;
    for (std::size_t i = 0; i < clip_.accepted.size(); ++i)
      if (clip_.accepted[i]) tot += w_[i];
    const double u = uniform_open(rng) * tot;
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < clip_.accepted.size(); ++i) {
      if (!clip_.accepted[i]) continue;
      acc += w_[i];
      last = static_cast<int>(i);
      if (acc >= u) return last;
    }
    return last;
  }

  void sandwich(CewRound& r) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_);
    Vector ev = es.eigenvalues();
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > 1e-12) keep.push_back(static_cast<int>(i));
    if (keep.empty()) return;
    Matrix s(ev.size(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
      s.col(k) = es.eigenvectors().col(keep[k]) / std::sqrt(ev[keep[k]]);
    Matrix g = s.transpose() * sigma_hat_ * s;
    Eigen::SelfAdjointEigenSolver<Matrix> gs(0.5 * (g + g.transpose()));
    r.sandwich_lo = gs.eigenvalues().minCoeff();
    r.sandwich_hi = gs.eigenvalues().maxCoeff();
  }

  Geometry* geo_;
  HitAndRun hr_;
  CewParameters p_;
  Rng learner_rng_;
  Rng sampler_rng_;
  int t_ = 1;
  bool pending_ = false;
  Vector cum_;
  Vector theta_hat_;
  RowMatrix pool_;
  Vector lambda_ref_;
  Vector w_;
  Vector x_loc_;
  Vector y_loc_;
  Matrix sigma_;
  Matrix sigma_hat_;
  ClipResult clip_;
  CewRound last_;
  int rejuvenations_ = 0;
};

using CewFeedback = std::function<double(const Vector& y, int t)>;

struct CewTrace {
  CewParameters params;
  std::vector<CewRound> rounds;
  int rejuvenations = 0;
};

inline CewTrace run_cew(const EmpiricalPolytope& poly, const CewConfig& cfg, const CewFeedback& feedback) {
  Geometry geo(poly);
  CewLearner learner(geo, cfg);
  CewTrace trace;
  trace.params = learner.params();
  trace.rounds.reserve(cfg.horizon);
  for (int t = 1; t <= cfg.horizon; ++t) {
    const Vector y = learner.draw();
    learner.update(feedback(y, t));
    trace.rounds.push_back(learner.last());
  }
  trace.rejuvenations = learner.rejuvenations();
  return trace;
}

}  // namespace lcb
