#pragma once

// Hit-and-run for log-linear densities exp(-<lambda, y>) restricted to the
// empirical polytope, run in the hull frame with exact chords.

#include "lcb/geometry.hpp"
#include "lcb/random.hpp"

#include <cmath>
#include <vector>

namespace lcb {

/// Draw s in [0, length] with density proportional to exp(-rate * s).
inline double truncated_exponential(double rate, double length, Rng& rng) {
  if (length <= 0.0) return 0.0;
  const double u = uniform_open(rng);
  if (std::abs(rate * length) < 1e-10) return u * length;
  if (rate < 0.0) return length - std::log1p(u * std::expm1(rate * length)) / rate;
  return -std::log1p(u * std::expm1(-rate * length)) / rate;
}

class HitAndRun {
 public:
  explicit HitAndRun(Geometry& geo) : geo_(&geo) {}

  int dim() const { return geo_->hull_dim(); }

  /// One step from z (hull frame) targeting exp(-<lambda, z>).
  void step(Vector& z, const Vector& lambda, Rng& rng) {
    const int m = dim();
    if (m == 0) return;
    Vector u = random_unit_vector(rng, m);
    auto [lo, hi] = geo_->chord(z, u);
    if (!(hi >= lo)) throw SamplerError("empty chord");
    const double s = lo + truncated_exponential(lambda.dot(u), hi - lo, rng);
    z += s * u;
    ++steps_;
  }

  void walk(Vector& z, const Vector& lambda, int steps, Rng& rng) {
    for (int i = 0; i < steps; ++i) step(z, lambda, rng);
  }

  /// `count` states of one chain after burn-in, `thinning` steps apart.
  std::vector<Vector> chain(Vector start, const Vector& lambda, int count, int burn_in, int thinning, Rng& rng) {
    std::vector<Vector> out;
    out.reserve(count);
    walk(start, lambda, burn_in, rng);
    for (int i = 0; i < count; ++i) {
      walk(start, lambda, std::max(thinning, 1), rng);
      out.push_back(start);
    }
    return out;
  }

  long long steps() const { return steps_; }

 private:
  Geometry* geo_;
  long long steps_ = 0;
};

/// Samples (ambient coordinates) from q(y) proportional to exp(-<tilt, y>)
/// on the polytope, where tilt = eta * cumulative adjusted loss.
inline std::vector<Vector> sample_unclipped(Geometry& geo, const Vector& tilt, int count, int burn_in,
                                            int thinning, Rng& rng) {
  const AffineHull& h = geo.polytope().hull();
  HitAndRun hr(geo);
  Vector lambda = h.basis.transpose() * tilt;
  auto local = hr.chain(Vector::Zero(h.dim()), lambda, count, burn_in, thinning, rng);
  std::vector<Vector> out;
  out.reserve(local.size());
  for (const auto& z : local) out.push_back(h.to_ambient(z));
  return out;
}

}  // namespace lcb
