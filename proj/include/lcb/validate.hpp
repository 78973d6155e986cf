#pragma once

// Self-checks runnable from the CLI. Each suite returns a list of named
// checks; the geometry suite compares against bundled fixtures whose
// expected vertices were produced by an independent hull code.

#include "lcb/action_set_io.hpp"
#include "lcb/cew.hpp"
#include "lcb/environment.hpp"
#include "lcb/harness.hpp"
#include "lcb/reduction.hpp"
#include "lcb/stats.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lcb::validate {

namespace fs = std::filesystem;
using harness::Check;

inline const std::vector<std::string>& suites() {
  static const std::vector<std::string> s{"geometry", "sampler", "estimator", "convergence", "regret"};
  return s;
}

struct Options {
  fs::path fixtures;     // directory holding <name>.sets / <name>.vertices
  bool corrupt = false;  // perturb one expected vertex by 1e-3
  std::uint64_t seed = 1;
};

inline std::vector<Check> geometry_suite(const Options& opt) {
  std::vector<Check> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(opt.fixtures))
    if (e.path().extension() == ".sets") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw harness::ConfigError("no fixtures in " + opt.fixtures.string());
  bool corrupted = false;
  for (const auto& f : files) {
    const std::string name = f.stem().string();
    std::vector<std::pair<ActionSet, double>> items;
    for (auto& r : read_action_sets_file(f.string())) items.emplace_back(r.set, r.weight);
    auto vrec = read_action_sets_file((opt.fixtures / (name + ".vertices")).string());
    RowMatrix expected = vrec.at(0).set.points();
    if (opt.corrupt && !corrupted) {
      expected(0, 0) += 1e-3;
      corrupted = true;
    }
    EmpiricalPolytope poly = EmpiricalPolytope::from_weighted(items);
    Geometry geo(poly);
    const int d = poly.dim();
    Rng rng(derive_seed(opt.seed, {stream::kProbe, std::hash<std::string>{}(name)}));

    // support function agrees with the fixture hull in every direction
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const Vector u = random_unit_vector(rng, d);
      const double fixture = (expected * u).maxCoeff();
      worst = std::max(worst, std::abs(poly.support_value(u) - fixture));
    }
    out.push_back({name + ".support", worst <= 1e-9, "max support difference " + format_double(worst)});

    // each expected vertex is reached by the per-set optimizer in a direction pointing at it
    int missing = 0;
    const Vector centroid = expected.colwise().mean().transpose();
    for (Eigen::Index r = 0; r < expected.rows(); ++r) {
      const Vector v = expected.row(r).transpose();
      try {
        ConeWitness w = geo.cone_witness(v);
        const Vector got = poly.optimize(w.phi, Sense::Min).point;
        if ((got - v).norm() > 1e-9) ++missing;
      } catch (const std::exception&) {
        ++missing;
      }
    }
    out.push_back({name + ".vertices", missing == 0,
                   std::to_string(missing) + " of " + std::to_string(expected.rows()) + " vertices not reproduced"});

    // separation: vertices and the centroid are members, points pushed outward are not
    int wrong = 0;
    if (!geo.separate(centroid).inside) ++wrong;
    for (Eigen::Index r = 0; r < expected.rows(); ++r) {
      const Vector v = expected.row(r).transpose();
      if (!geo.separate(centroid + 0.999 * (v - centroid)).inside) ++wrong;
      if (geo.separate(centroid + 1.05 * (v - centroid)).inside) ++wrong;
    }
    out.push_back({name + ".separation", wrong == 0, std::to_string(wrong) + " misclassified points"});
  }
  return out;
}

inline double trunc_exp_cdf(double lambda, double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  if (std::abs(lambda) < 1e-8) return t;
  return std::expm1(-lambda * t) / std::expm1(-lambda);
}

inline std::vector<Check> sampler_suite(const Options& opt) {
  std::vector<Check> out;
  RowMatrix sq(4, 2);
  sq << 0, 0, 1, 0, 0, 1, 1, 1;
  EmpiricalPolytope poly = EmpiricalPolytope::from_samples({ActionSet::finite(sq)});
  Geometry geo(poly);
  for (double lambda : {0.0, 2.0, 5.0}) {
    Rng rng(derive_seed(opt.seed, {stream::kSampler, static_cast<std::uint64_t>(lambda * 10)}));
    Vector tilt(2);
    tilt << lambda, 0.0;
    auto s = sample_unclipped(geo, tilt, 4000, 200, 20, rng);
    std::vector<double> xs, ys;
    for (const auto& y : s) {
      xs.push_back(y[0]);
      ys.push_back(y[1]);
    }
    const double px = stats::ks_test(xs, [&](double t) { return trunc_exp_cdf(lambda, t); });
    const double py = stats::ks_test(ys, [](double t) { return std::clamp(t, 0.0, 1.0); });
    const std::string tag = "square_tilt_" + format_double(lambda);
    out.push_back({tag + ".tilted_marginal", px > 0.001, "KS p-value " + format_double(px)});
    out.push_back({tag + ".flat_marginal", py > 0.001, "KS p-value " + format_double(py)});
  }
  return out;
}

// averaging the one-point estimator over Bernoulli feedback with a frozen
// sample pool recovers theta up to the beta regularisation
inline std::vector<Check> estimator_suite(const Options& opt) {
  std::vector<Check> out;
  RowMatrix sq(4, 2);
  sq << 0, 0, 1, 0, 0, 1, 1, 1;
  EmpiricalPolytope poly = EmpiricalPolytope::from_samples({ActionSet::finite(sq)});
  Geometry geo(poly);
  Rng rng(derive_seed(opt.seed, {stream::kSampler}));
  auto pool = sample_unclipped(geo, Vector::Zero(2), 2000, 200, 20, rng);
  Moments mo = estimate_moments(pool);
  Vector theta(2);
  theta << 0.3, 0.6;
  const int n = 200000;
  Vector sum = Vector::Zero(2);
  Matrix second = Matrix::Zero(2, 2);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < n; ++i) {
    const Vector& y = pool[pick(rng)];
    const double c = uniform_open(rng) < y.dot(theta) ? 1.0 : 0.0;
    const Vector est = regularized_estimate(mo.cov, 1e-12, y - mo.mean, c);
    sum += est;
    second += est * est.transpose();
  }
  const Vector mean = sum / n;
  const Vector sd = (second / n - mean * mean.transpose()).diagonal().cwiseSqrt();
  // the estimator targets the slope of E[c | y], which is theta projected on the pool's span
  double z = 0.0;
  for (int k = 0; k < 2; ++k) z = std::max(z, std::abs(mean[k] - theta[k]) / (sd[k] / std::sqrt(n)));
  out.push_back({"estimator.unbiased", z < 4.5, "largest z-score " + format_double(z)});
  return out;
}

inline std::vector<Check> convergence_suite(const Options& opt) {
  std::vector<Check> out;
  auto mk = [](std::initializer_list<std::initializer_list<double>> rows) {
    RowMatrix m(rows.size(), 3);
    int i = 0;
    for (auto r : rows) {
      int j = 0;
      for (double x : r) m(i, j++) = x;
      ++i;
    }
    return ActionSet::finite(m);
  };
  auto dist = ContextDistribution::finite_support({{mk({{1, 0, 0}, {0, 1, 0}}), 0.2},
                                                   {mk({{0, 0, 1}, {0.5, 0.5, 0}}), 0.2},
                                                   {mk({{0.3, 0.3, 0.3}, {1, 0, 0}, {0, 0, 1}}), 0.15},
                                                   {mk({{0, 1, 0}, {0.2, 0, 0.7}}), 0.15},
                                                   {mk({{0.6, 0.2, 0.1}}), 0.15},
                                                   {mk({{0, 0.4, 0.4}, {0.9, 0, 0}}), 0.15}});
  Vector theta(3);
  theta << 0.5, 0.3, 0.4;
  std::vector<double> ns{32, 128, 512, 2048}, gaps(ns.size(), 0.0);
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(opt.seed + s, {stream::kProbe}));
    for (std::size_t i = 0; i < ns.size(); ++i)
      gaps[i] += empirical_uniform_convergence_gap(dist, theta, static_cast<int>(ns[i]), 50, rng) / seeds;
  }
  const double slope = stats::loglog_slope(ns, gaps);
  out.push_back({"convergence.slope", slope > -0.7 && slope < -0.3, "log-log slope " + format_double(slope)});
  return out;
}

inline std::vector<Check> regret_suite(const Options& opt) {
  RowMatrix a(2, 2), b(3, 2);
  a << 1, 0, 0, 1;
  b << 0.8, 0.2, 0.1, 0.7, 0.5, 0.5;
  Vector theta(2);
  theta << 0.9, 0.1;
  const int T = 64;
  Environment env{ContextDistribution::finite_support({{ActionSet::finite(a), 0.5}, {ActionSet::finite(b), 0.5}}),
                  Adversary::constant(theta, T)};
  ReductionConfig cfg;
  cfg.cew.samples = 500;
  cfg.cew.burn_in = 50;
  cfg.cew.thinning = 5;
  cfg.seed = opt.seed;
  RegretTrace tr = doubling_driver(env, cfg);
  double loss = 0.0, comp = 0.0;
  for (const auto& r : tr.rounds) {
    loss += r.expected_loss;
    comp += r.comparator;
  }
  std::vector<Check> out;
  out.push_back({"regret.accounting", std::abs(tr.regret - (loss - comp)) < 1e-9,
                 "regret " + format_double(tr.regret) + " vs " + format_double(loss - comp)});
  out.push_back({"regret.range", tr.regret <= T && tr.regret >= -T, "regret " + format_double(tr.regret)});
  out.push_back({"regret.rounds", tr.rounds.size() == static_cast<std::size_t>(T),
                 std::to_string(tr.rounds.size()) + " rounds"});
  return out;
}

inline std::vector<Check> run_suite(const std::string& name, const Options& opt) {
  if (name == "geometry") return geometry_suite(opt);
  if (name == "sampler") return sampler_suite(opt);
  if (name == "estimator") return estimator_suite(opt);
  if (name == "convergence") return convergence_suite(opt);
  if (name == "regret") return regret_suite(opt);
  throw harness::ConfigError("unknown suite '" + name + "'");
}

}  // namespace lcb::validate
