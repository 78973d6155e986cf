#pragma once

// From a linear bandit over the empirical polytope to a contextual bandit:
// each linear-bandit point is split into vertices, a vertex is sampled and
// its normal-cone witness acts as a linear classifier policy on the context.

#include "lcb/cew.hpp"
#include "lcb/environment.hpp"
#include "lcb/geometry.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace lcb {

struct ReductionConfig {
  CewConfig cew;                        // horizon is set per epoch
  std::optional<int> max_set_size;      // K in the misspecification level; default: largest set observed
  std::optional<double> epsilon;        // fixed misspecification level instead of the formula
  double epsilon_scale = 1.0;
  double simulator_constant = 1.0;      // N = min(cap, c d^3 T^2)
  long long simulator_cap = 10000;
  bool certify_vertices = false;
  std::uint64_t seed = 0;
};

/// 4 sqrt(d log(N K T / delta) / N) with delta = 1 / T^2.
inline double misspecification_level(int d, long long n, int k, int horizon) {
  if (n < 1) return std::numeric_limits<double>::infinity();
  const double t = std::max(horizon, 1);
  return 4.0 * std::sqrt(d * std::log(static_cast<double>(n) * k * t * t * t) / static_cast<double>(n));
}

struct PlayResult {
  Vector action;
  Vector y;            // linear-bandit point actually decomposed
  Vector raw_y;        // point proposed by the linear bandit
  ConeWitness witness;
  VertexDecomposition decomposition;
  int vertex = 0;      // index of the sampled vertex
  bool projected = false;
};

/// One epoch of the reduction on a fixed empirical polytope.
class Reduction {
 public:
  Reduction(const EmpiricalPolytope& poly, const CewConfig& cew, std::uint64_t seed, bool certify = false)
      : poly_(&poly),
        geo_(poly, make_options(seed, certify)),
        learner_(geo_, cew),
        rng_(derive_seed(seed, {stream::kReduction})) {}

  PlayResult play_round(const ActionSet& context) {
    PlayResult r;
    r.raw_y = learner_.draw();
    r.y = r.raw_y;
    if (!geo_.separate(r.y).inside) {
      r.y = geo_.project_toward_center(r.y);
      r.projected = true;
      ++projections_;
    }
    r.decomposition = geo_.decompose(r.y);
    const auto& w = r.decomposition.weights;
    std::discrete_distribution<int> pick(w.begin(), w.end());
    r.vertex = r.decomposition.k() == 1 ? 0 : pick(rng_);
    r.witness = geo_.cone_witness(r.decomposition.vertices[r.vertex]);
    r.action = context.argmin(r.witness.phi).point;
    return r;
  }

  void feed_back(double loss) {
    if (!(loss >= 0.0 && loss <= 1.0)) throw DomainError("loss must lie in [0, 1]");
    learner_.update(loss);
  }

  const CewLearner& learner() const { return learner_; }
  Geometry& geometry() { return geo_; }
  int projections() const { return projections_; }

 private:
  static GeometryOptions make_options(std::uint64_t seed, bool certify) {
    GeometryOptions o;
    o.seed = derive_seed(seed, {stream::kReduction, 1});
    o.certify_vertices = certify;
    return o;
  }

  const EmpiricalPolytope* poly_;
  Geometry geo_;
  CewLearner learner_;
  Rng rng_;
  int projections_ = 0;
};

struct RoundRecord {
  int t = 0;
  int epoch = 0;
  Vector action;
  double loss = 0.0;           // realized Bernoulli loss
  double expected_loss = 0.0;  // <a_t, theta_t>
  double comparator = 0.0;     // comparator's loss this round (expected if available, else realized)
  int witness_id = -1;
  bool projected = false;
  int k = 0;                   // vertices in the decomposition
};

struct EpochRecord {
  int epoch = 0;
  int start = 1;
  int length = 0;
  long long contexts = 0;   // N
  std::size_t distinct_sets = 0;
  double epsilon = 0.0;
  double loss = 0.0;        // sum of expected losses in the epoch
  double comparator = 0.0;
  int projections = 0;
  int hull_dim = 0;
};

struct RegretTrace {
  std::vector<RoundRecord> rounds;
  std::vector<EpochRecord> epochs;
  std::vector<CewRound> cew;
  std::vector<ActionSet> contexts;  // the context of every round, in order
  ComparatorLoss comparator;
  double total_loss = 0.0;  // sum of expected losses
  double regret = 0.0;      // total_loss - comparator (expected if available)
  int projections = 0;
  long long simulator_target = 0;  // c d^3 T^2 before the cap (simulator mode)
};

/// The environment seen by a driver: contexts, losses and feedback streams.
struct Environment {
  ContextDistribution contexts;
  Adversary adversary;
};

namespace detail {

inline void finish_trace(RegretTrace& tr, const Environment& env, const std::vector<ActionSet>& log) {
  tr.comparator = best_policy_loss(log, env.adversary.thetas(), &env.contexts);
  const bool expected = env.contexts.has_finite_support();
  const auto& per = expected ? tr.comparator.expected_rounds : tr.comparator.realized_rounds;
  tr.total_loss = 0.0;
  for (auto& r : tr.rounds) {
    r.comparator = per[r.t - 1];
    tr.total_loss += r.expected_loss;
  }
  for (auto& e : tr.epochs) {
    e.loss = e.comparator = 0.0;
    for (int t = e.start; t < e.start + e.length; ++t) {
      e.loss += tr.rounds[t - 1].expected_loss;
      e.comparator += tr.rounds[t - 1].comparator;
    }
  }
  tr.regret = tr.total_loss - (expected ? tr.comparator.expected : tr.comparator.realized);
  tr.contexts = log;
}

// Runs rounds [start, start + length) of one epoch on a fixed polytope.
inline void run_epoch(RegretTrace& tr, const Environment& env, const EmpiricalPolytope& poly, CewConfig cew,
                      const ReductionConfig& cfg, int epoch, int start, int length, Rng& ctx_rng, Rng& fb_rng,
                      std::vector<ActionSet>& log) {
  cew.horizon = length;
  cew.seed = derive_seed(cfg.seed, {stream::kLearner, static_cast<std::uint64_t>(epoch)});
  Reduction red(poly, cew, derive_seed(cfg.seed, {stream::kReduction, static_cast<std::uint64_t>(epoch)}),
                cfg.certify_vertices);
  for (int t = start; t < start + length; ++t) {
    ActionSet ctx = env.contexts.draw(ctx_rng);
    PlayResult pr = red.play_round(ctx);
    const Vector& theta = env.adversary.theta(t);
    RoundRecord rec;
    rec.t = t;
    rec.epoch = epoch;
    rec.action = pr.action;
    rec.expected_loss = pr.action.dot(theta);
    rec.loss = bandit_feedback(pr.action, theta, fb_rng);
    rec.witness_id = pr.witness.id;
    rec.projected = pr.projected;
    rec.k = pr.decomposition.k();
    red.feed_back(rec.loss);
    tr.rounds.push_back(rec);
    tr.cew.push_back(red.learner().last());
    log.push_back(std::move(ctx));
  }
  tr.projections += red.projections();
  tr.epochs.back().projections = red.projections();
}

}  // namespace detail

/// Restarts at t = 1, 2, 4, 8, ...: each epoch rebuilds the polytope from all
/// contexts seen so far. Round 1 plays the argmin under a random unit witness.
inline RegretTrace doubling_driver(const Environment& env, const ReductionConfig& cfg) {
  const int T = env.adversary.horizon();
  Rng ctx_rng(derive_seed(cfg.seed, {stream::kContexts}));
  Rng fb_rng(derive_seed(cfg.seed, {stream::kFeedback}));
  Rng boot_rng(derive_seed(cfg.seed, {stream::kReduction, 0xb007}));
  RegretTrace tr;
  std::vector<ActionSet> log;
  int largest = 1;
  {
    ActionSet ctx = env.contexts.draw(ctx_rng);
    Vector phi = random_unit_vector(boot_rng, env.contexts.dim());
    RoundRecord rec;
    rec.t = 1;
    rec.epoch = 0;
    rec.action = ctx.argmin(phi).point;
    rec.expected_loss = rec.action.dot(env.adversary.theta(1));
    rec.loss = bandit_feedback(rec.action, env.adversary.theta(1), fb_rng);
    tr.rounds.push_back(rec);
    EpochRecord e;
    e.start = 1;
    e.length = 1;
    tr.epochs.push_back(e);
    largest = std::max(largest, ctx.size());
    log.push_back(std::move(ctx));
  }
  int epoch = 1;
  for (int start = 2; start <= T; start *= 2, ++epoch) {
    const int length = std::min(2 * start, T + 1) - start;
    EmpiricalPolytope poly = EmpiricalPolytope::from_samples(log);
    const int k = cfg.max_set_size.value_or(largest);
    EpochRecord e;
    e.epoch = epoch;
    e.start = start;
    e.length = length;
    e.contexts = static_cast<long long>(log.size());
    e.distinct_sets = poly.size();
    e.hull_dim = poly.hull().dim();
    e.epsilon = cfg.epsilon.value_or(cfg.epsilon_scale *
                                     misspecification_level(env.contexts.dim(), e.contexts, k, T));
    tr.epochs.push_back(e);
    CewConfig cew = cfg.cew;
    cew.epsilon = e.epsilon;
    const std::size_t before = log.size();
    detail::run_epoch(tr, env, poly, cew, cfg, epoch, start, length, ctx_rng, fb_rng, log);
    for (std::size_t i = before; i < log.size(); ++i) largest = std::max(largest, log[i].size());
  }
  detail::finish_trace(tr, env, log);
  return tr;
}

/// One epoch on a polytope built from N = min(cap, c d^3 T^2) free context draws.
inline RegretTrace simulator_mode(const Environment& env, const ReductionConfig& cfg) {
  const int T = env.adversary.horizon();
  const int d = env.contexts.dim();
  RegretTrace tr;
  const double target = cfg.simulator_constant * std::pow(d, 3) * double(T) * T;
  tr.simulator_target = static_cast<long long>(std::ceil(std::min(target, 9e18)));
  const long long n = std::max<long long>(1, std::min<long long>(cfg.simulator_cap, tr.simulator_target));
  Rng sim_rng(derive_seed(cfg.seed, {stream::kSimulator}));
  std::vector<ActionSet> draws;
  draws.reserve(n);
  int largest = 1;
  for (long long i = 0; i < n; ++i) {
    draws.push_back(env.contexts.draw(sim_rng));
    largest = std::max(largest, draws.back().size());
  }
  EmpiricalPolytope poly = EmpiricalPolytope::from_samples(draws);
  EpochRecord e;
  e.epoch = 0;
  e.start = 1;
  e.length = T;
  e.contexts = n;
  e.distinct_sets = poly.size();
  e.hull_dim = poly.hull().dim();
  e.epsilon = cfg.epsilon.value_or(cfg.epsilon_scale *
                                   misspecification_level(d, n, cfg.max_set_size.value_or(largest), T));
  tr.epochs.push_back(e);
  Rng ctx_rng(derive_seed(cfg.seed, {stream::kContexts}));
  Rng fb_rng(derive_seed(cfg.seed, {stream::kFeedback}));
  CewConfig cew = cfg.cew;
  cew.epsilon = e.epsilon;
  std::vector<ActionSet> log;
  detail::run_epoch(tr, env, poly, cew, cfg, 0, 1, T, ctx_rng, fb_rng, log);
  detail::finish_trace(tr, env, log);
  return tr;
}

/// Single epoch on a polytope built from `n` contexts drawn from the
/// distribution up front (no restarts).
inline RegretTrace single_epoch(const Environment& env, const ReductionConfig& cfg, long long n) {
  ReductionConfig c = cfg;
  c.simulator_cap = n;
  c.simulator_constant = 1e300;
  return simulator_mode(env, c);
}

}  // namespace lcb
