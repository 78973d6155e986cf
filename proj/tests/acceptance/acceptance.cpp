// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `acceptance 1 4 7`.

#include "lcb/environment.hpp"
#include "lcb/harness.hpp"
#include "lcb/reduction.hpp"
#include "lcb/stats.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/fixtures.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace lcb;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Pinned tolerances and limits.
constexpr double kTauGeo = 1e-9;
constexpr double kReconstruction = 1e-8;
constexpr double kFidelity = 1e-9;
constexpr double kKsLevel = 0.01;
constexpr double kSlopeTarget = -0.5, kSlopeBand = 0.15;
constexpr double kRatioLo = 0.9, kRatioHi = 1.7;
constexpr double kSmallLossRatio = 0.5;

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

fs::path out_root() {
  const char* r = std::getenv("LCB_OUTPUT_ROOT");
  return (r && *r ? fs::path(r) : fs::current_path()) / "acceptance_runs";
}

// desk-scale learner settings shared by the end-to-end criteria
CewConfig desk_cew(double bonus_scale) {
  CewConfig c;
  c.eta = 0.2;
  c.bonus_scale = bonus_scale;
  return c;
}

std::string failed_checks(const harness::RunOutcome& o) {
  std::set<std::string> names;
  for (const auto& c : o.checks)
    if (!c.passed) names.insert(c.name);
  std::string s;
  for (const auto& n : names) s += (s.empty() ? "" : ",") + n;
  return s.empty() ? "all run checks green" : "failed run checks: " + s;
}

std::vector<double> seed_regrets(const harness::RunOutcome& o) {
  std::vector<double> r;
  for (const auto& s : o.seeds) r.push_back(s.error.empty() ? s.regret : std::nan(""));
  return r;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::uint64_t> seeds_1_to(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

// random instance: weights drawn uniformly, points in the unit ball
EmpiricalPolytope random_instance(std::mt19937_64& g, int d, int sets, int max_points, int min_points = 1) {
  auto s = fixtures::random_sets(g, d, sets, max_points, min_points);
  std::uniform_real_distribution<double> w(0.2, 1.0);
  std::vector<std::pair<ActionSet, double>> items;
  for (auto& a : s) items.emplace_back(a, w(g));
  return EmpiricalPolytope::from_weighted(items);
}

// --- 1: separation against an explicit facet description ---------------------
Verdict criterion1() {
  std::mt19937_64 g(101);
  std::uniform_int_distribution<int> dim(1, 3), nsets(1, 4);
  long long queries = 0, disagreements = 0, ambiguous = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int d = dim(g);
    EmpiricalPolytope p = random_instance(g, d, nsets(g), 3);
    auto sel = oracle::selection_points(fixtures::to_oracle(p));
    oracle::HalfspaceHull hull(sel);
    Geometry geo(p);
    Vector centre = Vector::Zero(d);
    for (const auto& x : sel) centre += x;
    centre /= static_cast<double>(sel.size());
    std::uniform_real_distribution<double> scale(0.7, 1.3), box(-1.2, 1.2), u(0, 1);
    std::uniform_int_distribution<std::size_t> pick(0, sel.size() - 1);
    for (int q = 0; q < 1000; ++q) {
      Vector x(d);
      if (q % 2 == 0) {
        // near the boundary: a random selection point pushed in or out from the centre
        Vector a = sel[pick(g)], b = sel[pick(g)];
        Vector y = a + u(g) * (b - a);
        x = centre + scale(g) * (y - centre);
      } else {
        for (int k = 0; k < d; ++k) x[k] = box(g);
      }
      const double viol = hull.signed_violation(x);
      ++queries;
      if (std::abs(viol) <= kTauGeo) {
        ++ambiguous;
        continue;
      }
      if (geo.separate(x).inside != (viol < 0)) ++disagreements;
    }
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements on " + std::to_string(queries) +
                                  " queries (" + std::to_string(ambiguous) + " within tau)"};
}

// --- 2: Caratheodory decomposition ------------------------------------------
Verdict criterion2() {
  std::mt19937_64 g(202);
  std::uniform_int_distribution<int> nsets(2, 4);
  double worst_err = 0.0;
  int worst_excess = -100, not_extreme = 0, not_selection = 0;
  for (int pair = 0; pair < 200; ++pair) {
    const int d = 1 + pair % 5;
    EmpiricalPolytope p = random_instance(g, d, nsets(g), 4, 2);
    auto sel = oracle::selection_points(fixtures::to_oracle(p));
    Geometry geo(p);
    Vector y = fixtures::interior_point(p, g);
    VertexDecomposition dec = geo.decompose(y);
    worst_err = std::max(worst_err, (dec.combination() - y).norm());
    worst_excess = std::max(worst_excess, dec.k() - (d + 1));
    for (const auto& v : dec.vertices) {
      bool is_sel = false;
      for (const auto& x : sel) is_sel = is_sel || (x - v.point).norm() < 1e-12;
      if (!is_sel) ++not_selection;
      // extreme iff some direction puts every other selection point strictly above it
      ConeWitness w = geo.cone_witness(v);
      for (const auto& x : sel) {
        if ((x - v.point).norm() < 1e-12) continue;
        if (!(w.phi.dot(x - v.point) > 0.0)) {
          ++not_extreme;
          break;
        }
      }
    }
  }
  const bool ok = worst_err < kReconstruction && worst_excess <= 0 && not_extreme == 0 && not_selection == 0;
  return {ok, "max error " + fmt(worst_err) + ", max k-(d+1) " + std::to_string(worst_excess) + ", " +
                  std::to_string(not_extreme) + " uncertified, " + std::to_string(not_selection) +
                  " not selection points"};
}

// --- 3: witness reproduces the vertex as a mean action ---------------------------
Verdict criterion3() {
  std::mt19937_64 g(303);
  std::uniform_int_distribution<int> dim(2, 4), nsets(2, 4);
  std::normal_distribution<double> n01;
  int pairs = 0, ties = 0;
  double worst = 0.0;
  while (pairs < 100) {
    const int d = dim(g);
    EmpiricalPolytope p = random_instance(g, d, nsets(g), 4, 2);
    Geometry geo(p);
    std::vector<Vertex> vertices;
    for (int k = 0; k < 3; ++k) {
      Vector c(d);
      for (int j = 0; j < d; ++j) c[j] = n01(g);
      vertices.push_back(p.optimize(c, Sense::Min));
    }
    for (const auto& v : geo.decompose(fixtures::interior_point(p, g)).vertices) vertices.push_back(v);
    for (const auto& v : vertices) {
      if (pairs == 100) break;
      ConeWitness w = geo.cone_witness(v);
      Vector mean = Vector::Zero(d);
      for (const auto& e : p.sets()) {
        const RowMatrix& pts = e.set.points();
        Vector vals = pts * w.phi;
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < vals.size(); ++i)
          if (vals[i] < vals[best]) best = i;
        for (Eigen::Index i = 0; i < vals.size(); ++i)
          if (i != best && vals[i] <= vals[best]) ++ties;
        mean += e.weight * pts.row(best).transpose();
      }
      worst = std::max(worst, (mean - v.point).norm());
      ++pairs;
    }
  }
  return {worst <= kFidelity && ties == 0,
          std::to_string(pairs) + " pairs, max deviation " + fmt(worst) + ", " + std::to_string(ties) + " ties"};
}

// --- 4: sampler marginals ----------------------------------------------------
Verdict criterion4() {
  auto cube = [](int d) {
    std::vector<Vector> pts;
    for (int mask = 0; mask < (1 << d); ++mask) {
      Vector v(d);
      for (int k = 0; k < d; ++k) v[k] = (mask >> k) & 1;
      pts.push_back(v);
    }
    return ActionSet::finite(pts);
  };
  struct Case {
    int d;
    std::vector<double> tilt;
  };
  const std::vector<Case> cases{{2, {2.0, -1.0}}, {3, {1.5, -0.5, 4.0}}};
  int seeds_ok = 0;
  double lowest = 1.0;
  for (int seed = 1; seed <= 10; ++seed) {
    bool ok = true;
    for (const auto& c : cases) {
      EmpiricalPolytope p = EmpiricalPolytope::from_samples({cube(c.d)});
      Geometry geo(p);
      Vector tilt = Eigen::Map<const Vector>(c.tilt.data(), c.d);
      Rng rng(derive_seed(static_cast<std::uint64_t>(seed), {stream::kSampler, static_cast<std::uint64_t>(c.d)}));
      auto s = sample_unclipped(geo, tilt, 4000, 100 * c.d, 10 * c.d, rng);
      for (int k = 0; k < c.d; ++k) {
        std::vector<double> xs;
        for (const auto& y : s) xs.push_back(y[k]);
        const double pv = stats::ks_test(xs, [&](double t) { return oracle::trunc_exp_cdf(c.tilt[k], t); });
        lowest = std::min(lowest, pv);
        ok = ok && pv > kKsLevel;
      }
    }
    seeds_ok += ok;
  }
  return {seeds_ok >= 9, std::to_string(seeds_ok) + "/10 seeds pass every marginal, lowest p " + fmt(lowest)};
}

// --- 5: uniform convergence rate ---------------------------------------------
Verdict criterion5() {
  std::mt19937_64 g(505);
  auto sets = fixtures::random_sets(g, 3, 6, 4, 2);
  std::uniform_real_distribution<double> w(0.5, 1.5);
  std::vector<double> probs;
  for (int i = 0; i < 6; ++i) probs.push_back(w(g));
  const double tot = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<std::pair<ActionSet, double>> atoms;
  for (int i = 0; i < 6; ++i) atoms.emplace_back(sets[i], probs[i] / tot);
  auto dist = ContextDistribution::finite_support(atoms);
  Vector theta(3);
  theta << 0.5, 0.3, 0.4;

  // the library gap on a fixed sample equals a direct frequency computation
  double check_err = 0.0;
  {
    Rng rng(1);
    std::vector<ActionSet> sample;
    std::vector<double> freq(6, 0.0);
    std::discrete_distribution<int> draw(probs.begin(), probs.end());
    for (int i = 0; i < 300; ++i) {
      const int k = draw(rng);
      sample.push_back(sets[k]);
      freq[k] += 1.0 / 300;
    }
    std::vector<Vector> dirs;
    for (int i = 0; i < 40; ++i) dirs.push_back(random_unit_vector(rng, 3));
    double direct = 0.0;
    for (const auto& phi : dirs) {
      double diff = 0.0;
      for (int k = 0; k < 6; ++k) {
        const RowMatrix& pts = sets[k].points();
        Vector vals = pts * phi;
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < vals.size(); ++i)
          if (vals[i] < vals[best]) best = i;
        diff += (freq[k] - probs[k] / tot) * pts.row(best).dot(theta);
      }
      direct = std::max(direct, std::abs(diff));
    }
    check_err = std::abs(direct - empirical_uniform_convergence_gap(dist, theta, sample, dirs));
  }

  std::vector<double> ns;
  for (int n = 32; n <= 4096; n *= 2) ns.push_back(n);
  std::vector<double> gaps(ns.size(), 0.0);
  for (int seed = 1; seed <= 20; ++seed) {
    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), {stream::kProbe}));
    for (std::size_t i = 0; i < ns.size(); ++i)
      gaps[i] += empirical_uniform_convergence_gap(dist, theta, static_cast<int>(ns[i]), 50, rng) / 20.0;
  }
  const double slope = stats::loglog_slope(ns, gaps);
  const bool ok = std::abs(slope - kSlopeTarget) <= kSlopeBand && check_err < 1e-12;
  return {ok, "log-log slope " + fmt(slope) + " (gap " + fmt(gaps.front()) + " at N=32, " + fmt(gaps.back()) +
                  " at N=4096), direct-count check error " + fmt(check_err)};
}

// --- 6: misspecification robustness --------------------------------------------
Verdict criterion6() {
  const int T = 5000, d = 2;
  fs::create_directories(out_root());
  {
    std::ofstream(out_root() / "square.sets") << "points 1 4 2\n0 0\n1 0\n0 1\n1 1\n";
  }
  const std::vector<double> eps{0.0, 0.02, 0.05, 0.1};
  std::vector<double> means;
  bool checks = true;
  std::string failed;
  for (double e : eps) {
    harness::ExperimentConfig c;
    c.mode = harness::Mode::CewOnly;
    c.name = "c6_eps" + fmt(e);
    c.horizon = T;
    c.seeds = seeds_1_to(10);
    c.output = (out_root() / c.name).string();
    c.base_dir = out_root();
    c.polytope_file = "square.sets";
    c.adversary.theta = {0.6, 0.3};
    c.bias_kind = "adversarial";
    c.bias = e;
    c.cew = desk_cew(0.5);
    auto o = harness::run(c);
    auto r = seed_regrets(o);
    if (!all_finite(r)) return {false, "a seed failed at eps " + fmt(e)};
    means.push_back(stats::mean(r));
    checks = checks && o.passed;
    if (!o.passed) failed = failed_checks(o);
  }
  auto fit = stats::least_squares(eps, means);
  bool increasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) increasing = increasing && means[i] > means[i - 1];
  const double slope_cap = 8.0 * std::sqrt(d) * T;
  const double intercept_cap = 40.0 * d * std::sqrt(T) * std::log(T);
  std::string detail = "mean regrets";
  for (double m : means) detail += " " + fmt(m);
  detail += "; slope " + fmt(fit.slope) + " (cap " + fmt(slope_cap) + "), intercept " + fmt(fit.intercept) +
            " (cap " + fmt(intercept_cap) + "), eps=0 mean " + fmt(means[0]) + "; " +
            (checks ? "all run checks green" : failed);
  const bool ok = fit.slope > 0 && increasing && fit.slope <= slope_cap && fit.intercept <= intercept_cap &&
                  means[0] <= intercept_cap && checks;
  return {ok, detail};
}

// --- 7 and 10: doubling driver, sqrt(T) scaling, determinism -------------------
const char* kThreeContexts =
    "points 0.4 2 2\n1 0\n0 1\n"
    "points 0.35 3 2\n0.8 0.2\n0.1 0.7\n0.5 0.5\n"
    "points 0.25 2 2\n0.6 0\n0 0.6\n";

harness::ExperimentConfig doubling_config(int T, const std::string& name, std::vector<std::uint64_t> seeds) {
  fs::create_directories(out_root());
  std::ofstream(out_root() / "three_contexts.sets") << kThreeContexts;
  harness::ExperimentConfig c;
  c.mode = harness::Mode::Doubling;
  c.name = name;
  c.horizon = T;
  c.seeds = std::move(seeds);
  c.output = (out_root() / name).string();
  c.base_dir = out_root();
  c.environment.kind = "finite_support";
  c.environment.sets_file = "three_contexts.sets";
  c.adversary.theta = {0.9, 0.1};
  c.cew = desk_cew(0.0);
  c.reduction.cew = c.cew;
  return c;
}

// best expected per-round loss by enumerating every deterministic context -> action map
double best_map_loss(const std::vector<std::pair<std::vector<Vector>, double>>& ctx, const Vector& theta) {
  std::vector<std::size_t> idx(ctx.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double l = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) l += ctx[i].second * ctx[i].first[idx[i]].dot(theta);
    best = std::min(best, l);
    std::size_t k = 0;
    while (k < ctx.size() && ++idx[k] == ctx[k].first.size()) idx[k++] = 0;
    if (k == ctx.size()) break;
  }
  return best;
}

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

Verdict criterion7() {
  const std::vector<std::pair<std::vector<Vector>, double>> ctx{
      {{v2(1, 0), v2(0, 1)}, 0.4},
      {{v2(0.8, 0.2), v2(0.1, 0.7), v2(0.5, 0.5)}, 0.35},
      {{v2(0.6, 0), v2(0, 0.6)}, 0.25}};
  const double per_round = best_map_loss(ctx, v2(0.9, 0.1));
  std::vector<double> means;
  double comparator_err = 0.0;
  bool checks = true, positive = true;
  std::string failed;
  for (int T : {512, 1024, 2048}) {
    auto o = harness::run(doubling_config(T, "c7_T" + std::to_string(T), seeds_1_to(10)));
    auto r = seed_regrets(o);
    if (!all_finite(r)) return {false, "a seed failed at T " + std::to_string(T)};
    for (const auto& s : o.seeds) comparator_err = std::max(comparator_err, std::abs(s.comparator - per_round * T));
    means.push_back(stats::mean(r));
    positive = positive && means.back() > 0;
    checks = checks && o.passed;
    if (!o.passed) failed = failed_checks(o);
  }
  const double r1 = means[1] / means[0], r2 = means[2] / means[1];
  const bool ok = positive && r1 >= kRatioLo && r1 <= kRatioHi && r2 >= kRatioLo && r2 <= kRatioHi &&
                  comparator_err < 1e-6 && checks;
  return {ok, "mean regrets " + fmt(means[0]) + " / " + fmt(means[1]) + " / " + fmt(means[2]) + ", ratios " + fmt(r1) +
                  ", " + fmt(r2) + "; comparator vs enumeration " + fmt(comparator_err) + "; " +
                  (checks ? "all run checks green" : failed)};
}

Verdict criterion10() {
  const fs::path first = out_root() / "c7_T2048";
  if (!fs::exists(first / "trace_seed1.csv")) harness::run(doubling_config(2048, "c7_T2048", {1}));
  harness::run(doubling_config(2048, "c10_repeat", {1}));
  std::string detail;
  bool ok = true;
  for (const char* f : {"trace_seed1.csv", "epochs_seed1.csv", "cew_seed1.csv", "contexts_seed1.txt"}) {
    const std::string a = slurp(first / f), b = slurp(out_root() / "c10_repeat" / f);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + f + (same ? " identical" : " DIFFERS");
  }
  return {ok, detail};
}

// --- 8: small-loss trend in simulator mode --------------------------------------
Verdict criterion8() {
  fs::create_directories(out_root());
  std::ofstream(out_root() / "small_loss.sets")
      << "points 1 2 2\n1 0\n0 1\npoints 1 2 2\n1 0\n0.5 0.5\npoints 1 2 2\n1 0\n0.2 0.8\n";
  const std::vector<std::pair<std::vector<Vector>, double>> ctx{{{v2(1, 0), v2(0, 1)}, 1.0 / 3},
                                                                {{v2(1, 0), v2(0.5, 0.5)}, 1.0 / 3},
                                                                {{v2(1, 0), v2(0.2, 0.8)}, 1.0 / 3}};
  std::vector<double> means, best;
  bool checks = true;
  std::string failed;
  long long target = 0;
  for (auto theta : {v2(0.01, 0.51), v2(0.5, 1.0)}) {
    harness::ExperimentConfig c;
    c.mode = harness::Mode::Simulator;
    c.name = means.empty() ? "c8_low" : "c8_high";
    c.horizon = 2000;
    c.seeds = seeds_1_to(10);
    c.output = (out_root() / c.name).string();
    c.base_dir = out_root();
    c.environment.sets_file = "small_loss.sets";
    c.adversary.theta = {theta[0], theta[1]};
    c.cew = desk_cew(0.0);
    c.reduction.cew = c.cew;
    c.reduction.simulator_cap = 10000;
    auto o = harness::run(c);
    auto r = seed_regrets(o);
    if (!all_finite(r)) return {false, "a seed failed in " + c.name};
    means.push_back(stats::mean(r));
    best.push_back(best_map_loss(ctx, theta));
    checks = checks && o.passed;
    if (!o.passed) failed = failed_checks(o);
    target = 8LL * 2000 * 2000;
  }
  const double ratio = means[0] / means[1];
  const bool ok = ratio <= kSmallLossRatio && means[1] > 0 && std::abs(best[0] - 0.01) < 1e-12 &&
                  std::abs(best[1] - 0.5) < 1e-12 && checks;
  return {ok, "best per-round loss " + fmt(best[0]) + " vs " + fmt(best[1]) + ", mean regret " + fmt(means[0]) +
                  " vs " + fmt(means[1]) + ", ratio " + fmt(ratio) + ", N=10000 (uncapped target " +
                  std::to_string(target) + "); " + (checks ? "all run checks green" : failed)};
}

// --- 9: shortest paths ------------------------------------------------------------
Verdict criterion9() {
  const int stages = 6, width = 2, d = stages * width, T = 1000;
  auto dist = ContextDistribution::shortest_path(stages, width, 0.1);
  // flow description of each drawn context agrees with its path list
  Rng rng(7);
  int lp_mismatch = 0;
  std::size_t constraints = 0;
  double mean_paths = 0.0;
  for (int i = 0; i < 100; ++i) {
    ActionSet s = dist.draw(rng);
    mean_paths += s.points().rows() / 100.0;
    ActionSet h = ContextDistribution::path_polytope(s, stages, width);
    constraints = std::max<std::size_t>(constraints, h.normals().rows());
    Vector phi = random_unit_vector(rng, d);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < s.points().rows(); ++r) {
      const double v = s.points().row(r).dot(phi);
      best = std::min(best, v);
    }
    // the LP over the flow constraints attains the best path value
    if (std::abs(h.argmin(phi).point.dot(phi) - best) > 1e-9) ++lp_mismatch;
  }

  harness::ExperimentConfig c;
  c.mode = harness::Mode::Doubling;
  c.name = "c9_shortest_path";
  c.horizon = T;
  c.seeds = {1};
  c.output = (out_root() / c.name).string();
  c.environment.kind = "shortest_path";
  c.environment.stages = stages;
  c.environment.width = width;
  c.environment.closure = 0.1;
  Rng th_rng(5);
  for (int e = 0; e < d; ++e)
    c.adversary.theta.push_back(e % 2 == 0 ? 0.1 * uniform_open(th_rng) : 0.8 + 0.2 * uniform_open(th_rng));
  c.cew = desk_cew(0.0);
  c.cew.samples = 1000;
  c.cew.thinning = 6;
  c.reduction.cew = c.cew;
  const auto t0 = std::chrono::steady_clock::now();
  auto o = harness::run(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.seeds[0].error.empty()) return {false, "run failed: " + o.seeds[0].error};

  // per-round regret from the trace
  std::ifstream f(fs::path(c.output) / "trace_seed1.csv");
  std::string line;
  std::getline(f, line);
  std::vector<double> per;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    // round, epoch, a_1..a_d, loss, expected_loss, comparator, ...
    per.push_back(std::stod(cells[2 + d + 1]) - std::stod(cells[2 + d + 2]));
  }
  const int w = T / 10;
  const double first = std::accumulate(per.begin(), per.begin() + w, 0.0) / w;
  const double last = std::accumulate(per.end() - w, per.end(), 0.0) / w;
  const bool ok = static_cast<int>(per.size()) == T && last < first && secs < 600 &&
                  dist.max_set_size() >= 16 && constraints <= 4 * static_cast<std::size_t>(d) && lp_mismatch == 0 &&
                  o.passed;
  return {ok, "per-round regret first 10% " + fmt(first) + ", last 10% " + fmt(last) + ", " + fmt(secs, 3) +
                  " s; up to " + std::to_string(dist.max_set_size()) + " paths (mean " + fmt(mean_paths, 3) +
                  "), " + std::to_string(constraints) + " flow constraints, " + std::to_string(lp_mismatch) +
                  " LP mismatches; " + failed_checks(o)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "geometry oracle equivalence", 60, criterion1},
      {2, "Caratheodory decomposition", 120, criterion2},
      {3, "witness fidelity", 60, criterion3},
      {4, "sampler marginals", 120, criterion4},
      {5, "uniform convergence rate", 300, criterion5},
      {6, "misspecification robustness", 1200, criterion6},
      {7, "end-to-end sqrt(T) scaling", 1800, criterion7},
      {8, "simulator small-loss trend", 1200, criterion8},
      {9, "shortest-path feasibility", 600, criterion9},
      {10, "determinism", 1800, criterion10},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("CRITERION %d %s: %s [%s; %.1f s, limit %.0f s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
