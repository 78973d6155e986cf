#pragma once

// Experiment runner: INI config -> seeded runs -> CSV traces, summary and a
// JSON report of the invariant checks that were executed.

#include "lcb/action_set_io.hpp"
#include "lcb/cew.hpp"
#include "lcb/environment.hpp"
#include "lcb/reduction.hpp"
#include "lcb/stats.hpp"

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lcb::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { CewOnly, Reduction, Doubling, Simulator, UniformConvergence };

inline Mode parse_mode(const std::string& s) {
  if (s == "cew_only") return Mode::CewOnly;
  if (s == "reduction") return Mode::Reduction;
  if (s == "doubling") return Mode::Doubling;
  if (s == "simulator") return Mode::Simulator;
  if (s == "uniform_convergence") return Mode::UniformConvergence;
  throw ConfigError("unknown mode '" + s + "'");
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::CewOnly: return "cew_only";
    case Mode::Reduction: return "reduction";
    case Mode::Doubling: return "doubling";
    case Mode::Simulator: return "simulator";
    case Mode::UniformConvergence: return "uniform_convergence";
  }
  return "?";
}

struct EnvironmentSpec {
  std::string kind = "finite_support";
  std::string sets_file;  // finite support: weights are the probabilities
  int m = 1;
  std::vector<double> availability;
  int stages = 1;
  int width = 2;
  double closure = 0.0;
};

struct AdversarySpec {
  std::string kind = "constant";
  std::vector<double> theta;
  std::vector<double> second;
  int flips = 1;
  std::vector<double> amplitude;
  double period = 100.0;
  std::vector<double> pilot_mean;
  double weight = 0.5;
  std::uint64_t seed = 0;
  bool normalize = true;
};

struct ExperimentConfig {
  Mode mode = Mode::Doubling;
  std::string name = "experiment";
  int horizon = 1;
  std::vector<std::uint64_t> seeds;
  std::string output;       // resolved against LCB_OUTPUT_ROOT when relative
  int threads = 1;
  EnvironmentSpec environment;
  AdversarySpec adversary;
  CewConfig cew;
  ReductionConfig reduction;
  long long contexts = 1000;  // reduction mode: contexts drawn before the single epoch
  // cew_only
  std::string polytope_file;
  std::string bias_kind = "none";  // none | adversarial | constant
  double bias = 0.0;
  // uniform_convergence
  std::vector<int> sample_sizes;
  int probes = 50;
  fs::path base_dir;  // directory of the config file
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    tok = tok.substr(b, tok.find_last_not_of(" \t") - b + 1);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ConfigError("bad number '" + tok + "' in " + key);
    }
  }
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class T>
std::optional<T> opt(const boost::property_tree::ptree& pt, const std::string& key) {
  auto v = pt.get_optional<std::string>(key);
  if (!v) return std::nullopt;
  try {
    return boost::lexical_cast<T>(*v);
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("bad value '" + *v + "' for " + key);
  }
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad boolean '" + s + "' for " + key);
}

}  // namespace detail

inline ExperimentConfig parse_config(const boost::property_tree::ptree& pt, const fs::path& base_dir) {
  using detail::opt;
  ExperimentConfig c;
  c.base_dir = base_dir;
  static const std::map<std::string, std::set<std::string>> known{
      {"experiment", {"mode", "name", "T", "seeds", "output", "threads"}},
      {"environment", {"kind", "sets", "m", "availability", "stages", "width", "closure"}},
      {"adversary", {"kind", "theta", "second", "flips", "amplitude", "period", "pilot_mean", "weight", "seed",
                     "normalize"}},
      {"cew", {"gamma", "beta", "eta", "samples", "burn_in", "thinning", "move_steps", "bonus_scale", "ess_fraction",
               "epsilon", "pool"}},
      {"reduction", {"epsilon", "epsilon_scale", "max_set_size", "simulator_constant", "simulator_cap", "certify",
                     "contexts"}},
      {"polytope", {"sets"}},
      {"feedback", {"bias_kind", "bias"}},
      {"convergence", {"sample_sizes", "probes"}}};
  for (const auto& [section, body] : pt) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError("unknown key " + section + "." + kv.first);
  }
  auto mode = pt.get_optional<std::string>("experiment.mode");
  if (!mode) throw ConfigError("experiment.mode is required");
  c.mode = parse_mode(*mode);
  c.name = pt.get<std::string>("experiment.name", c.name);
  auto T = opt<int>(pt, "experiment.T");
  if (!T) throw ConfigError("experiment.T is required");
  c.horizon = *T;
  if (c.horizon < 1) throw ConfigError("experiment.T must be at least 1");
  auto seeds = pt.get_optional<std::string>("experiment.seeds");
  if (!seeds) throw ConfigError("experiment.seeds is required");
  for (double s : detail::parse_list(*seeds, "experiment.seeds")) {
    if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
    c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (c.seeds.empty()) throw ConfigError("experiment.seeds is empty");
  c.output = pt.get<std::string>("experiment.output", c.name);
  c.threads = opt<int>(pt, "experiment.threads").value_or(1);
  if (c.threads < 1) throw ConfigError("experiment.threads must be positive");

  auto& e = c.environment;
  e.kind = pt.get<std::string>("environment.kind", e.kind);
  e.sets_file = pt.get<std::string>("environment.sets", "");
  e.m = opt<int>(pt, "environment.m").value_or(1);
  if (auto a = pt.get_optional<std::string>("environment.availability"))
    e.availability = detail::parse_list(*a, "environment.availability");
  e.stages = opt<int>(pt, "environment.stages").value_or(1);
  e.width = opt<int>(pt, "environment.width").value_or(2);
  e.closure = opt<double>(pt, "environment.closure").value_or(0.0);

  auto& a = c.adversary;
  a.kind = pt.get<std::string>("adversary.kind", a.kind);
  auto theta = pt.get_optional<std::string>("adversary.theta");
  if (!theta) throw ConfigError("adversary.theta is required");
  a.theta = detail::parse_list(*theta, "adversary.theta");
  if (auto s = pt.get_optional<std::string>("adversary.second")) a.second = detail::parse_list(*s, "adversary.second");
  if (auto s = pt.get_optional<std::string>("adversary.amplitude"))
    a.amplitude = detail::parse_list(*s, "adversary.amplitude");
  if (auto s = pt.get_optional<std::string>("adversary.pilot_mean"))
    a.pilot_mean = detail::parse_list(*s, "adversary.pilot_mean");
  a.flips = opt<int>(pt, "adversary.flips").value_or(1);
  a.period = opt<double>(pt, "adversary.period").value_or(100.0);
  a.weight = opt<double>(pt, "adversary.weight").value_or(0.5);
  a.seed = opt<std::uint64_t>(pt, "adversary.seed").value_or(0);
  if (auto s = pt.get_optional<std::string>("adversary.normalize")) a.normalize = detail::parse_bool(*s, "adversary.normalize");

  auto& w = c.cew;
  w.gamma = opt<double>(pt, "cew.gamma");
  w.beta = opt<double>(pt, "cew.beta");
  w.eta = opt<double>(pt, "cew.eta");
  w.samples = opt<int>(pt, "cew.samples");
  w.burn_in = opt<int>(pt, "cew.burn_in");
  w.thinning = opt<int>(pt, "cew.thinning");
  w.move_steps = opt<int>(pt, "cew.move_steps");
  w.bonus_scale = opt<double>(pt, "cew.bonus_scale").value_or(w.bonus_scale);
  w.ess_fraction = opt<double>(pt, "cew.ess_fraction").value_or(w.ess_fraction);
  w.epsilon = opt<double>(pt, "cew.epsilon").value_or(0.0);
  const std::string pool = pt.get<std::string>("cew.pool", "reweight");
  if (pool == "reweight") w.pool = PoolStrategy::Reweight;
  else if (pool == "fresh") w.pool = PoolStrategy::Fresh;
  else throw ConfigError("cew.pool must be reweight or fresh");

  auto& r = c.reduction;
  r.cew = w;
  r.epsilon = opt<double>(pt, "reduction.epsilon");
  r.epsilon_scale = opt<double>(pt, "reduction.epsilon_scale").value_or(1.0);
  r.max_set_size = opt<int>(pt, "reduction.max_set_size");
  r.simulator_constant = opt<double>(pt, "reduction.simulator_constant").value_or(1.0);
  r.simulator_cap = opt<long long>(pt, "reduction.simulator_cap").value_or(10000);
  if (auto s = pt.get_optional<std::string>("reduction.certify")) r.certify_vertices = detail::parse_bool(*s, "reduction.certify");
  c.contexts = opt<long long>(pt, "reduction.contexts").value_or(c.contexts);
  if (c.contexts < 1 || r.simulator_cap < 1) throw ConfigError("context counts must be positive");

  c.polytope_file = pt.get<std::string>("polytope.sets", "");
  c.bias_kind = pt.get<std::string>("feedback.bias_kind", c.bias_kind);
  c.bias = opt<double>(pt, "feedback.bias").value_or(0.0);
  if (c.bias_kind != "none" && c.bias_kind != "adversarial" && c.bias_kind != "constant")
    throw ConfigError("feedback.bias_kind must be none, adversarial or constant");
  if (!(c.bias >= 0.0)) throw ConfigError("feedback.bias must be non-negative");

  if (auto s = pt.get_optional<std::string>("convergence.sample_sizes"))
    for (double n : detail::parse_list(*s, "convergence.sample_sizes")) c.sample_sizes.push_back(static_cast<int>(n));
  c.probes = opt<int>(pt, "convergence.probes").value_or(c.probes);

  if (c.mode == Mode::CewOnly && c.polytope_file.empty()) throw ConfigError("cew_only needs polytope.sets");
  if (c.mode == Mode::UniformConvergence && c.sample_sizes.empty())
    throw ConfigError("uniform_convergence needs convergence.sample_sizes");
  for (const std::string& f : {c.polytope_file, c.environment.sets_file}) {
    if (!f.empty() && !fs::exists(c.base_dir / f)) throw ConfigError("referenced file does not exist: " + f);
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(pt, fs::absolute(fs::path(path)).parent_path());
}

inline fs::path output_root() {
  const char* r = std::getenv("LCB_OUTPUT_ROOT");
  return r && *r ? fs::path(r) : fs::current_path();
}

inline fs::path output_dir(const ExperimentConfig& c) {
  fs::path p(c.output);
  return p.is_absolute() ? p : output_root() / p;
}

// --- environments from specs ----------------------------------------------

inline ContextDistribution build_contexts(const ExperimentConfig& c) {
  const auto& e = c.environment;
  try {
    if (e.kind == "finite_support") {
      if (e.sets_file.empty()) throw ConfigError("finite_support needs environment.sets");
      std::vector<std::pair<ActionSet, double>> atoms;
      double tot = 0.0;
      for (auto& r : read_action_sets_file((c.base_dir / e.sets_file).string())) {
        atoms.emplace_back(r.set, r.weight);
        tot += r.weight;
      }
      for (auto& a : atoms) a.second /= tot;
      return ContextDistribution::finite_support(atoms);
    }
    if (e.kind == "m_set") return ContextDistribution::m_set(e.m, e.availability);
    if (e.kind == "shortest_path") return ContextDistribution::shortest_path(e.stages, e.width, e.closure);
    if (e.kind == "sleeping_basis") return ContextDistribution::sleeping_basis(e.availability);
  } catch (const DomainError& err) {
    throw ConfigError(std::string("environment: ") + err.what());
  }
  throw ConfigError("unknown environment kind '" + e.kind + "'");
}

inline Adversary build_adversary(const ExperimentConfig& c, int dim) {
  const auto& a = c.adversary;
  auto check = [&](const std::vector<double>& v, const char* key) {
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError(std::string("adversary.") + key + " must have " + std::to_string(dim) + " entries");
    return detail::to_vector(v);
  };
  const Vector theta = check(a.theta, "theta");
  if (a.kind == "constant") return Adversary::constant(theta, c.horizon);
  if (a.kind == "piecewise") return Adversary::piecewise(theta, check(a.second, "second"), a.flips, c.horizon);
  if (a.kind == "sinusoidal")
    return Adversary::sinusoidal(theta, check(a.amplitude, "amplitude"), a.period, c.horizon, a.seed);
  if (a.kind == "anti_greedy")
    return Adversary::anti_greedy(theta, check(a.pilot_mean, "pilot_mean"), a.weight, c.horizon);
  throw ConfigError("unknown adversary kind '" + a.kind + "'");
}

// --- reports ---------------------------------------------------------------

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
  std::optional<std::uint64_t> seed;

  Check() = default;
  Check(std::string n, bool ok, std::string d, std::optional<std::uint64_t> s = std::nullopt)
      : name(std::move(n)), passed(ok), detail(std::move(d)), seed(s) {}
};

inline json to_json(const Check& c) {
  json j{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

struct SeedResult {
  std::uint64_t seed = 0;
  double regret = 0.0;
  double total_loss = 0.0;
  double comparator = 0.0;
  int projections = 0;
  double slope = 0.0;  // log-log slope of the cumulative regret curve (or gap vs N)
  double runtime = 0.0;
  std::vector<Check> checks;
  std::string error;
};

struct RunOutcome {
  std::vector<SeedResult> seeds;
  std::vector<Check> checks;
  bool passed = true;
  fs::path directory;
};

namespace detail {

inline std::string seed_file(const std::string& stem, std::uint64_t seed, const std::string& ext) {
  return stem + "_seed" + std::to_string(seed) + ext;
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

// slope of log R(t) against log t on t = 2^k (cumulative regret, positive points only)
inline double regret_curve_slope(const std::vector<double>& per_round) {
  std::vector<double> ts, rs;
  double cum = 0.0;
  std::size_t next = 16;
  for (std::size_t t = 1; t <= per_round.size(); ++t) {
    cum += per_round[t - 1];
    if (t == next || t == per_round.size()) {
      ts.push_back(static_cast<double>(t));
      rs.push_back(cum);
      next *= 2;
    }
  }
  if (ts.size() < 2) return 0.0;
  return stats::loglog_slope(ts, rs);
}

inline std::string row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

inline std::string vec_cells(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline std::string cew_header(const std::string& stem, int d) {
  std::string h = "round";
  for (int k = 1; k <= d; ++k) h += "," + stem + "_" + std::to_string(k);
  return h + ",c,theta_hat_norm,bonus_norm,acceptance_rate\n";
}

inline std::string cew_rows(const std::vector<CewRound>& rounds, int first_round = 1) {
  std::string s;
  int t = first_round;
  for (const auto& r : rounds)
    s += row({std::to_string(t++), vec_cells(r.y), format_double(r.c), format_double(r.theta_hat_norm),
              format_double(r.bonus_norm), format_double(r.acceptance)});
  return s;
}

inline void sandwich_check(SeedResult& out, const std::vector<CewRound>& rounds) {
  double lo = 1.0, hi = 1.0;
  for (const auto& r : rounds) {
    lo = std::min(lo, r.sandwich_lo);
    hi = std::max(hi, r.sandwich_hi);
  }
  out.checks.push_back({"moment_sandwich", lo >= 0.7 && hi <= 1.4,
                        "extreme generalized eigenvalues " + format_double(lo) + ", " + format_double(hi),
                        out.seed});
}

}  // namespace detail

/// Best fixed point of a polytope for the summed loss.
inline double best_fixed_loss(const EmpiricalPolytope& poly, const std::vector<Vector>& thetas) {
  Vector s = Vector::Zero(poly.dim());
  for (const auto& th : thetas) s += th;
  const Vector best = poly.optimize(s, Sense::Min).point;
  double l = 0.0;
  for (const auto& th : thetas) l += best.dot(th);
  return l;
}

/// One seed of a cew_only run: CEW on a fixed polytope with Bernoulli feedback,
/// optionally biased by at most `bias` per round.
inline SeedResult run_cew_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
  SeedResult out;
  out.seed = seed;
  std::vector<std::pair<ActionSet, double>> items;
  for (auto& r : read_action_sets_file((c.base_dir / c.polytope_file).string())) items.emplace_back(r.set, r.weight);
  EmpiricalPolytope poly = EmpiricalPolytope::from_weighted(items);
  Adversary adv = build_adversary(c, poly.dim());
  CewConfig cfg = c.cew;
  cfg.horizon = c.horizon;
  cfg.epsilon = std::max(cfg.epsilon, c.bias);
  cfg.seed = seed;
  Rng fb(derive_seed(seed, {stream::kFeedback}));
  auto feedback = [&](const Vector& y, int t) {
    const Vector& th = adv.theta(t);
    const double l = y.dot(th);
    double shift = 0.0;
    if (c.bias_kind == "constant") {
      shift = c.bias;
    } else if (c.bias_kind == "adversarial") {
      // +bias at the best point, -bias at the worst
      const double lo = poly.support_value(-th) * -1.0, hi = poly.support_value(th);
      const double s = hi > lo ? 1.0 - 2.0 * (l - lo) / (hi - lo) : 0.0;
      shift = c.bias * s;
    }
    const double mean = l + shift;
    if (!(mean >= -1e-12 && mean <= 1.0 + 1e-12)) throw InvariantViolation("biased feedback mean outside [0, 1]");
    return uniform_open(fb) < mean ? 1.0 : 0.0;
  };
  CewTrace tr = run_cew(poly, cfg, feedback);
  std::vector<double> per_round;
  const double best = best_fixed_loss(poly, adv.thetas());
  out.comparator = best;
  for (std::size_t t = 0; t < tr.rounds.size(); ++t) {
    const double l = tr.rounds[t].y.dot(adv.theta(static_cast<int>(t) + 1));
    out.total_loss += l;
    per_round.push_back(l - best / c.horizon);
  }
  out.regret = out.total_loss - best;
  out.slope = detail::regret_curve_slope(per_round);
  detail::write_text(dir / detail::seed_file("trace", seed, ".csv"),
                     detail::cew_header("y", poly.dim()) + detail::cew_rows(tr.rounds));
  bool in_range = true;
  for (const auto& r : tr.rounds) in_range = in_range && (r.c == 0.0 || r.c == 1.0);
  out.checks.push_back({"feedback_range", in_range, "feedback values in {0, 1}", seed});
  detail::sandwich_check(out, tr.rounds);
  return out;
}

inline SeedResult run_reduction_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
  SeedResult out;
  out.seed = seed;
  Environment env{build_contexts(c), Adversary::constant(Vector::Zero(1), 1)};
  env.adversary = build_adversary(c, env.contexts.dim());
  if (c.adversary.normalize) env.adversary.normalize(env.contexts);
  ReductionConfig rc = c.reduction;
  rc.seed = seed;
  RegretTrace tr;
  switch (c.mode) {
    case Mode::Doubling: tr = doubling_driver(env, rc); break;
    case Mode::Simulator: tr = simulator_mode(env, rc); break;
    default: tr = single_epoch(env, rc, c.contexts); break;
  }
  const int d = env.contexts.dim();
  out.regret = tr.regret;
  out.total_loss = tr.total_loss;
  out.comparator = tr.total_loss - tr.regret;
  out.projections = tr.projections;

  std::string trace = "round,epoch";
  for (int k = 1; k <= d; ++k) trace += ",a_" + std::to_string(k);
  trace += ",loss,expected_loss,comparator,witness_id,projected,vertices\n";
  std::vector<double> per_round;
  double sum = 0.0, comp = 0.0;
  bool in_range = true;
  for (const auto& r : tr.rounds) {
    trace += detail::row({std::to_string(r.t), std::to_string(r.epoch), detail::vec_cells(r.action),
                          format_double(r.loss), format_double(r.expected_loss), format_double(r.comparator),
                          std::to_string(r.witness_id), r.projected ? "1" : "0", std::to_string(r.k)});
    per_round.push_back(r.expected_loss - r.comparator);
    sum += r.expected_loss;
    comp += r.comparator;
    in_range = in_range && (r.loss == 0.0 || r.loss == 1.0);
  }
  detail::write_text(dir / detail::seed_file("trace", seed, ".csv"), trace);
  std::ostringstream ctx_log;
  for (std::size_t i = 0; i < tr.contexts.size(); ++i)
    write_action_set(ctx_log, tr.contexts[i], 1.0, static_cast<long long>(i + 1));
  detail::write_text(dir / detail::seed_file("contexts", seed, ".txt"), ctx_log.str());

  std::string epochs = "epoch,start,length,N,distinct_sets,hull_dim,epsilon,loss,comparator,regret,projections\n";
  for (const auto& e : tr.epochs)
    epochs += detail::row({std::to_string(e.epoch), std::to_string(e.start), std::to_string(e.length),
                           std::to_string(e.contexts), std::to_string(e.distinct_sets), std::to_string(e.hull_dim),
                           format_double(e.epsilon), format_double(e.loss), format_double(e.comparator),
                           format_double(e.loss - e.comparator), std::to_string(e.projections)});
  detail::write_text(dir / detail::seed_file("epochs", seed, ".csv"), epochs);

  // the learner's view, rounds played by CEW only (round 1 of the doubling driver is the bootstrap)
  const int first = c.mode == Mode::Doubling ? 2 : 1;
  detail::write_text(dir / detail::seed_file("cew", seed, ".csv"),
                     detail::cew_header("y", d) + detail::cew_rows(tr.cew, first));

  out.slope = detail::regret_curve_slope(per_round);
  out.checks.push_back({"regret_accounting", std::abs(tr.regret - (sum - comp)) <= 1e-9 * std::max(1.0, sum),
                        "regret equals expected loss minus comparator", seed});
  out.checks.push_back({"feedback_range", in_range, "realized losses in {0, 1}", seed});
  const double rate = tr.rounds.empty() ? 0.0 : double(tr.projections) / tr.rounds.size();
  out.checks.push_back({"projection_rate", rate < 0.01, "projection events " + std::to_string(tr.projections), seed});
  if (c.mode == Mode::Doubling) {
    bool ok = true;
    for (std::size_t k = 1; k < tr.epochs.size(); ++k)
      ok = ok && tr.epochs[k].start == (1 << k) && tr.epochs[k].contexts == tr.epochs[k].start - 1;
    out.checks.push_back({"epoch_schedule", ok, "restarts at powers of two with N = start - 1", seed});
  }
  detail::sandwich_check(out, tr.cew);
  return out;
}

inline SeedResult run_convergence_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
  SeedResult out;
  out.seed = seed;
  ContextDistribution dist = build_contexts(c);
  if (!dist.has_finite_support()) throw ConfigError("uniform_convergence needs a finite-support environment");
  const Vector theta = build_adversary(c, dist.dim()).theta(1);
  Rng rng(derive_seed(seed, {stream::kProbe}));
  std::string csv = "N,gap\n";
  std::vector<double> ns, gaps;
  for (int n : c.sample_sizes) {
    const double g = empirical_uniform_convergence_gap(dist, theta, n, c.probes, rng);
    csv += detail::row({std::to_string(n), format_double(g)});
    ns.push_back(n);
    gaps.push_back(g);
  }
  detail::write_text(dir / detail::seed_file("gap", seed, ".csv"), csv);
  out.slope = stats::loglog_slope(ns, gaps);
  out.regret = gaps.back();
  return out;
}

inline SeedResult run_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedResult r;
  switch (c.mode) {
    case Mode::CewOnly: r = run_cew_seed(c, seed, dir); break;
    case Mode::UniformConvergence: r = run_convergence_seed(c, seed, dir); break;
    default: r = run_reduction_seed(c, seed, dir); break;
  }
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline void write_replay_meta(const fs::path& dir, const fs::path& config_path, std::uint64_t seed) {
  json meta{{"config", fs::absolute(config_path).string()}, {"seed", seed}};
  detail::write_text(dir / detail::seed_file("run", seed, ".json"), meta.dump(2) + "\n");
}

/// Runs every seed (worker pool of `threads`), then writes summary.csv and report.json.
inline RunOutcome run(const ExperimentConfig& c, const fs::path& config_path = {}) {
  RunOutcome outcome;
  outcome.directory = output_dir(c);
  fs::create_directories(outcome.directory);
  outcome.seeds.resize(c.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < c.seeds.size(); i = next++) {
      SeedResult& r = outcome.seeds[i];
      r.seed = c.seeds[i];
      try {
        r = run_seed(c, c.seeds[i], outcome.directory);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        r.seed = c.seeds[i];
        r.error = e.what();
      }
      if (!config_path.empty()) write_replay_meta(outcome.directory, config_path, c.seeds[i]);
    }
  };
  const int nthreads = std::min<int>(c.threads, static_cast<int>(c.seeds.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (int k = 0; k < nthreads; ++k)
      pool.emplace_back([&, k] {
        try {
          worker();
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // merge, single-threaded, in seed order
  std::string summary = c.mode == Mode::UniformConvergence ? "seed,final_gap,loglog_slope,runtime_s\n"
                                                           : "seed,regret,total_loss,comparator,projections,loglog_slope,runtime_s\n";
  std::vector<double> regrets, slopes;
  for (const auto& r : outcome.seeds) {
    if (!r.error.empty()) {
      outcome.checks.push_back({"no_runtime_error", false, r.error, r.seed});
      continue;
    }
    for (const auto& ch : r.checks) outcome.checks.push_back(ch);
    regrets.push_back(r.regret);
    slopes.push_back(r.slope);
    if (c.mode == Mode::UniformConvergence)
      summary += detail::row({std::to_string(r.seed), format_double(r.regret), format_double(r.slope),
                              format_double(r.runtime)});
    else
      summary += detail::row({std::to_string(r.seed), format_double(r.regret), format_double(r.total_loss),
                              format_double(r.comparator), std::to_string(r.projections), format_double(r.slope),
                              format_double(r.runtime)});
  }
  const std::string pad = c.mode == Mode::UniformConvergence ? ",," : ",,,,,";
  summary += "mean," + format_double(stats::mean(regrets)) + pad + "\n";
  summary += "stddev," + format_double(stats::stddev(regrets)) + pad + "\n";
  detail::write_text(outcome.directory / "summary.csv", summary);

  for (const auto& ch : outcome.checks) outcome.passed = outcome.passed && ch.passed;
  json report{{"name", c.name},
              {"mode", mode_name(c.mode)},
              {"T", c.horizon},
              {"seeds", c.seeds},
              {"passed", outcome.passed},
              {"mean", stats::mean(regrets)},
              {"stddev", stats::stddev(regrets)},
              {"mean_loglog_slope", stats::mean(slopes)},
              {"checks", json::array()}};
  if (c.mode == Mode::UniformConvergence) {
    // slope of the seed-averaged gap curve
    std::vector<double> ns(c.sample_sizes.begin(), c.sample_sizes.end()), mean_gap(ns.size(), 0.0);
    int used = 0;
    for (const auto& r : outcome.seeds) {
      if (!r.error.empty()) continue;
      std::ifstream f(outcome.directory / detail::seed_file("gap", r.seed, ".csv"));
      std::string line;
      std::getline(f, line);
      for (std::size_t i = 0; i < ns.size() && std::getline(f, line); ++i)
        mean_gap[i] += std::stod(line.substr(line.find(',') + 1));
      ++used;
    }
    for (auto& g : mean_gap) g /= std::max(used, 1);
    report["pooled_loglog_slope"] = stats::loglog_slope(ns, mean_gap);
  }
  for (const auto& ch : outcome.checks) report["checks"].push_back(to_json(ch));
  detail::write_text(outcome.directory / "report.json", report.dump(2) + "\n");
  return outcome;
}

/// Re-runs the seed that produced `trace` into a scratch directory and
/// compares every per-seed file byte for byte. Returns the mismatching files.
inline std::vector<std::string> replay(const fs::path& trace) {
  const fs::path dir = trace.parent_path();
  const std::string stem = trace.filename().string();
  const auto pos = stem.rfind("_seed");
  if (pos == std::string::npos) throw ConfigError("trace file name must contain _seed<N>");
  const std::uint64_t seed = std::stoull(stem.substr(pos + 5));
  std::ifstream mf(dir / detail::seed_file("run", seed, ".json"));
  if (!mf) throw ConfigError("no run metadata next to " + trace.string());
  json meta = json::parse(mf);
  ExperimentConfig c = load_config(meta.at("config").get<std::string>());
  const fs::path scratch = dir / (".replay_seed" + std::to_string(seed));
  fs::create_directories(scratch);
  run_seed(c, seed, scratch);
  std::vector<std::string> mismatches;
  for (const auto& entry : fs::directory_iterator(scratch)) {
    const fs::path original = dir / entry.path().filename();
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::ostringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    if (!fs::exists(original) || slurp(original) != slurp(entry.path()))
      mismatches.push_back(entry.path().filename().string());
  }
  fs::remove_all(scratch);
  return mismatches;
}

}  // namespace lcb::harness
