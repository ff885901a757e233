#pragma once

// Experiment runners behind the CLI: consistency-gap and regret curves, Sanov and Laplace
// checks, and one-shot decisions.

#include "ldo/harness/config.hpp"
#include "ldo/harness/table.hpp"
#include "ldo/parallel.hpp"
#include "ldo/problems.hpp"
#include "ldo/sim.hpp"
#include "ldo/solver.hpp"
#include "ldo/verify.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ldo::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { GapCurve, RegretCurve, SanovCheck, LaplaceCheck, Decide };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GapCurve: return "gap_curve";
    case ExperimentKind::RegretCurve: return "regret_curve";
    case ExperimentKind::SanovCheck: return "sanov_check";
    case ExperimentKind::LaplaceCheck: return "laplace_check";
    case ExperimentKind::Decide: return "decide";
  }
  return "?";
}

struct SimulationSpec {
  std::string source = "iid";  // iid | mixture | markov | gaussian
  Vec theta;                   // nominal parameter (regret is evaluated here)
  Vec theta1, theta2;
  double p1 = 0.5;
  int n_max = 800;
  int paths = 300;
  std::vector<int> n_grid;
  int gap_samples = 0;
  double gap_floor = 0.05;
  std::vector<std::string> methods{"optimal_cost", "optimal_regret", "plugin"};
};

struct SanovSpec {
  std::vector<Vec> thetas;
  std::vector<std::vector<int>> n_lists;
  std::vector<double> radii{0.0};
  double threshold = 0.5;
  int ball_grid = 50;
};

struct LaplaceSpec {
  Vec theta;
  std::vector<int> n_list{5, 10, 20, 40};
  int grid = 400;
  std::string f = "neg_sq_dist";  // neg_sq_dist | linear | zero
  Vec a;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::GapCurve;
  std::uint64_t seed = 0;
  std::string output = "out";
  unsigned workers = 0;
  std::optional<DecisionProblem> problem;
  std::optional<RateFunction> rate;
  std::vector<double> betas{1.0};
  std::optional<double> alpha;  // fixed alpha; default alpha = beta
  std::vector<double> rs{0.01};
  std::vector<Objective> objectives{Objective::Regret};
  int multistart = 32;
  int outer_multistart = 8;
  double inner_tol = 1e-8;
  double outer_tol = 1e-8;
  int max_iter = 2000;
  SimulationSpec sim;
  SanovSpec sanov;
  LaplaceSpec laplace;
  TomlDoc doc;  // effective configuration (overrides applied)

  std::string canonical_text() const { return doc.to_string(); }
  std::string hash() const { return hex64(fnv1a(canonical_text())); }

  SolverConfig solver(double beta, double r) const {
    if (!rate) throw ConfigError("a [rate] section is required for this experiment");
    SolverConfig c(r, Penalty(alpha.value_or(beta), beta), *rate);
    c.multistart = multistart;
    c.outer_multistart = outer_multistart;
    c.inner_tol = inner_tol;
    c.outer_tol = outer_tol;
    c.max_iter = max_iter;
    c.seed = seed;
    return c;
  }

  const DecisionProblem& require_problem() const {
    if (!problem) throw ConfigError("a [problem] section is required for this experiment");
    return *problem;
  }
};

namespace detail {

inline std::vector<int> to_ints(const std::vector<double>& xs, const std::string& what) {
  std::vector<int> out;
  for (double x : xs) {
    if (x != std::floor(x) || x < 1) throw ConfigError(what + " must contain positive integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

inline DecisionProblem parse_problem(ConfigReader& rd, const std::filesystem::path& base_dir) {
  const std::string kind = rd.string("problem", "kind");
  if (kind == "newsvendor") {
    return DecisionProblem::newsvendor(rd.number("problem", "kappa", 1.0), rd.number("problem", "price", 1.65),
                                       rd.number("problem", "rho", 0.0025),
                                       static_cast<int>(rd.integer("problem", "d", 8)),
                                       rd.number("problem", "floor", 0.001));
  }
  if (kind == "markov_newsvendor") {
    return DecisionProblem::markov_newsvendor(
        rd.number("problem", "kappa", 1.0), rd.number("problem", "price", 1.65), rd.number("problem", "rho", 0.0025),
        static_cast<int>(rd.integer("problem", "states", 3)), rd.number("problem", "floor", 0.01));
  }
  if (kind == "portfolio") {
    return DecisionProblem::portfolio(rd.number("problem", "rho", 1.0), rd.matrix("problem", "sigma"),
                                      rd.boolean("problem", "short_selling", false),
                                      rd.number("problem", "theta_radius", 10000.0));
  }
  if (kind == "finite_loss") {
    std::filesystem::path p = rd.string("problem", "loss_table");
    if (p.is_relative()) p = base_dir / p;
    LossTable t = read_loss_table_csv(p.string());
    return DecisionProblem::finite_loss(t.grid, t.loss, rd.number("problem", "rho"),
                                        rd.number("problem", "floor", 0.001));
  }
  throw ConfigError("unknown [problem].kind '" + kind + "'");
}

inline RateFunction parse_rate(ConfigReader& rd, const std::optional<DecisionProblem>& problem) {
  const std::string kind = rd.string("rate", "kind");
  if (kind == "lln") return RateFunction::lln();
  if (kind == "rlln") return RateFunction::rlln_ball(rd.number("rate", "radius"));
  if (kind == "rel_entropy") return RateFunction::rel_entropy();
  if (kind == "robust_rel_entropy") {
    const double default_floor = problem ? problem->param_space().floor() : 0.0;
    return RateFunction::robust_rel_entropy(rd.number("rate", "radius"), rd.number("rate", "floor", default_floor));
  }
  if (kind == "gaussian") {
    if (rd.has("rate", "sigma")) return RateFunction::gaussian(rd.matrix("rate", "sigma"));
    if (problem)
      if (auto* pc = std::get_if<PortfolioCost>(&problem->cost_model())) return RateFunction::gaussian(pc->sigma);
    throw ConfigError("[rate].sigma is required for a gaussian rate outside the portfolio problem");
  }
  if (kind == "cond_rel_entropy") {
    if (rd.has("rate", "states")) return RateFunction::cond_rel_entropy(static_cast<int>(rd.integer("rate", "states")));
    if (problem)
      if (auto* sp = std::get_if<StationaryPairMatrices>(&problem->param_space().variant()))
        return RateFunction::cond_rel_entropy(sp->states);
    throw ConfigError("[rate].states is required for cond_rel_entropy");
  }
  throw ConfigError("unknown [rate].kind '" + kind + "'");
}

}  // namespace detail

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

/// Parses a recipe. Unknown keys, missing mandatory keys and invalid values raise ConfigError.
inline ExperimentConfig parse_experiment_config(const std::string& text, const Overrides& ov = {},
                                                const std::filesystem::path& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.doc = parse_toml(text);
  if (ov.seed) {
    TomlValue v;
    v.type = TomlValue::Type::Int;
    v.i = static_cast<long long>(*ov.seed);
    cfg.doc.sections["experiment"]["seed"] = v;
  }
  if (ov.output) {
    TomlValue v;
    v.type = TomlValue::Type::String;
    v.s = *ov.output;
    cfg.doc.sections["experiment"]["output"] = v;
  }
  ConfigReader rd(cfg.doc);
  try {
    const std::string kind = rd.string("experiment", "kind");
    if (kind == "gap_curve") cfg.kind = ExperimentKind::GapCurve;
    else if (kind == "regret_curve") cfg.kind = ExperimentKind::RegretCurve;
    else if (kind == "sanov_check") cfg.kind = ExperimentKind::SanovCheck;
    else if (kind == "laplace_check") cfg.kind = ExperimentKind::LaplaceCheck;
    else if (kind == "decide") cfg.kind = ExperimentKind::Decide;
    else throw ConfigError("unknown [experiment].kind '" + kind + "'");
    const long long seed = rd.integer("experiment", "seed");
    if (seed < 0) throw ConfigError("[experiment].seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output = rd.string("experiment", "output", "out");
    cfg.workers = static_cast<unsigned>(rd.integer("experiment", "workers", 0));

    if (rd.has_section("problem")) cfg.problem = detail::parse_problem(rd, base_dir);
    if (rd.has_section("rate")) cfg.rate = detail::parse_rate(rd, cfg.problem);

    cfg.betas = rd.numbers("penalty", "betas", cfg.betas);
    if (rd.has("penalty", "alpha")) cfg.alpha = rd.number("penalty", "alpha");
    for (double b : cfg.betas)
      if (!(b > 0.0)) throw ConfigError("[penalty].betas must be positive");
    if (cfg.alpha && !(*cfg.alpha > 0.0)) throw ConfigError("[penalty].alpha must be positive");

    cfg.rs = rd.numbers("solver", "r", cfg.rs);
    for (double r : cfg.rs)
      if (!(r > 0.0)) throw ConfigError("[solver].r must be positive");
    cfg.objectives.clear();
    for (const auto& g : rd.strings("solver", "objective", {"regret"})) cfg.objectives.push_back(parse_objective(g));
    cfg.multistart = static_cast<int>(rd.integer("solver", "multistart", cfg.multistart));
    cfg.outer_multistart = static_cast<int>(rd.integer("solver", "outer_multistart", cfg.outer_multistart));
    cfg.inner_tol = rd.number("solver", "inner_tol", cfg.inner_tol);
    cfg.outer_tol = rd.number("solver", "outer_tol", cfg.outer_tol);
    cfg.max_iter = static_cast<int>(rd.integer("solver", "max_iter", cfg.max_iter));

    auto& s = cfg.sim;
    if (rd.has_section("simulation")) {
      s.source = rd.string("simulation", "source", s.source);
      if (rd.has("simulation", "theta")) s.theta = rd.vector("simulation", "theta");
      if (rd.has("simulation", "theta1")) s.theta1 = rd.vector("simulation", "theta1");
      if (rd.has("simulation", "theta2")) s.theta2 = rd.vector("simulation", "theta2");
      s.p1 = rd.number("simulation", "p1", s.p1);
      s.n_max = static_cast<int>(rd.integer("simulation", "n_max", s.n_max));
      s.paths = static_cast<int>(rd.integer("simulation", "paths", s.paths));
      const int step = static_cast<int>(rd.integer("simulation", "n_step", s.source == "mixture" ? 10 : 5));
      if (rd.has("simulation", "n_grid")) s.n_grid = detail::to_ints(rd.numbers("simulation", "n_grid"), "n_grid");
      else
        for (int n = step; n <= s.n_max; n += step) s.n_grid.push_back(n);
      s.gap_samples = static_cast<int>(rd.integer("simulation", "gap_samples", s.gap_samples));
      s.gap_floor = rd.number("simulation", "gap_floor", s.gap_floor);
      s.methods = rd.strings("simulation", "methods", s.methods);
      if (!(s.p1 >= 0.0 && s.p1 <= 1.0)) throw ConfigError("[simulation].p1 must lie in [0, 1]");
      if (s.n_max < 1 || s.paths < 1 || step < 1) throw ConfigError("[simulation] sizes must be positive");
      for (const auto& m : s.methods)
        if (m != "optimal_cost" && m != "optimal_regret" && m != "plugin")
          throw ConfigError("unknown method '" + m + "' (optimal_cost, optimal_regret, plugin)");
    }
    if (rd.has_section("sanov")) {
      for (const auto& t : rd.nested_numbers("sanov", "thetas"))
        cfg.sanov.thetas.push_back(Eigen::Map<const Vec>(t.data(), static_cast<Eigen::Index>(t.size())));
      for (const auto& l : rd.nested_numbers("sanov", "n_lists"))
        cfg.sanov.n_lists.push_back(detail::to_ints(l, "[sanov].n_lists"));
      cfg.sanov.radii = rd.numbers("sanov", "radii", cfg.sanov.radii);
      cfg.sanov.threshold = rd.number("sanov", "threshold", cfg.sanov.threshold);
      cfg.sanov.ball_grid = static_cast<int>(rd.integer("sanov", "ball_grid", cfg.sanov.ball_grid));
      if (cfg.sanov.thetas.size() != cfg.sanov.n_lists.size())
        throw ConfigError("[sanov].thetas and [sanov].n_lists must have equal length");
    }
    if (rd.has_section("laplace")) {
      cfg.laplace.theta = rd.vector("laplace", "theta");
      cfg.laplace.n_list = detail::to_ints(rd.numbers("laplace", "n_list", {5, 10, 20, 40}), "[laplace].n_list");
      cfg.laplace.grid = static_cast<int>(rd.integer("laplace", "grid", cfg.laplace.grid));
      cfg.laplace.f = rd.string("laplace", "f", cfg.laplace.f);
      if (rd.has("laplace", "a")) cfg.laplace.a = rd.vector("laplace", "a");
      if (cfg.laplace.f == "linear" && cfg.laplace.a.size() != cfg.laplace.theta.size())
        throw ConfigError("[laplace].a must match the dimension of [laplace].theta");
      if (cfg.laplace.f != "linear" && cfg.laplace.f != "neg_sq_dist" && cfg.laplace.f != "zero")
        throw ConfigError("unknown [laplace].f '" + cfg.laplace.f + "'");
    }
    rd.check_unknown();
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError& e) {
    throw ConfigError(std::string("while reading a config-referenced file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path, const Overrides& ov = {}) {
  return parse_experiment_config(read_text_file(path), ov, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------------------------

namespace detail {

inline ResultTable new_table(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ResultTable t;
  t.kind = to_string(cfg.kind);
  t.columns = std::move(columns);
  t.metadata["kind"] = t.kind;
  t.metadata["artifact_version"] = kVersion;
  t.metadata["seed"] = cfg.seed;
  t.metadata["config_hash"] = cfg.hash();
  t.metadata["config"] = cfg.canonical_text();
  return t;
}

inline Vec require_theta(const ExperimentConfig& cfg) {
  const DecisionProblem& p = cfg.require_problem();
  if (cfg.sim.theta.size() != p.param_dim())
    throw ConfigError("[simulation].theta must have " + std::to_string(p.param_dim()) + " entries");
  if (!p.param_space().contains(cfg.sim.theta, 1e-9))
    throw ConfigError("[simulation].theta is not in the parameter space " + p.param_space().describe());
  return cfg.sim.theta;
}

}  // namespace detail

/// Gap of the optimal decision at theta and its average over sampled parameters.
inline ResultTable run_gap_curve(const ExperimentConfig& cfg) {
  const DecisionProblem& base = cfg.require_problem();
  const Vec theta = detail::require_theta(cfg);
  ResultTable t = detail::new_table(cfg, {"beta", "r", "g", "gap_true", "gap_avg", "status"});
  const int m = cfg.sim.gap_samples;
  std::vector<Vec> samples;
  if (m > 0) {
    if (!base.param_space().is_simplex()) throw ConfigError("gap averaging needs a simplex parameter space");
    const ParamSpace draw = ParamSpace::simplex(base.param_dim(), cfg.sim.gap_floor);
    for (int j = 0; j < m; ++j) {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(j), 0x6a9);
      samples.push_back(sample_param(draw, rng));
    }
  }
  struct Item {
    std::size_t row;
    int sample;  // -1: true theta
  };
  struct Row {
    double beta, r;
    Objective g;
    double gap_true = std::nan("");
    std::vector<double> gaps;
    std::string status = "ok";
  };
  std::vector<Row> rows;
  std::vector<Item> items;
  for (double beta : cfg.betas)
    for (double r : cfg.rs)
      for (Objective g : cfg.objectives) {
        rows.push_back({beta, r, g, std::nan(""), std::vector<double>(m, std::nan("")), "ok"});
        for (int j = -1; j < m; ++j) items.push_back({rows.size() - 1, j});
      }
  std::mutex mu;
  parallel_for(
      items.size(),
      [&](std::size_t k) {
        const Item it = items[k];
        Row& row = rows[it.row];
        try {
          const SolverConfig sc = cfg.solver(row.beta, row.r);
          const DecisionProblem p = base.with_objective(row.g);
          const double gap = consistency_gap(it.sample < 0 ? theta : samples[it.sample], p, sc);
          std::lock_guard<std::mutex> lock(mu);
          (it.sample < 0 ? row.gap_true : row.gaps[it.sample]) = gap;
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(mu);
          row.status = std::string("error: ") + e.what();
        }
      },
      cfg.workers ? cfg.workers : default_workers());
  for (const Row& row : rows) {
    double avg = std::nan("");
    if (m > 0) {
      avg = 0.0;
      for (double gv : row.gaps) avg += gv;
      avg /= m;
    }
    t.add_row({row.beta, row.r, std::string(to_string(row.g)), row.gap_true, avg, row.status});
  }
  t.sort_canonical();
  return t;
}

/// Average regret at the nominal theta of each decision rule along the simulated data paths.
inline ResultTable run_regret_curve(const ExperimentConfig& cfg) {
  const DecisionProblem& base = cfg.require_problem();
  const Vec theta = detail::require_theta(cfg);
  const auto& s = cfg.sim;
  if (s.n_grid.empty()) throw ConfigError("[simulation] n grid is empty");
  const int n_max = *std::max_element(s.n_grid.begin(), s.n_grid.end());

  PathBatch batch;
  if (s.source == "iid") batch = gen_iid_categorical(theta, n_max, s.paths, cfg.seed);
  else if (s.source == "mixture") {
    if (s.theta1.size() != theta.size() || s.theta2.size() != theta.size())
      throw ConfigError("[simulation].theta1/theta2 must match the dimension of theta");
    batch = gen_mixture_sources(s.theta1, s.theta2, s.p1, n_max, s.paths, cfg.seed).first;
  } else if (s.source == "markov") {
    const auto* sp = std::get_if<StationaryPairMatrices>(&base.param_space().variant());
    if (!sp) throw ConfigError("markov source needs the markov_newsvendor problem");
    batch = gen_markov_chain(ProbMatrix::from_flat(theta, sp->states, true), n_max, s.paths, cfg.seed);
  } else if (s.source == "gaussian") {
    const auto* pc = std::get_if<PortfolioCost>(&base.cost_model());
    if (!pc) throw ConfigError("gaussian source needs the portfolio problem");
    batch = gen_gaussian_iid(theta, pc->sigma, n_max, s.paths, cfg.seed);
  } else {
    throw ConfigError("unknown [simulation].source '" + s.source + "'");
  }

  ResultTable t = detail::new_table(cfg, {"method", "beta", "r", "n", "avg_regret", "stderr", "status"});
  struct Series {
    std::string method;
    double beta, r;
  };
  std::vector<Series> series;
  for (const auto& m : s.methods) {
    if (m == "plugin") {
      series.push_back({m, 0.0, 0.0});
      continue;
    }
    for (double beta : cfg.betas)
      for (double r : cfg.rs) series.push_back({m, beta, r});
  }
  const std::size_t nn = s.n_grid.size();
  const std::size_t K = static_cast<std::size_t>(s.paths);
  std::vector<double> regrets(series.size() * nn * K, std::nan(""));
  std::vector<std::string> status(series.size() * nn, "ok");
  std::mutex mu;
  std::map<std::string, Vec> cache;  // repeated empirical measures share one decision

  parallel_for(
      series.size() * nn * K,
      [&](std::size_t idx) {
        const std::size_t k = idx % K;
        const std::size_t ni = (idx / K) % nn;
        const std::size_t si = idx / (K * nn);
        const Series& se = series[si];
        try {
          const Vec z = batch_statistic(batch, static_cast<int>(k), s.n_grid[ni]);
          std::string key = se.method + "|" + format_double(se.beta) + "|" + format_double(se.r) + "|";
          key.append(reinterpret_cast<const char*>(z.data()), sizeof(double) * static_cast<std::size_t>(z.size()));
          Vec x;
          {
            std::lock_guard<std::mutex> lock(mu);
            auto it = cache.find(key);
            if (it != cache.end()) x = it->second;
          }
          if (x.size() == 0) {
            if (se.method == "plugin") x = plugin_decision(z, base);
            else {
              const Objective g = se.method == "optimal_cost" ? Objective::Cost : Objective::Regret;
              x = optimal_decision(z, base.with_objective(g), cfg.solver(se.beta, se.r)).x_star;
            }
            std::lock_guard<std::mutex> lock(mu);
            cache.emplace(key, x);
          }
          regrets[idx] = base.regret(x, theta);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(mu);
          status[si * nn + ni] = std::string("error: ") + e.what();
        }
      },
      cfg.workers ? cfg.workers : default_workers());

  for (std::size_t si = 0; si < series.size(); ++si)
    for (std::size_t ni = 0; ni < nn; ++ni) {
      double sum = 0.0, sq = 0.0;
      int cnt = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const double v = regrets[(si * nn + ni) * K + k];
        if (std::isnan(v)) continue;
        sum += v;
        sq += v * v;
        ++cnt;
      }
      const double mean = cnt ? sum / cnt : std::nan("");
      const double var = cnt > 1 ? std::max(0.0, (sq - cnt * mean * mean) / (cnt - 1)) : 0.0;
      t.add_row({series[si].method, series[si].beta, series[si].r, static_cast<long long>(s.n_grid[ni]), mean,
                 cnt ? std::sqrt(var / cnt) : std::nan(""), status[si * nn + ni]});
    }
  t.sort_canonical();
  return t;
}

inline ResultTable run_sanov_check(const ExperimentConfig& cfg) {
  const auto& sp = cfg.sanov;
  if (sp.thetas.empty()) throw ConfigError("[sanov].thetas is required");
  ResultTable t = detail::new_table(cfg, {"d", "n", "radius", "log_prob", "neg_n_min_rate", "deviation", "slack",
                                          "holds", "degenerate", "grid_points"});
  const double thr = sp.threshold;
  auto in_A = [thr](const Vec& z) { return z[0] >= thr; };
  for (std::size_t k = 0; k < sp.thetas.size(); ++k) {
    const Vec& th = sp.thetas[k];
    if (th.minCoeff() < 0.0 || std::abs(th.sum() - 1.0) > 1e-12)
      throw ConfigError("[sanov].thetas entries must be probability vectors");
    for (int n : sp.n_lists[k])
      for (double R : sp.radii) {
        const SanovReport rep = sanov_sandwich_check(th, n, in_A, R, sp.ball_grid);
        t.add_row({static_cast<long long>(rep.d), static_cast<long long>(n), R, rep.log_prob, -n * rep.min_rate,
                   rep.deviation, rep.slack, static_cast<long long>(rep.holds), static_cast<long long>(rep.degenerate),
                   static_cast<long long>(rep.grid_points)});
      }
  }
  t.sort_canonical();
  return t;
}

inline std::function<double(const Vec&)> laplace_function(const LaplaceSpec& sp) {
  if (sp.f == "zero") return [](const Vec&) { return 0.0; };
  if (sp.f == "linear") {
    const Vec a = sp.a;
    return [a](const Vec& z) { return a.dot(z); };
  }
  const Vec th = sp.theta;
  return [th](const Vec& z) { return -(z - th).squaredNorm(); };
}

inline ResultTable run_laplace_check(const ExperimentConfig& cfg) {
  const auto& sp = cfg.laplace;
  if (sp.theta.size() < 2) throw ConfigError("[laplace].theta is required");
  ResultTable t = detail::new_table(cfg, {"n", "lhs", "rhs", "error"});
  for (const LaplaceRow& r : laplace_convergence(sp.theta, laplace_function(sp), sp.n_list, sp.grid))
    t.add_row({static_cast<long long>(r.n), r.lhs, r.rhs, r.error});
  t.sort_canonical();
  return t;
}

/// Reads observed measures (one per row, optional header) and validates them against the
/// problem's parameter space.
inline std::vector<Vec> read_measures_csv(const std::string& path, const DecisionProblem& problem) {
  std::vector<CsvRecord> records;
  try {
    records = read_csv_file(path);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ParseError*>(&e)) throw;
    throw ConfigError(e.what());
  }
  const int d = problem.param_dim();
  const bool simplex_like = !std::holds_alternative<L2Ball>(problem.param_space().variant());
  std::vector<Vec> out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (r == 0 && is_header_record(rec)) continue;
    if (static_cast<int>(rec.size()) != d)
      throw ParseError("row has " + std::to_string(rec.size()) + " entries, expected " + std::to_string(d),
                       rec[0].line, rec[0].column);
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = parse_double(rec[i]);
    if (simplex_like) {
      const double sum = z.sum();
      if (z.minCoeff() < 0.0 || std::abs(sum - 1.0) > 1e-6) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", sum);
        throw ParseError(std::string("measure is not on the simplex (entries sum to ") + buf +
                             (z.minCoeff() < 0.0 ? ", negative entry" : "") + ")",
                         rec[0].line, rec[0].column);
      }
      z /= sum;
    }
    out.push_back(std::move(z));
  }
  if (out.empty()) throw ParseError("no measures in input", 1, 1);
  return out;
}

inline ResultTable run_decide(const ExperimentConfig& cfg, const std::vector<Vec>& measures) {
  const DecisionProblem& base = cfg.require_problem();
  if (cfg.betas.size() != 1 || cfg.rs.size() != 1 || cfg.objectives.size() != 1)
    throw ConfigError("decide needs exactly one beta, one r and one objective");
  const DecisionProblem p = base.with_objective(cfg.objectives[0]);
  const SolverConfig sc = cfg.solver(cfg.betas[0], cfg.rs[0]);
  std::vector<std::string> cols{"row"};
  const int dx = p.decision_space().dimension();
  const int dt = p.param_dim();
  for (int i = 1; i <= dx; ++i) cols.push_back("x" + std::to_string(i));
  cols.push_back("u_star");
  for (int i = 1; i <= dt; ++i) cols.push_back("theta" + std::to_string(i));
  ResultTable t = detail::new_table(cfg, cols);
  for (std::size_t k = 0; k < measures.size(); ++k) {
    const DecisionOutput out = optimal_decision(measures[k], p, sc);
    std::vector<Cell> row{static_cast<long long>(k + 1)};
    for (int i = 0; i < dx; ++i) row.emplace_back(out.x_star[i]);
    row.emplace_back(out.u_star);
    for (int i = 0; i < dt; ++i) row.emplace_back(out.theta_star[i]);
    t.add_row(std::move(row));
  }
  return t;
}

/// Writes <dir>/<kind>.csv, <kind>.meta.json and, for curve experiments, <kind>.svg.
inline void write_outputs(ResultTable& t, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = (std::filesystem::path(dir) / t.kind).string();
  SvgInfo svg;
  bool has_svg = true;
  SvgOptions opt;
  if (t.kind == "gap_curve") {
    opt.group_by = {"r", "g"};
    opt.log_y = true;
    opt.title = "consistency gap vs beta";
    svg = write_svg_lines(t, "beta", {"gap_true", "gap_avg"}, stem + ".svg", opt);
  } else if (t.kind == "regret_curve") {
    opt.group_by = {"method", "beta", "r"};
    opt.log_y = true;
    opt.title = "average regret vs n";
    svg = write_svg_lines(t, "n", {"avg_regret"}, stem + ".svg", opt);
  } else if (t.kind == "laplace_check") {
    opt.log_y = true;
    opt.title = "|lhs_n - rhs|";
    svg = write_svg_lines(t, "n", {"error"}, stem + ".svg", opt);
  } else {
    has_svg = false;
  }
  if (has_svg) {
    t.metadata["svg_log_floor"] = opt.log_floor;
    t.metadata["svg_clamped_values"] = svg.clamped;
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  t.metadata["timestamp"] = ts;
  write_csv(t, stem + ".csv");
  write_metadata(t, stem + ".meta.json");
}

}  // namespace ldo::harness
