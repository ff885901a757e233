#include "ldo/harness/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Args {
  std::string config;
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
};

ldo::harness::ExperimentConfig load(const Args& a, CLI::App& sub, ldo::harness::ExperimentKind expected) {
  ldo::harness::Overrides ov;
  if (sub.count("--seed")) ov.seed = a.seed;
  if (sub.count("--out")) ov.output = a.out;
  auto cfg = ldo::harness::load_experiment_config(a.config, ov);
  if (cfg.kind != expected)
    throw ldo::harness::ConfigError(std::string("config declares kind '") + to_string(cfg.kind) + "' but the '" +
                                    sub.get_name() + "' subcommand was invoked");
  return cfg;
}

int run(const std::string& name, const Args& a, CLI::App& sub) {
  using namespace ldo::harness;
  ResultTable table;
  ExperimentConfig cfg;
  if (name == "decide") {
    cfg = load(a, sub, ExperimentKind::Decide);
    table = run_decide(cfg, read_measures_csv(a.input, cfg.require_problem()));
    write_csv(table, std::cout);
    if (sub.count("--out")) write_outputs(table, cfg.output);
    return 0;
  }
  if (name == "gap-curve") {
    cfg = load(a, sub, ExperimentKind::GapCurve);
    table = run_gap_curve(cfg);
  } else if (name == "regret-curve") {
    cfg = load(a, sub, ExperimentKind::RegretCurve);
    table = run_regret_curve(cfg);
  } else if (name == "sanov-check") {
    cfg = load(a, sub, ExperimentKind::SanovCheck);
    table = run_sanov_check(cfg);
  } else {
    cfg = load(a, sub, ExperimentKind::LaplaceCheck);
    table = run_laplace_check(cfg);
  }
  write_outputs(table, cfg.output);
  std::cerr << "wrote " << table.rows.size() << " rows to " << cfg.output << "/" << table.kind << ".csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviations optimal data-driven decisions"};
  app.require_subcommand(1);
  Args args;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gap-curve", "consistency gap of the optimal decision versus beta"},
      {"regret-curve", "average regret of decision rules along simulated data paths"},
      {"sanov-check", "exact finite-n Sanov sandwich check"},
      {"laplace-check", "finite-n Laplace identity convergence"},
      {"decide", "optimal decision for observed empirical measures"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", args.config, "experiment recipe (TOML)")->required()->check(CLI::ExistingFile);
    if (name == "decide")
      sub->add_option("-i,--input", args.input, "CSV with one empirical measure per row")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory override");
    sub->add_option("--seed", args.seed, "seed override");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  try {
    return run(sub->get_name(), args, *sub);
  } catch (const ldo::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ldo::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ldo::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ldo::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ldo::DimensionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
