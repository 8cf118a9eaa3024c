// Command-line driver for the experiment suites. Every subcommand reads an
// optional key=value config file, applies flag overrides, runs the suite and
// writes a CSV/JSON report whose bytes depend only on (config, seed).

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "desketch/experiments.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> pairs;

  void set(const std::string& key, const std::string& value) {
    pairs.emplace_back(key, value);
  }
};

void add_common_flags(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "key=value config file");
  auto track = [&ov](const std::string& key) {
    return [&ov, key](const std::string& value) { ov.set(key, value); };
  };
  cmd->add_option_function<std::string>("--seed", track("seed"), "master seed (u64)");
  cmd->add_option_function<std::string>("--out", track("out"), "output path");
  cmd->add_option_function<std::string>("--format", track("format"), "csv|json");
  cmd->add_option_function<std::string>("--threads", track("threads"), "worker threads");
  cmd->add_option_function<std::string>("--dataset", track("dataset"),
                                        "dataset spec (csv:<path>, libsvm:<path>, boston-like, "
                                        "statlog-like, synthetic-reg:..., synthetic-logistic:...)");
  cmd->add_option_function<std::string>("--preprocessing", track("preprocessing"),
                                        "none|standardize_columns|add_intercept");
  cmd->add_option_function<std::string>("--family", track("family"), "sketch family");
  cmd->add_option_function<std::string>("--m", track("m"), "sketch size");
  cmd->add_option_function<std::string>("--m-grid", track("m_grid"), "comma list of sketch sizes");
  cmd->add_option_function<std::string>("--lambda", track("lambda"), "global regularizer");
  cmd->add_option_function<std::string>("--scaled", track("scaled"), "on|off|both");
  cmd->add_option_function<std::string>("--q-grid", track("q_grid"), "comma list of worker counts");
  cmd->add_option_function<std::string>("--trials", track("trials"), "trials / draws");
  cmd->add_option_function<std::string>("--t-max", track("t_max"), "iteration budget");
  cmd->add_option_function<std::string>("--tol", track("tol"), "relative error stop");
  cmd->add_option_function<std::string>("--loss", track("loss"),
                                        "quadratic|logistic|log_barrier");
  cmd->add_option_function<std::string>("--solver", track("solver"),
                                        "dist_ihs|dist_newton_sketch");
  cmd->add_option_function<std::string>("--lambda-local-grid", track("lambda_local_grid"),
                                        "comma list for the local regularizer sweep");
  cmd->add_option_function<std::string>("--barrier-t", track("barrier_t"), "log-barrier width");
  cmd->add_option_function<std::string>("--dpp-method", track("dpp_method"),
                                        "spectral|rejection");
}

desketch::ExperimentConfig build_config(const CliOverrides& ov, const std::string& experiment,
                                        const std::vector<std::pair<std::string, std::string>>&
                                            defaults) {
  desketch::ExperimentConfig cfg;
  if (!ov.config_path.empty()) cfg = desketch::load_experiment_config(ov.config_path);
  for (const auto& [k, v] : defaults) {
    desketch::apply_config_line(cfg, k, v);
  }
  cfg.experiment = experiment;
  for (const auto& [k, v] : ov.pairs) {
    desketch::apply_config_line(cfg, k, v);
  }
  if (cfg.out.empty()) {
    cfg.out = experiment + (cfg.format == desketch::ReportFormat::csv ? ".csv" : ".json");
  }
  return cfg;
}

int run(const desketch::ExperimentConfig& cfg) {
  const desketch::ExperimentReport report = desketch::run_experiment(cfg);
  desketch::emit_report(report, cfg.out, cfg.format);
  std::cout << cfg.experiment << ": " << report.rows.size() << " rows -> " << cfg.out << "\n";
  // Surface headline numbers for the interactive user.
  for (const auto& [k, v] : report.config) {
    if (k.rfind("tv_", 0) == 0 || k.rfind("chi2_", 0) == 0 || k == "d_lambda" ||
        k == "lambda_prime_theorem" || k == "mean_rejection_rounds") {
      std::cout << "  " << k << " = " << v << "\n";
    }
  }
  if (cfg.experiment == "effective_dim" && !report.rows.empty()) {
    for (std::size_t j = 0; j < report.columns.size(); ++j) {
      std::cout << "  " << report.columns[j] << " = ";
      const auto& cell = report.rows[0][j];
      if (std::holds_alternative<std::int64_t>(cell)) {
        std::cout << std::get<std::int64_t>(cell);
      } else if (std::holds_alternative<double>(cell)) {
        std::cout << desketch::format_double(std::get<double>(cell));
      } else {
        std::cout << std::get<std::string>(cell);
      }
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debiased distributed sketching workbench"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    const char* experiment;
    std::vector<std::pair<std::string, std::string>> defaults;
  };
  const std::vector<Sub> subs = {
      {"effective-dim", "effective dimension and scaled regularizer for a dataset",
       "effective_dim", {}},
      {"bias-sweep", "estimation error of averaged estimates vs worker count",
       "bias_sweep", {}},
      {"avg-compare", "surrogate sketch vs unweighted and determinantal averaging",
       "avg_compare", {{"trials", "100"}}},
      {"converge", "distributed Newton sketch error vs iteration",
       "convergence",
       {{"dataset", "statlog-like"}, {"loss", "logistic"}, {"lambda", "0.0001"},
        {"q_grid", "100"}, {"t_max", "25"}, {"trials", "5"}}},
      {"lp-sweep", "bias across local regularizer values",
       "lp_sweep", {{"trials", "25"}}},
      {"dpp-check", "sampler distributions vs the enumeration oracle",
       "dpp_check",
       {{"dataset", "synthetic-reg:n=6,d=2,noise=1,seed=7"}, {"lambda", "1"},
        {"trials", "100000"}}},
      {"concentration", "spectral error of averaged inverse Hessians",
       "concentration",
       {{"dataset", "synthetic-reg:n=300,d=10,noise=1,seed=3"}, {"lambda", "5"},
        {"m", "40"}, {"trials", "50"}}},
  };

  std::vector<CliOverrides> overrides(subs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common_flags(cmd, overrides[i]);
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (cmds[i]->parsed()) {
        return run(build_config(overrides[i], subs[i].experiment, subs[i].defaults));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
