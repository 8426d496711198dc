#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bidlab/experiment.hpp"

namespace bidlab {
namespace {

std::vector<int> parse_m_values(const std::string& csv) {
  std::vector<int> values;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    values.push_back(std::stoi(token));
  }
  if (values.empty()) throw ConfigError("--m-values: no stage counts given");
  return values;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bidlab: budget planning laboratory for budget-constrained auto-bidding"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string checkpoint;
  std::string m_values_csv;
  std::uint64_t seed_value = 0;
  int workers = 1;

  CLI::Option* seed_opt = nullptr;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "path to the JSON experiment config")
        ->required();
    seed_opt = sub->add_option("--seed", seed_value, "override the config seed");
    sub->add_option("--out", out_override, "override the output location");
    sub->add_option("--workers", workers, "worker threads for collection/evaluation")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* train = app.add_subcommand("train", "train the configured planner");
  add_common(train);
  CLI::Option* train_seed = seed_opt;

  CLI::App* eval = app.add_subcommand("eval", "evaluate a planner against the vanilla bidder");
  add_common(eval);
  CLI::Option* eval_seed = seed_opt;
  eval->add_option("--checkpoint", checkpoint, "trained checkpoint to load");

  CLI::App* sweep = app.add_subcommand("sweep-stages", "train and evaluate across stage counts");
  add_common(sweep);
  CLI::Option* sweep_seed = seed_opt;
  sweep->add_option("--m-values", m_values_csv, "comma-separated stage counts (e.g. 3,6,12)");

  CLI::App* exp = app.add_subcommand("export-logs", "write synthetic streams as a replay log");
  add_common(exp);
  CLI::Option* export_seed = seed_opt;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig config = load_config(config_path);

    if (app.got_subcommand(train)) {
      if (train_seed->count() > 0) config.seed = seed_value;
      const std::string dir = out_override.empty() ? config.output_dir : out_override;
      config.output_dir = dir;
      const TrainOutputs outputs = run_train(config, dir, workers);
      out << "train: wrote " << outputs.metrics_path << " and " << outputs.checkpoint_final
          << '\n';
    } else if (app.got_subcommand(eval)) {
      if (eval_seed->count() > 0) config.seed = seed_value;
      const std::string dir = out_override.empty() ? config.output_dir : out_override;
      config.output_dir = dir;
      const EvalData data = run_eval(config, checkpoint, dir, workers);
      out << "eval: " << data.planner_returns.size() << " advertisers, mean improvement at"
          << " episode " << data.episodes - 1 << " = "
          << data.mean_improvement_at(data.episodes - 1) << '\n';
    } else if (app.got_subcommand(sweep)) {
      if (sweep_seed->count() > 0) config.seed = seed_value;
      const std::string dir = out_override.empty() ? config.output_dir : out_override;
      config.output_dir = dir;
      std::vector<int> m_values =
          m_values_csv.empty() ? config.sweep.m_values : parse_m_values(m_values_csv);
      const auto rows = run_sweep(config, m_values, dir, workers);
      for (const SweepRow& row : rows) {
        out << "m=" << row.m << " improvement=" << row.last_episode_improvement << " ["
            << row.ci.lo << ", " << row.ci.hi << "]\n";
      }
    } else if (app.got_subcommand(exp)) {
      if (export_seed->count() > 0) config.seed = seed_value;
      const std::string path =
          out_override.empty() ? config.output_dir + "/export_logs.csv" : out_override;
      run_export_logs(config, path);
      out << "export-logs: wrote " << path << '\n';
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace bidlab
