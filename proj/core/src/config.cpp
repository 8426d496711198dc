#include "bidlab/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace bidlab {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("config: unknown key '" + it.key() + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T* out) {
  if (obj.contains(key)) *out = obj.at(key).get<T>();
}

}  // namespace

PlannerKind planner_kind_from_string(const std::string& s) {
  if (s == "abplanner") return PlannerKind::abplanner;
  if (s == "equal_split") return PlannerKind::equal_split;
  if (s == "qmckp") return PlannerKind::qmckp;
  if (s == "hibid_prime") return PlannerKind::hibid_prime;
  if (s == "none") return PlannerKind::none;
  throw ConfigError("unknown planner kind: " + s);
}

std::string to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::abplanner: return "abplanner";
    case PlannerKind::equal_split: return "equal_split";
    case PlannerKind::qmckp: return "qmckp";
    case PlannerKind::hibid_prime: return "hibid_prime";
    case PlannerKind::none: return "none";
  }
  return "?";
}

InitialPlanMode ExperimentConfig::resolved_initial_mode() const {
  if (planner.initial_plan == "auto") {
    return bidder.kind == BidderKind::lp_hindsight ? InitialPlanMode::equal_split
                                                   : InitialPlanMode::first_episode_consumption;
  }
  return initial_plan_mode_from_string(planner.initial_plan);
}

void ExperimentConfig::validate() const {
  if (version != 1) throw ConfigError("config: unsupported version");
  if (env_type == EnvType::simenv) {
    try {
      sim.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: environment: ") + e.what());
    }
  } else {
    if (replay.log_path.empty()) throw ConfigError("config: replay needs log_path");
    if (replay.m < 1 || 86400 % replay.m != 0) {
      throw ConfigError("config: replay.m must divide 86400");
    }
    if (replay.episodes < 1) throw ConfigError("config: replay.episodes >= 1");
    if (!(replay.budget > 0.0)) throw ConfigError("config: replay.budget > 0");
    if (replay.holdout_fraction < 0.0 || replay.holdout_fraction >= 1.0) {
      throw ConfigError("config: replay.holdout_fraction in [0,1)");
    }
  }
  try {
    ppo.validate();
    qmckp.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (planner.initial_plan != "auto") {
    initial_plan_mode_from_string(planner.initial_plan);  // throws on typos
  }
  if (eval.advertisers < 1) throw ConfigError("config: eval.advertisers >= 1");
  if (network.enc_out < 1 || network.gru_hidden < 1 || network.head_hidden < 1) {
    throw ConfigError("config: network sizes must be positive");
  }
  for (int m : sweep.m_values) {
    if (m < 1) throw ConfigError("config: sweep m values must be >= 1");
  }
  if (!(bidder.gains.lambda_min > 0.0) || bidder.gains.lambda_max < bidder.gains.lambda_min) {
    throw ConfigError("config: bidder lambda bounds invalid");
  }
  if (!(bidder.initial_lambda > 0.0)) throw ConfigError("config: bidder.initial_lambda > 0");
  if (bidder.gains.window < 1) throw ConfigError("config: bidder.window >= 1");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }

  ExperimentConfig cfg;
  check_keys(root, "<root>",
             {"version", "seed", "output_dir", "environment", "bidder", "planner", "ppo",
              "qmckp", "hibid", "network", "eval", "export", "sweep"});
  read(root, "version", &cfg.version);
  read(root, "seed", &cfg.seed);
  read(root, "output_dir", &cfg.output_dir);

  if (root.contains("environment")) {
    const json& env = root.at("environment");
    std::string type = "simenv";
    read(env, "type", &type);
    if (type == "simenv") {
      cfg.env_type = EnvType::simenv;
      check_keys(env, "environment",
                 {"type", "n", "m", "episodes", "budget_low", "budget_high", "price_log_mean",
                  "price_log_stddev", "stage_log_mean", "stage_log_stddev", "pareto_scale"});
      read(env, "n", &cfg.sim.n);
      read(env, "m", &cfg.sim.m);
      read(env, "episodes", &cfg.sim.episodes);
      read(env, "budget_low", &cfg.sim.budget_low);
      read(env, "budget_high", &cfg.sim.budget_high);
      read(env, "price_log_mean", &cfg.sim.price_log_mean);
      read(env, "price_log_stddev", &cfg.sim.price_log_stddev);
      read(env, "stage_log_mean", &cfg.sim.stage_log_mean);
      read(env, "stage_log_stddev", &cfg.sim.stage_log_stddev);
      read(env, "pareto_scale", &cfg.sim.pareto_scale);
    } else if (type == "replay") {
      cfg.env_type = EnvType::replay;
      check_keys(env, "environment",
                 {"type", "log_path", "m", "episodes", "budget", "budgets_file",
                  "holdout_fraction"});
      read(env, "log_path", &cfg.replay.log_path);
      read(env, "m", &cfg.replay.m);
      read(env, "episodes", &cfg.replay.episodes);
      read(env, "budget", &cfg.replay.budget);
      read(env, "budgets_file", &cfg.replay.budgets_file);
      read(env, "holdout_fraction", &cfg.replay.holdout_fraction);
    } else {
      throw ConfigError("config: environment.type must be simenv or replay");
    }
  }

  if (root.contains("bidder")) {
    const json& b = root.at("bidder");
    check_keys(b, "bidder",
               {"kind", "kp", "ki", "kd", "window", "lambda_min", "lambda_max",
                "initial_lambda", "fixed_lambda"});
    std::string kind = "pid";
    read(b, "kind", &kind);
    cfg.bidder.kind = bidder_kind_from_string(kind);
    read(b, "kp", &cfg.bidder.gains.kp);
    read(b, "ki", &cfg.bidder.gains.ki);
    read(b, "kd", &cfg.bidder.gains.kd);
    read(b, "window", &cfg.bidder.gains.window);
    read(b, "lambda_min", &cfg.bidder.gains.lambda_min);
    read(b, "lambda_max", &cfg.bidder.gains.lambda_max);
    read(b, "initial_lambda", &cfg.bidder.initial_lambda);
    read(b, "fixed_lambda", &cfg.bidder.fixed_lambda);
  }

  if (root.contains("planner")) {
    const json& p = root.at("planner");
    check_keys(p, "planner", {"kind", "initial_plan", "action_clamp"});
    std::string kind = "abplanner";
    read(p, "kind", &kind);
    cfg.planner.kind = planner_kind_from_string(kind);
    read(p, "initial_plan", &cfg.planner.initial_plan);
    read(p, "action_clamp", &cfg.planner.action_clamp);
  }

  if (root.contains("ppo")) {
    const json& p = root.at("ppo");
    check_keys(p, "ppo",
               {"clip", "learning_rate", "gamma", "gae_lambda", "epochs",
                "trajectories_per_iteration", "minibatch_trajectories", "entropy_coef",
                "value_coef", "iterations"});
    read(p, "clip", &cfg.ppo.clip);
    read(p, "learning_rate", &cfg.ppo.learning_rate);
    read(p, "gamma", &cfg.ppo.gamma);
    read(p, "gae_lambda", &cfg.ppo.gae_lambda);
    read(p, "epochs", &cfg.ppo.epochs);
    read(p, "trajectories_per_iteration", &cfg.ppo.trajectories_per_iteration);
    read(p, "minibatch_trajectories", &cfg.ppo.minibatch_trajectories);
    read(p, "entropy_coef", &cfg.ppo.entropy_coef);
    read(p, "value_coef", &cfg.ppo.value_coef);
    read(p, "iterations", &cfg.ppo.iterations);
  }

  if (root.contains("qmckp")) {
    const json& q = root.at("qmckp");
    check_keys(q, "qmckp",
               {"bins", "learning_rate", "epsilon", "enc_out", "gru_hidden", "head_hidden",
                "iterations", "advertisers_per_iteration", "epochs", "minibatch"});
    read(q, "bins", &cfg.qmckp.bins);
    read(q, "learning_rate", &cfg.qmckp.learning_rate);
    read(q, "epsilon", &cfg.qmckp.epsilon);
    read(q, "enc_out", &cfg.qmckp.enc_out);
    read(q, "gru_hidden", &cfg.qmckp.gru_hidden);
    read(q, "head_hidden", &cfg.qmckp.head_hidden);
    read(q, "iterations", &cfg.qmckp.iterations);
    read(q, "advertisers_per_iteration", &cfg.qmckp.advertisers_per_iteration);
    read(q, "epochs", &cfg.qmckp.epochs);
    read(q, "minibatch", &cfg.qmckp.minibatch);
  }

  if (root.contains("hibid")) {
    const json& h = root.at("hibid");
    check_keys(h, "hibid", {"hidden"});
    read(h, "hidden", &cfg.hibid.hidden);
  }

  if (root.contains("network")) {
    const json& n = root.at("network");
    check_keys(n, "network", {"enc_out", "gru_hidden", "head_hidden"});
    read(n, "enc_out", &cfg.network.enc_out);
    read(n, "gru_hidden", &cfg.network.gru_hidden);
    read(n, "head_hidden", &cfg.network.head_hidden);
  }

  if (root.contains("eval")) {
    const json& e = root.at("eval");
    check_keys(e, "eval", {"advertisers", "stochastic"});
    read(e, "advertisers", &cfg.eval.advertisers);
    read(e, "stochastic", &cfg.eval.stochastic);
  }

  if (root.contains("export")) {
    const json& e = root.at("export");
    check_keys(e, "export", {"advertisers", "episodes", "start_day"});
    read(e, "advertisers", &cfg.export_logs.advertisers);
    read(e, "episodes", &cfg.export_logs.episodes);
    read(e, "start_day", &cfg.export_logs.start_day);
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    check_keys(s, "sweep", {"m_values"});
    if (s.contains("m_values")) {
      cfg.sweep.m_values = s.at("m_values").get<std::vector<int>>();
    }
  }

  cfg.validate();
  return cfg;
}

std::string config_to_json_string(const ExperimentConfig& cfg, int indent) {
  json root;
  root["version"] = cfg.version;
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  if (cfg.env_type == EnvType::simenv) {
    root["environment"] = {{"type", "simenv"},
                           {"n", cfg.sim.n},
                           {"m", cfg.sim.m},
                           {"episodes", cfg.sim.episodes},
                           {"budget_low", cfg.sim.budget_low},
                           {"budget_high", cfg.sim.budget_high},
                           {"price_log_mean", cfg.sim.price_log_mean},
                           {"price_log_stddev", cfg.sim.price_log_stddev},
                           {"stage_log_mean", cfg.sim.stage_log_mean},
                           {"stage_log_stddev", cfg.sim.stage_log_stddev},
                           {"pareto_scale", cfg.sim.pareto_scale}};
  } else {
    root["environment"] = {{"type", "replay"},
                           {"log_path", cfg.replay.log_path},
                           {"m", cfg.replay.m},
                           {"episodes", cfg.replay.episodes},
                           {"budget", cfg.replay.budget},
                           {"budgets_file", cfg.replay.budgets_file},
                           {"holdout_fraction", cfg.replay.holdout_fraction}};
  }
  root["bidder"] = {{"kind", to_string(cfg.bidder.kind)},
                    {"kp", cfg.bidder.gains.kp},
                    {"ki", cfg.bidder.gains.ki},
                    {"kd", cfg.bidder.gains.kd},
                    {"window", cfg.bidder.gains.window},
                    {"lambda_min", cfg.bidder.gains.lambda_min},
                    {"lambda_max", cfg.bidder.gains.lambda_max},
                    {"initial_lambda", cfg.bidder.initial_lambda},
                    {"fixed_lambda", cfg.bidder.fixed_lambda}};
  root["planner"] = {{"kind", to_string(cfg.planner.kind)},
                     {"initial_plan", cfg.planner.initial_plan},
                     {"action_clamp", cfg.planner.action_clamp}};
  root["ppo"] = {{"clip", cfg.ppo.clip},
                 {"learning_rate", cfg.ppo.learning_rate},
                 {"gamma", cfg.ppo.gamma},
                 {"gae_lambda", cfg.ppo.gae_lambda},
                 {"epochs", cfg.ppo.epochs},
                 {"trajectories_per_iteration", cfg.ppo.trajectories_per_iteration},
                 {"minibatch_trajectories", cfg.ppo.minibatch_trajectories},
                 {"entropy_coef", cfg.ppo.entropy_coef},
                 {"value_coef", cfg.ppo.value_coef},
                 {"iterations", cfg.ppo.iterations}};
  root["qmckp"] = {{"bins", cfg.qmckp.bins},
                   {"learning_rate", cfg.qmckp.learning_rate},
                   {"epsilon", cfg.qmckp.epsilon},
                   {"enc_out", cfg.qmckp.enc_out},
                   {"gru_hidden", cfg.qmckp.gru_hidden},
                   {"head_hidden", cfg.qmckp.head_hidden},
                   {"iterations", cfg.qmckp.iterations},
                   {"advertisers_per_iteration", cfg.qmckp.advertisers_per_iteration},
                   {"epochs", cfg.qmckp.epochs},
                   {"minibatch", cfg.qmckp.minibatch}};
  root["hibid"] = {{"hidden", cfg.hibid.hidden}};
  root["network"] = {{"enc_out", cfg.network.enc_out},
                     {"gru_hidden", cfg.network.gru_hidden},
                     {"head_hidden", cfg.network.head_hidden}};
  root["eval"] = {{"advertisers", cfg.eval.advertisers}, {"stochastic", cfg.eval.stochastic}};
  root["export"] = {{"advertisers", cfg.export_logs.advertisers},
                    {"episodes", cfg.export_logs.episodes},
                    {"start_day", cfg.export_logs.start_day}};
  root["sweep"] = {{"m_values", cfg.sweep.m_values}};
  return root.dump(indent);
}

}  // namespace bidlab
