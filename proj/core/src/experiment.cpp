#include "bidlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bidlab/baselines.hpp"
#include "bidlab/parallel.hpp"
#include "bidlab/replay.hpp"
#include "bidlab/simenv.hpp"

namespace bidlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// rng domain tags; held-out evaluation never shares a stream with training
constexpr std::uint64_t kTrainAdv = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kEvalAdv = 11;
constexpr std::uint64_t kEvalStream = 12;
constexpr std::uint64_t kEvalAction = 13;
constexpr std::uint64_t kExportAdv = 21;
constexpr std::uint64_t kExportStream = 22;
constexpr std::uint64_t kBootstrap = 31;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// --- replay roster ---------------------------------------------------------

struct ReplayStore {
  std::vector<Advertiser> roster;
  std::vector<std::vector<ReplayEpisode>> episodes;  ///< parallel to roster
  int m = 24;
};

std::map<std::string, double> load_budgets_file(const std::string& path) {
  std::map<std::string, double> budgets;
  std::ifstream in(path);
  if (!in) throw ConfigError("budgets_file: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "advertiser_id,budget") {
    throw ConfigError("budgets_file: " + path + " must start with 'advertiser_id,budget'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("budgets_file: bad line: " + line);
    const std::string id = line.substr(0, comma);
    const double budget = std::stod(line.substr(comma + 1));
    if (!(budget > 0.0)) throw ConfigError("budgets_file: budget must be positive: " + line);
    budgets[id] = budget;
  }
  return budgets;
}

std::shared_ptr<const ReplayStore> build_replay_store(const ReplayEnvConfig& cfg,
                                                      bool held_out) {
  auto ingested = ingest(cfg.log_path);
  std::map<std::string, double> budgets;
  if (!cfg.budgets_file.empty()) budgets = load_budgets_file(cfg.budgets_file);

  auto store = std::make_shared<ReplayStore>();
  store->m = cfg.m;
  for (auto& [id, eps] : ingested) {
    if (static_cast<int>(eps.size()) < cfg.episodes) continue;
    // Deterministic holdout split on the advertiser id.
    const double u = static_cast<double>(fnv1a(id) >> 11) * 0x1.0p-53;
    const bool is_holdout = u < cfg.holdout_fraction;
    if (is_holdout != held_out) continue;
    Advertiser adv;
    adv.id = id;
    auto it = budgets.find(id);
    adv.budget = it != budgets.end() ? it->second : cfg.budget;
    store->roster.push_back(std::move(adv));
    store->episodes.push_back(std::move(eps));
  }
  if (store->roster.empty()) {
    throw ConfigError("replay: no advertisers with at least " + std::to_string(cfg.episodes) +
                      " logged days in the requested split");
  }
  return store;
}

}  // namespace

EnvHandle make_environment(const ExperimentConfig& config, bool held_out) {
  EnvHandle env;
  if (config.env_type == EnvType::simenv) {
    const SimConfig sim = config.sim;
    const std::uint64_t seed = config.seed;
    const std::uint64_t adv_tag = held_out ? kEvalAdv : kTrainAdv;
    const std::uint64_t stream_tag = held_out ? kEvalStream : kTrainStream;
    env.m = sim.m;
    env.episodes = sim.episodes;
    env.max_advertisers = -1;
    env.advertiser_at = [sim, seed, adv_tag, held_out](std::uint64_t lane) {
      CounterRng rng = CounterRng(seed).split(adv_tag).split(lane);
      Advertiser adv = sample_advertiser(sim, rng);
      adv.id = (held_out ? "eval-" : "train-") + std::to_string(lane);
      return adv;
    };
    env.streams_for = [sim, seed, stream_tag](const Advertiser& adv, std::uint64_t lane) {
      const CounterRng base = CounterRng(seed).split(stream_tag).split(lane);
      const Advertiser adv_copy = adv;
      return StreamSource([sim, base, adv_copy](int episode) {
        return make_episode_stream(adv_copy, sim, base.split(static_cast<std::uint64_t>(episode)));
      });
    };
  } else {
    auto store = build_replay_store(config.replay, held_out);
    env.m = config.replay.m;
    env.episodes = config.replay.episodes;
    env.max_advertisers = static_cast<int>(store->roster.size());
    env.advertiser_at = [store](std::uint64_t lane) {
      return store->roster[lane % store->roster.size()];
    };
    env.streams_for = [store](const Advertiser&, std::uint64_t lane) {
      const size_t idx = lane % store->roster.size();
      return StreamSource([store, idx](int episode) {
        return make_replay_stream(store->episodes[idx][episode], store->m);
      });
    };
  }
  return env;
}

std::vector<double> EvalData::improvements_at(int episode_index) const {
  std::vector<double> diffs;
  diffs.reserve(planner_returns.size());
  for (size_t k = 0; k < planner_returns.size(); ++k) {
    diffs.push_back(planner_returns[k][episode_index] - vanilla_returns[k][episode_index]);
  }
  return diffs;
}

double EvalData::mean_improvement_at(int episode_index) const {
  const auto diffs = improvements_at(episode_index);
  return diffs.empty() ? 0.0
                       : std::accumulate(diffs.begin(), diffs.end(), 0.0) / diffs.size();
}

double EvalData::mean_return_at(int episode_index) const {
  if (planner_returns.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : planner_returns) sum += row[episode_index];
  return sum / static_cast<double>(planner_returns.size());
}

EvalData evaluate_planner(const ExperimentConfig& config, const EnvHandle& env,
                          const PlannerFactory& factory, int advertisers, int workers) {
  EvalData data;
  data.episodes = env.episodes;
  data.m = env.m;
  data.planner_returns.resize(advertisers);
  data.vanilla_returns.resize(advertisers);
  data.plan_props.resize(advertisers);

  const BidderSpec bidder_spec = config.bidder;
  parallel_for(advertisers, workers, [&](int k) {
    const auto lane = static_cast<std::uint64_t>(k);
    const Advertiser adv = env.advertiser_at(lane);
    const StreamSource streams = env.streams_for(adv, lane);
    auto& planner_row = data.planner_returns[k];
    auto& vanilla_row = data.vanilla_returns[k];
    auto& props = data.plan_props[k];

    if (factory) {
      auto planner = factory(adv, lane);
      const AdvertiserRun run = run_advertiser_episodes(
          *planner, adv.budget, env.m, env.episodes, bidder_spec, streams, true);
      for (int e = 0; e < env.episodes; ++e) {
        planner_row.push_back(run.outcomes[e].total_return());
        std::vector<double> frac(run.plans[e].allocations());
        for (double& f : frac) f /= adv.budget;
        props.push_back(std::move(frac));
      }
      vanilla_row = run.vanilla_returns;
    } else {
      // planner = none: the reference series is the whole story; report
      // realized per-stage cost shares in place of a plan.
      auto bidder = make_bidder(bidder_spec, adv.budget);
      for (int e = 0; e < env.episodes; ++e) {
        const EpisodeStream stream = streams(e);
        const EpisodeOutcome outcome =
            run_vanilla_on_stream(stream, adv.budget, *bidder, e);
        planner_row.push_back(outcome.total_return());
        std::vector<double> frac(outcome.costs);
        for (double& f : frac) f /= adv.budget;
        props.push_back(std::move(frac));
      }
      vanilla_row = planner_row;
    }
  });
  return data;
}

void write_eval_csvs(const EvalData& data, const std::string& dir) {
  fs::create_directories(dir);
  const int n = static_cast<int>(data.planner_returns.size());

  {
    std::ofstream out(dir + "/eval_returns.csv");
    out << "episode_index,mean_return,mean_vanilla_return,mean_improvement\n";
    for (int e = 0; e < data.episodes; ++e) {
      double pr = 0.0, vr = 0.0;
      for (int k = 0; k < n; ++k) {
        pr += data.planner_returns[k][e];
        vr += data.vanilla_returns[k][e];
      }
      pr /= n;
      vr /= n;
      out << e << ',' << fmt_double(pr) << ',' << fmt_double(vr) << ','
          << fmt_double(pr - vr) << '\n';
    }
  }
  {
    std::ofstream out(dir + "/eval_advertisers.csv");
    out << "advertiser,episode_index,return,vanilla_return\n";
    for (int k = 0; k < n; ++k) {
      for (int e = 0; e < data.episodes; ++e) {
        out << k << ',' << e << ',' << fmt_double(data.planner_returns[k][e]) << ','
            << fmt_double(data.vanilla_returns[k][e]) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir + "/eval_budget_proportions.csv");
    out << "episode_index,stage,mean_proportion\n";
    for (int e = 0; e < data.episodes; ++e) {
      for (int s = 0; s < data.m; ++s) {
        double mean = 0.0;
        for (int k = 0; k < n; ++k) mean += data.plan_props[k][e][s];
        mean /= n;
        out << e << ',' << s + 1 << ',' << fmt_double(mean) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir + "/eval_plans.csv");
    out << "advertiser,episode_index,stage,proportion\n";
    for (int k = 0; k < n; ++k) {
      for (int e = 0; e < data.episodes; ++e) {
        for (int s = 0; s < data.m; ++s) {
          out << k << ',' << e << ',' << s + 1 << ',' << fmt_double(data.plan_props[k][e][s])
              << '\n';
        }
      }
    }
  }
}

BootstrapCi bootstrap_mean_ci(std::span<const double> xs, int resamples, CounterRng rng,
                              double coverage) {
  BootstrapCi ci;
  if (xs.empty()) return ci;
  const int n = static_cast<int>(xs.size());
  ci.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (n == 1 || resamples < 2) {
    ci.lo = ci.hi = ci.mean;
    return ci;
  }
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += xs[rng.uniform_int(0, n - 1)];
    means[r] = sum / n;
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - coverage) / 2.0;
  const int lo_idx = static_cast<int>(std::floor(tail * (resamples - 1)));
  const int hi_idx = static_cast<int>(std::ceil((1.0 - tail) * (resamples - 1)));
  ci.lo = means[lo_idx];
  ci.hi = means[hi_idx];
  return ci;
}

namespace {

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const std::string& dir) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["project"] = {{"name", "bidlab"}, {"version", "0.1.0"}};
  manifest["command"] = command;
  manifest["seed"] = cfg.seed;
  manifest["config"] = json::parse(config_to_json_string(cfg));
  std::ofstream out(dir + "/manifest.json");
  out << manifest.dump(2) << '\n';
}

struct MetricsWriter {
  std::ofstream out;
  std::string planner_name;  ///< empty: omit the planner column
  int episodes = 0;

  MetricsWriter(const std::string& path, int episodes_in, std::string planner)
      : out(path), planner_name(std::move(planner)), episodes(episodes_in) {
    if (!out) throw std::runtime_error("cannot write metrics file " + path);
    out << "iteration,episode_index,mean_return,mean_reward,policy_loss,value_loss,"
           "clip_fraction";
    if (!planner_name.empty()) out << ",planner";
    out << '\n';
  }

  void row(const IterationMetrics& it) {
    for (int e = 0; e < episodes; ++e) {
      out << it.iteration << ',' << e << ',' << fmt_double(it.mean_return_by_episode[e])
          << ',' << fmt_double(it.mean_reward_by_episode[e]) << ','
          << fmt_double(it.stats.policy_loss) << ',' << fmt_double(it.stats.value_loss) << ','
          << fmt_double(it.stats.clip_fraction);
      if (!planner_name.empty()) out << ',' << planner_name;
      out << '\n';
    }
  }
};

using Meta = std::vector<std::pair<std::string, std::string>>;

std::string meta_lookup(const Meta& meta, const std::string& key) {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw ConfigError("checkpoint is missing meta key '" + key + "'");
}

}  // namespace

TrainOutputs run_train(const ExperimentConfig& config, const std::string& out_dir,
                       int workers) {
  config.validate();
  const PlannerKind kind = config.planner.kind;
  if (kind == PlannerKind::none || kind == PlannerKind::equal_split) {
    throw ConfigError("planner '" + to_string(kind) + "' has nothing to train");
  }
  fs::create_directories(out_dir);

  const EnvHandle env = make_environment(config, /*held_out=*/false);
  TrainOutputs outputs;
  outputs.metrics_path = out_dir + "/metrics.csv";
  outputs.checkpoint_final = out_dir + "/checkpoint_final.ckpt";
  outputs.checkpoint_best = out_dir + "/checkpoint_best.ckpt";
  outputs.manifest_path = out_dir + "/manifest.json";

  const InitialPlanMode initial_mode = config.resolved_initial_mode();

  if (kind == PlannerKind::abplanner) {
    nn::PolicySizes sizes;
    sizes.m = env.m;
    sizes.enc_out = config.network.enc_out;
    sizes.gru_hidden = config.network.gru_hidden;
    sizes.head_hidden = config.network.head_hidden;
    PlannerRunOptions options;
    options.initial_mode = initial_mode;
    options.clamp_actions = config.planner.action_clamp;
    options.stochastic = true;

    MetricsWriter metrics(outputs.metrics_path, env.episodes, "");
    TrainCallbacks callbacks;
    callbacks.on_iteration = [&](const IterationMetrics& it) { metrics.row(it); };
    TrainResult result = train_abplanner(env, config.ppo, config.bidder, options, sizes,
                                         config.seed, workers, callbacks);

    nn::PlannerPolicy final_policy(sizes, std::move(result.final_params));
    final_policy.params().save(outputs.checkpoint_final, final_policy.checkpoint_meta());
    nn::PlannerPolicy best_policy(sizes, std::move(result.best_params));
    best_policy.params().save(outputs.checkpoint_best, best_policy.checkpoint_meta());
  } else if (kind == PlannerKind::qmckp) {
    QMckpConfig qcfg = config.qmckp;
    MetricsWriter metrics(outputs.metrics_path, env.episodes, "qmckp");
    TrainCallbacks callbacks;
    callbacks.on_iteration = [&](const IterationMetrics& it) { metrics.row(it); };
    TrainResult result = train_qmckp(env, qcfg, config.bidder, initial_mode, config.seed,
                                     workers, callbacks);
    QMckpModel final_model(env.m, qcfg, std::move(result.final_params));
    final_model.params().save(outputs.checkpoint_final, final_model.checkpoint_meta());
    QMckpModel best_model(env.m, qcfg, std::move(result.best_params));
    best_model.params().save(outputs.checkpoint_best, best_model.checkpoint_meta());
  } else {  // hibid_prime
    MetricsWriter metrics(outputs.metrics_path, env.episodes, "hibid_prime");
    TrainCallbacks callbacks;
    callbacks.on_iteration = [&](const IterationMetrics& it) { metrics.row(it); };
    TrainResult result = train_hibid(env, config.ppo, config.hibid, config.bidder,
                                     initial_mode, config.seed, workers, callbacks);
    nn::FeedforwardSizes sizes;
    sizes.obs_dim = 3;
    sizes.action_dim = 1;
    sizes.hidden = config.hibid.hidden;
    nn::FeedforwardPolicy final_policy(sizes, std::move(result.final_params));
    final_policy.params().save(outputs.checkpoint_final, final_policy.checkpoint_meta());
    nn::FeedforwardPolicy best_policy(sizes, std::move(result.best_params));
    best_policy.params().save(outputs.checkpoint_best, best_policy.checkpoint_meta());
  }

  write_manifest(config, "train", out_dir);
  return outputs;
}

EvalData run_eval(const ExperimentConfig& config, const std::string& checkpoint_path,
                  const std::string& out_dir, int workers) {
  config.validate();
  const EnvHandle env = make_environment(config, /*held_out=*/true);
  int advertisers = config.eval.advertisers;
  if (env.max_advertisers > 0) advertisers = std::min(advertisers, env.max_advertisers);

  const PlannerKind kind = config.planner.kind;
  const InitialPlanMode initial_mode = config.resolved_initial_mode();
  const CounterRng root(config.seed);

  PlannerFactory factory;
  // Keep loaded models alive for the duration of the evaluation.
  std::shared_ptr<nn::PlannerPolicy> planner_policy;
  std::shared_ptr<QMckpModel> qmckp_model;
  std::shared_ptr<nn::FeedforwardPolicy> hibid_policy;

  const bool needs_checkpoint = kind == PlannerKind::abplanner ||
                                kind == PlannerKind::qmckp ||
                                kind == PlannerKind::hibid_prime;
  if (needs_checkpoint) {
    if (checkpoint_path.empty()) {
      throw ConfigError("planner '" + to_string(kind) + "' needs --checkpoint for eval");
    }
    if (!fs::exists(checkpoint_path)) {
      throw ConfigError("checkpoint not found: " + checkpoint_path);
    }
  }

  if (kind == PlannerKind::abplanner) {
    Meta meta;
    nn::ParamStore store = nn::ParamStore::load(checkpoint_path, &meta);
    if (meta_lookup(meta, "policy") != "planner") {
      throw ConfigError("checkpoint " + checkpoint_path + " is not an abplanner checkpoint");
    }
    const nn::PolicySizes sizes = nn::PlannerPolicy::sizes_from_meta(meta);
    if (sizes.m != env.m) {
      throw ConfigError("checkpoint has m=" + std::to_string(sizes.m) +
                        " but the environment has m=" + std::to_string(env.m));
    }
    planner_policy = std::make_shared<nn::PlannerPolicy>(sizes, std::move(store));
    PlannerRunOptions options;
    options.initial_mode = initial_mode;
    options.clamp_actions = config.planner.action_clamp;
    options.stochastic = config.eval.stochastic;
    factory = [planner_policy, options, root, m = env.m](const Advertiser& adv,
                                                         std::uint64_t lane) {
      return make_abplanner_episode_planner(*planner_policy, m, adv.budget, options,
                                            root.split(kEvalAction).split(lane), nullptr);
    };
  } else if (kind == PlannerKind::qmckp) {
    Meta meta;
    nn::ParamStore store = nn::ParamStore::load(checkpoint_path, &meta);
    if (meta_lookup(meta, "policy") != "qmckp") {
      throw ConfigError("checkpoint " + checkpoint_path + " is not a qmckp checkpoint");
    }
    int ckpt_m = 0;
    QMckpConfig qcfg = QMckpModel::config_from_meta(meta, &ckpt_m);
    if (ckpt_m != env.m) {
      throw ConfigError("checkpoint has m=" + std::to_string(ckpt_m) +
                        " but the environment has m=" + std::to_string(env.m));
    }
    qmckp_model = std::make_shared<QMckpModel>(env.m, qcfg, std::move(store));
    factory = [qmckp_model, initial_mode, root](const Advertiser& adv, std::uint64_t lane) {
      return std::make_unique<QMckpPlanner>(*qmckp_model, adv.budget, initial_mode, 0.0,
                                            root.split(kEvalAction).split(lane), nullptr);
    };
  } else if (kind == PlannerKind::hibid_prime) {
    Meta meta;
    nn::ParamStore store = nn::ParamStore::load(checkpoint_path, &meta);
    if (meta_lookup(meta, "policy") != "feedforward") {
      throw ConfigError("checkpoint " + checkpoint_path + " is not a hibid_prime checkpoint");
    }
    const nn::FeedforwardSizes sizes = nn::FeedforwardPolicy::sizes_from_meta(meta);
    hibid_policy = std::make_shared<nn::FeedforwardPolicy>(sizes, std::move(store));
    factory = [hibid_policy, initial_mode, root, stochastic = config.eval.stochastic,
               m = env.m](const Advertiser& adv, std::uint64_t lane) {
      return std::make_unique<HibidPlanner>(*hibid_policy, adv.budget, m, initial_mode,
                                            stochastic, root.split(kEvalAction).split(lane),
                                            nullptr);
    };
  } else if (kind == PlannerKind::equal_split) {
    factory = [initial_mode, m = env.m](const Advertiser& adv, std::uint64_t) {
      return std::make_unique<EqualSplitPlanner>(adv.budget, m, initial_mode);
    };
  }
  // PlannerKind::none leaves the factory empty.

  EvalData data = evaluate_planner(config, env, factory, advertisers, workers);
  write_eval_csvs(data, out_dir);
  write_manifest(config, "eval", out_dir);
  return data;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::span<const int> m_values,
                                const std::string& out_dir, int workers) {
  if (m_values.empty()) throw ConfigError("sweep: no m values given");
  fs::create_directories(out_dir);

  std::vector<SweepRow> rows;
  for (const int m : m_values) {
    ExperimentConfig sub = config;
    if (sub.env_type == EnvType::simenv) {
      sub.sim.m = m;
    } else {
      sub.replay.m = m;
    }
    sub.validate();

    SweepRow row;
    row.m = m;
    row.run_id = "m" + std::to_string(m) + "_seed" + std::to_string(sub.seed);
    const std::string run_dir = out_dir + "/" + row.run_id;
    const TrainOutputs train_outputs = run_train(sub, run_dir, workers);
    const EvalData data = run_eval(sub, train_outputs.checkpoint_final, run_dir, workers);

    const auto diffs = data.improvements_at(data.episodes - 1);
    row.ci = bootstrap_mean_ci(diffs, 2000, CounterRng(sub.seed).split(kBootstrap).split(m));
    row.last_episode_improvement = row.ci.mean;
    rows.push_back(std::move(row));
  }

  std::ofstream out(out_dir + "/sweep_stages.csv");
  out << "m,run_id,last_episode_improvement,ci_low,ci_high\n";
  for (const SweepRow& row : rows) {
    out << row.m << ',' << row.run_id << ',' << fmt_double(row.last_episode_improvement)
        << ',' << fmt_double(row.ci.lo) << ',' << fmt_double(row.ci.hi) << '\n';
  }
  return rows;
}

namespace {

// Civil-date helpers for synthetic day strings (proleptic Gregorian).
long days_from_civil(int y, int mth, int d) {
  y -= mth <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (mth + (mth > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int* y, int* m, int* d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yy = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  *m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  *y = static_cast<int>(yy + (*m <= 2));
}

std::string day_string(const std::string& start_day, int offset) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(start_day.c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
    throw ConfigError("export.start_day must be an ISO date, got " + start_day);
  }
  const long days = days_from_civil(y, m, d) + offset;
  civil_from_days(days, &y, &m, &d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace

void run_export_logs(const ExperimentConfig& config, const std::string& out_path) {
  config.validate();
  if (config.env_type != EnvType::simenv) {
    throw ConfigError("export-logs generates synthetic streams; environment must be simenv");
  }
  if (!out_path.empty()) {
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("export-logs: cannot write " + out_path);

  const SimConfig& sim = config.sim;
  const CounterRng root(config.seed);
  write_log_header(out);
  for (int k = 0; k < config.export_logs.advertisers; ++k) {
    CounterRng adv_rng = root.split(kExportAdv).split(k);
    Advertiser adv = sample_advertiser(sim, adv_rng);
    adv.id = "adv" + std::to_string(k);
    for (int e = 0; e < config.export_logs.episodes; ++e) {
      const EpisodeStream stream =
          make_episode_stream(adv, sim, root.split(kExportStream).split(k).split(e));
      const std::string day = day_string(config.export_logs.start_day, e);
      for (size_t i = 0; i < stream.impressions.size(); ++i) {
        LogRecord rec;
        rec.advertiser_id = adv.id;
        rec.day = day;
        rec.timestamp = static_cast<int>(static_cast<long>(i) * 86400 / sim.n);
        rec.value = stream.impressions[i].value;
        rec.price = stream.impressions[i].price;
        append_log_record(out, rec);
      }
    }
  }
  if (!out) throw std::runtime_error("export-logs: write failed for " + out_path);
}

}  // namespace bidlab
