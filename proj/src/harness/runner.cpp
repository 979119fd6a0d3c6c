#include "parlab/harness/runner.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "parlab/data/dataset_io.hpp"
#include "parlab/errors.hpp"
#include "parlab/harness/checkpoint.hpp"
#include "parlab/harness/evaluate.hpp"
#include "parlab/par/replacer.hpp"
#include "parlab/theory/stationarity.hpp"
#include "parlab/agents/losses.hpp"

namespace parlab {

namespace {

// Fixed states on which the per-step policy metrics are measured.
struct Probe {
  Matrix states;
  Matrix optimal;
  Matrix behavior;
  Matrix data_actions;  // BC targets for the stationarity gradient
};

Probe make_probe(const Environment& env, const OfflineDataset& data, const BehaviorPolicy& beta,
                 std::size_t count, Rng& rng) {
  std::vector<std::size_t> rows;
  if (env.name() == BanditEnv::kName) {
    rows.push_back(0);
  } else {
    for (std::size_t i = 0; i < count; ++i) rows.push_back(rng.index(data.size()));
  }
  Probe p;
  p.states = data.states().gather_rows(rows);
  if (env.name() == BanditEnv::kName) {
    // one state: the BC gradient over all rows only depends on the mean action
    const Vector mean = data.mean_action();
    p.data_actions = Matrix(1, mean.size(), mean);
  } else {
    p.data_actions = data.actions().gather_rows(rows);
  }
  p.optimal = Matrix(rows.size(), env.action_dim());
  p.behavior = Matrix(rows.size(), env.action_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector best = env.optimal_action(p.states.row(i));
    const Vector mean = beta.mean_action(p.states.row(i));
    std::copy(best.begin(), best.end(), p.optimal.row(i).begin());
    std::copy(mean.begin(), mean.end(), p.behavior.row(i).begin());
  }
  return p;
}

Vector probe_stationarity(const Probe& probe, const Td3BcAgent& agent) {
  const BackboneConfig& bb = agent.config();
  double lambda = bb.lambda;
  if (bb.lambda_mode == LambdaMode::Normalized) {
    lambda = normalized_lambda(agent.critic().min_q(probe.states, agent.policy_action(probe.states)),
                               bb.lambda);
  }
  return stationarity_gradient(agent.actor(), agent.critic(), probe.states, probe.data_actions, lambda);
}

void measure(const Probe& probe, const Actor& actor, StepRecord& rec) {
  const Matrix a = actor.act(probe.states);
  double dist = 0.0;
  double div = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double d2 = 0.0;
    double b2 = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double e = a(i, j) - probe.optimal(i, j);
      const double f = a(i, j) - probe.behavior(i, j);
      d2 += e * e;
      b2 += f * f;
    }
    dist += std::sqrt(d2);
    div += b2;
  }
  rec.policy_distance = dist / static_cast<double>(a.rows());
  rec.policy_divergence = div / static_cast<double>(a.rows());
}

nlohmann::json to_json(const RunSummary& s) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {
      {"config_hash", fmt::format("{:016x}", s.config_hash)},
      {"seed", s.seed},
      {"status", s.status},
      {"error", s.error},
      {"failed_step", s.failed_step},
      {"steps", s.steps},
      {"final_distance", num(s.final_distance)},
      {"final_divergence", num(s.final_divergence)},
      {"final_critic_loss", num(s.final_critic_loss)},
      {"final_return", num(s.final_return)},
      {"final_return_std", num(s.final_return_std)},
      {"final_eval_distance", num(s.final_eval_distance)},
      {"final_stationarity", num(s.final_stationarity)},
      {"mean_stationarity", num(s.mean_stationarity)},
      {"final_action", s.final_action},
      {"checkpoints", s.checkpoints},
      {"skipped_replacements", s.skipped_replacements},
      {"gate_events", s.gate_events},
      {"dataset_checksum", s.dataset_checksum},
      {"critic_action_checksum", fmt::format("{:016x}", s.critic_action_checksum)},
      {"wall_clock_seconds", s.wall_clock_seconds},
  };
}

double num_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

OfflineDataset prepare_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.dataset.path.empty()) return load_dataset(config.dataset.path);
  const auto env = make_environment(config.environment);
  Rng rng = Rng::stream(config.dataset.seed, seed);
  const std::uint64_t tag = config.dataset.seed + seed;
  if (env->name() == BanditEnv::kName) {
    return generate_bandit_dataset(config.dataset.size, config.dataset.behavior, rng, tag);
  }
  return generate_mdp_dataset(*env, config.dataset.behavior, config.dataset.episodes, rng, tag);
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const RunOptions& options) {
  config.validate();
  return run_experiment(config, prepare_dataset(config, seed), seed, options);
}

RunResult run_experiment(const ExperimentConfig& config, const OfflineDataset& data,
                         std::uint64_t seed, const RunOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto env = make_environment(config.environment);
  if (data.state_dim() != env->state_dim() || data.action_dim() != env->action_dim()) {
    throw ConfigError("dataset shape does not match environment " + config.environment.name);
  }
  const BackboneConfig& bb = config.backbone;
  const ParConfig par = config.resolved_par();

  Rng init_rng = Rng::stream(seed, streams::kInit);
  Rng batch_rng = Rng::stream(seed, streams::kBatches);
  Rng noise_rng = Rng::stream(seed, streams::kActorNoise);
  Rng replace_rng = Rng::stream(seed, streams::kReplacement);
  Rng eval_rng = Rng::stream(seed, streams::kEval);
  Rng probe_rng = Rng::stream(seed, streams::kProbes);

  const AgentDims dims{env->state_dim(), env->action_dim(), env->action_bound()};
  Td3BcAgent agent(dims, bb, init_rng);
  if (bb.regularizer == Regularizer::Kl) {
    Rng fit_rng = Rng::stream(seed, streams::kBehaviorFit);
    agent.fit_behavior(data, fit_rng);
  }
  ParReplacer replacer(par, dims.state_dim, dims.action_dim);
  const BehaviorPolicy beta(BehaviorSpec::parse(data.info().behavior), env->action_bound());
  const Probe probe = make_probe(*env, data, beta, config.run.probe_states, probe_rng);
  const ParReplacer::Proposer propose = [&](const Matrix& states) {
    return agent.ema_action(states, replace_rng);
  };

  RunResult result;
  RunSummary& summary = result.summary;
  summary.config_hash = config_hash(config);
  summary.seed = seed;
  summary.dataset_checksum = data.checksum();
  const std::size_t stride = config.run.metrics_stride;
  result.metrics.reserve(bb.total_steps / stride + 1);

  auto finish_files = [&]() {
    if (options.out_dir.empty()) return;
    std::filesystem::create_directories(options.out_dir);
    write_metrics_csv(result.metrics, options.out_dir / "metrics.csv");
    if (!result.evals.empty()) write_eval_csv(result.evals, options.out_dir / "eval.csv");
    write_summary_json(summary, options.out_dir / "summary.json");
  };

  const bool track_stationarity = bb.regularizer == Regularizer::Mse;
  const std::uint64_t window_start = bb.total_steps - bb.total_steps / 10;
  Vector stationarity_sum(dims.action_dim, 0.0);
  std::uint64_t stationarity_count = 0;

  double last_actor_loss = std::numeric_limits<double>::quiet_NaN();
  double last_critic_loss = 0.0;
  std::uint64_t t = 0;
  try {
    for (t = 1; t <= bb.total_steps; ++t) {
      const TrainingBatch batch = sample_batch(data, bb.batch_size, batch_rng);
      const CriticStep cs = agent.update_critic(batch, t);
      if (!std::isfinite(cs.loss)) throw TrainingError("non-finite critic loss", t);
      last_critic_loss = cs.loss;

      StepRecord rec;
      rec.step = t;
      rec.critic_loss = cs.loss;
      rec.gate = replacer.evaluate_gate(cs.loss, t);
      rec.l_sma = *replacer.l_sma();

      if (agent.actor_step_due(t)) {
        ReplacementRecord rr;
        const TrainingBatch actor_batch = replacer.actor_batch(batch, cs.q_data, rec.gate, t, propose,
                                                               agent.actor(), replace_rng, rr);
        if (bb.regularizer == Regularizer::Kl && bb.behavior_cotrain) agent.update_behavior(actor_batch);
        const ActorStep as = agent.update_actor(actor_batch, noise_rng, t);
        if (!std::isfinite(as.loss)) throw TrainingError("non-finite actor loss", t);
        last_actor_loss = as.loss;
        rec.p = rr.p;
        rec.n_syn = rr.n_syn;
      }
      rec.actor_loss = last_actor_loss;
      agent.update_targets();
      replacer.end_step(cs.loss);

      if (track_stationarity && t > window_start) {
        const Vector g = probe_stationarity(probe, agent);
        for (std::size_t k = 0; k < g.size(); ++k) stationarity_sum[k] += g[k];
        ++stationarity_count;
      }

      if (t % stride == 0) {
        measure(probe, agent.actor(), rec);
        result.metrics.push_back(rec);
      }
      if (config.run.eval_every > 0 && t % config.run.eval_every == 0) {
        const EvalResult ev = evaluate_policy(agent.actor(), *env, config.run.eval_episodes, eval_rng);
        result.evals.push_back({t, ev.mean_return, ev.std_return, ev.mean_distance});
      }
      if (options.after_step) options.after_step(t, agent);
    }
  } catch (const TrainingError& e) {
    summary.status = "failed";
    summary.error = e.what();
    summary.failed_step = e.step();
    summary.steps = t;
    summary.skipped_replacements = replacer.skipped_events();
    summary.gate_events = replacer.gate_events();
    summary.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    spdlog::error("run aborted at step {}: {}", e.step(), e.what());
    finish_files();
    throw;
  }

  summary.steps = bb.total_steps;
  StepRecord final_rec;
  measure(probe, agent.actor(), final_rec);
  summary.final_distance = final_rec.policy_distance;
  summary.final_divergence = final_rec.policy_divergence;
  summary.final_critic_loss = last_critic_loss;
  if (track_stationarity) {
    summary.final_stationarity = std::sqrt(squared_norm(probe_stationarity(probe, agent)));
    for (double& v : stationarity_sum) v /= static_cast<double>(std::max<std::uint64_t>(stationarity_count, 1));
    summary.mean_stationarity = std::sqrt(squared_norm(stationarity_sum));
  }
  const Matrix first = agent.actor().act(probe.states);
  summary.final_action.assign(first.row(0).begin(), first.row(0).end());
  Rng final_rng = Rng::stream(seed, streams::kFinalEval);
  const EvalResult ev = evaluate_policy(agent.actor(), *env, config.run.final_eval_episodes, final_rng);
  summary.final_return = ev.mean_return;
  summary.final_return_std = ev.std_return;
  summary.final_eval_distance = ev.mean_distance;
  summary.skipped_replacements = replacer.skipped_events();
  summary.gate_events = replacer.gate_events();
  summary.critic_action_checksum = agent.critic_action_checksum();
  if (!options.out_dir.empty()) {
    const auto ckpt_path = options.out_dir / "checkpoint.bin";
    save_checkpoint(capture_checkpoint(agent, bb.total_steps, serialize_config(config)), ckpt_path);
    summary.checkpoints.push_back(ckpt_path.string());
  }
  summary.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  finish_files();
  return result;
}

void write_summary_json(const RunSummary& summary, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(summary).dump(2) << '\n';
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in);
  RunSummary s;
  s.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  s.seed = j.at("seed").get<std::uint64_t>();
  s.status = j.at("status").get<std::string>();
  s.error = j.at("error").get<std::string>();
  s.failed_step = j.at("failed_step").get<std::uint64_t>();
  s.steps = j.at("steps").get<std::uint64_t>();
  s.final_distance = num_or_nan(j.at("final_distance"));
  s.final_divergence = num_or_nan(j.at("final_divergence"));
  s.final_critic_loss = num_or_nan(j.at("final_critic_loss"));
  s.final_return = num_or_nan(j.at("final_return"));
  s.final_return_std = num_or_nan(j.at("final_return_std"));
  s.final_eval_distance = num_or_nan(j.at("final_eval_distance"));
  s.final_stationarity = num_or_nan(j.at("final_stationarity"));
  s.mean_stationarity = num_or_nan(j.at("mean_stationarity"));
  s.final_action = j.at("final_action").get<Vector>();
  s.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
  s.skipped_replacements = j.at("skipped_replacements").get<std::uint64_t>();
  s.gate_events = j.at("gate_events").get<std::uint64_t>();
  s.dataset_checksum = j.at("dataset_checksum").get<std::uint64_t>();
  s.critic_action_checksum = std::stoull(j.at("critic_action_checksum").get<std::string>(), nullptr, 16);
  s.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return s;
}

}  // namespace parlab
