#pragma once

#include <cstdint>
#include <limits>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "parlab/agents/td3bc.hpp"
#include "parlab/data/dataset.hpp"
#include "parlab/harness/config.hpp"
#include "parlab/harness/metrics.hpp"

namespace parlab {

struct RunSummary {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
  std::uint64_t failed_step = 0;
  std::uint64_t steps = 0;
  double final_distance = 0.0;
  double final_divergence = 0.0;
  double final_critic_loss = 0.0;
  double final_return = 0.0;  // mean undiscounted return of the final evaluation
  double final_return_std = 0.0;
  double final_eval_distance = 0.0;
  // MSE regularizer only (NaN otherwise): ||lambda grad_a Q - BC gradient|| at
  // the final policy, and the same for the gradient averaged over the last
  // tenth of training.
  double final_stationarity = std::numeric_limits<double>::quiet_NaN();
  double mean_stationarity = std::numeric_limits<double>::quiet_NaN();
  Vector final_action;  // policy action at the first probe state
  std::vector<std::string> checkpoints;
  std::uint64_t skipped_replacements = 0;
  std::uint64_t gate_events = 0;
  std::uint64_t dataset_checksum = 0;
  std::uint64_t critic_action_checksum = 0;
  double wall_clock_seconds = 0.0;
};

struct RunResult {
  RunSummary summary;
  std::vector<StepRecord> metrics;
  std::vector<EvalRecord> evals;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: no files written
  /// Called after every completed step with the agent state.
  std::function<void(std::uint64_t step, const Td3BcAgent& agent)> after_step;
};

/// Dataset named by the config: loaded from dataset.path, or generated from
/// stream (dataset.seed, seed).
OfflineDataset prepare_dataset(const ExperimentConfig& config, std::uint64_t seed);

/// One training run. Per step t: sample batch, critic update on it, gate,
/// on actor steps the mode's batch surgery then the actor update, EMA targets,
/// smoothed-loss update. A non-finite loss writes a failed summary and
/// rethrows the TrainingError.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const RunOptions& options = {});
RunResult run_experiment(const ExperimentConfig& config, const OfflineDataset& data,
                         std::uint64_t seed, const RunOptions& options = {});

void write_summary_json(const RunSummary& summary, const std::filesystem::path& path);
RunSummary read_summary_json(const std::filesystem::path& path);

/// Stream ids for Rng::stream(seed, id); fixed so that runs are reproducible
/// and independent consumers do not perturb each other.
namespace streams {
inline constexpr std::uint64_t kInit = 0;
inline constexpr std::uint64_t kBatches = 1;
inline constexpr std::uint64_t kActorNoise = 2;
inline constexpr std::uint64_t kReplacement = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kBehaviorFit = 5;
inline constexpr std::uint64_t kProbes = 6;
inline constexpr std::uint64_t kFinalEval = 7;
}  // namespace streams

}  // namespace parlab
