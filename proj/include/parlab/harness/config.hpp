#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "parlab/agents/td3bc.hpp"
#include "parlab/env/environment.hpp"
#include "parlab/par/config.hpp"

namespace parlab {

struct DatasetSpec {
  std::size_t size = 10000;     // bandit transitions
  std::size_t episodes = 200;   // point-mass episodes
  BehaviorSpec behavior;
  std::uint64_t seed = 0;       // generation seed is seed + run seed
  std::string path;             // load this file instead of generating when set

  bool operator==(const DatasetSpec&) const = default;
};

struct RunSettings {
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;         // empty: keep results in memory only
  std::size_t metrics_stride = 1;
  std::size_t eval_every = 0;     // 0: final evaluation only
  std::size_t eval_episodes = 20;
  std::size_t final_eval_episodes = 100;
  std::size_t probe_states = 64;  // states used for per-step policy metrics
  std::size_t threads = 1;        // concurrent runs in a sweep

  bool operator==(const RunSettings&) const = default;
};

struct SweepGrid {
  std::vector<std::uint64_t> t_start;
  std::vector<std::pair<double, double>> p_range;
  std::vector<double> beta;

  bool empty() const { return t_start.empty() && p_range.empty() && beta.empty(); }
  bool operator==(const SweepGrid&) const = default;
};

struct ExperimentConfig {
  EnvironmentOptions environment;
  DatasetSpec dataset;
  BackboneConfig backbone;
  ParConfig par;
  RunSettings run;
  SweepGrid sweep;

  /// ParConfig with total_steps taken from the backbone.
  ParConfig resolved_par() const;
  /// Throws ConfigError on invalid names or values.
  void validate() const;

  bool operator==(const ExperimentConfig&) const;
};

/// Defaults for an environment: the bandit recipe, or the point-mass stand-in.
ExperimentConfig default_config(std::string_view env_name);

/// INI-style text with sections [environment] [dataset] [backbone] [par] [run]
/// [sweep]. Missing keys keep their defaults; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text: every field, fixed order, shortest round-trip number format.
std::string serialize_config(const ExperimentConfig& config);
/// FNV-1a of the canonical text.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace parlab
