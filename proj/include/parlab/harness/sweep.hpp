#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "parlab/harness/runner.hpp"

namespace parlab {

struct SweepCell {
  std::size_t index = 0;
  std::uint64_t t_start = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double beta = 0.0;

  std::string label() const;
  ExperimentConfig apply(const ExperimentConfig& base) const;
};

struct SweepRun {
  SweepCell cell;
  std::uint64_t seed = 0;
  RunSummary summary;  // status "failed" with error text when the run aborted
  std::string directory;
};

struct CellAggregate {
  SweepCell cell;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_distance = 0.0;
  double std_distance = 0.0;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<CellAggregate> cells;
};

/// Cartesian product of the grid; an axis left empty keeps the base value.
/// Throws ConfigError when every axis is empty.
std::vector<SweepCell> expand_grid(const ExperimentConfig& config);

/// Runs every (cell, seed) pair on up to config.run.threads threads. Failed runs
/// are recorded and the sweep continues. With an output directory, each run goes
/// to out/<cell label>/seed_<n>/ and sweep.json plus sweep.csv are written.
SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

/// Mean and population std over the completed runs of each cell.
std::vector<CellAggregate> aggregate(const std::vector<SweepCell>& cells,
                                     const std::vector<SweepRun>& runs);
std::string format_aggregate_table(const std::vector<CellAggregate>& cells);

}  // namespace parlab
