#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace parlab {

struct StepRecord {
  std::uint64_t step = 0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // value from the most recent actor update
  double l_sma = 0.0;       // smoothed loss the gate compared against
  bool gate = false;
  double p = 0.0;
  std::size_t n_syn = 0;
  double policy_distance = 0.0;    // E ||pi(s) - a*(s)|| over the probe states
  double policy_divergence = 0.0;  // E ||pi(s) - pi_beta(s)||^2 over the probe states

  bool operator==(const StepRecord&) const = default;
};

struct EvalRecord {
  std::uint64_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_distance = 0.0;

  bool operator==(const EvalRecord&) const = default;
};

inline constexpr const char* kMetricsHeader =
    "step,critic_loss,actor_loss,l_sma,gate,p,n_syn,policy_distance,policy_divergence";
inline constexpr const char* kEvalHeader = "step,mean_return,std_return,mean_distance";

std::string format_metrics_row(const StepRecord& r);
void write_metrics_csv(const std::vector<StepRecord>& records, const std::filesystem::path& path);
std::vector<StepRecord> read_metrics_csv(const std::filesystem::path& path);

void write_eval_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path);
std::vector<EvalRecord> read_eval_csv(const std::filesystem::path& path);

/// Largest |x[i+1] - x[i]| over records with begin <= step < end.
double max_step_jump(const std::vector<StepRecord>& records, std::uint64_t begin, std::uint64_t end);

}  // namespace parlab
