#include "parlab/harness/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace parlab {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  const std::size_t width = split_csv(header).size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width) throw std::runtime_error(path.string() + ": ragged row");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_metrics_row(const StepRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", r.step, r.critic_loss, r.actor_loss, r.l_sma,
                     r.gate ? 1 : 0, r.p, r.n_syn, r.policy_distance, r.policy_divergence);
}

void write_metrics_csv(const std::vector<StepRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kMetricsHeader << '\n';
  for (const auto& r : records) out << format_metrics_row(r) << '\n';
}

std::vector<StepRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::vector<StepRecord> records;
  for (const auto& c : read_table(path, kMetricsHeader)) {
    StepRecord r;
    r.step = std::stoull(c[0]);
    r.critic_loss = std::stod(c[1]);
    r.actor_loss = std::stod(c[2]);
    r.l_sma = std::stod(c[3]);
    r.gate = c[4] == "1";
    r.p = std::stod(c[5]);
    r.n_syn = std::stoull(c[6]);
    r.policy_distance = std::stod(c[7]);
    r.policy_divergence = std::stod(c[8]);
    records.push_back(r);
  }
  return records;
}

void write_eval_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kEvalHeader << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{}\n", r.step, r.mean_return, r.std_return, r.mean_distance);
  }
}

std::vector<EvalRecord> read_eval_csv(const std::filesystem::path& path) {
  std::vector<EvalRecord> records;
  for (const auto& c : read_table(path, kEvalHeader)) {
    records.push_back({std::stoull(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3])});
  }
  return records;
}

double max_step_jump(const std::vector<StepRecord>& records, std::uint64_t begin,
                     std::uint64_t end) {
  double worst = 0.0;
  const StepRecord* prev = nullptr;
  for (const auto& r : records) {
    if (r.step < begin || r.step >= end) continue;
    if (prev) worst = std::max(worst, std::abs(r.critic_loss - prev->critic_loss));
    prev = &r;
  }
  return worst;
}

}  // namespace parlab
