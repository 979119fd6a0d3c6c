#include "parlab/harness/sweep.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "parlab/errors.hpp"

namespace parlab {

std::string SweepCell::label() const {
  return fmt::format("cell{}_ts{}_p{}-{}_b{}", index, t_start, p_min, p_max, beta);
}

ExperimentConfig SweepCell::apply(const ExperimentConfig& base) const {
  ExperimentConfig c = base;
  c.par.t_start = t_start;
  c.par.p_min = p_min;
  c.par.p_max = p_max;
  c.par.beta = beta;
  return c;
}

std::vector<SweepCell> expand_grid(const ExperimentConfig& config) {
  if (config.sweep.empty()) throw ConfigError("sweep: grid is empty");
  const auto& g = config.sweep;
  const std::vector<std::uint64_t> ts = g.t_start.empty() ? std::vector{config.par.t_start} : g.t_start;
  const auto ps = g.p_range.empty() ? std::vector{std::pair{config.par.p_min, config.par.p_max}} : g.p_range;
  const std::vector<double> bs = g.beta.empty() ? std::vector{config.par.beta} : g.beta;
  std::vector<SweepCell> cells;
  for (auto t : ts) {
    for (auto [lo, hi] : ps) {
      for (double b : bs) cells.push_back({cells.size(), t, lo, hi, b});
    }
  }
  return cells;
}

std::vector<CellAggregate> aggregate(const std::vector<SweepCell>& cells,
                                     const std::vector<SweepRun>& runs) {
  std::vector<CellAggregate> out;
  for (const auto& cell : cells) {
    CellAggregate a;
    a.cell = cell;
    std::vector<double> returns;
    std::vector<double> dists;
    for (const auto& r : runs) {
      if (r.cell.index != cell.index) continue;
      if (r.summary.status != "ok") {
        ++a.failed;
        continue;
      }
      returns.push_back(r.summary.final_return);
      dists.push_back(r.summary.final_distance);
    }
    a.completed = returns.size();
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
      mean = sd = std::nan("");
      if (v.empty()) return;
      mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      sd = std::sqrt(var / static_cast<double>(v.size()));
    };
    stats(returns, a.mean_return, a.std_return);
    stats(dists, a.mean_distance, a.std_distance);
    out.push_back(a);
  }
  return out;
}

std::string format_aggregate_table(const std::vector<CellAggregate>& cells) {
  std::string out = fmt::format("{:<4} {:>8} {:>11} {:>6} {:>4} {:>24} {:>24}\n", "cell", "t_start",
                                "p_range", "beta", "ok", "return (mean +- std)",
                                "distance (mean +- std)");
  for (const auto& a : cells) {
    out += fmt::format("{:<4} {:>8} {:>11} {:>6} {:>4} {:>24} {:>24}\n", a.cell.index, a.cell.t_start,
                       fmt::format("[{},{}]", a.cell.p_min, a.cell.p_max), a.cell.beta,
                       fmt::format("{}/{}", a.completed, a.completed + a.failed),
                       fmt::format("{:.4f} +- {:.4f}", a.mean_return, a.std_return),
                       fmt::format("{:.4f} +- {:.4f}", a.mean_distance, a.std_distance));
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const std::vector<SweepCell> cells = expand_grid(config);
  for (const auto& cell : cells) cell.apply(config).validate();

  SweepResult result;
  for (const auto& cell : cells) {
    for (auto seed : config.run.seeds) {
      SweepRun r;
      r.cell = cell;
      r.seed = seed;
      if (!out_dir.empty()) {
        r.directory = (out_dir / cell.label() / fmt::format("seed_{}", seed)).string();
      }
      result.runs.push_back(std::move(r));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < result.runs.size(); i = next++) {
      SweepRun& run = result.runs[i];
      const ExperimentConfig cfg = run.cell.apply(config);
      RunOptions opts;
      opts.out_dir = run.directory;
      try {
        run.summary = run_experiment(cfg, run.seed, opts).summary;
      } catch (const std::exception& e) {
        run.summary.config_hash = config_hash(cfg);
        run.summary.seed = run.seed;
        run.summary.status = "failed";
        run.summary.error = e.what();
        if (const auto* te = dynamic_cast<const TrainingError*>(&e)) run.summary.failed_step = te->step();
      }
      std::lock_guard lock(log_mutex);
      spdlog::info("sweep {} seed {}: {}", run.cell.label(), run.seed, run.summary.status);
    }
  };
  const std::size_t n_threads = std::min(config.run.threads, result.runs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }

  result.cells = aggregate(cells, result.runs);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json manifest;
    for (const auto& a : result.cells) {
      nlohmann::json cell = {{"index", a.cell.index},     {"label", a.cell.label()},
                             {"t_start", a.cell.t_start}, {"p_min", a.cell.p_min},
                             {"p_max", a.cell.p_max},     {"beta", a.cell.beta},
                             {"completed", a.completed},  {"failed", a.failed}};
      nlohmann::json runs = nlohmann::json::array();
      for (const auto& r : result.runs) {
        if (r.cell.index != a.cell.index) continue;
        runs.push_back({{"seed", r.seed}, {"dir", r.directory}, {"status", r.summary.status},
                        {"error", r.summary.error}});
      }
      cell["runs"] = runs;
      manifest["cells"].push_back(cell);
    }
    std::ofstream(out_dir / "sweep.json") << manifest.dump(2) << '\n';
    std::ofstream csv(out_dir / "sweep.csv");
    csv << "cell,t_start,p_min,p_max,beta,completed,failed,mean_return,std_return,mean_distance,std_distance\n";
    for (const auto& a : result.cells) {
      csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", a.cell.label(), a.cell.t_start,
                         a.cell.p_min, a.cell.p_max, a.cell.beta, a.completed, a.failed,
                         a.mean_return, a.std_return, a.mean_distance, a.std_distance);
    }
  }
  return result;
}

}  // namespace parlab
