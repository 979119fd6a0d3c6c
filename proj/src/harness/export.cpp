#include "parlab/harness/export.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "parlab/data/dataset_io.hpp"
#include "parlab/harness/metrics.hpp"
#include "parlab/harness/runner.hpp"

namespace parlab {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void require_present(const std::vector<std::pair<std::string, std::filesystem::path>>& needed,
                     const std::string& what) {
  std::vector<std::string> missing;
  for (const auto& [label, path] : needed) {
    if (!std::filesystem::exists(path)) missing.push_back(label + " (" + path.string() + ")");
  }
  if (!missing.empty()) throw ExportError(what + ": missing " + join(missing), missing);
}

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

// Mean of the eval curves of several runs, keyed by step.
std::map<std::uint64_t, double> mean_curve(const std::vector<std::filesystem::path>& eval_files) {
  std::map<std::uint64_t, std::pair<double, int>> acc;
  for (const auto& f : eval_files) {
    for (const auto& r : read_eval_csv(f)) {
      auto& [sum, n] = acc[r.step];
      sum += r.mean_return;
      ++n;
    }
  }
  std::map<std::uint64_t, double> out;
  for (const auto& [step, sn] : acc) out[step] = sn.first / sn.second;
  return out;
}

}  // namespace

ExportError::ExportError(const std::string& what, std::vector<std::string> missing)
    : std::runtime_error(what), missing_(std::move(missing)) {}

void export_fig2(const std::vector<LabeledRun>& runs, const std::filesystem::path& dataset,
                 const std::filesystem::path& out_csv, std::size_t scatter_points) {
  std::vector<std::pair<std::string, std::filesystem::path>> needed{{"dataset", dataset}};
  for (const auto& r : runs) needed.emplace_back(r.label, r.dir / "summary.json");
  require_present(needed, "fig2");

  const OfflineDataset data = load_dataset(dataset);
  const std::size_t ad = data.action_dim();
  auto out = open_csv(out_csv, kFig2Header);
  for (const auto& r : runs) {
    const RunSummary s = read_summary_json(r.dir / "summary.json");
    out << fmt::format("policy,{},{},{}\n", r.label, s.final_action.at(0),
                       ad > 1 ? s.final_action.at(1) : 0.0);
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(0);
  const std::size_t n = std::min(scatter_points, data.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(order[i], order[i + rng.index(data.size() - i)]);
    const auto a = data.actions().row(order[i]);
    out << fmt::format("data,,{},{}\n", a[0], ad > 1 ? a[1] : 0.0);
  }
  out << "optimum,,0,0\n";
}

void export_fig3(const std::vector<LabeledRun>& runs, const std::filesystem::path& out_csv) {
  std::vector<std::pair<std::string, std::filesystem::path>> needed;
  for (const auto& r : runs) needed.emplace_back(r.label, r.dir / "metrics.csv");
  require_present(needed, "fig3");
  auto out = open_csv(out_csv, kFig3Header);
  for (const auto& r : runs) {
    for (const auto& rec : read_metrics_csv(r.dir / "metrics.csv")) {
      out << fmt::format("{},{},{}\n", r.label, rec.step, rec.critic_loss);
    }
  }
}

void export_fig4(const std::filesystem::path& sweep_dir,
                 const std::vector<std::filesystem::path>& baseline,
                 const std::filesystem::path& out_csv) {
  require_present({{"sweep manifest", sweep_dir / "sweep.json"}}, "fig4");
  std::ifstream in(sweep_dir / "sweep.json");
  const auto manifest = nlohmann::json::parse(in);

  std::vector<std::pair<std::string, std::filesystem::path>> needed;
  std::vector<std::pair<std::string, std::vector<std::filesystem::path>>> series;
  for (const auto& cell : manifest.at("cells")) {
    const std::string label = cell.at("label").get<std::string>();
    std::vector<std::filesystem::path> files;
    for (const auto& run : cell.at("runs")) {
      const std::filesystem::path f = std::filesystem::path(run.at("dir").get<std::string>()) / "eval.csv";
      needed.emplace_back(fmt::format("{} seed {}", label, run.at("seed").get<std::uint64_t>()), f);
      files.push_back(f);
    }
    series.emplace_back(label, std::move(files));
  }
  std::vector<std::filesystem::path> base_files;
  for (const auto& dir : baseline) {
    needed.emplace_back("baseline", dir / "eval.csv");
    base_files.push_back(dir / "eval.csv");
  }
  if (!base_files.empty()) series.emplace_back("baseline", std::move(base_files));
  require_present(needed, "fig4");

  auto out = open_csv(out_csv, kFig4Header);
  for (const auto& [label, files] : series) {
    for (const auto& [step, score] : mean_curve(files)) {
      out << fmt::format("{},{},{}\n", label, step, score);
    }
  }
}

}  // namespace parlab
