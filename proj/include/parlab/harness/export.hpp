#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace parlab {

/// Raised when inputs for an export are absent; the message lists every one.
class ExportError : public std::runtime_error {
 public:
  ExportError(const std::string& what, std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

struct LabeledRun {
  std::string label;
  std::filesystem::path dir;  // holds summary.json / metrics.csv / eval.csv
};

inline constexpr const char* kFig2Header = "kind,label,x,y";
inline constexpr const char* kFig3Header = "series,step,critic_loss";
inline constexpr const char* kFig4Header = "series,step,score";

/// Final policy point per run, a scatter subsample of the dataset actions and the
/// optimum marker. Uses the first two action coordinates.
void export_fig2(const std::vector<LabeledRun>& runs, const std::filesystem::path& dataset,
                 const std::filesystem::path& out_csv, std::size_t scatter_points = 500);

/// Critic-loss curve of each labeled run.
void export_fig3(const std::vector<LabeledRun>& runs, const std::filesystem::path& out_csv);

/// Evaluation-return curve per sweep cell (mean over seeds) plus the baseline
/// runs averaged as one "baseline" series.
void export_fig4(const std::filesystem::path& sweep_dir, const std::vector<std::filesystem::path>& baseline,
                 const std::filesystem::path& out_csv);

}  // namespace parlab
