// parlab: dataset generation, training, sweeps, oracle checks and figure export.
//
// Exit codes: 0 ok, 1 unexpected error, 2 config/usage, 3 dataset, 4 training,
// 5 verification failed.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "parlab/data/dataset_io.hpp"
#include "parlab/errors.hpp"
#include "parlab/harness/checkpoint.hpp"
#include "parlab/harness/config.hpp"
#include "parlab/harness/evaluate.hpp"
#include "parlab/harness/export.hpp"
#include "parlab/harness/runner.hpp"
#include "parlab/harness/sweep.hpp"
#include "parlab/harness/verify.hpp"
#include "parlab/numerics/kernels.hpp"

namespace fs = std::filesystem;
using namespace parlab;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;
constexpr int kExitVerify = 5;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_config(BanditEnv::kName) : load_config(c.config);
  if (!c.mode.empty()) cfg.par.mode = parse_par_mode(c.mode);
  if (c.seed) cfg.run.seeds = {*c.seed};
  if (!c.out.empty()) cfg.run.output_dir = c.out;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const ExperimentConfig& cfg) {
  return cfg.run.output_dir.empty() ? fs::path("runs") : fs::path(cfg.run.output_dir);
}

LabeledRun parse_labeled(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected LABEL=DIR, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

int cmd_gen_data(const Common& c, const std::string& csv) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = out_dir(cfg);
  for (auto seed : cfg.run.seeds) {
    const OfflineDataset data = prepare_dataset(cfg, seed);
    const fs::path path = dir / fmt::format("dataset_seed{}.bin", seed);
    fs::create_directories(dir);
    save_dataset(data, path);
    spdlog::info("wrote {} ({} transitions, crc {:08x})", path.string(), data.size(), data.checksum());
    if (!csv.empty()) export_dataset_csv(data, cfg.run.seeds.size() == 1 ? fs::path(csv)
                                                   : fs::path(fmt::format("{}.seed{}", csv, seed)));
  }
  return 0;
}

int cmd_train(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = out_dir(cfg);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "config.ini") << serialize_config(cfg);
  }
  for (auto seed : cfg.run.seeds) {
    RunOptions opts;
    opts.out_dir = dir / fmt::format("seed_{}", seed);
    const RunSummary s = run_experiment(cfg, seed, opts).summary;
    spdlog::info("seed {}: distance {:.4f}, return {:.4f}, {:.1f}s -> {}", seed, s.final_distance,
                 s.final_return, s.wall_clock_seconds, opts.out_dir.string());
  }
  return 0;
}

int cmd_sweep(const Common& c, std::size_t threads) {
  ExperimentConfig cfg = load(c);
  if (threads > 0) cfg.run.threads = threads;
  const fs::path dir = out_dir(cfg);
  const SweepResult r = run_sweep(cfg, dir);
  std::cout << format_aggregate_table(r.cells);
  return 0;
}

int cmd_verify(const Common& c) {
  VerifyOptions opts;
  if (c.seed) opts.seed = *c.seed;
  const VerifyReport report = run_verify(opts);
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  write_verify_report(report, dir / "report.json");
  for (const auto& check : report.checks) {
    std::cout << fmt::format("[{}] {} value={} threshold={} {}\n", check.passed ? "PASS" : "FAIL",
                             check.name, check.value, check.threshold, check.detail);
  }
  return report.passed() ? 0 : kExitVerify;
}

int cmd_export(const std::string& kind, bool csv, const std::vector<std::string>& runs,
               const std::string& dataset, const std::string& sweep,
               const std::vector<std::string>& baseline, const std::string& out) {
  if (out.empty()) throw ConfigError("export: --out is required");
  if (csv) {
    if (dataset.empty()) throw ConfigError("export --csv: --dataset is required");
    export_dataset_csv(load_dataset(dataset), out);
    return 0;
  }
  std::vector<LabeledRun> labeled;
  for (const auto& r : runs) labeled.push_back(parse_labeled(r));
  if (kind == "fig2") {
    if (dataset.empty()) throw ConfigError("export fig2: --dataset is required");
    export_fig2(labeled, dataset, out);
  } else if (kind == "fig3") {
    export_fig3(labeled, out);
  } else if (kind == "fig4") {
    if (sweep.empty()) throw ConfigError("export fig4: --sweep is required");
    std::vector<fs::path> base(baseline.begin(), baseline.end());
    export_fig4(sweep, base, out);
  } else {
    throw ConfigError("export: --kind must be fig2, fig3 or fig4");
  }
  spdlog::info("wrote {}", out);
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, std::size_t episodes) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  ExperimentConfig cfg = c.config.empty() ? parse_config(ckpt.config) : load_config(c.config);
  const auto env = make_environment(cfg.environment);
  Rng init(0);
  const AgentDims dims{env->state_dim(), env->action_dim(), env->action_bound()};
  Actor actor(actor_spec_for(dims, cfg.backbone), init);
  restore_actor(ckpt, actor);
  Rng rng = Rng::stream(c.seed.value_or(0), streams::kFinalEval);
  const EvalResult r = evaluate_policy(actor, *env, episodes, rng);
  const nlohmann::json j = {{"checkpoint", checkpoint}, {"step", ckpt.step}, {"episodes", r.episodes},
                            {"mean_return", r.mean_return}, {"std_return", r.std_return},
                            {"mean_distance", r.mean_distance}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

void add_common(CLI::App* app, Common& c, bool with_mode) {
  app->add_option("--config", c.config, "Experiment config (INI)");
  app->add_option("--seed", c.seed, "Run only this seed");
  app->add_option("--out", c.out, "Output directory");
  if (with_mode) {
    app->add_option("--mode", c.mode, "Override par.mode")
        ->check(CLI::IsMember({"off", "par", "filtering", "nonproximal"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parlab: offline RL with proximal action replacement"};
  app.require_subcommand(1);
  std::string kernels;
  app.add_option("--kernels", kernels, "Force kernel backend")->check(CLI::IsMember({"scalar", "avx2"}));

  Common common;
  std::string csv_out;
  auto* gen = app.add_subcommand("gen-data", "Generate and save offline datasets");
  add_common(gen, common, false);
  gen->add_option("--csv", csv_out, "Also write a CSV mirror to this path");

  auto* train = app.add_subcommand("train", "Train one run per configured seed");
  add_common(train, common, true);

  std::size_t threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run the hyperparameter grid");
  add_common(sweep, common, true);
  sweep->add_option("--threads", threads, "Concurrent runs");

  auto* verify = app.add_subcommand("verify", "Run the theory oracle suite");
  verify->add_option("--seed", common.seed, "Instance seed");
  verify->add_option("--out", common.out, "Directory for report.json");

  std::string kind;
  bool csv = false;
  std::vector<std::string> runs;
  std::vector<std::string> baseline;
  std::string dataset;
  std::string sweep_dir;
  std::string export_out;
  auto* exp = app.add_subcommand("export", "Write figure data or a dataset CSV");
  exp->add_option("--kind", kind, "fig2, fig3 or fig4");
  exp->add_flag("--csv", csv, "Write the CSV mirror of --dataset");
  exp->add_option("--run", runs, "LABEL=RUN_DIR (repeatable)");
  exp->add_option("--dataset", dataset, "Dataset file");
  exp->add_option("--sweep", sweep_dir, "Sweep output directory");
  exp->add_option("--baseline", baseline, "Baseline run directory (repeatable)");
  exp->add_option("--out", export_out, "Output CSV");

  std::string checkpoint;
  std::size_t episodes = 100;
  auto* ev = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  ev->add_option("--checkpoint", checkpoint, "checkpoint.bin")->required();
  ev->add_option("--episodes", episodes, "Rollouts");
  ev->add_option("--config", common.config, "Config (defaults to the one stored in the checkpoint)");
  ev->add_option("--seed", common.seed, "Evaluation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (kernels == "scalar") kernels::select_backend(kernels::Backend::Scalar);
    if (kernels == "avx2") kernels::select_backend(kernels::Backend::Avx2);
    if (*gen) return cmd_gen_data(common, csv_out);
    if (*train) return cmd_train(common);
    if (*sweep) return cmd_sweep(common, threads);
    if (*verify) return cmd_verify(common);
    if (*exp) return cmd_export(kind, csv, runs, dataset, sweep_dir, baseline, export_out);
    if (*ev) return cmd_eval(common, checkpoint, episodes);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitConfig;
  } catch (const UsageError& e) {
    spdlog::error("usage: {}", e.what());
    return kExitConfig;
  } catch (const DatasetError& e) {
    spdlog::error("dataset: {}", e.what());
    return kExitData;
  } catch (const ExportError& e) {
    spdlog::error("export: {}", e.what());
    return kExitData;
  } catch (const CheckpointError& e) {
    spdlog::error("checkpoint: {}", e.what());
    return kExitData;
  } catch (const TrainingError& e) {
    spdlog::error("training: {}", e.what());
    return kExitTraining;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitOther;
  }
  return kExitOther;
}
