#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parlab/data/dataset_io.hpp"
#include "parlab/errors.hpp"
#include "parlab/harness/checkpoint.hpp"
#include "parlab/harness/config.hpp"
#include "parlab/harness/evaluate.hpp"
#include "parlab/harness/export.hpp"
#include "parlab/harness/metrics.hpp"
#include "parlab/harness/runner.hpp"
#include "parlab/harness/sweep.hpp"

using namespace parlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "parlab_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig tiny_bandit(ParMode mode = ParMode::Off, std::uint64_t steps = 300) {
  ExperimentConfig c = default_config(BanditEnv::kName);
  c.dataset.size = 500;
  c.backbone.hidden = {8, 8};
  c.backbone.batch_size = 32;
  c.backbone.total_steps = steps;
  c.backbone.lambda_mode = LambdaMode::Fixed;
  c.par.mode = mode;
  c.par.t_start = 20;
  c.run.final_eval_episodes = 5;
  return c;
}

ExperimentConfig tiny_pointmass(ParMode mode = ParMode::Off) {
  ExperimentConfig c = default_config(PointMassEnv::kName);
  c.dataset.episodes = 10;
  c.backbone.hidden = {8, 8};
  c.backbone.batch_size = 32;
  c.backbone.total_steps = 200;
  c.par.mode = mode;
  c.par.t_start = 20;
  c.run.metrics_stride = 1;
  c.run.eval_every = 100;
  c.run.eval_episodes = 2;
  c.run.final_eval_episodes = 2;
  c.run.probe_states = 8;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PARLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, SerializeParseRoundTrip) {
  for (const char* env : {"bandit2d", "pointmass"}) {
    ExperimentConfig c = default_config(env);
    c.backbone.regularizer = Regularizer::Kl;
    c.backbone.hidden = {32, 16};
    c.backbone.lr = 1.0 / 3.0;
    c.par.mode = ParMode::NonProximal;
    c.par.nonproximal_switch_step = 77;
    c.run.seeds = {4, 1, 9};
    c.sweep.t_start = {0, 500};
    c.sweep.p_range = {{0.0, 0.3}, {0.0, 0.5}};
    c.sweep.beta = {1.1, 1.5};
    const std::string text = serialize_config(c);
    const ExperimentConfig back = parse_config(text);
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize_config(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, HashIgnoresKeyOrderAndComments) {
  const std::string a = "[backbone]\nlr = 0.001\nbatch_size = 64\n[par]\nmode = par\nbeta = 1.5\n";
  const std::string b = "; reordered\n[par]\nbeta = 1.5\nmode = par\n\n[backbone]\nbatch_size = 64\nlr = 0.001\n";
  EXPECT_EQ(config_hash(parse_config(a)), config_hash(parse_config(b)));
  EXPECT_NE(config_hash(parse_config(a)), config_hash(parse_config("[backbone]\nlr = 0.002\n")));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("[backbone]\nlearning_rate = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[optimizer]\nlr = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[backbone]\nlr = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("[par]\nmode = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("[par]\np_min = 0.8\np_max = 0.5\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("[environment]\nname = hopper\n").validate(), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/parlab.ini"), ConfigError);
}

TEST(Config, ResolvedParTakesRunLength) {
  ExperimentConfig c = tiny_bandit(ParMode::Par, 1234);
  EXPECT_EQ(c.resolved_par().total_steps, 1234u);
}

TEST(Metrics, CsvRoundTrip) {
  std::vector<StepRecord> rows{{1, 0.5, std::numeric_limits<double>::quiet_NaN(), 0.5, false, 0.0, 0, 1.25, 3.0},
                               {2, 0.25, -1.5, 0.49, true, 0.125, 4, 1.0, 2.5}};
  const fs::path dir = scratch("metrics");
  write_metrics_csv(rows, dir / "m.csv");
  std::ifstream in(dir / "m.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kMetricsHeader);
  const auto back = read_metrics_csv(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(std::isnan(back[0].actor_loss));
  EXPECT_EQ(back[1], rows[1]);
  EXPECT_EQ(max_step_jump(back, 0, 100), 0.25);
  EXPECT_EQ(max_step_jump(back, 2, 100), 0.0);
}

TEST(Evaluate, ZeroEpisodesRejected) {
  BanditEnv env;
  Rng rng(0);
  EXPECT_THROW(evaluate_controller(optimal_controller(env), env, 0, rng), std::invalid_argument);
  const EvalResult r = evaluate_controller(optimal_controller(env), env, 3, rng);
  EXPECT_EQ(r.mean_return, 0.0);
  EXPECT_EQ(r.episodes, 3u);
}

TEST(Runner, SeededRunsAreByteIdentical) {
  const ExperimentConfig c = tiny_pointmass(ParMode::Par);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunOptions oa{a, {}}, ob{b, {}};
  run_experiment(c, 3, oa);
  run_experiment(c, 3, ob);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "eval.csv"), slurp(b / "eval.csv"));
  EXPECT_EQ(slurp(a / "checkpoint.bin"), slurp(b / "checkpoint.bin"));
  const RunSummary s = read_summary_json(a / "summary.json");
  EXPECT_EQ(s.status, "ok");
  EXPECT_EQ(s.steps, 200u);
  EXPECT_EQ(s.config_hash, config_hash(c));
  EXPECT_EQ(read_metrics_csv(a / "metrics.csv").size(), 200u);
  EXPECT_EQ(read_eval_csv(a / "eval.csv").size(), 2u);
}

TEST(Runner, OffModeMatchesPlainBackboneLoop) {
  const ExperimentConfig c = tiny_bandit(ParMode::Off, 250);
  const std::uint64_t seed = 5;
  const OfflineDataset data = prepare_dataset(c, seed);

  std::vector<std::vector<double>> harness_actor, harness_critic;
  RunOptions opts;
  opts.after_step = [&](std::uint64_t t, const Td3BcAgent& agent) {
    if (t == 1 || t == 100 || t == 250) {
      harness_actor.push_back(agent.actor().flat_params());
      const auto q = agent.critic().head(1).params();
      harness_critic.emplace_back(q.begin(), q.end());
    }
  };
  run_experiment(c, data, seed, opts);

  Rng init = Rng::stream(seed, streams::kInit);
  Rng batches = Rng::stream(seed, streams::kBatches);
  Rng noise = Rng::stream(seed, streams::kActorNoise);
  Td3BcAgent agent({1, 2, BanditEnv().action_bound()}, c.backbone, init);
  std::size_t k = 0;
  for (std::uint64_t t = 1; t <= 250; ++t) {
    const TrainingBatch b = sample_batch(data, c.backbone.batch_size, batches);
    agent.update_critic(b, t);
    if (agent.actor_step_due(t)) agent.update_actor(b, noise, t);
    agent.update_targets();
    if (t == 1 || t == 100 || t == 250) {
      ASSERT_LT(k, harness_actor.size());
      EXPECT_EQ(agent.actor().flat_params(), harness_actor[k]) << "step " << t;
      const auto q = agent.critic().head(1).params();
      EXPECT_EQ(std::vector<double>(q.begin(), q.end()), harness_critic[k]) << "step " << t;
      ++k;
    }
  }
  EXPECT_EQ(k, 3u);
}

TEST(Runner, CriticBatchesUntouchedByReplacement) {
  for (ParMode mode : {ParMode::Par, ParMode::Filtering, ParMode::NonProximal}) {
    ExperimentConfig off = tiny_bandit(ParMode::Off);
    ExperimentConfig on = tiny_bandit(mode);
    on.par.nonproximal_switch_step = 50;
    const OfflineDataset data = prepare_dataset(off, 2);
    const RunResult a = run_experiment(off, data, 2);
    const RunResult b = run_experiment(on, data, 2);
    EXPECT_EQ(a.summary.critic_action_checksum, b.summary.critic_action_checksum) << to_string(mode);
    if (mode == ParMode::Par) {
      EXPECT_GT(b.summary.gate_events, 0u);
      std::size_t replaced = 0;
      for (const auto& r : b.metrics) replaced += r.n_syn;
      EXPECT_GT(replaced, 0u);
    }
  }
}

TEST(Runner, StationarityReportedForMseOnly) {
  const RunResult mse = run_experiment(tiny_bandit(ParMode::Off, 100), 0);
  EXPECT_TRUE(std::isfinite(mse.summary.final_stationarity));
  EXPECT_TRUE(std::isfinite(mse.summary.mean_stationarity));
  ExperimentConfig kl = tiny_bandit(ParMode::Off, 100);
  kl.backbone.regularizer = Regularizer::Mle;
  EXPECT_TRUE(std::isnan(run_experiment(kl, 0).summary.mean_stationarity));
}

TEST(Runner, DivergenceWritesFailedSummary) {
  ExperimentConfig c = tiny_bandit(ParMode::Off, 200);
  c.backbone.lr = 1e300;
  const fs::path dir = scratch("diverge");
  EXPECT_THROW(run_experiment(c, 0, {dir, {}}), TrainingError);
  const RunSummary s = read_summary_json(dir / "summary.json");
  EXPECT_EQ(s.status, "failed");
  EXPECT_GT(s.failed_step, 0u);
  EXPECT_FALSE(s.error.empty());
}

TEST(Checkpoint, RoundTripAndRestore) {
  const ExperimentConfig c = tiny_pointmass(ParMode::Off);
  Rng rng(1);
  Td3BcAgent agent({2, 2, 1.0}, c.backbone, rng);
  const Checkpoint ck = capture_checkpoint(agent, 42, serialize_config(c));
  const fs::path dir = scratch("ckpt");
  save_checkpoint(ck, dir / "c.bin");
  const Checkpoint back = load_checkpoint(dir / "c.bin");
  EXPECT_EQ(back, ck);
  EXPECT_EQ(back.step, 42u);
  EXPECT_EQ(parse_config(back.config), c);

  Rng other(2);
  Actor actor(actor_spec_for({2, 2, 1.0}, c.backbone), other);
  restore_actor(back, actor);
  Rng srng(3);
  Matrix s(5, 2);
  for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = srng.normal();
  EXPECT_EQ(actor.act(s), agent.actor().act(s));
  EXPECT_THROW(back.find("no.such.tensor"), CheckpointError);
}

TEST(Checkpoint, CorruptFilesRejected) {
  const fs::path dir = scratch("ckpt_bad");
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), CheckpointError);
  Rng rng(1);
  Td3BcAgent agent({1, 2, 0.0}, tiny_bandit().backbone, rng);
  save_checkpoint(capture_checkpoint(agent, 1, "x"), dir / "c.bin");
  const std::string bytes = slurp(dir / "c.bin");
  std::ofstream(dir / "t.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_THROW(load_checkpoint(dir / "t.bin"), CheckpointError);
  std::ofstream(dir / "x.bin", std::ios::binary) << bytes << "extra";
  EXPECT_THROW(load_checkpoint(dir / "x.bin"), CheckpointError);
  std::ofstream(dir / "m.bin", std::ios::binary) << "JUNK" << bytes.substr(4);
  EXPECT_THROW(load_checkpoint(dir / "m.bin"), CheckpointError);
}

TEST(Sweep, EightCellsAndFigureExports) {
  ExperimentConfig c = tiny_pointmass(ParMode::Par);
  c.backbone.total_steps = 600;
  c.run.metrics_stride = 10;
  c.run.eval_every = 200;
  c.sweep.t_start = {0, 500};
  c.sweep.p_range = {{0.0, 0.3}, {0.0, 0.5}};
  c.sweep.beta = {1.1, 1.5};
  const auto cells = expand_grid(c);
  ASSERT_EQ(cells.size(), 8u);
  std::set<std::string> labels;
  for (const auto& cell : cells) labels.insert(cell.label());
  EXPECT_EQ(labels.size(), 8u);
  EXPECT_EQ(cells[7].apply(c).par.beta, cells[7].beta);

  const fs::path dir = scratch("sweep");
  const SweepResult r = run_sweep(c, dir / "sweep");
  ASSERT_EQ(r.runs.size(), 8u);
  ASSERT_EQ(r.cells.size(), 8u);
  for (const auto& agg : r.cells) EXPECT_EQ(agg.completed, 1u);
  EXPECT_TRUE(fs::exists(dir / "sweep" / "sweep.json"));
  const std::string table = format_aggregate_table(r.cells);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 9);
  EXPECT_NE(table.find("1/1"), std::string::npos);

  ExperimentConfig base = c;
  base.par.mode = ParMode::Off;
  base.sweep = {};
  run_experiment(base, 0, {dir / "off", {}});
  ExperimentConfig filt = base;
  filt.par.mode = ParMode::Filtering;
  run_experiment(filt, 0, {dir / "filtering", {}});
  const std::vector<LabeledRun> runs{{"off", dir / "off"}, {"filtering", dir / "filtering"},
                                     {"par", r.runs[0].directory}};

  auto series = [](const fs::path& csv, const std::string& header, std::size_t col) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, header);
    std::set<std::string> names;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string field;
      for (std::size_t i = 0; i <= col; ++i) std::getline(ss, field, ',');
      if (!field.empty()) names.insert(field);
    }
    return names.size();
  };

  save_dataset(prepare_dataset(base, 0), dir / "data.bin");
  export_fig2(runs, dir / "data.bin", dir / "fig2.csv");
  EXPECT_EQ(series(dir / "fig2.csv", kFig2Header, 1), 3u);
  export_fig3(runs, dir / "fig3.csv");
  EXPECT_EQ(series(dir / "fig3.csv", kFig3Header, 0), 3u);
  export_fig4(dir / "sweep", {dir / "off"}, dir / "fig4.csv");
  EXPECT_EQ(series(dir / "fig4.csv", kFig4Header, 0), 9u);

  try {
    export_fig3({{"a", dir / "nope1"}, {"b", dir / "nope2"}}, dir / "x.csv");
    FAIL() << "expected ExportError";
  } catch (const ExportError& e) {
    EXPECT_EQ(e.missing().size(), 2u);
  }
}

TEST(Sweep, EmptyGridRejected) {
  EXPECT_THROW(expand_grid(tiny_bandit(ParMode::Par)), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("train --no-such-flag"), 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "missing.ini").string()), 2);
  std::ofstream(dir / "bad.ini") << "[backbone]\nlearning_rate = 1\n";
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(run_cli("export --kind fig3 --run a=" + (dir / "none").string() + " --out " +
                    (dir / "f.csv").string()),
            3);
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir / "none.bin").string()), 3);

  std::ofstream(dir / "tiny.ini") << "[dataset]\nsize = 200\n[backbone]\nhidden = 8,8\nbatch_size = 16\n"
                                     "total_steps = 40\n[par]\nt_start = 10\n[run]\nfinal_eval_episodes = 2\n";
  EXPECT_EQ(run_cli("train --config " + (dir / "tiny.ini").string() + " --out " + (dir / "run").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "run" / "seed_0" / "summary.json"));
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir / "run" / "seed_0" / "checkpoint.bin").string()), 0);
  EXPECT_EQ(run_cli("gen-data --config " + (dir / "tiny.ini").string() + " --out " + (dir / "data").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "data" / "dataset_seed0.bin"));

  std::ofstream(dir / "nan.ini") << "[dataset]\nsize = 200\n[backbone]\nhidden = 8,8\nbatch_size = 16\n"
                                    "total_steps = 200\nlr = 1e300\n[par]\nt_start = 10\n";
  EXPECT_EQ(run_cli("train --config " + (dir / "nan.ini").string() + " --out " + (dir / "nan").string()), 4);
}

TEST(Config, ShippedConfigsValidate) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(PARLAB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    const ExperimentConfig c = load_config(entry.path());
    EXPECT_NO_THROW(c.validate()) << entry.path();
    if (!c.sweep.empty()) EXPECT_EQ(expand_grid(c).size(), 8u) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 3u);
}
