#include "parlab/harness/verify.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "parlab/data/dataset.hpp"
#include "parlab/env/environment.hpp"
#include "parlab/theory/bound.hpp"
#include "parlab/theory/discrete.hpp"
#include "parlab/theory/stationarity.hpp"

namespace parlab {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

VerifyReport run_verify(const VerifyOptions& o) {
  VerifyReport report;
  report.seed = o.seed;

  {
    Rng rng = Rng::stream(o.seed, 100);
    double worst = 0.0;
    std::size_t suboptimal = 0;
    std::size_t below_max = 0;
    for (std::size_t i = 0; i < o.kl_instances; ++i) {
      const DiscreteBandit db = random_discrete_bandit(rng);
      const Vector learned = train_kl_tabular(db, o.kl_steps, o.kl_lr);
      worst = std::max(worst, max_abs_gap(learned, boltzmann_policy(db)));
      if (db.supports_suboptimal()) {
        ++suboptimal;
        if (expected_q(learned, db.q) < *std::max_element(db.q.begin(), db.q.end())) ++below_max;
      }
    }
    report.checks.push_back({"kl_matches_boltzmann", worst <= 0.01, worst, 0.01,
                             fmt::format("{} instances", o.kl_instances)});
    report.checks.push_back({"kl_suboptimal_value", below_max == suboptimal,
                             static_cast<double>(suboptimal - below_max), 0.0,
                             fmt::format("{}/{} instances with sub-optimal support below max Q",
                                         below_max, suboptimal)});
  }

  {
    Rng rng = Rng::stream(o.seed, 101);
    double worst = 0.0;
    double worst_hidden = 0.0;
    for (std::size_t i = 0; i < o.mle_instances; ++i) {
      RandomBanditOptions opts;
      opts.hide_optimal = i % 2 == 1;
      const DiscreteBandit db = random_discrete_bandit(rng, opts);
      const Vector learned = fit_weighted_mle(db, o.mle_samples, o.mle_steps, o.mle_lr, rng);
      worst = std::max(worst, max_abs_gap(learned, weighted_behavior_policy(db)));
      if (opts.hide_optimal) {
        const auto best = static_cast<std::size_t>(
            std::max_element(db.q.begin(), db.q.end()) - db.q.begin());
        worst_hidden = std::max(worst_hidden, learned[best]);
      }
    }
    report.checks.push_back({"mle_matches_weighted_behavior", worst <= 0.02, worst, 0.02,
                             fmt::format("{} instances", o.mle_instances)});
    report.checks.push_back({"mle_zero_support_optimum", worst_hidden < 1e-3, worst_hidden, 1e-3,
                             "largest learned probability of an unsupported optimal action"});
  }

  {
    Rng rng = Rng::stream(o.seed, 102);
    double worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.bound_instances; ++i) {
      worst_slack = std::min(worst_slack, divergence_bound_report(random_bound_instance(rng)).slack());
    }
    report.checks.push_back({"divergence_bound", worst_slack >= -1e-9, worst_slack, -1e-9,
                             fmt::format("min lhs - rhs over {} instances", o.bound_instances)});
    RandomBoundOptions linear;
    linear.linear_critic = true;
    double worst_rhs = 0.0;
    for (std::size_t i = 0; i < o.linear_instances; ++i) {
      worst_rhs = std::max(worst_rhs, std::abs(divergence_bound_report(random_bound_instance(rng, linear)).rhs));
    }
    report.checks.push_back({"divergence_bound_linear_critic", worst_rhs == 0.0, worst_rhs, 0.0,
                             "identical linear critics give rhs = 0"});
  }

  {
    Rng rng = Rng::stream(o.seed, 103);
    const OfflineDataset data = generate_bandit_dataset(10000, default_behavior(BanditEnv::kName), rng);
    const Vector optimum{0.0, 0.0};
    const double grad = bc_gradient_at_optimum(data, optimum);
    const Vector mean = data.mean_action();
    const double oracle = 2.0 * std::sqrt(squared_norm(mean));
    const double err = std::abs(grad - oracle);
    report.checks.push_back({"bc_gradient_at_optimum", grad > 0.0 && err <= 1e-9 * oracle, err, 1e-9 * oracle,
                             fmt::format("||grad|| = {} (closed form {})", grad, oracle)});
  }
  return report;
}

void write_verify_report(const VerifyReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["passed"] = report.passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", c.value},
                           {"threshold", c.threshold},
                           {"detail", c.detail}});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace parlab
