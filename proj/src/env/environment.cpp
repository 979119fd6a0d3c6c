#include "parlab/env/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "parlab/errors.hpp"

namespace parlab {

namespace {

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("behavior spec: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

double BanditEnv::action_bound() const { return std::numeric_limits<double>::infinity(); }

Vector BanditEnv::reset(Rng&) const { return {0.0}; }

StepResult BanditEnv::step(std::span<const double> state, std::span<const double> action, int,
                           Rng&) const {
  return {Vector(state.begin(), state.end()), reward(action), true};
}

Vector BanditEnv::optimal_action(std::span<const double>) const { return {0.0, 0.0}; }

double BanditEnv::reward(std::span<const double> action) { return -squared_norm(action); }

PointMassEnv::PointMassEnv(PointMassConfig config) : config_(config) {
  if (config_.dim == 0 || config_.horizon <= 0 || !(config_.gain > 0.0) ||
      config_.noise_std < 0.0 || !(config_.state_bound > 0.0) || !(config_.action_bound > 0.0)) {
    throw ConfigError("pointmass: invalid configuration");
  }
}

Vector PointMassEnv::reset(Rng& rng) const {
  Vector s(config_.dim);
  for (double& v : s) v = rng.uniform(-config_.init_bound, config_.init_bound);
  return s;
}

StepResult PointMassEnv::step(std::span<const double> state, std::span<const double> action,
                              int t, Rng& rng) const {
  if (state.size() != config_.dim || action.size() != config_.dim) {
    throw DimensionError("pointmass_step: expected dimension " + std::to_string(config_.dim));
  }
  StepResult out;
  out.reward = reward(state);
  out.next_state.resize(config_.dim);
  for (std::size_t i = 0; i < config_.dim; ++i) {
    const double noise = config_.noise_std > 0.0 ? config_.noise_std * rng.normal() : 0.0;
    out.next_state[i] =
        clip(state[i] + config_.gain * clip(action[i], config_.action_bound) + noise,
             config_.state_bound);
  }
  out.done = t + 1 >= config_.horizon;
  return out;
}

Vector PointMassEnv::optimal_action(std::span<const double> state) const {
  Vector a(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    a[i] = clip(-state[i] / config_.gain, config_.action_bound);
  }
  return a;
}

double PointMassEnv::reward(std::span<const double> state) const {
  return -squared_norm(state) / 25.0;
}

std::string BehaviorSpec::to_string() const {
  std::string out = kind == BehaviorKind::Gaussian ? "gaussian" : "proportional";
  out += " center=";
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (i) out += ',';
    out += format_double(center[i]);
  }
  out += " std=" + format_double(std);
  out += " gain=" + format_double(gain);
  return out;
}

BehaviorSpec BehaviorSpec::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind;
  in >> kind;
  BehaviorSpec spec;
  if (kind == "gaussian") {
    spec.kind = BehaviorKind::Gaussian;
  } else if (kind == "proportional") {
    spec.kind = BehaviorKind::Proportional;
  } else {
    throw ConfigError("behavior spec: unknown kind '" + kind + "'");
  }
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ConfigError("behavior spec: expected key=value, got " + field);
    const std::string_view key = std::string_view(field).substr(0, eq);
    const std::string_view value = std::string_view(field).substr(eq + 1);
    if (key == "center") {
      spec.center.clear();
      std::size_t start = 0;
      while (start <= value.size()) {
        const std::size_t comma = std::min(value.find(',', start), value.size());
        spec.center.push_back(parse_double(value.substr(start, comma - start)));
        start = comma + 1;
      }
    } else if (key == "std") {
      spec.std = parse_double(value);
    } else if (key == "gain") {
      spec.gain = parse_double(value);
    } else {
      throw ConfigError("behavior spec: unknown field '" + std::string(key) + "'");
    }
  }
  if (spec.std < 0.0) throw ConfigError("behavior spec: std must be non-negative");
  return spec;
}

BehaviorPolicy::BehaviorPolicy(BehaviorSpec spec, double action_bound)
    : spec_(std::move(spec)), bound_(action_bound) {}

Vector BehaviorPolicy::mean_action(std::span<const double> state) const {
  Vector a(spec_.center.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (spec_.kind == BehaviorKind::Gaussian) {
      a[i] = spec_.center[i];
    } else {
      a[i] = clip(spec_.gain * (spec_.center[i] - state[i]), bound_);
    }
  }
  return a;
}

Vector BehaviorPolicy::sample(std::span<const double> state, Rng& rng) const {
  Vector a(spec_.center.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double noise = spec_.std * rng.normal();
    if (spec_.kind == BehaviorKind::Gaussian) {
      a[i] = clip(spec_.center[i] + noise, bound_);
    } else {
      a[i] = clip(spec_.gain * (spec_.center[i] - state[i]) + noise, bound_);
    }
  }
  return a;
}

std::unique_ptr<Environment> make_environment(const EnvironmentOptions& options) {
  if (options.name == BanditEnv::kName) return std::make_unique<BanditEnv>();
  if (options.name == PointMassEnv::kName) return std::make_unique<PointMassEnv>(options.pointmass);
  throw ConfigError("unknown environment '" + options.name + "' (expected bandit2d or pointmass)");
}

BehaviorSpec default_behavior(std::string_view env_name) {
  if (env_name == BanditEnv::kName) return {BehaviorKind::Gaussian, {2.0, 2.0}, 1.0, 1.0};
  if (env_name == PointMassEnv::kName) return {BehaviorKind::Proportional, {2.0, 2.0}, 0.3, 1.0};
  throw ConfigError("unknown environment '" + std::string(env_name) + "'");
}

}  // namespace parlab
