#include "parlab/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "parlab/errors.hpp"

namespace parlab {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("config: " + key + ": cannot parse '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config: " + key + ": expected true or false, got '" + s + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, std::string_view text) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

// Ordered (section, key, value) triples; the single source of the canonical layout.
using Entries = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

Entries to_entries(const ExperimentConfig& c) {
  const auto& pm = c.environment.pointmass;
  const auto& b = c.backbone;
  std::string ranges;
  for (std::size_t i = 0; i < c.sweep.p_range.size(); ++i) {
    if (i) ranges += ',';
    ranges += fmt_double(c.sweep.p_range[i].first) + ":" + fmt_double(c.sweep.p_range[i].second);
  }
  return {
      {"environment",
       {{"name", c.environment.name},
        {"state_dim", std::to_string(pm.dim)},
        {"state_bound", fmt_double(pm.state_bound)},
        {"action_bound", fmt_double(pm.action_bound)},
        {"init_bound", fmt_double(pm.init_bound)},
        {"gain", fmt_double(pm.gain)},
        {"noise_std", fmt_double(pm.noise_std)},
        {"horizon", std::to_string(pm.horizon)},
        {"gamma", fmt_double(pm.gamma)}}},
      {"dataset",
       {{"size", std::to_string(c.dataset.size)},
        {"episodes", std::to_string(c.dataset.episodes)},
        {"behavior", c.dataset.behavior.to_string()},
        {"seed", std::to_string(c.dataset.seed)},
        {"path", c.dataset.path}}},
      {"backbone",
       {{"regularizer", std::string(to_string(b.regularizer))},
        {"lambda_mode", std::string(to_string(b.lambda_mode))},
        {"lambda", fmt_double(b.lambda)},
        {"lr", fmt_double(b.lr)},
        {"batch_size", std::to_string(b.batch_size)},
        {"total_steps", std::to_string(b.total_steps)},
        {"gamma", fmt_double(b.gamma)},
        {"target_alpha", fmt_double(b.target_alpha)},
        {"actor_delay", std::to_string(b.actor_delay)},
        {"hidden", join(b.hidden)},
        {"mle_temperature", fmt_double(b.mle_temperature)},
        {"mle_samples", std::to_string(b.mle_samples)},
        {"init_log_std", fmt_double(b.init_log_std)},
        {"behavior_steps", std::to_string(b.behavior.steps)},
        {"behavior_batch_size", std::to_string(b.behavior.batch_size)},
        {"behavior_lr", fmt_double(b.behavior.lr)},
        {"behavior_hidden", join(b.behavior.hidden)},
        {"behavior_cotrain", b.behavior_cotrain ? "true" : "false"}}},
      {"par",
       {{"mode", std::string(to_string(c.par.mode))},
        {"p_min", fmt_double(c.par.p_min)},
        {"p_max", fmt_double(c.par.p_max)},
        {"t_start", std::to_string(c.par.t_start)},
        {"beta", fmt_double(c.par.beta)},
        {"alpha", fmt_double(c.par.alpha)},
        {"capacity", std::to_string(c.par.capacity)},
        {"switch_step", std::to_string(c.par.nonproximal_switch_step)}}},
      {"run",
       {{"seeds", join(c.run.seeds)},
        {"out", c.run.output_dir},
        {"metrics_stride", std::to_string(c.run.metrics_stride)},
        {"eval_every", std::to_string(c.run.eval_every)},
        {"eval_episodes", std::to_string(c.run.eval_episodes)},
        {"final_eval_episodes", std::to_string(c.run.final_eval_episodes)},
        {"probe_states", std::to_string(c.run.probe_states)},
        {"threads", std::to_string(c.run.threads)}}},
      {"sweep",
       {{"t_start", join(c.sweep.t_start)},
        {"p_range", ranges},
        {"beta", join(c.sweep.beta)}}},
  };
}

void apply(ExperimentConfig& c, const std::string& section, const std::string& key,
           const std::string& raw) {
  const std::string v = trim(raw);
  const std::string name = section + "." + key;
  auto& pm = c.environment.pointmass;
  auto& b = c.backbone;
  if (section == "environment") {
    if (key == "name") c.environment.name = v;
    else if (key == "state_dim") pm.dim = parse_number<std::size_t>(name, v);
    else if (key == "state_bound") pm.state_bound = parse_number<double>(name, v);
    else if (key == "action_bound") pm.action_bound = parse_number<double>(name, v);
    else if (key == "init_bound") pm.init_bound = parse_number<double>(name, v);
    else if (key == "gain") pm.gain = parse_number<double>(name, v);
    else if (key == "noise_std") pm.noise_std = parse_number<double>(name, v);
    else if (key == "horizon") pm.horizon = parse_number<int>(name, v);
    else if (key == "gamma") pm.gamma = parse_number<double>(name, v);
    else throw ConfigError("config: unknown key " + name);
  } else if (section == "dataset") {
    if (key == "size") c.dataset.size = parse_number<std::size_t>(name, v);
    else if (key == "episodes") c.dataset.episodes = parse_number<std::size_t>(name, v);
    else if (key == "behavior") c.dataset.behavior = BehaviorSpec::parse(v);
    else if (key == "seed") c.dataset.seed = parse_number<std::uint64_t>(name, v);
    else if (key == "path") c.dataset.path = v;
    else throw ConfigError("config: unknown key " + name);
  } else if (section == "backbone") {
    if (key == "regularizer") b.regularizer = parse_regularizer(v);
    else if (key == "lambda_mode") b.lambda_mode = parse_lambda_mode(v);
    else if (key == "lambda") b.lambda = parse_number<double>(name, v);
    else if (key == "lr") b.lr = parse_number<double>(name, v);
    else if (key == "batch_size") b.batch_size = parse_number<std::size_t>(name, v);
    else if (key == "total_steps") b.total_steps = parse_number<std::size_t>(name, v);
    else if (key == "gamma") b.gamma = parse_number<double>(name, v);
    else if (key == "target_alpha") b.target_alpha = parse_number<double>(name, v);
    else if (key == "actor_delay") b.actor_delay = parse_number<int>(name, v);
    else if (key == "hidden") b.hidden = parse_list<std::size_t>(name, v);
    else if (key == "mle_temperature") b.mle_temperature = parse_number<double>(name, v);
    else if (key == "mle_samples") b.mle_samples = parse_number<int>(name, v);
    else if (key == "init_log_std") b.init_log_std = parse_number<double>(name, v);
    else if (key == "behavior_steps") b.behavior.steps = parse_number<std::size_t>(name, v);
    else if (key == "behavior_batch_size") b.behavior.batch_size = parse_number<std::size_t>(name, v);
    else if (key == "behavior_lr") b.behavior.lr = parse_number<double>(name, v);
    else if (key == "behavior_hidden") b.behavior.hidden = parse_list<std::size_t>(name, v);
    else if (key == "behavior_cotrain") b.behavior_cotrain = parse_bool(name, v);
    else throw ConfigError("config: unknown key " + name);
  } else if (section == "par") {
    if (key == "mode") c.par.mode = parse_par_mode(v);
    else if (key == "p_min") c.par.p_min = parse_number<double>(name, v);
    else if (key == "p_max") c.par.p_max = parse_number<double>(name, v);
    else if (key == "t_start") c.par.t_start = parse_number<std::uint64_t>(name, v);
    else if (key == "beta") c.par.beta = parse_number<double>(name, v);
    else if (key == "alpha") c.par.alpha = parse_number<double>(name, v);
    else if (key == "capacity") c.par.capacity = parse_number<std::size_t>(name, v);
    else if (key == "switch_step") c.par.nonproximal_switch_step = parse_number<std::uint64_t>(name, v);
    else throw ConfigError("config: unknown key " + name);
  } else if (section == "run") {
    if (key == "seeds") c.run.seeds = parse_list<std::uint64_t>(name, v);
    else if (key == "out") c.run.output_dir = v;
    else if (key == "metrics_stride") c.run.metrics_stride = parse_number<std::size_t>(name, v);
    else if (key == "eval_every") c.run.eval_every = parse_number<std::size_t>(name, v);
    else if (key == "eval_episodes") c.run.eval_episodes = parse_number<std::size_t>(name, v);
    else if (key == "final_eval_episodes") c.run.final_eval_episodes = parse_number<std::size_t>(name, v);
    else if (key == "probe_states") c.run.probe_states = parse_number<std::size_t>(name, v);
    else if (key == "threads") c.run.threads = parse_number<std::size_t>(name, v);
    else throw ConfigError("config: unknown key " + name);
  } else if (section == "sweep") {
    if (key == "t_start") {
      c.sweep.t_start = parse_list<std::uint64_t>(name, v);
    } else if (key == "p_range") {
      c.sweep.p_range.clear();
      for (const auto& item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("config: " + name + ": expected lo:hi, got '" + item + "'");
        c.sweep.p_range.emplace_back(parse_number<double>(name, parts[0]),
                                     parse_number<double>(name, parts[1]));
      }
    } else if (key == "beta") {
      c.sweep.beta = parse_list<double>(name, v);
    } else {
      throw ConfigError("config: unknown key " + name);
    }
  } else {
    throw ConfigError("config: unknown section [" + section + "]");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

}  // namespace

ParConfig ExperimentConfig::resolved_par() const {
  ParConfig p = par;
  p.total_steps = backbone.total_steps;
  return p;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return environment == o.environment && dataset == o.dataset && backbone == o.backbone &&
         resolved_par() == o.resolved_par() && run == o.run && sweep == o.sweep;
}

void ExperimentConfig::validate() const {
  make_environment(environment);
  const bool bandit = environment.name == BanditEnv::kName;
  if (!bandit) {
    const auto& pm = environment.pointmass;
    require(pm.dim > 0, "environment.state_dim must be positive");
    require(pm.state_bound > 0 && pm.action_bound > 0 && pm.init_bound >= 0,
            "environment bounds must be positive");
    require(pm.noise_std >= 0, "environment.noise_std must be non-negative");
    require(pm.horizon > 0, "environment.horizon must be positive");
    require(dataset.behavior.center.size() == pm.dim,
            "dataset.behavior center must match environment.state_dim");
  } else {
    require(dataset.behavior.center.size() == 2, "dataset.behavior center must be 2-D for the bandit");
  }
  if (dataset.path.empty()) {
    require(bandit ? dataset.size > 0 : dataset.episodes > 0, "dataset size/episodes must be positive");
  }
  const auto& b = backbone;
  require(b.total_steps > 0, "backbone.total_steps must be positive");
  require(b.batch_size > 0, "backbone.batch_size must be positive");
  require(b.lr > 0, "backbone.lr must be positive");
  require(b.lambda > 0, "backbone.lambda must be positive");
  require(b.gamma >= 0 && b.gamma <= 1, "backbone.gamma must lie in [0, 1]");
  require(b.target_alpha >= 0 && b.target_alpha <= 1, "backbone.target_alpha must lie in [0, 1]");
  require(b.actor_delay >= 1, "backbone.actor_delay must be at least 1");
  require(!b.hidden.empty(), "backbone.hidden must list at least one layer");
  for (std::size_t h : b.hidden) require(h > 0, "backbone.hidden widths must be positive");
  for (std::size_t h : b.behavior.hidden) require(h > 0, "backbone.behavior_hidden widths must be positive");
  require(b.mle_temperature > 0, "backbone.mle_temperature must be positive");
  require(b.mle_samples >= 1, "backbone.mle_samples must be at least 1");
  require(b.behavior.batch_size > 0 && b.behavior.lr > 0, "backbone behavior fit settings must be positive");
  resolved_par().validate();
  require(!run.seeds.empty(), "run.seeds must not be empty");
  require(run.metrics_stride >= 1, "run.metrics_stride must be at least 1");
  require(run.eval_episodes >= 1 && run.final_eval_episodes >= 1, "run eval episodes must be positive");
  require(run.probe_states >= 1, "run.probe_states must be at least 1");
  require(run.threads >= 1, "run.threads must be at least 1");
  for (auto [lo, hi] : sweep.p_range) {
    require(lo >= 0 && lo <= hi && hi <= 1, "sweep.p_range needs 0 <= lo <= hi <= 1");
  }
  for (double beta : sweep.beta) require(beta > 0, "sweep.beta values must be positive");
  for (auto t : sweep.t_start) require(t < b.total_steps, "sweep.t_start values must be below total_steps");
}

ExperimentConfig default_config(std::string_view env_name) {
  ExperimentConfig c;
  c.environment.name = std::string(env_name);
  c.dataset.behavior = default_behavior(env_name);
  if (env_name == PointMassEnv::kName) {
    c.backbone.total_steps = 200000;
    c.run.metrics_stride = 10;
    c.run.eval_every = 5000;
  }
  c.par.total_steps = c.backbone.total_steps;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::string env_name(BanditEnv::kName);
  if (auto env = tree.get_child_optional("environment")) {
    if (auto name = env->get_optional<std::string>("name")) env_name = trim(*name);
  }
  static const std::set<std::string> known{"environment", "dataset", "backbone", "par", "run", "sweep"};
  for (const auto& [section, body] : tree) {
    if (!known.count(section)) throw ConfigError("config: unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside of a section");
    }
  }
  ExperimentConfig c = default_config(env_name == PointMassEnv::kName ? env_name : std::string(BanditEnv::kName));
  c.environment.name = env_name;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) apply(c, section, key, value.data());
  }
  c.par.total_steps = c.backbone.total_steps;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [section, entries] : to_entries(config)) {
    if (!out.empty()) out += '\n';
    out += "[" + section + "]\n";
    for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace parlab
