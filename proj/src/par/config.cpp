#include "parlab/par/config.hpp"

#include <string>

#include "parlab/errors.hpp"

namespace parlab {

std::string_view to_string(ParMode m) {
  switch (m) {
    case ParMode::Off: return "off";
    case ParMode::Par: return "par";
    case ParMode::Filtering: return "filtering";
    case ParMode::NonProximal: return "nonproximal";
  }
  return "?";
}

ParMode parse_par_mode(std::string_view s) {
  if (s == "off") return ParMode::Off;
  if (s == "par") return ParMode::Par;
  if (s == "filtering") return ParMode::Filtering;
  if (s == "nonproximal") return ParMode::NonProximal;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected off, par, filtering or nonproximal)");
}

void ParConfig::validate() const {
  if (!(p_min >= 0.0 && p_min <= p_max && p_max <= 1.0)) {
    throw ConfigError("par: need 0 <= p_min <= p_max <= 1");
  }
  if (t_start >= total_steps) throw ConfigError("par: t_start must be below total_steps");
  if (!(beta > 0.0)) throw ConfigError("par: beta must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("par: alpha must lie in (0, 1)");
  if (capacity == 0) throw ConfigError("par: capacity must be at least 1");
}

}  // namespace parlab
