#pragma once

#include <cstdint>
#include <string_view>

namespace parlab {

enum class ParMode { Off, Par, Filtering, NonProximal };

std::string_view to_string(ParMode m);
ParMode parse_par_mode(std::string_view s);

struct ParConfig {
  ParMode mode = ParMode::Off;
  double p_min = 0.0;
  double p_max = 0.5;
  std::uint64_t t_start = 500;
  double beta = 1.1;
  double alpha = 0.995;  // smoothing of the critic loss
  std::size_t capacity = 2000;
  std::uint64_t total_steps = 10000;
  std::uint64_t nonproximal_switch_step = 0;

  /// Throws ConfigError on violated invariants.
  void validate() const;
  bool operator==(const ParConfig&) const = default;
};

}  // namespace parlab
