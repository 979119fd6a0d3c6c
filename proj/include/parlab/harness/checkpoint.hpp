#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "parlab/agents/td3bc.hpp"

namespace parlab {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointTensor {
  std::string name;  // e.g. "actor.l0.w", "critic.q2.l1.b", "actor.log_std"
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<double> values;

  bool operator==(const CheckpointTensor&) const = default;
};

struct Checkpoint {
  std::uint64_t step = 0;
  std::string config;  // canonical config text of the run
  std::vector<CheckpointTensor> tensors;

  const CheckpointTensor& find(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "PARC", u32 version, u64 step, config string, u32 tensor count, then per
/// tensor: name, u64 rows, u64 cols and rows*cols little-endian doubles.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint capture_checkpoint(const Td3BcAgent& agent, std::uint64_t step, std::string config);
/// Loads the "actor.*" tensors into `actor`; shapes must match.
void restore_actor(const Checkpoint& ckpt, Actor& actor, const std::string& prefix = "actor");

}  // namespace parlab
