#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "parlab/data/dataset.hpp"

namespace parlab {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetMissingError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class DatasetVersionError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/// Payload checksum mismatch, including truncated files.
class DatasetChecksumError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/// Not a dataset file (bad magic) or an inconsistent header.
class DatasetFormatError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

/// Header: "PARD", u32 version, env name, behavior spec, u64 state_dim,
/// action_dim, count, seed, u32 CRC-32 of payload; then the row payload. All
/// integers and doubles little-endian; strings are u32 length + bytes.
void save_dataset(const OfflineDataset& data, const std::filesystem::path& path);
OfflineDataset load_dataset(const std::filesystem::path& path);

/// Human-readable mirror; header s0..,a0..,r,ns0..,done.
void export_dataset_csv(const OfflineDataset& data, const std::filesystem::path& path);

}  // namespace parlab
