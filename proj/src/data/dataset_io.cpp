#include "parlab/data/dataset_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace parlab {

namespace {

constexpr char kMagic[4] = {'P', 'A', 'R', 'D'};

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    v = static_cast<T>(v >> 8);
  }
}

void put_string(std::vector<unsigned char>& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  double get_double() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const unsigned char* cursor() const { return bytes_.data() + pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DatasetChecksumError("dataset file truncated");
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_dataset(const OfflineDataset& data, const std::filesystem::path& path) {
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_string(out, data.info().env_name);
  put_string(out, data.info().behavior);
  put_le<std::uint64_t>(out, data.state_dim());
  put_le<std::uint64_t>(out, data.action_dim());
  put_le<std::uint64_t>(out, data.size());
  put_le<std::uint64_t>(out, data.info().seed);
  put_le<std::uint32_t>(out, data.checksum());
  const auto payload = data.payload();
  out.insert(out.end(), payload.begin(), payload.end());

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DatasetError("cannot write dataset file " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw DatasetError("write failed for " + path.string());
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetMissingError("dataset file not found: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw DatasetFormatError(path.string() + " is not a dataset file");
  }
  std::vector<unsigned char> body(bytes.begin() + 4, bytes.end());
  Reader in(body);
  const auto version = in.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw DatasetVersionError(fmt::format("dataset version {} (supported: {})", version,
                                          kDatasetVersion));
  }
  DatasetInfo info;
  info.env_name = in.get_string();
  info.behavior = in.get_string();
  const auto sdim = in.get<std::uint64_t>();
  const auto adim = in.get<std::uint64_t>();
  const auto count = in.get<std::uint64_t>();
  info.seed = in.get<std::uint64_t>();
  const auto stored_crc = in.get<std::uint32_t>();
  const std::uint64_t row_width = 2 * sdim + adim + 2;
  if (sdim == 0 || adim == 0 || count == 0 || row_width > (1u << 20)) {
    throw DatasetFormatError("dataset header has invalid dimensions");
  }
  const std::uint64_t expected = count * row_width * 8;
  const auto crc = static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), in.cursor(), static_cast<uInt>(in.remaining())));
  if (in.remaining() != expected || crc != stored_crc) {
    throw DatasetChecksumError(fmt::format(
        "dataset checksum mismatch in {} (payload {} of {} bytes)", path.string(),
        in.remaining(), expected));
  }
  Matrix states(count, sdim), actions(count, adim), next_states(count, sdim);
  Vector rewards(count), dones(count);
  for (std::size_t r = 0; r < count; ++r) {
    for (double& v : states.row(r)) v = in.get_double();
    for (double& v : actions.row(r)) v = in.get_double();
    rewards[r] = in.get_double();
    for (double& v : next_states.row(r)) v = in.get_double();
    dones[r] = in.get_double();
  }
  return OfflineDataset(std::move(info), std::move(states), std::move(actions),
                        std::move(rewards), std::move(next_states), std::move(dones));
}

void export_dataset_csv(const OfflineDataset& data, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DatasetError("cannot write " + path.string());
  std::string header;
  for (std::size_t i = 0; i < data.state_dim(); ++i) header += fmt::format("s{},", i);
  for (std::size_t i = 0; i < data.action_dim(); ++i) header += fmt::format("a{},", i);
  header += "r,";
  for (std::size_t i = 0; i < data.state_dim(); ++i) header += fmt::format("ns{},", i);
  header += "done\n";
  f << header;
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::string line;
    for (double v : data.states().row(r)) line += fmt::format("{},", v);
    for (double v : data.actions().row(r)) line += fmt::format("{},", v);
    line += fmt::format("{},", data.rewards()[r]);
    for (double v : data.next_states().row(r)) line += fmt::format("{},", v);
    line += data.dones()[r] != 0.0 ? "1\n" : "0\n";
    f << line;
  }
}

}  // namespace parlab
