#include "parlab/harness/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace parlab {

namespace {

constexpr char kMagic[4] = {'P', 'A', 'R', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::string get_string() {
    const auto len = static_cast<std::size_t>(get(4));
    need(len);
    std::string s(bytes_.data() + pos_, len);
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated");
  }

  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void add_net(std::vector<CheckpointTensor>& out, const std::string& prefix, const MlpNet& net) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.bias(l);
    const std::string layer = prefix + ".l" + std::to_string(l);
    out.push_back({layer + ".w", w.size() / b.size(), b.size(), {w.begin(), w.end()}});
    out.push_back({layer + ".b", 1, b.size(), {b.begin(), b.end()}});
  }
}

void add_actor(std::vector<CheckpointTensor>& out, const std::string& prefix, const Actor& actor) {
  add_net(out, prefix, actor.net());
  if (actor.gaussian()) {
    const auto ls = actor.raw_log_std();
    out.push_back({prefix + ".log_std", 1, ls.size(), {ls.begin(), ls.end()}});
  }
}

void copy_into(const CheckpointTensor& t, std::span<double> dst) {
  if (t.values.size() != dst.size()) {
    throw CheckpointError("checkpoint tensor " + t.name + ": " + std::to_string(t.values.size()) +
                          " values, expected " + std::to_string(dst.size()));
  }
  std::copy(t.values.begin(), t.values.end(), dst.begin());
}

}  // namespace

const CheckpointTensor& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw CheckpointError("checkpoint has no tensor " + name);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, ckpt.step);
  put_string(out, ckpt.config);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.rows * t.cols != t.values.size()) throw CheckpointError("tensor " + t.name + ": bad shape");
    put_string(out, t.name);
    put_u64(out, t.rows);
    put_u64(out, t.cols);
    for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get(1));
  if (!std::equal(magic, magic + 4, kMagic)) throw CheckpointError("not a checkpoint file: " + path.string());
  const auto version = r.get(4);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported");
  }
  Checkpoint ckpt;
  ckpt.step = r.get(8);
  ckpt.config = r.get_string();
  const auto count = r.get(4);
  for (std::uint64_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    t.name = r.get_string();
    t.rows = r.get(8);
    t.cols = r.get(8);
    if (t.rows * t.cols > r.remaining() / 8) throw CheckpointError("checkpoint truncated");
    t.values.resize(t.rows * t.cols);
    for (double& v : t.values) v = std::bit_cast<double>(r.get(8));
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
  return ckpt;
}

Checkpoint capture_checkpoint(const Td3BcAgent& agent, std::uint64_t step, std::string config) {
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.config = std::move(config);
  add_actor(ckpt.tensors, "actor", agent.actor());
  add_actor(ckpt.tensors, "ema_actor", agent.ema_actor());
  add_net(ckpt.tensors, "critic.q1", agent.critic().head(0));
  add_net(ckpt.tensors, "critic.q2", agent.critic().head(1));
  add_net(ckpt.tensors, "ema_critic.q1", agent.ema_critic().head(0));
  add_net(ckpt.tensors, "ema_critic.q2", agent.ema_critic().head(1));
  if (agent.behavior()) add_actor(ckpt.tensors, "behavior", agent.behavior()->policy());
  return ckpt;
}

void restore_actor(const Checkpoint& ckpt, Actor& actor, const std::string& prefix) {
  MlpNet& net = actor.net();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::string layer = prefix + ".l" + std::to_string(l);
    copy_into(ckpt.find(layer + ".w"), net.weights(l));
    copy_into(ckpt.find(layer + ".b"), net.bias(l));
  }
  if (actor.gaussian()) copy_into(ckpt.find(prefix + ".log_std"), actor.raw_log_std());
}

}  // namespace parlab
