#include "navlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "navlab/io.hpp"
#include "navlab/rng.hpp"
#include "navlab/training.hpp"

namespace navlab {

namespace {

constexpr char kMagic[8] = {'N', 'A', 'V', 'L', 'A', 'B', 'C', 'K'};
constexpr char kEndMagic[8] = {'N', 'A', 'V', 'L', 'A', 'B', 'E', 'N'};

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void tensor(const TensorRecord& t) {
    str(t.name);
    u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) u64(d);
    u64(t.values.size());
    for (double v : t.values) f64(v);
  }
  void tensors(const std::vector<TensorRecord>& ts) {
    u64(ts.size());
    for (const auto& t : ts) tensor(t);
  }
  std::vector<unsigned char>& bytes() { return out_; }

 private:
  std::vector<unsigned char> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> in) : in_(in) {}

  void need(std::size_t n) const {
    if (pos_ + n > in_.size() || pos_ + n < pos_) {
      throw CheckpointCorruptError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  TensorRecord tensor() {
    TensorRecord t;
    t.name = str();
    const auto rank = u32();
    if (rank > 8) throw CheckpointCorruptError("tensor '" + t.name + "' has implausible rank");
    for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(u64());
    const auto n = u64();
    if (n != shape_size(t.shape)) {
      throw CheckpointCorruptError("tensor '" + t.name + "' size disagrees with its shape");
    }
    need(n * 8);
    t.values.resize(n);
    for (auto& v : t.values) v = f64();
    return t;
  }
  std::vector<TensorRecord> tensors() {
    const auto n = u64();
    need(n);  // every record is at least one byte
    std::vector<TensorRecord> ts;
    for (std::uint64_t i = 0; i < n; ++i) ts.push_back(tensor());
    return ts;
  }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const unsigned char> in_;
  std::size_t pos_ = 0;
};

TensorRecord record(const std::string& name, const Shape& shape, std::span<const double> values) {
  return TensorRecord{name, shape, std::vector<double>(values.begin(), values.end())};
}

}  // namespace

Checkpoint capture(const RunConfig& config, const nn::ParameterList& params, const Trainer* trainer) {
  Checkpoint c;
  c.config_json = canonical_config(config);
  c.config_hash = config_hash(config);
  c.seed = config.seed;
  for (const auto& p : params) c.tensors.push_back(record(p.name, p.tensor.shape(), p.tensor.values()));
  if (trainer) {
    const AdamW& opt = trainer->optimizer();
    c.step = static_cast<std::uint64_t>(trainer->current_step());
    c.adam_steps = opt.steps_taken();
    for (std::size_t i = 0; i < opt.parameters().size(); ++i) {
      const auto& p = opt.parameters()[i];
      c.adam_m.push_back(record(p.name, p.tensor.shape(), opt.first_moments()[i]));
      c.adam_v.push_back(record(p.name, p.tensor.shape(), opt.second_moments()[i]));
    }
  }
  return c;
}

void restore_parameters(const Checkpoint& ckpt, const nn::ParameterList& params) {
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  // Validate everything before mutating anything.
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks tensor '" + p.name + "'");
    if (it->second->shape != p.tensor.shape()) {
      throw CheckpointError("tensor '" + p.name + "': checkpoint shape " +
                            shape_string(it->second->shape) + " vs model " +
                            shape_string(p.tensor.shape()));
    }
  }
  for (const auto& p : params) {
    Tensor t = p.tensor;
    const auto& src = by_name.at(p.name)->values;
    std::copy(src.begin(), src.end(), t.mutable_values().begin());
  }
}

void restore_trainer(const Checkpoint& ckpt, Trainer& trainer) {
  AdamW& opt = trainer.optimizer();
  const auto& params = opt.parameters();
  if (ckpt.adam_m.size() != params.size() || ckpt.adam_v.size() != params.size()) {
    throw CheckpointError("checkpoint optimizer state does not match the trainable parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (ckpt.adam_m[i].name != params[i].name || ckpt.adam_m[i].values.size() != params[i].tensor.size() ||
        ckpt.adam_v[i].values.size() != params[i].tensor.size()) {
      throw CheckpointError("optimizer moment mismatch at '" + params[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.first_moments()[i] = ckpt.adam_m[i].values;
    opt.second_moments()[i] = ckpt.adam_v[i].values;
  }
  opt.set_steps_taken(ckpt.adam_steps);
  trainer.set_step(static_cast<int>(ckpt.step));
}

std::vector<unsigned char> serialize(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(ckpt.version);
  w.u64(ckpt.config_hash);
  w.str(ckpt.config_json);
  w.u64(ckpt.step);
  w.u64(ckpt.seed);
  w.tensors(ckpt.tensors);
  w.u64(ckpt.adam_steps);
  w.tensors(ckpt.adam_m);
  w.tensors(ckpt.adam_v);
  w.raw(kEndMagic, sizeof kEndMagic);
  const auto sum = fnv1a64(std::span<const unsigned char>(w.bytes()));
  w.u64(sum);
  return std::move(w.bytes());
}

Checkpoint deserialize(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointCorruptError("not a navlab checkpoint (bad magic)");
  }
  Checkpoint c;
  c.version = r.u32();
  if (c.version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint version " + std::to_string(c.version) +
                                 ", expected " + std::to_string(kCheckpointVersion));
  }
  c.config_hash = r.u64();
  c.config_json = r.str();
  c.step = r.u64();
  c.seed = r.u64();
  c.tensors = r.tensors();
  c.adam_steps = r.u64();
  c.adam_m = r.tensors();
  c.adam_v = r.tensors();
  char end[8];
  r.raw(end, sizeof end);
  if (std::memcmp(end, kEndMagic, sizeof end) != 0) throw CheckpointCorruptError("missing end marker");
  const std::size_t body = r.position();
  const auto stored = r.u64();
  if (!r.done()) throw CheckpointCorruptError("trailing bytes after checkpoint");
  if (stored != fnv1a64(bytes.first(body))) throw CheckpointCorruptError("checksum mismatch");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize(read_bytes(path)); }

std::string file_hash(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(std::span<const unsigned char>(bytes));
  return os.str();
}

}  // namespace navlab
