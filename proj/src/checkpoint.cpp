#include "pcc/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace pcc {
namespace {

constexpr char kMagic[4] = {'P', 'C', 'C', 'K'};

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  // A count of items that each take at least `item_bytes` more bytes.
  std::uint32_t count(std::size_t item_bytes) {
    const std::uint32_t n = u32();
    need(std::size_t{n} * item_bytes);
    return n;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Model& model, const RunConfig& config) {
  RunConfig stored = config;
  stored.model = model.kind();
  // Output locations are not part of what produced the model; dropping them
  // keeps checkpoints from identical runs byte-identical wherever they land.
  stored.out.clear();
  stored.checkpoint.clear();
  stored.report.clear();
  const auto params = model.parameters();
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(model.kind()));
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.u32(static_cast<std::uint32_t>(p.rank()));
    for (std::size_t d : p.shape()) w.u32(static_cast<std::uint32_t>(d));
  }
  for (const auto& p : params)
    for (double v : p.data()) w.f64(v);
  const std::string text = format_run_config(stored);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string(kMagic, 4)) throw CheckpointError("not a checkpoint (bad magic bytes)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) + " does not match supported version " +
                          std::to_string(kCheckpointVersion));
  }
  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > 1) throw CheckpointError("unknown model kind byte " + std::to_string(kind_byte));
  const auto kind = static_cast<ModelKind>(kind_byte);

  std::vector<Shape> shapes(r.count(4));
  std::size_t total = 0;
  for (auto& s : shapes) {
    s.resize(r.count(4));
    std::size_t size = 1;
    for (auto& d : s) {
      d = r.u32();
      if (d != 0 && size > r.remaining() / 8 / d) throw CheckpointError("checkpoint shape table exceeds file size");
      size *= d;
    }
    total += size;
    if (total > r.remaining() / 8) throw CheckpointError("checkpoint shape table exceeds file size");
  }
  r.need(total * 8);
  std::vector<double> values(total);
  for (double& v : values) v = r.f64();
  RunConfig config;
  try {
    config = parse_run_config(r.str(r.u32()));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("embedded config: ") + e.what());
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint");
  if (config.model != kind) throw CheckpointError("model kind byte disagrees with embedded config");

  Model model = Model::create(kind, config.arch, 0);
  auto params = model.parameters();
  if (params.size() != shapes.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(shapes.size()) + " tensors, architecture needs " +
                          std::to_string(params.size()));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != shapes[i]) {
      throw CheckpointError("tensor " + std::to_string(i) + " has shape " + shape_to_string(shapes[i]) +
                            ", architecture needs " + shape_to_string(params[i].shape()));
    }
    auto dst = params[i].mutable_data();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    offset += dst.size();
  }
  return {std::move(config), std::move(model)};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RunConfig& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  const std::string bytes = encode_checkpoint(model, config);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace pcc
