#include "molmask/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace molmask::ad {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'L', 'M', 'A', 'S', 'K', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::uint64_t len) {
    need(len);
    auto s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("truncated checkpoint");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedArray& Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::runtime_error("checkpoint has no entry '" + name + "'");
}

std::string encode_checkpoint(const nlohmann::json& manifest, const ParameterList& params) {
  std::string out(kMagic, sizeof(kMagic));
  const std::string m = manifest.dump();
  put_u64(out, m.size());
  out += m;
  put_u64(out, params.size());
  for (const auto& p : params) {
    put_u64(out, p.name.size());
    out += p.name;
    put_u64(out, p.tensor.rank());
    for (std::size_t d : p.tensor.shape()) put_u64(out, d);
    for (double x : p.tensor.values()) put_f64(out, x);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a molmask checkpoint");
  Reader r(bytes);
  r.str(sizeof(kMagic));
  Checkpoint ck;
  ck.manifest = nlohmann::json::parse(r.str(r.u64()));
  const auto count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedArray e;
    e.name = r.str(r.u64());
    const auto rank = r.u64();
    for (std::uint64_t d = 0; d < rank; ++d) e.shape.push_back(r.u64());
    e.values.resize(numel(e.shape));
    for (double& x : e.values) x = r.f64();
    ck.entries.push_back(std::move(e));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in checkpoint");
  return ck;
}

void write_checkpoint(const std::string& path, const nlohmann::json& manifest, const ParameterList& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << encode_checkpoint(manifest, params);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void load_parameters(const Checkpoint& ckpt, ParameterList& params) {
  for (auto& p : params) {
    const auto& e = ckpt.find(p.name);
    if (e.shape != p.tensor.shape())
      throw ShapeError("checkpoint shape " + shape_string(e.shape) + " for '" + p.name +
                       "' does not match model shape " + shape_string(p.tensor.shape()));
    auto dst = p.tensor.mutable_values();
    std::copy(e.values.begin(), e.values.end(), dst.begin());
  }
}

}  // namespace molmask::ad
