#include "fleet/weights.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "fleet/error.hpp"

namespace fleet {

namespace wire {

namespace {

template <std::size_t N>
void put_bytes(std::ostream& out, std::uint64_t v) {
  std::array<char, N> buf;
  for (std::size_t b = 0; b < N; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
  out.write(buf.data(), N);
}

template <std::size_t N>
std::uint64_t get_bytes(std::istream& in) {
  std::array<unsigned char, N> buf;
  if (!in.read(reinterpret_cast<char*>(buf.data()), N)) {
    fail(ErrorKind::kFormat, "unexpected end of file (truncated weights?)");
  }
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < N; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  return v;
}

}  // namespace

void put_u32(std::ostream& out, std::uint32_t v) { put_bytes<4>(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes<8>(out, v); }
void put_f64(std::ostream& out, double v) { put_bytes<8>(out, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes<4>(in)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes<8>(in); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes<8>(in)); }

}  // namespace wire

namespace {
constexpr char kMagic[4] = {'F', 'M', 'L', 'P'};
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxWidth = 1u << 20;
}  // namespace

void write_weights(std::ostream& out, const Mlp& net) {
  out.write(kMagic, 4);
  wire::put_u32(out, kWeightsVersion);
  wire::put_u32(out, static_cast<std::uint32_t>(net.hidden_activation()));
  wire::put_u32(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (auto s : net.layer_sizes()) wire::put_u32(out, static_cast<std::uint32_t>(s));
  wire::put_u64(out, net.parameter_count());
  for (double p : net.parameters()) wire::put_f64(out, p);
}

Mlp read_weights(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorKind::kFormat, "not a weights file (bad magic)");
  }
  const std::uint32_t version = wire::get_u32(in);
  if (version != kWeightsVersion) {
    fail(ErrorKind::kFormat, "weights format version " + std::to_string(version) +
                                 " is not supported (expected " + std::to_string(kWeightsVersion) + ")");
  }
  const std::uint32_t act = wire::get_u32(in);
  if (act > static_cast<std::uint32_t>(Activation::kIdentity)) {
    fail(ErrorKind::kFormat, "unknown activation code " + std::to_string(act));
  }
  const std::uint32_t count = wire::get_u32(in);
  if (count < 2 || count > kMaxLayers) fail(ErrorKind::kFormat, "implausible layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = wire::get_u32(in);
    if (s == 0 || s > kMaxWidth) fail(ErrorKind::kFormat, "implausible layer width");
  }
  Mlp net(sizes, static_cast<Activation>(act));
  const std::uint64_t params = wire::get_u64(in);
  if (params != net.parameter_count()) {
    fail(ErrorKind::kFormat, "parameter count does not match the layer shapes");
  }
  for (double& p : net.mutable_parameters()) p = wire::get_f64(in);
  return net;
}

void save_weights(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  write_weights(out, net);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

Mlp load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  Mlp net = read_weights(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(ErrorKind::kFormat, path.string() + ": trailing bytes after weights");
  }
  return net;
}

}  // namespace fleet
