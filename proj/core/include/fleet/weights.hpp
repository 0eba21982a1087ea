#pragma once

#include <filesystem>
#include <iosfwd>

#include "fleet/mlp.hpp"

namespace fleet {

// Weights file layout, all integers and doubles little-endian:
//   "FMLP"  u32 version  u32 hidden-activation  u32 L  u32 sizes[L]
//   u64 parameter count  f64 parameters (layer order, row-major W then b)
inline constexpr std::uint32_t kWeightsVersion = 1;

void write_weights(std::ostream& out, const Mlp& net);
Mlp read_weights(std::istream& in);

void save_weights(const Mlp& net, const std::filesystem::path& path);
Mlp load_weights(const std::filesystem::path& path);

// Low-level helpers shared with the training checkpoint format.
namespace wire {
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
}  // namespace wire

}  // namespace fleet
