#ifndef RELBUNDLE_KERNEL_IO_HPP
#define RELBUNDLE_KERNEL_IO_HPP

// Binary kernel dumps. The layout is described in docs/kernel_dump_format.md.

#include "relbundle/green.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace relbundle::kernel_io {

inline constexpr char magic[4] = {'R', 'B', 'G', 'K'};
inline constexpr std::uint32_t format_version = 1;
inline constexpr std::size_t header_bytes = 68;

static_assert(std::endian::native == std::endian::little, "kernel dumps are written on little-endian hosts only");

struct DumpHeader {
  std::uint32_t version = format_version;
  green::Family family = green::Family::dirac;
  std::uint32_t components = 0;
  std::uint32_t nt = 0;
  std::uint32_t nx = 0;
  double dt = 0.0;
  double dx = 0.0;
  double hbar = 1.0;
  double c = 1.0;
  std::uint64_t block_count = 0;
};

struct DumpBlock {
  std::uint32_t tp = 0;
  std::uint32_t t = 0;
  CMatrix block;
};

namespace detail {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated kernel dump");
  return v;
}
}  // namespace detail

/// All (t', t) pairs with t' >= t for the given source slices (every slice when empty).
inline std::vector<std::pair<int, int>> dump_pairs(const Lattice& lat, const std::vector<int>& sources = {}) {
  std::vector<int> src = sources;
  if (src.empty())
    for (int t = 0; t < lat.nt; ++t) src.push_back(t);
  std::vector<std::pair<int, int>> out;
  for (int t : src) {
    if (t < 0 || t >= lat.nt) throw IndexOutOfRange("dump source slice out of range");
    for (int tp = t; tp < lat.nt; ++tp) out.emplace_back(tp, t);
  }
  return out;
}

inline std::size_t dump_bytes(const green::GreenKernel& g, std::size_t blocks) {
  const auto d = static_cast<std::size_t>(g.slice_dim());
  return header_bytes + blocks * (8 + d * d * 16);
}

/// Writes the blocks for the given source slices. Refuses when the dump would
/// exceed `budget` bytes.
inline void write_dump(std::ostream& os, const green::GreenKernel& g, const std::vector<int>& sources = {},
                       std::size_t budget = green::kernel_budget_bytes()) {
  const Lattice& lat = g.lattice();
  const auto pairs = dump_pairs(lat, sources);
  if (dump_bytes(g, pairs.size()) > budget)
    throw BudgetExceeded("kernel dump needs " + std::to_string(dump_bytes(g, pairs.size())) + " bytes, budget is " +
                         std::to_string(budget));
  os.write(magic, 4);
  detail::put<std::uint32_t>(os, format_version);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.family()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.components()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(lat.nt));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(lat.nx));
  detail::put<std::uint32_t>(os, 0u);  // reserved
  detail::put<double>(os, lat.dt);
  detail::put<double>(os, lat.dx);
  detail::put<double>(os, g.hbar());
  detail::put<double>(os, lat.c);
  detail::put<std::uint64_t>(os, pairs.size());

  int current = -1;
  std::vector<CMatrix> col;
  for (const auto& [tp, t] : pairs) {
    if (t != current) {
      col = g.column(t);
      current = t;
    }
    const CMatrix& b = col[static_cast<std::size_t>(tp - t)];
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(tp));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(t));
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (Eigen::Index c = 0; c < b.cols(); ++c) {
        detail::put<double>(os, b(r, c).real());
        detail::put<double>(os, b(r, c).imag());
      }
  }
  if (!os) throw Error("failed to write kernel dump");
}

inline void write_dump(const std::string& path, const green::GreenKernel& g, const std::vector<int>& sources = {},
                       std::size_t budget = green::kernel_budget_bytes()) {
  // size check first so that a refused dump leaves no file behind
  if (dump_bytes(g, dump_pairs(g.lattice(), sources).size()) > budget)
    throw BudgetExceeded("kernel dump exceeds the memory budget");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);
  write_dump(os, g, sources, budget);
}

inline DumpHeader read_header(std::istream& is) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0) throw ConfigError("not a kernel dump");
  DumpHeader h;
  h.version = detail::get<std::uint32_t>(is);
  if (h.version != format_version) throw ConfigError("unsupported kernel dump version");
  h.family = static_cast<green::Family>(detail::get<std::uint32_t>(is));
  h.components = detail::get<std::uint32_t>(is);
  h.nt = detail::get<std::uint32_t>(is);
  h.nx = detail::get<std::uint32_t>(is);
  (void)detail::get<std::uint32_t>(is);
  h.dt = detail::get<double>(is);
  h.dx = detail::get<double>(is);
  h.hbar = detail::get<double>(is);
  h.c = detail::get<double>(is);
  h.block_count = detail::get<std::uint64_t>(is);
  return h;
}

inline std::pair<DumpHeader, std::vector<DumpBlock>> read_dump(std::istream& is) {
  DumpHeader h = read_header(is);
  const Eigen::Index d = static_cast<Eigen::Index>(h.components) * h.nx;
  std::vector<DumpBlock> blocks;
  blocks.reserve(h.block_count);
  for (std::uint64_t i = 0; i < h.block_count; ++i) {
    DumpBlock b;
    b.tp = detail::get<std::uint32_t>(is);
    b.t = detail::get<std::uint32_t>(is);
    b.block.resize(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) {
        const double re = detail::get<double>(is);
        const double im = detail::get<double>(is);
        b.block(r, c) = cplx(re, im);
      }
    blocks.push_back(std::move(b));
  }
  return {h, std::move(blocks)};
}

inline std::pair<DumpHeader, std::vector<DumpBlock>> read_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_dump(is);
}

}  // namespace relbundle::kernel_io

#endif  // RELBUNDLE_KERNEL_IO_HPP
