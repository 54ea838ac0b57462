#include "bmhd/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace bmhd {
namespace {

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) p[b] = static_cast<unsigned char>(v >> (8 * b));
}
void put_u64(unsigned char* p, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) p[b] = static_cast<unsigned char>(v >> (8 * b));
}
void put_f64(unsigned char* p, double v) { put_u64(p, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

}  // namespace

void write_snapshot(std::ostream& out, const SpectralVectorField& field, double time,
                    FieldTag tag) {
  const auto& g = field.grid();
  std::array<unsigned char, kSnapshotHeaderBytes> header{};
  std::memcpy(header.data(), "BMHD", 4);
  put_u32(header.data() + 4, kSnapshotVersion);
  put_u32(header.data() + 8, static_cast<std::uint32_t>(g.n));
  put_f64(header.data() + 12, g.k0);
  put_u32(header.data() + 20, field.hermitian() ? 1u : 0u);
  put_f64(header.data() + 24, time);
  put_u32(header.data() + 32, static_cast<std::uint32_t>(tag));
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  std::vector<unsigned char> buf(g.size() * 16);
  for (int c = 0; c < 3; ++c) {
    const auto comp = field.component(c);
    for (std::size_t i = 0; i < g.size(); ++i) {
      put_f64(buf.data() + 16 * i, comp[i].real());
      put_f64(buf.data() + 16 * i + 8, comp[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw std::runtime_error("snapshot write failed");
}

void write_snapshot(const std::filesystem::path& path, const SpectralVectorField& field,
                    double time, FieldTag tag) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshot(out, field, time, tag);
}

Snapshot read_snapshot(std::istream& in) {
  std::array<unsigned char, kSnapshotHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (!in) throw std::runtime_error("snapshot: truncated header");
  if (std::memcmp(header.data(), "BMHD", 4) != 0) {
    throw std::runtime_error("snapshot: bad magic");
  }
  const auto version = get_u32(header.data() + 4);
  if (version != kSnapshotVersion) {
    throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  }
  GridSpec g;
  g.n = static_cast<int>(get_u32(header.data() + 8));
  g.k0 = get_f64(header.data() + 12);
  g.validate();
  const auto flags = get_u32(header.data() + 20);

  Snapshot snap;
  snap.time = get_f64(header.data() + 24);
  snap.tag = static_cast<FieldTag>(get_u32(header.data() + 32));
  snap.field = SpectralVectorField(g, (flags & 1u) != 0);

  std::vector<unsigned char> buf(g.size() * 16);
  for (int c = 0; c < 3; ++c) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("snapshot: truncated data");
    auto comp = snap.field.component(c);
    for (std::size_t i = 0; i < g.size(); ++i) {
      comp[i] = {get_f64(buf.data() + 16 * i), get_f64(buf.data() + 16 * i + 8)};
    }
  }
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace bmhd
