#include "pns/snapshot.hpp"

#include <cstring>
#include <fstream>

namespace pns {

namespace {

constexpr char kMagic[4] = {'L', 'N', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

// The on-disk format is little-endian. Serialization goes through
// byte buffers so the reader/writer stay well-defined regardless of
// host padding; x86-64 is little-endian so no byte swapping is done.
static_assert(sizeof(double) == 8);

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
  char b[4];
  is.read(b, 4);
  if (is.gcount() != 4) throw SnapshotTruncatedError(std::string("snapshot truncated in ") + what);
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

double get_f64(std::istream& is, const char* what) {
  char b[8];
  is.read(b, 8);
  if (is.gcount() != 8) throw SnapshotTruncatedError(std::string("snapshot truncated in ") + what);
  double v;
  std::memcpy(&v, b, 8);
  return v;
}

}  // namespace

void write_snapshot(const VectorField3& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SnapshotError("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(field.grid.n));
  put_f64(os, field.grid.box_len);
  for (int c = 0; c < 3; ++c)
    os.write(reinterpret_cast<const char*>(field.comp[c].data()),
             static_cast<std::streamsize>(field.comp[c].size() * sizeof(double)));
  if (!os) throw SnapshotError("write failed: " + path);
}

VectorField3 read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4) throw SnapshotTruncatedError("snapshot truncated in magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw SnapshotMagicError("bad magic: not an LNSF snapshot: " + path);
  const std::uint32_t version = get_u32(is, "version");
  if (version != kVersion)
    throw SnapshotVersionError("unsupported snapshot version " + std::to_string(version));
  const std::uint32_t n = get_u32(is, "grid size");
  const double box_len = get_f64(is, "box length");
  Grid g = build_grid(static_cast<int>(n), box_len);
  VectorField3 field(g);
  for (int c = 0; c < 3; ++c) {
    const std::streamsize bytes = static_cast<std::streamsize>(g.size() * sizeof(double));
    is.read(reinterpret_cast<char*>(field.comp[c].data()), bytes);
    if (is.gcount() != bytes)
      throw SnapshotTruncatedError("snapshot truncated in component " + std::to_string(c));
  }
  return field;
}

}  // namespace pns
