#include "fnls/runner/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

namespace fnls::runner {

namespace {

constexpr char kMagic[8] = {'F', 'N', 'L', 'S', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const ComplexField& field, double t, double dt, const std::string& path) {
  const auto& g = field.geometry();
  std::vector<unsigned char> buf;
  buf.reserve(kCheckpointHeaderBytes + 16 * field.size());
  buf.insert(buf.end(), kMagic, kMagic + 8);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint32_t>(buf, g.is_full() ? 0u : 1u);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.dim()));
  std::uint64_t dims[3] = {0, 0, 0};
  if (g.is_full()) {
    put<std::uint32_t>(buf, 0u);
    for (int a = 0; a < g.dim(); ++a) dims[a] = static_cast<std::uint64_t>(g.full().points_per_axis());
  } else {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.radial().stencil_order()));
    dims[0] = static_cast<std::uint64_t>(g.radial().n_points());
  }
  for (auto d : dims) put<std::uint64_t>(buf, d);
  put<double>(buf, g.extent());
  put<double>(buf, t);
  put<double>(buf, dt);
  put<std::uint64_t>(buf, field.size());
  for (const auto& v : field.values()) {
    put<double>(buf, v.real());
    put<double>(buf, v.imag());
  }

  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("short write to checkpoint '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at '" + path + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto corrupt = [&](const std::string& why) -> CheckpointError {
    return CheckpointError("corrupt checkpoint header in '" + path + "': " + why);
  };
  if (buf.size() < kCheckpointHeaderBytes) throw corrupt("file is " + std::to_string(buf.size()) + " bytes");
  if (std::memcmp(buf.data(), kMagic, 8) != 0) throw corrupt("bad magic");
  const unsigned char* p = buf.data();
  const auto version = get<std::uint32_t>(p + 8);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint '" + path + "' has format version " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion));
  const auto kind = get<std::uint32_t>(p + 12);
  const auto n = static_cast<int>(get<std::uint32_t>(p + 16));
  const auto aux = static_cast<int>(get<std::uint32_t>(p + 20));
  std::uint64_t dims[3];
  for (int a = 0; a < 3; ++a) dims[a] = get<std::uint64_t>(p + 24 + 8 * a);
  const double extent = get<double>(p + 48);
  const double t = get<double>(p + 56);
  const double dt = get<double>(p + 64);
  const auto count = get<std::uint64_t>(p + 72);
  if (kind > 1) throw corrupt("unknown geometry kind " + std::to_string(kind));
  if (dims[0] == 0 || dims[0] > (1u << 20)) throw corrupt("bad dimensions");

  std::optional<Geometry> geom;
  try {
    if (kind == 0) geom.emplace(make_grid(n, static_cast<int>(dims[0]), extent));
    else geom.emplace(make_radial_grid(n, static_cast<int>(dims[0]), extent, aux));
  } catch (const ValidationError& e) {
    throw corrupt(e.what());
  }
  if (count != geom->size()) throw corrupt("value count does not match the grid");
  if (buf.size() != kCheckpointHeaderBytes + 16 * count)
    throw corrupt("expected " + std::to_string(kCheckpointHeaderBytes + 16 * count) + " bytes, found " +
                  std::to_string(buf.size()));
  CVector values(count);
  const unsigned char* q = p + kCheckpointHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) values[i] = cplx(get<double>(q + 16 * i), get<double>(q + 16 * i + 8));
  return Checkpoint{ComplexField(*geom, std::move(values), t), t, dt};
}

void require_matching_geometry(const Geometry& stored, const Geometry& expected) {
  auto describe = [](const Geometry& g) {
    std::string s = g.is_full() ? "full" : "radial";
    s += " n=" + std::to_string(g.dim());
    s += " points=" + std::to_string(g.is_full() ? g.full().points_per_axis() : g.radial().n_points());
    s += " extent=" + std::to_string(g.extent());
    if (g.is_radial()) s += " order=" + std::to_string(g.radial().stencil_order());
    return s;
  };
  bool same = stored.is_full() == expected.is_full() && stored.dim() == expected.dim() &&
              stored.extent() == expected.extent() && stored.size() == expected.size();
  if (same && stored.is_radial()) same = stored.radial().stencil_order() == expected.radial().stencil_order();
  if (!same)
    throw ValidationError("geometry mismatch on resume: checkpoint has " + describe(stored) + ", config has " +
                          describe(expected));
}

}  // namespace fnls::runner
