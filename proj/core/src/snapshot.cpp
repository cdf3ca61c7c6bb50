#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "selforg/error.hpp"
#include "selforg/gpe.hpp"

namespace selforg::gpe {

namespace {

constexpr std::array<char, 8> magic{'S', 'O', 'F', 'I', 'E', 'L', 'D', '\0'};
constexpr std::uint32_t version = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const CondensateField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw EngineError("cannot write snapshot " + path.string());
  os.write(magic.data(), magic.size());
  put<std::uint32_t>(os, version);
  put<std::int32_t>(os, f.grid.n_x);
  put<std::int32_t>(os, f.grid.n_z);
  put<double>(os, f.grid.length_x);
  put<double>(os, f.grid.length_z);
  put<double>(os, f.atom_number);
  os.write(reinterpret_cast<const char*>(f.psi.data()),
           static_cast<std::streamsize>(f.psi.size() * sizeof(cplx)));
  if (!os) throw EngineError("short write on snapshot " + path.string());
}

CondensateField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot " + path.string());
  std::array<char, 8> m{};
  is.read(m.data(), m.size());
  if (!is || m != magic) throw ConfigError(path.string() + ": not a field snapshot");
  if (get<std::uint32_t>(is) != version) throw ConfigError(path.string() + ": unsupported snapshot version");
  const int n_x = get<std::int32_t>(is);
  const int n_z = get<std::int32_t>(is);
  const double l_x = get<double>(is);
  const double l_z = get<double>(is);
  const double n = get<double>(is);
  if (!is) throw ConfigError(path.string() + ": truncated header");
  CondensateField f;
  f.grid = Grid2D::make(n_x, n_z, l_x, l_z);
  f.atom_number = n;
  f.psi.resize(f.grid.size());
  is.read(reinterpret_cast<char*>(f.psi.data()), static_cast<std::streamsize>(f.psi.size() * sizeof(cplx)));
  if (!is) throw ConfigError(path.string() + ": truncated payload");
  return f;
}

}  // namespace selforg::gpe
