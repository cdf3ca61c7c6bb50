#include "selforg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selforg/constants.hpp"
#include "selforg/error.hpp"

namespace selforg::gpe {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid2D Grid2D::make(int n_x, int n_z, double length_x, double length_z) {
  if (!power_of_two(n_x) || !power_of_two(n_z)) {
    throw ConfigError("grid: point counts must be powers of two, got " + std::to_string(n_x) + " x " +
                      std::to_string(n_z));
  }
  if (!(length_x > 0.0) || !(length_z > 0.0)) throw ConfigError("grid: extents must be > 0");
  return Grid2D{n_x, n_z, length_x, length_z};
}

double Grid2D::kx(int ix) const {
  const int m = ix < n_x / 2 ? ix : ix - n_x;
  return constants::two_pi * m / length_x;
}

double Grid2D::kz(int iz) const {
  const int m = iz < n_z / 2 ? iz : iz - n_z;
  return constants::two_pi * m / length_z;
}

double Grid2D::max_k2() const {
  const double kx_max = constants::pi * n_x / length_x;
  const double kz_max = constants::pi * n_z / length_z;
  return kx_max * kx_max + kz_max * kz_max;
}

CondensateField CondensateField::uniform(const Grid2D& grid, double atom_number) {
  CondensateField f;
  f.grid = grid;
  f.atom_number = atom_number;
  const double amp = std::sqrt(atom_number / (grid.length_x * grid.length_z));
  f.psi.assign(grid.size(), cplx(amp, 0.0));
  return f;
}

double CondensateField::norm() const {
  double s = 0.0;
  for (const auto& v : psi) s += std::norm(v);
  return s * grid.cell_area();
}

void CondensateField::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw EngineError("normalize: field has zero norm");
  const double scale = std::sqrt(atom_number / n);
  for (auto& v : psi) v *= scale;
}

bool CondensateField::finite() const {
  return std::all_of(psi.begin(), psi.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double CondensateField::peak_density() const {
  double m = 0.0;
  for (const auto& v : psi) m = std::max(m, std::norm(v));
  return m;
}

}  // namespace selforg::gpe
