#pragma once

#include <complex>
#include <vector>

namespace selforg::gpe {

using cplx = std::complex<double>;

// Periodic (x, z) grid in units of 1/k. Storage is row-major with x fastest:
// index = iz * n_x + ix. Coordinates run over [-L/2, L/2).
struct Grid2D {
  int n_x{};
  int n_z{};
  double length_x{};
  double length_z{};

  // Throws ConfigError unless both sizes are powers of two and lengths > 0.
  static Grid2D make(int n_x, int n_z, double length_x, double length_z);

  std::size_t size() const { return static_cast<std::size_t>(n_x) * n_z; }
  std::size_t index(int ix, int iz) const { return static_cast<std::size_t>(iz) * n_x + ix; }
  double dx() const { return length_x / n_x; }
  double dz() const { return length_z / n_z; }
  double cell_area() const { return dx() * dz(); }
  double x(int ix) const { return -0.5 * length_x + ix * dx(); }
  double z(int iz) const { return -0.5 * length_z + iz * dz(); }
  // FFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1 times 2 pi / L.
  double kx(int ix) const;
  double kz(int iz) const;
  double max_k2() const;
  double points_per_wavelength_x() const { return n_x * 2.0 * 3.14159265358979323846 / length_x; }
  double points_per_wavelength_z() const { return n_z * 2.0 * 3.14159265358979323846 / length_z; }

  bool operator==(const Grid2D&) const = default;
};

// Condensate wave function normalized to the atom number:
// sum |psi|^2 dx dz = N.
struct CondensateField {
  Grid2D grid;
  std::vector<cplx> psi;
  double atom_number{};

  static CondensateField uniform(const Grid2D& grid, double atom_number);

  double norm() const;  // sum |psi|^2 dA
  void normalize();     // rescale to atom_number
  bool finite() const;
  double peak_density() const;
};

}  // namespace selforg::gpe
