#include <cmath>
#include <ostream>

#include "selforg/fft.hpp"
#include "selforg/gpe.hpp"
#include "selforg/param_file.hpp"

namespace selforg::gpe {

MomentumSpectrum momentum_spectrum(const CondensateField& f) {
  std::vector<cplx> spec = f.psi;
  Fft2D fft(f.grid.n_x, f.grid.n_z);
  fft.forward(spec);
  MomentumSpectrum s;
  s.grid = f.grid;
  s.weight.resize(spec.size());
  const double scale = f.grid.cell_area() / static_cast<double>(f.grid.size());
  for (std::size_t i = 0; i < spec.size(); ++i) s.weight[i] = std::norm(spec[i]) * scale;
  return s;
}

std::vector<MomentumPeak> momentum_peaks(const MomentumSpectrum& s, double half_width) {
  static constexpr double centres[][2] = {{0, 0}, {0, 2}, {0, -2}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  std::vector<MomentumPeak> peaks;
  for (const auto& c : centres) {
    MomentumPeak p{c[0], c[1], 0.0};
    for (int iz = 0; iz < s.grid.n_z; ++iz) {
      if (std::abs(s.grid.kz(iz) - p.pz) > half_width) continue;
      for (int ix = 0; ix < s.grid.n_x; ++ix) {
        if (std::abs(s.grid.kx(ix) - p.px) > half_width) continue;
        p.weight += s.weight[s.grid.index(ix, iz)];
      }
    }
    peaks.push_back(p);
  }
  return peaks;
}

void write_peaks_csv(std::ostream& os, const std::vector<MomentumPeak>& peaks) {
  os << "px_over_hk,pz_over_hk,weight\n";
  for (const auto& p : peaks) {
    os << format_double(p.px) << ',' << format_double(p.pz) << ',' << format_double(p.weight) << '\n';
  }
}

}  // namespace selforg::gpe
