#include "selforg/fft.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace selforg {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft2D::Plans {
  fftw_plan forward{};
  fftw_plan backward{};
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Fft2D::Fft2D(int n_x, int n_z) : n_x_(n_x), n_z_(n_z), plans_(std::make_unique<Plans>()) {
  std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n_x) * n_z);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_2d(n_z, n_x, buf, buf, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_2d(n_z, n_x, buf, buf, FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

void Fft2D::forward(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void Fft2D::backward(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->backward, p, p);
}

}  // namespace selforg
