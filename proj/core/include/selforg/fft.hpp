#pragma once

#include <complex>
#include <memory>
#include <span>

namespace selforg {

// Unnormalized 2D complex FFT over a row-major (n_z rows, n_x columns) array.
// Plans are built with FFTW_ESTIMATE so the operation sequence, and hence
// every output bit, is independent of timing. Execution is thread-safe;
// construction serializes on a global planner lock.
class Fft2D {
 public:
  Fft2D(int n_x, int n_z);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;
  Fft2D(Fft2D&&) noexcept;
  Fft2D& operator=(Fft2D&&) noexcept;

  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;  // no 1/n factor

  int n_x() const { return n_x_; }
  int n_z() const { return n_z_; }

 private:
  struct Plans;
  int n_x_{};
  int n_z_{};
  std::unique_ptr<Plans> plans_;
};

}  // namespace selforg
