#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bolab {

using cplx = std::complex<double>;

/// Uniform periodic grid of n = 2^m points on [-L, L).
///
/// Sample i sits at x_i = -L + i*dx. Mode j carries wavenumber k_j = pi*j/L for
/// j in {-n/2, ..., n/2-1}; only j = 0..n/2 are stored (real-to-complex layout),
/// the negative modes follow from Hermitian symmetry. Index n/2 is the unpaired
/// Nyquist mode and is reported with the negative wavenumber -pi*n/(2L).
///
/// Transform normalization: c_j = dx/sqrt(2L) * sum_i f_i exp(-i k_j x_i), i.e. the
/// continuous Fourier transform sampled at k_j and divided by sqrt(2L). With this
/// choice the inverse is exact and sum_j |c_j|^2 = dx * sum_i |f_i|^2.
///
/// The grid owns immutable FFTW plans and may be shared across threads.
class SpectralGrid {
 public:
  SpectralGrid(std::size_t n_points, double half_length);
  ~SpectralGrid();

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  std::size_t n_points() const noexcept { return n_; }
  std::size_t n_modes() const noexcept { return n_ / 2 + 1; }
  double half_length() const noexcept { return half_length_; }
  double dx() const noexcept { return dx_; }
  double dk() const noexcept;

  double x(std::size_t i) const noexcept { return x_[i]; }
  std::span<const double> coordinates() const noexcept { return x_; }

  /// Wavenumber of stored mode j (0..n/2); the Nyquist slot returns -pi*n/(2L).
  double mode_wavenumber(std::size_t j) const noexcept { return k_stored_[j]; }
  std::span<const double> stored_wavenumbers() const noexcept { return k_stored_; }
  bool is_nyquist(std::size_t j) const noexcept { return j == n_ / 2; }

  /// All n wavenumbers in ascending order, j = -n/2..n/2-1.
  std::vector<double> wavenumbers() const;

  /// Normalized forward transform; `out` must hold n_modes() entries.
  void forward(std::span<const double> in, std::span<cplx> out) const;
  /// Exact inverse of forward(); `out` must hold n_points() entries.
  void inverse(std::span<const cplx> in, std::span<double> out) const;

  bool same_as(const SpectralGrid& other) const noexcept {
    return this == &other || (n_ == other.n_ && half_length_ == other.half_length_);
  }

 private:
  struct Plans;

  std::size_t n_;
  double half_length_;
  double dx_;
  std::vector<double> x_;
  std::vector<double> k_stored_;
  std::vector<double> phase_sign_;  // (-1)^j from the x_0 = -L offset
  std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

GridPtr make_grid(std::size_t n_points, double half_length);

}  // namespace bolab
