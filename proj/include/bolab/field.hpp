#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bolab/spectral_grid.hpp"

namespace bolab {

/// Real samples of a function on a SpectralGrid, with a cached mean.
class Field {
 public:
  /// Validates length and finiteness; the mean is a compensated average.
  Field(GridPtr grid, std::vector<double> values);

  static Field zeros(GridPtr grid);
  static Field constant(GridPtr grid, double value);
  static Field sample(GridPtr grid, const std::function<double(double)>& f);

  /// Builds a field whose cached mean is `mean` instead of the recomputed average.
  /// The two must agree to 1e-12; used where the mean is known exactly (zero-mean projection).
  static Field with_known_mean(GridPtr grid, std::vector<double> values, double mean);

  const SpectralGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double mean() const noexcept { return mean_; }

  double max_abs() const noexcept;
  /// Discrete L2 norm, sqrt(dx * sum f_i^2).
  double l2_norm() const noexcept;

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator*(double scale) const;
  /// Pointwise product.
  Field operator*(const Field& other) const;

 private:
  Field(GridPtr grid, std::vector<double> values, double mean);

  GridPtr grid_;
  std::vector<double> values_;
  double mean_ = 0.0;
};

inline Field operator*(double scale, const Field& f) { return f * scale; }

/// Half-spectrum of a real field, stored for modes j = 0..n/2.
class SpectralField {
 public:
  SpectralField(GridPtr grid, std::vector<cplx> modes);

  const SpectralGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const cplx> modes() const noexcept { return modes_; }
  std::span<cplx> modes() noexcept { return modes_; }

  /// Coefficient for any j in [-n/2, n/2-1]; negative j via conjugate symmetry.
  cplx coefficient(long j) const;

  /// l2 norm over the full symmetric coefficient set; equals the discrete L2 norm of the preimage.
  double l2_norm() const noexcept;

 private:
  GridPtr grid_;
  std::vector<cplx> modes_;
};

double neumaier_sum(std::span<const double> values) noexcept;

}  // namespace bolab
