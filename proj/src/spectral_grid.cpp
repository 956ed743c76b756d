#include "bolab/spectral_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "bolab/errors.hpp"

namespace bolab {
namespace {

// FFTW's planner is not reentrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

struct SpectralGrid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

SpectralGrid::SpectralGrid(std::size_t n_points, double half_length)
    : n_(n_points), half_length_(half_length) {
  if (n_points < 8 || !is_power_of_two(n_points))
    throw ValidationError("grid size must be a power of two >= 8, got " + std::to_string(n_points));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ValidationError("grid half-length must be positive and finite");

  dx_ = 2.0 * half_length_ / static_cast<double>(n_);
  x_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) x_[i] = -half_length_ + static_cast<double>(i) * dx_;

  const double base = std::numbers::pi / half_length_;
  k_stored_.resize(n_modes());
  phase_sign_.resize(n_modes());
  for (std::size_t j = 0; j < n_modes(); ++j) {
    k_stored_[j] = base * static_cast<double>(j);
    phase_sign_[j] = (j % 2 == 0) ? 1.0 : -1.0;
  }
  k_stored_[n_ / 2] = -base * static_cast<double>(n_ / 2);

  plans_ = std::make_unique<Plans>();
  std::vector<double> r(n_);
  std::vector<cplx> c(n_modes());
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(n_);
  plans_->r2c = fftw_plan_dft_r2c_1d(n, r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                     kPlanFlags);
  plans_->c2r = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                     kPlanFlags);
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("FFTW planning failed");
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::dk() const noexcept { return std::numbers::pi / half_length_; }

std::vector<double> SpectralGrid::wavenumbers() const {
  std::vector<double> k(n_);
  const double base = dk();
  const long half = static_cast<long>(n_ / 2);
  for (long j = -half; j < half; ++j) k[static_cast<std::size_t>(j + half)] = base * j;
  return k;
}

void SpectralGrid::forward(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_modes())
    throw ValidationError("forward transform: size mismatch");
  // r2c does not modify its input, but the interface is non-const.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = dx_ / std::sqrt(2.0 * half_length_);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= scale * phase_sign_[j];
}

void SpectralGrid::inverse(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != n_modes() || out.size() != n_)
    throw ValidationError("inverse transform: size mismatch");
  // c2r overwrites its input.
  std::vector<cplx> scratch(in.begin(), in.end());
  const double scale = 1.0 / std::sqrt(2.0 * half_length_);
  for (std::size_t j = 0; j < scratch.size(); ++j) scratch[j] *= scale * phase_sign_[j];
  // Imaginary parts of the zero and Nyquist modes carry no real signal.
  scratch.front().imag(0.0);
  scratch.back().imag(0.0);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

GridPtr make_grid(std::size_t n_points, double half_length) {
  return std::make_shared<const SpectralGrid>(n_points, half_length);
}

}  // namespace bolab
