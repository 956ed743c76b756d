#include "bolab/field.hpp"

#include <algorithm>
#include <cmath>

#include "bolab/errors.hpp"

namespace bolab {

double neumaier_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

namespace {

void check_values(const SpectralGrid& grid, std::span<const double> values) {
  if (values.size() != grid.n_points())
    throw ValidationError("field length " + std::to_string(values.size()) +
                          " does not match grid size " + std::to_string(grid.n_points()));
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("field contains non-finite samples");
}

double average(std::span<const double> values) {
  return neumaier_sum(values) / static_cast<double>(values.size());
}

}  // namespace

Field::Field(GridPtr grid, std::vector<double> values, double mean)
    : grid_(std::move(grid)), values_(std::move(values)), mean_(mean) {}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("field requires a grid");
  check_values(*grid_, values_);
  mean_ = average(values_);
}

Field Field::zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }

Field Field::constant(GridPtr grid, double value) {
  const std::size_t n = grid->n_points();
  return Field(std::move(grid), std::vector<double>(n, value));
}

Field Field::sample(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->n_points());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->x(i));
  return Field(std::move(grid), std::move(v));
}

Field Field::with_known_mean(GridPtr grid, std::vector<double> values, double mean) {
  if (!grid) throw ValidationError("field requires a grid");
  check_values(*grid, values);
  if (std::abs(average(values) - mean) > 1e-12)
    throw ValidationError("declared mean disagrees with the sample average");
  return Field(std::move(grid), std::move(values), mean);
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::l2_norm() const noexcept {
  std::vector<double> sq(values_.size());
  std::transform(values_.begin(), values_.end(), sq.begin(), [](double v) { return v * v; });
  return std::sqrt(grid_->dx() * neumaier_sum(sq));
}

namespace {

template <class Op>
Field combine(const Field& a, const Field& b, Op op) {
  if (!a.grid().same_as(b.grid())) throw ValidationError("fields live on different grids");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Field(a.grid_ptr(), std::move(out));
}

}  // namespace

Field Field::operator+(const Field& other) const {
  return combine(*this, other, [](double x, double y) { return x + y; });
}

Field Field::operator-(const Field& other) const {
  return combine(*this, other, [](double x, double y) { return x - y; });
}

Field Field::operator*(const Field& other) const {
  return combine(*this, other, [](double x, double y) { return x * y; });
}

Field Field::operator*(double scale) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= scale;
  return Field(grid_, std::move(out));
}

SpectralField::SpectralField(GridPtr grid, std::vector<cplx> modes)
    : grid_(std::move(grid)), modes_(std::move(modes)) {
  if (!grid_) throw ValidationError("spectral field requires a grid");
  if (modes_.size() != grid_->n_modes())
    throw ValidationError("spectral field length does not match grid");
}

cplx SpectralField::coefficient(long j) const {
  const long half = static_cast<long>(grid_->n_points() / 2);
  if (j < -half || j >= half) throw ValidationError("mode index out of range");
  if (j == -half) return modes_[static_cast<std::size_t>(half)];
  if (j < 0) return std::conj(modes_[static_cast<std::size_t>(-j)]);
  return modes_[static_cast<std::size_t>(j)];
}

double SpectralField::l2_norm() const noexcept {
  const std::size_t last = modes_.size() - 1;
  std::vector<double> terms(modes_.size());
  for (std::size_t j = 0; j <= last; ++j) {
    const double w = (j == 0 || j == last) ? 1.0 : 2.0;
    terms[j] = w * std::norm(modes_[j]);
  }
  return std::sqrt(neumaier_sum(terms));
}

}  // namespace bolab
