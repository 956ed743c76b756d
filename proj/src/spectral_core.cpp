#include "bolab/spectral_core.hpp"

#include <cmath>

#include "bolab/errors.hpp"

namespace bolab {

SpectralField forward_transform(const Field& f) {
  std::vector<cplx> modes(f.grid().n_modes());
  f.grid().forward(f.values(), modes);
  return SpectralField(f.grid_ptr(), std::move(modes));
}

Field inverse_transform(const SpectralField& s) {
  std::vector<double> values(s.grid().n_points());
  s.grid().inverse(s.modes(), values);
  return Field(s.grid_ptr(), std::move(values));
}

SpectralField apply_symbol(const SpectralField& s, const Symbol& symbol) {
  const SpectralGrid& g = s.grid();
  std::vector<cplx> out(s.modes().begin(), s.modes().end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const cplx m = symbol(g.mode_wavenumber(j));
    if (g.is_nyquist(j) && m.imag() != 0.0)
      out[j] = 0.0;
    else
      out[j] *= m;
  }
  return SpectralField(s.grid_ptr(), std::move(out));
}

Field apply_symbol(const Field& f, const Symbol& symbol) {
  return inverse_transform(apply_symbol(forward_transform(f), symbol));
}

namespace {

double sgn(double k) { return (k > 0.0) - (k < 0.0); }

}  // namespace

Field hilbert_transform(const Field& f) {
  return apply_symbol(f, [](double k) { return cplx(0.0, -sgn(k)); });
}

Field fractional_derivative(const Field& f, double s) {
  if (!(s >= 0.0)) throw ValidationError("fractional derivative order must be >= 0");
  return apply_symbol(f, [s](double k) { return cplx(std::pow(std::abs(k), s), 0.0); });
}

Field bessel_potential(const Field& f, double s) {
  return apply_symbol(f, [s](double k) { return cplx(std::pow(1.0 + k * k, 0.5 * s), 0.0); });
}

namespace {

// (i k)^order without going through complex pow.
cplx ik_power(double k, int order) {
  const double mag = std::pow(k, order);
  switch (order % 4) {
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

}  // namespace

Field spatial_derivative(const Field& f, int order) {
  if (order < 1) throw ValidationError("derivative order must be >= 1");
  return apply_symbol(f, [order](double k) { return ik_power(k, order); });
}

SpectralField linear_propagator(const SpectralField& s, double t) {
  return apply_symbol(s, [t](double k) { return std::polar(1.0, -t * k * std::abs(k)); });
}

Field linear_propagator(const Field& f, double t) {
  return inverse_transform(linear_propagator(forward_transform(f), t));
}

Field multiply_by_x(const Field& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.grid().x(i) * f[i];
  return Field(f.grid_ptr(), std::move(out));
}

Field gamma_operator(const Field& f, double t) {
  return multiply_by_x(f) - hilbert_transform(spatial_derivative(f, 1)) * (2.0 * t);
}

Field hilbert_commutator(const Field& a, const Field& f, int l, int m) {
  if (l < 0 || m < 0 || l + m < 1)
    throw ValidationError("hilbert commutator needs l, m >= 0 and l + m >= 1");
  const Field dmf = (m == 0) ? f : spatial_derivative(f, m);
  Field c = a * hilbert_transform(dmf) - hilbert_transform(a * dmf);
  return (l == 0) ? c : spatial_derivative(c, l);
}

Field halfderivative_commutator(const Field& phi, const Field& f) {
  return fractional_derivative(phi * f, 0.5) - phi * fractional_derivative(f, 0.5);
}

}  // namespace bolab
