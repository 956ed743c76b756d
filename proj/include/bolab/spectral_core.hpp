#pragma once

#include <functional>

#include "bolab/field.hpp"

namespace bolab {

SpectralField forward_transform(const Field& f);
Field inverse_transform(const SpectralField& s);

/// Fourier symbol as a function of the wavenumber.
using Symbol = std::function<cplx(double)>;

/// Multiplies every mode by symbol(k_j). At the unpaired Nyquist mode a symbol
/// with nonzero imaginary part has no real-valued action and the mode is zeroed.
SpectralField apply_symbol(const SpectralField& s, const Symbol& symbol);
Field apply_symbol(const Field& f, const Symbol& symbol);

/// Symbol -i sgn(k) with sgn(0) = 0, so the mean is annihilated.
Field hilbert_transform(const Field& f);

/// |k|^s. For s > 0 the mean is removed; s = 0 is the identity.
Field fractional_derivative(const Field& f, double s);

/// (1 + k^2)^(s/2).
Field bessel_potential(const Field& f, double s);

/// (i k)^order; odd orders drop the Nyquist mode.
Field spatial_derivative(const Field& f, int order);

/// exp(-i t k|k|): the free evolution u_t + H u_xx = 0.
Field linear_propagator(const Field& f, double t);
SpectralField linear_propagator(const SpectralField& s, double t);

/// x f - 2t H(f_x), with x the fundamental-domain coordinate.
Field gamma_operator(const Field& f, double t);

/// d^l/dx^l ( a H(d^m f) - H(a d^m f) ); requires l + m >= 1.
Field hilbert_commutator(const Field& a, const Field& f, int l, int m);

/// D^{1/2}(phi f) - phi D^{1/2} f.
Field halfderivative_commutator(const Field& phi, const Field& f);

/// Pointwise multiplication by the coordinate x.
Field multiply_by_x(const Field& f);

}  // namespace bolab
