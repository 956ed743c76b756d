#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bolab/errors.hpp"
#include "bolab/spectral_core.hpp"
#include "bolab/weighted_analysis.hpp"

namespace bolab {

namespace {

using boost::math::quadrature::gauss_kronrod;

void check_order(double b) {
  if (!(b > 0.0 && b < 1.0)) throw ValidationError("Stein derivative order b must lie in (0, 1)");
}

// sum_{m>=1} (m + q)^{-s} for q in [0, 1], s > 1, by Euler-Maclaurin after ten explicit terms.
double hurwitz_tail(double s, double q) {
  constexpr int M = 10;
  double sum = 0.0;
  for (int m = 1; m < M; ++m) sum += std::pow(m + q, -s);
  const double a = M + q;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s) + s / 12.0 * std::pow(a, -s - 1.0) -
         s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(a, -s - 3.0);
  return sum;
}

// Trigonometric interpolant of a field, evaluated anywhere on the line (periodic).
class Interpolant {
 public:
  explicit Interpolant(const Field& f) : spec_(forward_transform(f)) {
    const auto& g = f.grid();
    scale_ = 1.0 / std::sqrt(2.0 * g.half_length());
    dk_ = g.dk();
  }

  double operator()(double x) const {
    const auto c = spec_.modes();
    const std::size_t nyq = c.size() - 1;
    double sum = c[0].real();
    cplx rot{1.0, 0.0};
    const cplx step = std::polar(1.0, dk_ * x);
    for (std::size_t j = 1; j < nyq; ++j) {
      if (j % 64 == 0) rot = std::polar(1.0, dk_ * x * static_cast<double>(j));
      else rot *= step;
      sum += 2.0 * (c[j] * rot).real();
    }
    sum += c[nyq].real() * std::cos(dk_ * x * static_cast<double>(nyq));
    return scale_ * sum;
  }

 private:
  SpectralField spec_;
  double scale_ = 1.0;
  double dk_ = 1.0;
};

}  // namespace

SteinResult stein_derivative(const ComplexFunction& f, double b, double x, double cutoff,
                             const SteinOptions& opts) {
  check_order(b);
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw ValidationError("Stein cutoff must be positive");
  if (opts.max_levels < 1 || opts.min_levels < 1 || opts.min_levels > opts.max_levels)
    throw ValidationError("Stein level limits are inconsistent");

  const cplx fx = f(x);
  const double s = 1.0 + 2.0 * b;
  auto integrand = [&](double h) {
    return (std::norm(fx - f(x + h)) + std::norm(fx - f(x - h))) * std::pow(h, -s);
  };
  const double tail = opts.tail_mean_square * 2.0 * std::pow(cutoff, -2.0 * b) / (2.0 * b);

  SteinResult out;
  double sum = 0.0;
  for (int m = 0; m < opts.max_levels; ++m) {
    const double hi = cutoff * std::ldexp(1.0, -m);
    // Shallow recursion: difference cancellation makes the error estimate noisy for tiny h.
    sum += gauss_kronrod<double, 31>::integrate(integrand, 0.5 * hi, hi, 8, 1e-11);
    const double v = std::sqrt(sum + tail);
    out.history.push_back(v);
    if (m == 0 || m + 1 < opts.min_levels) continue;
    const double prev = out.history[out.history.size() - 2];
    if (std::abs(v - prev) <= opts.rel_tol * v) {
      out.converged = true;
      break;
    }
  }
  out.value = out.history.back();
  return out;
}

SteinResult stein_derivative(const Field& f, double b, double x, double cutoff,
                             const SteinOptions& opts) {
  const Interpolant p(f);
  return stein_derivative([&p](double y) { return cplx(p(y), 0.0); }, b, x, cutoff, opts);
}

Field stein_profile(const Field& f, double b) {
  check_order(b);
  const auto& g = f.grid();
  const std::size_t n = f.size();
  const double dx = g.dx();
  const double period = 2.0 * g.half_length();
  const double s = 1.0 + 2.0 * b;
  const double tail_scale = std::pow(period, -s);

  std::vector<double> kernel(n, 0.0);
  for (std::size_t d = 1; d < n; ++d) {
    const double h = static_cast<double>(d) * dx;
    const double q = h / period;
    kernel[d] = std::pow(h, -s) + std::pow(period - h, -s) +
                tail_scale * (hurwitz_tail(s, q) + hurwitz_tail(s, 1.0 - q));
  }
  const Field df = spatial_derivative(f, 1);
  const double cell = 2.0 * std::pow(0.5 * dx, 2.0 - 2.0 * b) / (2.0 - 2.0 * b);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      const double diff = f[i] - f[l];
      acc += diff * diff * kernel[i > l ? i - l : l - i];
    }
    out[i] = std::sqrt(dx * acc + df[i] * df[i] * cell);
  }
  return Field(f.grid_ptr(), std::move(out));
}

SteinNormReport stein_norm_equivalence_check(const Field& f, double b) {
  check_order(b);
  SteinNormReport r;
  r.j_norm = bessel_potential(f, b).l2_norm();
  r.l2_norm = f.l2_norm();
  r.stein_norm = stein_profile(f, b).l2_norm();
  const double den = r.l2_norm + r.stein_norm;
  r.ratio = (den == 0.0 && r.j_norm == 0.0) ? 1.0 : r.j_norm / den;
  return r;
}

LeibnizReport leibniz_check(const Field& f, const Field& g, double b, double slack) {
  check_order(b);
  if (!f.grid().same_as(g.grid())) throw ValidationError("Leibniz check needs fields on one grid");
  LeibnizReport r;
  r.lhs = stein_profile(f * g, b).l2_norm();
  r.f_dg = (f * stein_profile(g, b)).l2_norm();
  r.g_df = (g * stein_profile(f, b)).l2_norm();
  r.rhs = r.f_dg + r.g_df;
  r.holds = r.lhs <= r.rhs + slack;
  return r;
}

PhaseBoundReport phase_pointwise_bound(double t, double b, std::span<const double> x_samples) {
  check_order(b);
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("phase bound needs t > 0");
  PhaseBoundReport r;
  r.t = t;
  r.b = b;
  auto phase = [t](double y) { return std::polar(1.0, -t * y * std::abs(y)); };
  // Beyond 32/sqrt(t) the phase difference oscillates fast enough that |.|^2 averages to 2.
  SteinOptions opts;
  opts.tail_mean_square = 2.0;
  const double cutoff = 32.0 / std::sqrt(t);
  for (double x : x_samples) {
    const SteinResult s = stein_derivative(phase, b, x, cutoff, opts);
    r.x.push_back(x);
    r.values.push_back(s.value);
    r.converged.push_back(s.converged);
    const double bound = std::pow(t, 0.5 * b) + std::pow(t, b) * std::pow(std::abs(x), b);
    r.fitted_c = std::max(r.fitted_c, s.value / bound);
  }
  return r;
}

nlohmann::json to_json(const SteinResult& r) {
  return {{"operation", "stein_derivative"},
          {"value", r.value},
          {"converged", r.converged},
          {"history", r.history}};
}

nlohmann::json to_json(const SteinNormReport& r) {
  return {{"operation", "stein_norm_equivalence_check"},
          {"j_norm", r.j_norm},
          {"l2_norm", r.l2_norm},
          {"stein_norm", r.stein_norm},
          {"ratio", r.ratio}};
}

nlohmann::json to_json(const LeibnizReport& r) {
  return {{"operation", "leibniz_check"}, {"lhs", r.lhs}, {"f_dg", r.f_dg},
          {"g_df", r.g_df},               {"rhs", r.rhs}, {"holds", r.holds}};
}

nlohmann::json to_json(const PhaseBoundReport& r) {
  return {{"operation", "phase_pointwise_bound"},
          {"t", r.t},
          {"b", r.b},
          {"x", r.x},
          {"values", r.values},
          {"converged", r.converged},
          {"fitted_c", r.fitted_c}};
}

}  // namespace bolab
