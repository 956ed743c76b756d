#include "bolab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bolab/errors.hpp"
#include "bolab/spectral_core.hpp"

namespace bolab {

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be >= 0");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw ValidationError("dealias_fraction must lie in (0, 1]");
  if (power < 1) throw ValidationError("nonlinearity power must be a positive integer");
  if (!(cfl > 0.0)) throw ValidationError("cfl factor must be positive");
  if (!(blowup_threshold > 0.0)) throw ValidationError("blow-up threshold must be positive");
}

std::string to_string(Integrator v) {
  return v == Integrator::ETDRK4 ? "etdrk4" : "if-rk4";
}
std::string to_string(NonlinearSign v) {
  return v == NonlinearSign::Focusing ? "focusing" : "defocusing";
}
std::string to_string(Dispersion v) { return v == Dispersion::Standard ? "standard" : "negative"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "if-rk4") return Integrator::IntegratingFactorRK4;
  if (s == "etdrk4") return Integrator::ETDRK4;
  throw ValidationError("unknown integrator '" + s + "' (if-rk4, etdrk4)");
}
NonlinearSign sign_from_string(const std::string& s) {
  if (s == "focusing" || s == "+") return NonlinearSign::Focusing;
  if (s == "defocusing" || s == "-") return NonlinearSign::Defocusing;
  throw ValidationError("unknown nonlinearity sign '" + s + "'");
}
Dispersion dispersion_from_string(const std::string& s) {
  if (s == "standard") return Dispersion::Standard;
  if (s == "negative") return Dispersion::Negative;
  throw ValidationError("unknown dispersion '" + s + "'");
}

std::vector<double> dealias_mask(const SpectralGrid& grid, double fraction) {
  const std::size_t n = grid.n_points();
  const auto cutoff = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n / 2)));
  std::vector<double> mask(grid.n_modes(), 0.0);
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = (j <= cutoff) ? 1.0 : 0.0;
  return mask;
}

namespace {

double signed_factor(NonlinearSign sign) { return sign == NonlinearSign::Focusing ? -1.0 : 1.0; }

double int_pow(double u, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= u;
  return r;
}

// Exponential integrators for v_t = lambda(k) v + N(v) in the half spectrum.
class Stepper {
 public:
  Stepper(GridPtr grid, const SolverConfig& cfg) : grid_(std::move(grid)), cfg_(cfg) {
    cfg_.validate();
    const std::size_t m = grid_->n_modes();
    const double disp = cfg_.dispersion == Dispersion::Standard ? -1.0 : 1.0;
    mask_ = dealias_mask(*grid_, cfg_.dealias_fraction);
    lambda_.resize(m);
    deriv_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double k = grid_->mode_wavenumber(j);
      lambda_[j] = cplx(0.0, disp * k * std::abs(k));
      deriv_[j] = grid_->is_nyquist(j) ? cplx(0.0) : cplx(0.0, k) * mask_[j];
    }
    const double h = cfg_.dt;
    e_half_.resize(m);
    e_full_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      e_half_[j] = nyquist_safe(j, std::exp(lambda_[j] * (0.5 * h)));
      e_full_[j] = nyquist_safe(j, std::exp(lambda_[j] * h));
    }
    if (cfg_.integrator == Integrator::ETDRK4) build_etd_coefficients();
    real_.resize(grid_->n_points());
    work_.resize(m);
  }

  std::vector<cplx> advance(const std::vector<cplx>& v, double t) {
    if (cfg_.integrator == Integrator::ETDRK4) return etdrk4(v, t);
    return if_rk4(v, t);
  }

 private:
  cplx nyquist_safe(std::size_t j, cplx m) const {
    return (grid_->is_nyquist(j) && m.imag() != 0.0) ? cplx(0.0) : m;
  }

  // Contour-integral evaluation of the phi-function coefficients: mean over 64 points on the
  // full unit circle around lambda*h (lambda is imaginary, so no half-circle symmetry applies).
  void build_etd_coefficients() {
    constexpr int kPoints = 64;
    const double h = cfg_.dt;
    const std::size_t m = grid_->n_modes();
    q_.assign(m, 0.0);
    f1_.assign(m, 0.0);
    f2_.assign(m, 0.0);
    f3_.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const cplx lh = lambda_[j] * h;
      cplx q = 0.0, a = 0.0, b = 0.0, c = 0.0;
      for (int p = 0; p < kPoints; ++p) {
        const cplx r = std::polar(1.0, 2.0 * std::numbers::pi * (p + 0.5) / kPoints);
        const cplx z = lh + r;
        const cplx ez = std::exp(z);
        const cplx z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      const double inv = h / kPoints;
      q_[j] = nyquist_safe(j, q * inv);
      f1_[j] = nyquist_safe(j, a * inv);
      f2_[j] = nyquist_safe(j, b * inv);
      f3_[j] = nyquist_safe(j, c * inv);
    }
  }

  std::vector<cplx> nonlinear(const std::vector<cplx>& v, double t) {
    std::vector<cplx> out(v.size(), 0.0);
    if (!cfg_.nonlinear) return out;
    grid_->inverse(v, real_);
    double umax = 0.0;
    for (double u : real_) umax = std::max(umax, std::abs(u));
    if (!(umax <= cfg_.blowup_threshold))
      throw BlowUp("max|u| exceeded " + std::to_string(cfg_.blowup_threshold), t);
    const double inv_p = 1.0 / (cfg_.power + 1);
    for (double& u : real_) u = int_pow(u, cfg_.power + 1) * inv_p;
    grid_->forward(real_, work_);
    const double s = signed_factor(cfg_.sign);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = s * deriv_[j] * work_[j];
    return out;
  }

  void check_cfl(const std::vector<cplx>& v, double t) {
    if (!cfg_.nonlinear) return;
    grid_->inverse(v, real_);
    double umax = 0.0;
    for (double u : real_) umax = std::max(umax, std::abs(u));
    // The advection speed of u^k u_x is |u|^k.
    const double speed = int_pow(umax, cfg_.power);
    if (speed > 0.0 && cfg_.dt > cfg_.cfl * grid_->dx() / speed)
      throw CflViolation("advective CFL violated: dt=" + std::to_string(cfg_.dt) +
                             " > " + std::to_string(cfg_.cfl * grid_->dx() / speed),
                         t);
  }

  std::vector<cplx> if_rk4(const std::vector<cplx>& v, double t) {
    check_cfl(v, t);
    const double h = cfg_.dt;
    const std::size_t m = v.size();
    std::vector<cplx> tmp(m);
    const auto a = nonlinear(v, t);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = e_half_[j] * (v[j] + 0.5 * h * a[j]);
    const auto b = nonlinear(tmp, t + 0.5 * h);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = e_half_[j] * v[j] + 0.5 * h * b[j];
    const auto c = nonlinear(tmp, t + 0.5 * h);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = e_full_[j] * v[j] + h * e_half_[j] * c[j];
    const auto d = nonlinear(tmp, t + h);
    std::vector<cplx> out(m);
    for (std::size_t j = 0; j < m; ++j)
      out[j] = e_full_[j] * v[j] +
               (h / 6.0) * (e_full_[j] * a[j] + 2.0 * e_half_[j] * (b[j] + c[j]) + d[j]);
    return out;
  }

  std::vector<cplx> etdrk4(const std::vector<cplx>& v, double t) {
    check_cfl(v, t);
    const double h = cfg_.dt;
    const std::size_t m = v.size();
    const auto nv = nonlinear(v, t);
    std::vector<cplx> a(m), b(m), c(m), out(m);
    for (std::size_t j = 0; j < m; ++j) a[j] = e_half_[j] * v[j] + q_[j] * nv[j];
    const auto na = nonlinear(a, t + 0.5 * h);
    for (std::size_t j = 0; j < m; ++j) b[j] = e_half_[j] * v[j] + q_[j] * na[j];
    const auto nb = nonlinear(b, t + 0.5 * h);
    for (std::size_t j = 0; j < m; ++j) c[j] = e_half_[j] * a[j] + q_[j] * (2.0 * nb[j] - nv[j]);
    const auto nc = nonlinear(c, t + h);
    for (std::size_t j = 0; j < m; ++j)
      out[j] = e_full_[j] * v[j] + f1_[j] * nv[j] + 2.0 * f2_[j] * (na[j] + nb[j]) + f3_[j] * nc[j];
    return out;
  }

  GridPtr grid_;
  SolverConfig cfg_;
  std::vector<double> mask_;
  std::vector<cplx> lambda_, deriv_, e_half_, e_full_;
  std::vector<cplx> q_, f1_, f2_, f3_;
  std::vector<double> real_;
  std::vector<cplx> work_;
};

std::vector<cplx> to_modes(const Field& u) {
  std::vector<cplx> v(u.grid().n_modes());
  u.grid().forward(u.values(), v);
  return v;
}

Field to_field(const GridPtr& grid, const std::vector<cplx>& v) {
  std::vector<double> out(grid->n_points());
  grid->inverse(v, out);
  return Field(grid, std::move(out));
}

}  // namespace

Field rhs_nonlinear(const Field& u, int power, NonlinearSign sign, double dealias_fraction) {
  if (power < 1) throw ValidationError("nonlinearity power must be a positive integer");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw ValidationError("dealias_fraction must lie in (0, 1]");
  const double umax = u.max_abs();
  if (umax > 1e6) throw BlowUp("max|u| exceeded 1e6", 0.0);
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = int_pow(u[i], power + 1) / (power + 1);
  const auto mask = dealias_mask(u.grid(), dealias_fraction);
  const double s = signed_factor(sign);
  SpectralField ws = forward_transform(Field(u.grid_ptr(), std::move(w)));
  auto modes = ws.modes();
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const double k = u.grid().mode_wavenumber(j);
    modes[j] = u.grid().is_nyquist(j) ? cplx(0.0) : s * cplx(0.0, k) * mask[j] * modes[j];
  }
  return inverse_transform(ws);
}

Field step(const Field& u, const SolverConfig& cfg) {
  Stepper stepper(u.grid_ptr(), cfg);
  return to_field(u.grid_ptr(), stepper.advance(to_modes(u), 0.0));
}

Trajectory solve(const Field& u0, const SolverConfig& cfg, int snapshot_every) {
  cfg.validate();
  if (snapshot_every < 1) throw ValidationError("snapshot_every must be >= 1");
  Trajectory traj;
  traj.config = cfg;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u0);
  if (cfg.t_end == 0.0) return traj;

  long n_steps = std::lround(cfg.t_end / cfg.dt);
  n_steps = std::max(n_steps, 1L);
  Stepper stepper(u0.grid_ptr(), cfg);
  std::vector<cplx> v = to_modes(u0);
  for (long s = 1; s <= n_steps; ++s) {
    v = stepper.advance(v, static_cast<double>(s - 1) * cfg.dt);
    if (s % snapshot_every == 0 || s == n_steps) {
      traj.times.push_back(static_cast<double>(s) * cfg.dt);
      traj.snapshots.push_back(to_field(u0.grid_ptr(), v));
    }
  }
  return traj;
}

Field soliton(GridPtr grid, double c, double x0, SolitonVariant variant) {
  if (!(c > 0.0)) throw ValidationError("soliton speed c must be positive");
  const double sign = variant == SolitonVariant::BO ? 1.0 : -1.0;
  return Field::sample(std::move(grid), [=](double x) {
    const double y = c * (x - x0);
    return sign * c * (-4.0 / (1.0 + y * y));
  });
}

Field soliton_at(GridPtr grid, double c, double x0, double t, SolitonVariant variant) {
  const double shift = variant == SolitonVariant::BO ? -c * t : c * t;
  return soliton(std::move(grid), c, x0 + shift, variant);
}

Field zero_mean_projection(const Field& u) {
  const double m = u.mean();
  std::vector<double> out(u.values().begin(), u.values().end());
  for (double& v : out) v -= m;
  return Field::with_known_mean(u.grid_ptr(), std::move(out), 0.0);
}

}  // namespace bolab
