#pragma once

#include <string>
#include <vector>

#include "bolab/field.hpp"

namespace bolab {

enum class Integrator { IntegratingFactorRK4, ETDRK4 };
/// Sign in front of u^k u_x: focusing (+) or defocusing (-).
enum class NonlinearSign { Focusing, Defocusing };
/// Standard: u_t + H u_xx = ...; Negative: v_t - H v_xx = ...
enum class Dispersion { Standard, Negative };

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double dealias_fraction = 2.0 / 3.0;
  Integrator integrator = Integrator::IntegratingFactorRK4;
  int power = 1;
  NonlinearSign sign = NonlinearSign::Focusing;
  Dispersion dispersion = Dispersion::Standard;
  bool nonlinear = true;
  /// Advective CFL: dt <= cfl * dx / max|u|.
  double cfl = 0.1;
  double blowup_threshold = 1e6;

  void validate() const;
};

std::string to_string(Integrator v);
std::string to_string(NonlinearSign v);
std::string to_string(Dispersion v);
Integrator integrator_from_string(const std::string& s);
NonlinearSign sign_from_string(const std::string& s);
Dispersion dispersion_from_string(const std::string& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> snapshots;
  SolverConfig config;
};

/// 1 for modes kept by the dealiasing rule, |j| <= floor(fraction * n/2).
std::vector<double> dealias_mask(const SpectralGrid& grid, double fraction);

/// -/+ d/dx (u^{k+1}/(k+1)) for focusing/defocusing, dealiased with `dealias_fraction`.
Field rhs_nonlinear(const Field& u, int power, NonlinearSign sign, double dealias_fraction = 2.0 / 3.0);

/// Advances one time step with the configured exponential integrator.
Field step(const Field& u, const SolverConfig& cfg);

/// Integrates to cfg.t_end, storing a snapshot every `snapshot_every` steps and at the end.
Trajectory solve(const Field& u0, const SolverConfig& cfg, int snapshot_every = 1);

enum class SolitonVariant { BO, BONeg };

/// c*phi(c(x - x0)) with phi(x) = -4/(1+x^2); the BONeg variant is its negative.
Field soliton(GridPtr grid, double c, double x0, SolitonVariant variant = SolitonVariant::BO);

/// The travelling wave at time t: BO moves left with speed c, BONeg moves right.
Field soliton_at(GridPtr grid, double c, double x0, double t,
                 SolitonVariant variant = SolitonVariant::BO);

/// u minus its mean; the result's mean is exactly zero.
Field zero_mean_projection(const Field& u);

}  // namespace bolab
