#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bolab/field.hpp"
#include "json.hpp"

namespace bolab {

// ---------------------------------------------------------------------------
// Weights

enum class WeightKind {
  Bracket,    ///< scale * <x>^r, <x> = (1+x^2)^{1/2}
  Truncated,  ///< scale * w_N(x)^theta
  Power,      ///< scale * |x|^alpha
};

struct WeightSpec {
  WeightKind kind = WeightKind::Bracket;
  double exponent = 0.0;
  int truncation_N = 1;
  double scale = 1.0;

  static WeightSpec bracket(double r) { return {WeightKind::Bracket, r, 1, 1.0}; }
  static WeightSpec truncated(int N, double theta) { return {WeightKind::Truncated, theta, N, 1.0}; }
  static WeightSpec power(double alpha) { return {WeightKind::Power, alpha, 1, 1.0}; }

  void validate() const;
  bool is_constant() const noexcept { return exponent == 0.0; }
  /// Power weights with alpha != 0 vanish or blow up at x = 0.
  bool singular_at_origin() const noexcept { return kind == WeightKind::Power && exponent != 0.0; }
};

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& s);
nlohmann::json to_json(const WeightSpec& w);

/// Truncated weight: <x> for |x| <= N, 2N for |x| >= 3N. In between w = F(<x>) where F' is a
/// quintic smoothstep falling from 1 to 0 on [<N>, 4N - <N>]; this makes w C^2, nondecreasing in
/// |x|, with 0 <= w' <= 1, and lands exactly on 2N.
double truncated_weight(double x, int N);

double evaluate_weight(const WeightSpec& w, double x);

/// sqrt(dx * sum (w u)^2).
double weighted_l2_norm(const Field& u, const WeightSpec& w);

/// ||J^s u||_2 + ||<x>^r u||_2.
double z_norm(const Field& u, double s, double r);

/// ||H f * w^{1/2}||_2 / ||f * w^{1/2}||_2 (the L^2(w dx) operator ratio).
double weighted_hilbert_ratio(const Field& f, const WeightSpec& w);

// ---------------------------------------------------------------------------
// A2 constants

/// Interval family: lengths 2L * 2^{-j} for j = 0..levels, centers on a lattice of
/// stride_fraction * length, intervals contained in [-L, L].
struct A2Family {
  double half_length = 128.0;
  int levels = 12;
  double stride_fraction = 0.125;
  double divergence_bound = 1e8;
};

struct A2Result {
  double constant = 0.0;
  bool divergent = false;
  std::size_t intervals = 0;
  double worst_left = 0.0;
  double worst_right = 0.0;
  /// Running max of the product after each length level.
  std::vector<double> level_max;
};

/// sup over the family of (avg_Q w)(avg_Q 1/w). Intervals touching a power singularity are
/// integrated on a dyadic open mesh graded toward x = 0, so divergent integrals show up as an
/// unbounded refinement sum and set the divergence flag. Power-weight intervals away from 0 use
/// the exact antiderivative.
A2Result a2_constant(const WeightSpec& w, const A2Family& family = {});

struct A2Scan {
  double theta = 0.0;
  std::vector<int> N;
  std::vector<A2Result> results;
  /// max/min of the constants across N.
  double uniformity_ratio = 1.0;
};

/// A2 constants of w_N^theta for each N. With family.half_length <= 0 the scan range is 8N.
A2Scan a2_uniformity_scan(double theta, std::span<const int> N_list, A2Family family = {0.0});

nlohmann::json to_json(const A2Result& r);
nlohmann::json to_json(const A2Scan& s);

// ---------------------------------------------------------------------------
// Stein square-function derivative
//   Df(x) = ( int |f(x) - f(y)|^2 / |x - y|^{1+2b} dy )^{1/2}

struct SteinOptions {
  double rel_tol = 1e-4;
  int min_levels = 4;
  int max_levels = 40;
  /// Mean of |f(x)-f(y)|^2 assumed beyond the cutoff; adds mean * 2 cutoff^{-2b} / (2b).
  double tail_mean_square = 0.0;
};

struct SteinResult {
  double value = 0.0;
  bool converged = false;
  /// Value after each dyadic level of the inner cutoff.
  std::vector<double> history;
};

using ComplexFunction = std::function<cplx(double)>;

/// Pointwise Df(x) over |x - y| <= cutoff on a dyadic mesh graded toward y = x. Converged
/// when successive levels agree to rel_tol; otherwise the history documents the growth.
SteinResult stein_derivative(const ComplexFunction& f, double b, double x, double cutoff,
                             const SteinOptions& opts = {});

/// Same, with f given by the trigonometric interpolant of a field.
SteinResult stein_derivative(const Field& f, double b, double x, double cutoff,
                             const SteinOptions& opts = {});

/// Df at every grid point for the periodic extension of f: grid-sum quadrature against the
/// periodized kernel, plus a Taylor correction for the cell containing x.
Field stein_profile(const Field& f, double b);

struct SteinNormReport {
  double j_norm = 0.0;      ///< ||J^b f||_2
  double l2_norm = 0.0;     ///< ||f||_2
  double stein_norm = 0.0;  ///< ||D f||_2
  double ratio = 1.0;       ///< j_norm / (l2_norm + stein_norm), 1 when both vanish
};

SteinNormReport stein_norm_equivalence_check(const Field& f, double b);

struct LeibnizReport {
  double lhs = 0.0;   ///< ||D(fg)||_2
  double f_dg = 0.0;  ///< ||f Dg||_2
  double g_df = 0.0;  ///< ||g Df||_2
  double rhs = 0.0;
  bool holds = false;
};

LeibnizReport leibniz_check(const Field& f, const Field& g, double b, double slack = 1e-6);

struct PhaseBoundReport {
  double t = 0.0;
  double b = 0.0;
  std::vector<double> x;
  std::vector<double> values;
  std::vector<bool> converged;
  /// Smallest c with D(e^{-itx|x|})(x) <= c (t^{b/2} + t^b |x|^b) on the samples.
  double fitted_c = 0.0;
};

PhaseBoundReport phase_pointwise_bound(double t, double b, std::span<const double> x_samples);

enum class InterpolationWeight { Bracket, Truncated };

struct InterpolationReport {
  double lhs = 0.0;          ///< ||J^{theta a}(rho^{(1-theta) b} f)||_2
  double weighted = 0.0;     ///< ||rho^b f||_2
  double smooth = 0.0;       ///< ||J^a f||_2
  double rhs = 0.0;          ///< weighted^{1-theta} smooth^theta
  double ratio = 0.0;
};

InterpolationReport interpolation_check(const Field& f, double a, double b, double theta,
                                        InterpolationWeight weight, int N = 1);

nlohmann::json to_json(const SteinResult& r);
nlohmann::json to_json(const SteinNormReport& r);
nlohmann::json to_json(const LeibnizReport& r);
nlohmann::json to_json(const PhaseBoundReport& r);
nlohmann::json to_json(const InterpolationReport& r);

}  // namespace bolab
