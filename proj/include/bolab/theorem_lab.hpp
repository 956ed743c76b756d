#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bolab/dynamics.hpp"
#include "bolab/invariants.hpp"
#include "json.hpp"

namespace bolab {

enum class DatumKind { Soliton, Gaussian, GaussianPair, RandomSmooth, File };

std::string to_string(DatumKind k);
DatumKind datum_kind_from_string(const std::string& s);

/// Initial data recipes. Unused parameters are ignored by each kind.
struct DatumRecipe {
  DatumKind kind = DatumKind::Gaussian;
  // soliton
  double c = 1.0;
  double x0 = 0.0;
  // gaussian: amplitude * exp(-(x - center)^2 / (2 width^2))
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
  // gaussian pair: amplitude * (g_a - g_b), each g a unit-mass gaussian, so the mean is zero
  double center_b = 0.0;
  double width_b = 2.0;
  // random smooth: `modes` random cosines/sines of wavenumber <= kmax under a gaussian envelope
  int modes = 6;
  double kmax = 2.0;
  // file
  std::string path;
};

nlohmann::json to_json(const DatumRecipe& d);
DatumRecipe datum_from_json(const nlohmann::json& j);

/// Samples a recipe on a grid. RandomSmooth draws from std::mt19937_64 seeded with `seed`.
Field make_datum(GridPtr grid, const DatumRecipe& recipe, std::uint64_t seed);

enum class ExperimentKind { Persistence, MeanThreshold, DecayBarrier, LinearMoment, Soliton };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
  std::string label = "experiment";
  ExperimentKind kind = ExperimentKind::Persistence;
  DatumRecipe datum;
  std::uint64_t seed = 0;
  double s = 1.0;
  double r = 1.0;
  std::size_t n_points = 1024;
  double half_length = 128.0;
  SolverConfig solver;
  int snapshot_every = 10;
  std::vector<int> N_list{4, 16, 64};
  double growth_ceiling = 10.0;
  // domain escalation (threshold, barrier and linear-moment experiments); dx is kept fixed
  std::vector<double> L_list{64.0, 128.0, 256.0};
  double t_star = 1.0;
  // mean-threshold amplitude and linear-moment weight order
  double amplitude = 1.0;
  int k = 3;
  std::filesystem::path output_dir;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Rejects configs without a seed.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentRecord {
  ExperimentConfig config;
  std::vector<NormTrace> traces;
  /// Verdict fields; "traces" lists every trace the verdict refers to.
  nlohmann::json verdict = nlohmann::json::object();
  nlohmann::json fingerprint = nlohmann::json::object();
  bool failed = false;
  std::string error;

  const NormTrace* find_trace(const std::string& name) const;
};

/// Build/environment description without timestamps, so records stay byte-stable.
nlohmann::json environment_fingerprint();

/// Persistence run: weighted norms ||w_N^r u|| for each N and ||J^s u|| along the flow.
ExperimentRecord persistence_experiment(const ExperimentConfig& cfg);

/// Soliton tracking against the exact translate, with conservation traces.
ExperimentRecord soliton_experiment(const ExperimentConfig& cfg);

struct PairedRecord {
  ExperimentRecord datum;
  ExperimentRecord control;
};

/// Gaussian of mean A against a control with the same profile minus I1 times a fixed unit-mass
/// gaussian (mean zero, same far field of the flow otherwise). Both are evolved to t_star on each
/// L in L_list at fixed dx, and ||w_L^{5/2} u(t*)|| and ||w_L^{2.4} u(t*)|| are traced against L.
PairedRecord mean_threshold_experiment(const ExperimentConfig& cfg, double amplitude);

/// Zero-mean datum: moment trace on the base grid, and ||w_L^{7/2} u(t*)||, ||w_L^{3.4} u(t*)||
/// against L.
ExperimentRecord decay_barrier_experiment(const ExperimentConfig& cfg);

struct LinearMomentReport {
  int k = 0;
  std::vector<double> L;
  /// max over t in [0, t_star] of ||<x>^k U(t) v0|| per L.
  std::vector<double> compliant;
  /// ||<x>^k U(t_star) v0|| per L; empty when k <= 2 (no condition to violate).
  std::vector<double> violating;
  double compliant_ratio = 1.0;   ///< max/min across L
  bool violating_monotone = false;
  std::vector<double> compliant_moments;  ///< discrete moments 0..k-1 of the compliant datum
  std::vector<double> violating_moments;
};

/// Linear flow only (exact propagator). Data p(x) e^{-x^2/16} with moments 0..k-3 removed
/// (compliant) or with the highest required moment left in (violating).
LinearMomentReport linear_moment_condition_experiment(int k, const ExperimentConfig& cfg);

/// p(x) e^{-x^2/16} minus a combination of x^j e^{-x^2/16}, j < count, with discrete moments
/// 0..count-1 equal to zero.
Field remove_moments(const Field& v, int count, double envelope_scale = 16.0);

struct DuhamelTerms {
  int order = 2;
  double t = 0.0;
  /// Ascending frequencies xi_j, j = -n/2..n/2-1.
  std::vector<double> xi;
  std::vector<std::string> names;
  /// Term values on the xi grid. d^order/dxi^order (P u0hat) = sign * P * sum(terms), where
  /// P = exp(-i t xi|xi|) and sign is -1 for order 2, +1 for order 3.
  std::vector<std::vector<cplx>> terms;
  std::vector<double> norms;
  std::vector<cplx> total;
  /// Coefficient of the Dirac mass at xi = 0 (order 3 only): -4 i t u0hat(0).
  cplx dirac_slot{0.0, 0.0};
  /// Size of the jump of the sgn term across xi = 0: 4 t |u0hat(0)|, and the same after
  /// zero-mean projection (identically 0).
  double sgn_jump = 0.0;
  double sgn_jump_zero_mean = 0.0;
};

/// Continuous Fourier transform u0hat(xi) = int u0 e^{-i xi x} dx by the grid rule, any xi.
cplx fourier_at(const Field& u0, double xi);

DuhamelTerms duhamel_phase_terms(const Field& u0, double t, int order);

/// Dispatches on cfg.kind. Mean-threshold configs return the datum record with the control's
/// traces merged in under a "control/" prefix.
ExperimentRecord run_experiment(const ExperimentConfig& cfg);

/// Runs the experiments on up to `parallelism` threads, persists each record to its
/// output_dir, and writes index.json to `index_dir`. Failures are recorded, not thrown.
std::vector<ExperimentRecord> run_sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                        const std::filesystem::path& index_dir);

nlohmann::json to_json(const LinearMomentReport& r);
nlohmann::json to_json(const DuhamelTerms& d);

}  // namespace bolab
