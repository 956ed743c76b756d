#include "bolab/theorem_lab.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "bolab/errors.hpp"
#include "bolab/field_io.hpp"
#include "bolab/records.hpp"
#include "bolab/spectral_core.hpp"
#include "bolab/weighted_analysis.hpp"

namespace bolab {

namespace {

using nlohmann::json;

bool is_power_of_two(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

double unit_gaussian(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z) / (width * std::sqrt(2.0 * std::numbers::pi));
}

double dx_of(const ExperimentConfig& cfg) { return 2.0 * cfg.half_length / static_cast<double>(cfg.n_points); }

GridPtr grid_for(const ExperimentConfig& cfg, double L) {
  const double n = 2.0 * L / dx_of(cfg);
  const auto n_int = static_cast<std::size_t>(std::llround(n));
  if (std::abs(n - static_cast<double>(n_int)) > 1e-9 || !is_power_of_two(n_int))
    throw ValidationError("domain L=" + format_double(L) + " gives a grid size that is not a power of two");
  return make_grid(n_int, L);
}

double weighted_norm_N(const Field& u, double r, int N) {
  return weighted_l2_norm(u, WeightSpec::truncated(N, r));
}

// max/min of a positive series; 1 for an all-zero series.
double spread(std::span<const double> v) {
  if (v.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 1.0;
  return *hi / *lo;
}

bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return v.size() >= 2;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) return 0.0;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
}

NormTrace series(const std::string& name, const std::string& run, std::span<const double> x,
                 std::span<const double> y) {
  NormTrace t(name, run);
  for (std::size_t i = 0; i < x.size(); ++i) t.append(x[i], y[i]);
  return t;
}

json trace_names(const std::vector<NormTrace>& traces) {
  json names = json::array();
  for (const auto& t : traces) names.push_back(t.name());
  return names;
}

// Moment-law summary over a trajectory's first_moment trace.
void moment_verdict(const NormTrace& moment, const Field& u0, json& v) {
  const double target = 0.5 * conserved_I2(u0);
  const bool non_null = u0.max_abs() > 0.0;
  v["non_null"] = non_null;
  v["moment_target_slope"] = target;
  if (moment.size() >= 2) {
    const double slope = fit_slope(moment.times(), moment.values());
    v["moment_slope"] = slope;
    v["moment_slope_rel_error"] = target > 0.0 ? std::abs(slope - target) / target : std::abs(slope);
  }
  v["moment_strictly_increasing"] = non_null && strictly_increasing(moment.values());
  v["moment_boundary_contaminated"] = first_moment(u0).boundary_contaminated;
}

std::vector<double> polynomial_envelope_values(const SpectralGrid& g, double scale) {
  std::vector<double> v(g.n_points());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g.x(i);
    v[i] = (1.0 + 0.6 * x + 0.35 * x * x - 0.2 * x * x * x) * std::exp(-x * x / scale);
  }
  return v;
}

double discrete_moment(const Field& f, int j) {
  const auto& g = f.grid();
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::pow(g.x(i), j) * f[i];
  return g.dx() * neumaier_sum(terms);
}

std::vector<cplx> ascending_transform(const Field& f, int power) {
  const auto& g = f.grid();
  const std::size_t n = g.n_points();
  std::vector<double> xf(n);
  for (std::size_t i = 0; i < n; ++i) xf[i] = std::pow(g.x(i), power) * f[i];
  const SpectralField s = forward_transform(Field(f.grid_ptr(), std::move(xf)));
  const double scale = std::sqrt(2.0 * g.half_length());
  std::vector<cplx> out(n);
  const long half = static_cast<long>(n / 2);
  for (long j = -half; j < half; ++j) out[static_cast<std::size_t>(j + half)] = scale * s.coefficient(j);
  return out;
}

double xi_norm(const std::vector<cplx>& v, double dk) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return std::sqrt(dk * s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Data recipes and configs

std::string to_string(DatumKind k) {
  switch (k) {
    case DatumKind::Soliton: return "soliton";
    case DatumKind::Gaussian: return "gaussian";
    case DatumKind::GaussianPair: return "gaussian_pair";
    case DatumKind::RandomSmooth: return "random_smooth";
    case DatumKind::File: return "file";
  }
  return "?";
}

DatumKind datum_kind_from_string(const std::string& s) {
  for (auto k : {DatumKind::Soliton, DatumKind::Gaussian, DatumKind::GaussianPair, DatumKind::RandomSmooth,
                 DatumKind::File})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown datum kind '" + s + "'");
}

json to_json(const DatumRecipe& d) {
  json j{{"kind", to_string(d.kind)}};
  switch (d.kind) {
    case DatumKind::Soliton: j["c"] = d.c; j["x0"] = d.x0; break;
    case DatumKind::Gaussian:
      j["amplitude"] = d.amplitude; j["center"] = d.center; j["width"] = d.width; break;
    case DatumKind::GaussianPair:
      j["amplitude"] = d.amplitude; j["center"] = d.center; j["width"] = d.width;
      j["center_b"] = d.center_b; j["width_b"] = d.width_b; break;
    case DatumKind::RandomSmooth:
      j["amplitude"] = d.amplitude; j["center"] = d.center; j["width"] = d.width;
      j["modes"] = d.modes; j["kmax"] = d.kmax; break;
    case DatumKind::File: j["path"] = d.path; break;
  }
  return j;
}

DatumRecipe datum_from_json(const json& j) {
  DatumRecipe d;
  d.kind = datum_kind_from_string(j.at("kind").get<std::string>());
  d.c = j.value("c", d.c);
  d.x0 = j.value("x0", d.x0);
  d.amplitude = j.value("amplitude", d.amplitude);
  d.center = j.value("center", d.center);
  d.width = j.value("width", d.width);
  d.center_b = j.value("center_b", d.center_b);
  d.width_b = j.value("width_b", d.width_b);
  d.modes = j.value("modes", d.modes);
  d.kmax = j.value("kmax", d.kmax);
  d.path = j.value("path", d.path);
  return d;
}

Field make_datum(GridPtr grid, const DatumRecipe& d, std::uint64_t seed) {
  switch (d.kind) {
    case DatumKind::Soliton:
      return soliton(std::move(grid), d.c, d.x0);
    case DatumKind::Gaussian:
      if (!(d.width > 0.0)) throw ValidationError("gaussian width must be positive");
      return Field::sample(std::move(grid), [&](double x) {
        const double z = (x - d.center) / d.width;
        return d.amplitude * std::exp(-0.5 * z * z);
      });
    case DatumKind::GaussianPair:
      if (!(d.width > 0.0) || !(d.width_b > 0.0)) throw ValidationError("gaussian widths must be positive");
      return Field::sample(std::move(grid), [&](double x) {
        return d.amplitude * (unit_gaussian(x, d.center, d.width) - unit_gaussian(x, d.center_b, d.width_b));
      });
    case DatumKind::RandomSmooth: {
      if (d.modes < 1 || !(d.kmax > 0.0) || !(d.width > 0.0))
        throw ValidationError("random datum needs modes >= 1, kmax > 0, width > 0");
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> kdist(0.0, d.kmax);
      std::normal_distribution<double> adist(0.0, 1.0);
      std::vector<std::array<double, 3>> terms(static_cast<std::size_t>(d.modes));
      for (auto& t : terms) t = {kdist(rng), adist(rng), adist(rng)};
      const double norm = d.amplitude / std::sqrt(static_cast<double>(d.modes));
      return Field::sample(std::move(grid), [&](double x) {
        double s = 0.0;
        for (const auto& t : terms) s += t[1] * std::cos(t[0] * x) + t[2] * std::sin(t[0] * x);
        const double z = (x - d.center) / d.width;
        return norm * s * std::exp(-0.5 * z * z);
      });
    }
    case DatumKind::File: {
      const std::filesystem::path p(d.path);
      if (!std::filesystem::exists(p)) throw ValidationError("datum file not found: " + d.path);
      return p.extension() == ".bin" ? read_field_binary(p, grid) : read_field_csv(p, grid);
    }
  }
  throw ValidationError("unhandled datum kind");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Persistence: return "persistence";
    case ExperimentKind::MeanThreshold: return "mean_threshold";
    case ExperimentKind::DecayBarrier: return "decay_barrier";
    case ExperimentKind::LinearMoment: return "linear_moment";
    case ExperimentKind::Soliton: return "soliton";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Persistence, ExperimentKind::MeanThreshold, ExperimentKind::DecayBarrier,
                 ExperimentKind::LinearMoment, ExperimentKind::Soliton})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown experiment kind '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (label.empty()) throw ValidationError("experiment label must not be empty");
  if (!(r >= 0.0)) throw ValidationError("r must be >= 0");
  if (r > s) throw ValidationError("r must not exceed s");
  if (!is_power_of_two(n_points)) throw ValidationError("n_points must be a power of two >= 8");
  if (!(half_length > 0.0)) throw ValidationError("half_length must be positive");
  solver.validate();
  if (snapshot_every < 1) throw ValidationError("snapshot_every must be >= 1");
  for (int N : N_list)
    if (N < 1) throw ValidationError("truncation N must be a positive integer");
  if (!(growth_ceiling > 1.0)) throw ValidationError("growth ceiling must exceed 1");
  for (std::size_t i = 0; i < L_list.size(); ++i) {
    if (!(L_list[i] > 0.0)) throw ValidationError("domain sizes must be positive");
    if (i > 0 && !(L_list[i] > L_list[i - 1])) throw ValidationError("L_list must be increasing");
  }
  if (!(t_star > 0.0)) throw ValidationError("t_star must be positive");
  if (k < 1 || k > 4) throw ValidationError("linear moment order k must be in 1..4");
}

json to_json(const ExperimentConfig& c) {
  return {{"label", c.label},
          {"kind", to_string(c.kind)},
          {"seed", c.seed},
          {"datum", to_json(c.datum)},
          {"s", c.s},
          {"r", c.r},
          {"grid", {{"n", c.n_points}, {"L", c.half_length}}},
          {"solver", to_json(c.solver)},
          {"snapshot_every", c.snapshot_every},
          {"N_list", c.N_list},
          {"growth_ceiling", c.growth_ceiling},
          {"L_list", c.L_list},
          {"t_star", c.t_star},
          {"amplitude", c.amplitude},
          {"k", c.k},
          {"output_dir", c.output_dir.generic_string()}};
}

ExperimentConfig config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    if (!j.contains("seed")) throw ValidationError("config must set a seed");
    static const std::set<std::string> known{"label", "kind", "seed", "datum", "s", "r", "grid",
                                             "solver", "snapshot_every", "N_list", "growth_ceiling",
                                             "L_list", "t_star", "amplitude", "k", "output_dir"};
    for (const auto& [key, _] : j.items())
      if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
    ExperimentConfig c;
    c.label = j.value("label", c.label);
    c.kind = experiment_kind_from_string(j.value("kind", to_string(c.kind)));
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("datum")) c.datum = datum_from_json(j.at("datum"));
    c.s = j.value("s", c.s);
    c.r = j.value("r", c.r);
    if (j.contains("grid")) {
      c.n_points = j.at("grid").value("n", c.n_points);
      c.half_length = j.at("grid").value("L", c.half_length);
    }
    if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"));
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
    c.N_list = j.value("N_list", c.N_list);
    c.growth_ceiling = j.value("growth_ceiling", c.growth_ceiling);
    c.L_list = j.value("L_list", c.L_list);
    c.t_star = j.value("t_star", c.t_star);
    c.amplitude = j.value("amplitude", c.amplitude);
    c.k = j.value("k", c.k);
    c.output_dir = j.value("output_dir", std::string());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

const NormTrace* ExperimentRecord::find_trace(const std::string& name) const {
  for (const auto& t : traces)
    if (t.name() == name) return &t;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentRecord persistence_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!(cfg.r < 2.5)) throw ValidationError("persistence experiment needs r < 5/2");
  const GridPtr grid = make_grid(cfg.n_points, cfg.half_length);
  const Field u0 = make_datum(grid, cfg.datum, cfg.seed);
  const double z0 = z_norm(u0, cfg.s, cfg.r);
  if (!std::isfinite(z0)) throw ValidationError("datum has non-finite Z norm");

  const Trajectory traj = solve(u0, cfg.solver, cfg.snapshot_every);
  ExperimentRecord rec;
  rec.config = cfg;
  rec.fingerprint = environment_fingerprint();

  NormTrace sob("sobolev_s", cfg.label);
  std::vector<NormTrace> weighted;
  for (int N : cfg.N_list) weighted.emplace_back("weighted_r_N" + std::to_string(N), cfg.label);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Field& u = traj.snapshots[i];
    sob.append(traj.times[i], bessel_potential(u, cfg.s).l2_norm());
    for (std::size_t m = 0; m < cfg.N_list.size(); ++m)
      weighted[m].append(traj.times[i], weighted_norm_N(u, cfg.r, cfg.N_list[m]));
  }

  json ratios = json::object();
  bool persistent = true;
  auto check = [&](const NormTrace& t) {
    const double first = t.values().front();
    const double ratio = first > 0.0 ? t.max_value() / first : (t.max_value() > 0.0 ? INFINITY : 1.0);
    ratios[t.name()] = std::isfinite(ratio) ? json(ratio) : json("inf");
    if (!(ratio < cfg.growth_ceiling)) persistent = false;
  };
  check(sob);
  for (const auto& t : weighted) check(t);

  rec.traces.push_back(std::move(sob));
  for (auto& t : weighted) rec.traces.push_back(std::move(t));
  for (auto& t : invariant_traces(traj, cfg.label)) rec.traces.push_back(std::move(t));

  json v;
  v["experiment"] = "persistence";
  v["persistent"] = persistent;
  v["growth_ceiling"] = cfg.growth_ceiling;
  v["max_over_initial"] = ratios;
  v["z_norm_initial"] = z0;
  moment_verdict(*rec.find_trace("first_moment"), u0, v);
  v["traces"] = trace_names(rec.traces);
  rec.verdict = std::move(v);
  return rec;
}

ExperimentRecord soliton_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.datum.kind != DatumKind::Soliton) throw ValidationError("soliton experiment needs a soliton datum");
  const GridPtr grid = make_grid(cfg.n_points, cfg.half_length);
  const Field u0 = make_datum(grid, cfg.datum, cfg.seed);
  const Trajectory traj = solve(u0, cfg.solver, cfg.snapshot_every);

  ExperimentRecord rec;
  rec.config = cfg;
  rec.fingerprint = environment_fingerprint();
  NormTrace err("tracking_error", cfg.label);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Field exact = soliton_at(grid, cfg.datum.c, cfg.datum.x0, traj.times[i]);
    err.append(traj.times[i], (traj.snapshots[i] - exact).l2_norm() / exact.l2_norm());
  }
  rec.traces.push_back(err);
  for (auto& t : invariant_traces(traj, cfg.label)) rec.traces.push_back(std::move(t));

  auto drift = [&](const char* name) {
    const auto v = rec.find_trace(name)->values();
    return std::abs(v.back() - v.front());
  };
  const double I2 = conserved_I2(u0), I3 = conserved_I3(u0);
  json v;
  v["experiment"] = "soliton";
  v["final_time"] = traj.times.back();
  v["final_relative_error"] = err.values().back();
  v["max_relative_error"] = err.max_value();
  v["I1_drift_abs"] = drift("I1");
  v["I2_drift_rel"] = drift("I2") / I2;
  v["I3_drift_rel"] = drift("I3") / std::abs(I3);
  v["I1_exact"] = -4.0 * std::numbers::pi;
  v["I1_initial"] = conserved_I1(u0);
  v["I2_exact"] = 8.0 * std::numbers::pi * cfg.datum.c;
  v["I2_initial"] = I2;
  moment_verdict(*rec.find_trace("first_moment"), u0, v);
  v["traces"] = trace_names(rec.traces);
  rec.verdict = std::move(v);
  return rec;
}

PairedRecord mean_threshold_experiment(const ExperimentConfig& cfg, double amplitude) {
  cfg.validate();
  if (cfg.s < 2.5) throw ValidationError("mean-threshold experiment needs s >= 5/2");
  if (cfg.datum.kind != DatumKind::Gaussian)
    throw ValidationError("mean-threshold experiment needs a gaussian datum");
  if (cfg.L_list.size() < 3) throw ValidationError("domain escalation needs at least three sizes");

  DatumRecipe recipe = cfg.datum;
  recipe.amplitude = amplitude;
  const double comp_width = std::sqrt(2.0) * recipe.width;
  SolverConfig solver = cfg.solver;
  solver.t_end = cfg.t_star;

  std::vector<double> d52, c52, d24, c24, gap, L;
  for (double Lv : cfg.L_list) {
    const GridPtr grid = grid_for(cfg, Lv);
    const Field u0 = make_datum(grid, recipe, cfg.seed);
    const double mass = conserved_I1(u0);
    const Field comp = Field::sample(grid, [&](double x) { return unit_gaussian(x, recipe.center, comp_width); });
    const Field ctrl = u0 - comp * mass;
    const int N = static_cast<int>(std::lround(Lv));
    const Field ud = solve(u0, solver, 1 << 30).snapshots.back();
    const Field uc = solve(ctrl, solver, 1 << 30).snapshots.back();
    L.push_back(Lv);
    d52.push_back(weighted_norm_N(ud, 2.5, N));
    c52.push_back(weighted_norm_N(uc, 2.5, N));
    d24.push_back(weighted_norm_N(ud, 2.4, N));
    c24.push_back(weighted_norm_N(uc, 2.4, N));
    gap.push_back(d52.back() - c52.back());
  }

  bool gap_monotone = true;
  for (std::size_t i = 1; i < gap.size(); ++i)
    if (!(gap[i] > gap[i - 1])) gap_monotone = false;
  const bool gap_positive = std::all_of(gap.begin(), gap.end(), [](double g) { return g > 0.0; });
  const bool identical = std::all_of(gap.begin(), gap.end(), [](double g) { return g == 0.0; });

  PairedRecord out;
  out.datum.config = cfg;
  out.datum.config.amplitude = amplitude;
  out.datum.fingerprint = environment_fingerprint();
  out.control = out.datum;
  out.control.config.label = cfg.label + "-control";

  out.datum.traces = {series("weighted_5/2_vs_L", cfg.label, L, d52),
                      series("weighted_2.4_vs_L", cfg.label, L, d24),
                      series("gap_5/2_vs_L", cfg.label, L, gap)};
  out.control.traces = {series("weighted_5/2_vs_L", out.control.config.label, L, c52),
                        series("weighted_2.4_vs_L", out.control.config.label, L, c24)};

  json v;
  v["experiment"] = "mean_threshold";
  v["amplitude"] = amplitude;
  v["t_star"] = cfg.t_star;
  v["L"] = L;
  v["datum_5/2"] = d52;
  v["control_5/2"] = c52;
  v["gap"] = gap;
  v["gap_positive"] = gap_positive;
  v["gap_monotone"] = gap_monotone;
  v["branches_identical"] = identical;
  v["gap_trend_slope"] = fit_slope(L, gap);
  v["datum_5/2_loglog_rate"] = loglog_slope(L, d52);
  v["datum_2.4"] = d24;
  v["datum_2.4_ratio"] = spread(d24);
  v["datum_2.4_stable"] = spread(d24) < 1.5;
  v["traces"] = trace_names(out.datum.traces);
  out.datum.verdict = v;

  json cv;
  cv["experiment"] = "mean_threshold_control";
  cv["L"] = L;
  cv["control_5/2"] = c52;
  cv["control_2.4"] = c24;
  cv["control_2.4_ratio"] = spread(c24);
  cv["traces"] = trace_names(out.control.traces);
  out.control.verdict = cv;
  return out;
}

ExperimentRecord decay_barrier_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GridPtr grid = make_grid(cfg.n_points, cfg.half_length);
  const Field raw = make_datum(grid, cfg.datum, cfg.seed);
  const double mass = conserved_I1(raw);
  if (std::abs(mass) > 1e-8 * std::max(1.0, raw.l2_norm()))
    throw ValidationError("decay-barrier experiment needs a zero-mean datum");
  const Field u0 = zero_mean_projection(raw);

  ExperimentRecord rec;
  rec.config = cfg;
  rec.fingerprint = environment_fingerprint();

  SolverConfig solver = cfg.solver;
  solver.t_end = cfg.t_star;
  const Trajectory traj = solve(u0, solver, cfg.snapshot_every);
  NormTrace moment("first_moment", cfg.label);
  for (std::size_t i = 0; i < traj.times.size(); ++i) moment.append(traj.times[i], first_moment(traj.snapshots[i]).value);

  std::vector<double> L, b35, b34;
  for (double Lv : cfg.L_list) {
    const GridPtr g = grid_for(cfg, Lv);
    const Field v0 = zero_mean_projection(make_datum(g, cfg.datum, cfg.seed));
    const Field u = solve(v0, solver, 1 << 30).snapshots.back();
    const int N = static_cast<int>(std::lround(Lv));
    L.push_back(Lv);
    b35.push_back(weighted_norm_N(u, 3.5, N));
    b34.push_back(weighted_norm_N(u, 3.4, N));
  }
  rec.traces = {moment, series("weighted_7/2_vs_L", cfg.label, L, b35),
                series("weighted_3.4_vs_L", cfg.label, L, b34)};

  json v;
  v["experiment"] = "decay_barrier";
  v["I1_raw"] = mass;
  v["t_star"] = cfg.t_star;
  v["moment_at_t_star"] = moment.values().back();
  moment_verdict(moment, u0, v);
  v["L"] = L;
  v["weighted_7/2"] = b35;
  v["weighted_3.4"] = b34;
  v["barrier_growing"] = strictly_increasing(b35);
  v["barrier_loglog_rate"] = loglog_slope(L, b35);
  v["control_ratio"] = spread(b34);
  v["control_stable"] = spread(b34) < 1.5;
  v["traces"] = trace_names(rec.traces);
  rec.verdict = std::move(v);
  return rec;
}

Field remove_moments(const Field& v, int count, double envelope_scale) {
  if (count <= 0) return v;
  const auto m = static_cast<std::size_t>(count);
  std::vector<Field> basis;
  for (std::size_t j = 0; j < m; ++j)
    basis.push_back(Field::sample(v.grid_ptr(), [&](double x) {
      return std::pow(x, static_cast<double>(j)) * std::exp(-x * x / envelope_scale);
    }));
  // Solve sum_j a_j <x^i, phi_j> = <x^i, v> by Gaussian elimination with partial pivoting.
  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) A[i][j] = discrete_moment(basis[j], static_cast<int>(i));
    A[i][m] = discrete_moment(v, static_cast<int>(i));
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t q = c; q <= m; ++q) A[r][q] -= f * A[c][q];
    }
  }
  std::vector<double> a(m);
  for (std::size_t c = m; c-- > 0;) {
    double s = A[c][m];
    for (std::size_t q = c + 1; q < m; ++q) s -= A[c][q] * a[q];
    a[c] = s / A[c][c];
  }
  Field out = v;
  for (std::size_t j = 0; j < m; ++j) out = out - basis[j] * a[j];
  return out;
}

LinearMomentReport linear_moment_condition_experiment(int k, const ExperimentConfig& cfg) {
  if (k < 1 || k > 4) throw ValidationError("linear moment order k must be in 1..4");
  if (!(cfg.t_star > 0.0)) throw ValidationError("t_star must be positive");
  constexpr double kEnvelope = 16.0;
  constexpr int kTimes = 8;
  const int required = std::max(0, k - 2);  // moments 0..k-3

  LinearMomentReport rep;
  rep.k = k;
  for (double Lv : cfg.L_list) {
    const GridPtr g = grid_for(cfg, Lv);
    const Field base(g, polynomial_envelope_values(*g, kEnvelope));
    const Field compliant = remove_moments(base, required, kEnvelope);
    auto max_norm = [&](const Field& v0) {
      double best = 0.0;
      for (int i = 0; i <= kTimes; ++i) {
        const double t = cfg.t_star * i / kTimes;
        best = std::max(best, weighted_l2_norm(linear_propagator(v0, t), WeightSpec::bracket(k)));
      }
      return best;
    };
    rep.L.push_back(Lv);
    rep.compliant.push_back(max_norm(compliant));
    if (rep.compliant_moments.empty())
      for (int j = 0; j < k; ++j) rep.compliant_moments.push_back(discrete_moment(compliant, j));
    if (required > 0) {
      Field violating = remove_moments(base, required - 1, kEnvelope);
      violating = violating * (1.0 / discrete_moment(violating, required - 1));
      // The obstruction builds up with t, so the violating datum is measured at t_star itself;
      // a max over t would be pinned to the L-independent t = 0 value.
      rep.violating.push_back(weighted_l2_norm(linear_propagator(violating, cfg.t_star), WeightSpec::bracket(k)));
      if (rep.violating_moments.empty())
        for (int j = 0; j < k; ++j) rep.violating_moments.push_back(discrete_moment(violating, j));
    }
  }
  rep.compliant_ratio = spread(rep.compliant);
  rep.violating_monotone = !rep.violating.empty() && strictly_increasing(rep.violating);
  return rep;
}

cplx fourier_at(const Field& u0, double xi) {
  const auto& g = u0.grid();
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const double a = xi * g.x(i);
    re += u0[i] * std::cos(a);
    im -= u0[i] * std::sin(a);
  }
  return g.dx() * cplx(re, im);
}

DuhamelTerms duhamel_phase_terms(const Field& u0, double t, int order) {
  if (order != 2 && order != 3) throw ValidationError("Duhamel expansion order must be 2 or 3");
  const auto& g = u0.grid();
  const std::size_t n = g.n_points();
  DuhamelTerms d;
  d.order = order;
  d.t = t;
  d.xi = g.wavenumbers();

  const cplx I(0.0, 1.0);
  const auto f0 = ascending_transform(u0, 0);
  const auto x1 = ascending_transform(u0, 1);
  const auto x2 = ascending_transform(u0, 2);
  std::vector<cplx> d1(n), d2(n), d3;
  for (std::size_t j = 0; j < n; ++j) {
    d1[j] = -I * x1[j];
    d2[j] = -x2[j];
  }
  if (order == 3) {
    const auto x3 = ascending_transform(u0, 3);
    d3.resize(n);
    for (std::size_t j = 0; j < n; ++j) d3[j] = I * x3[j];
  }

  auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  auto add = [&](const std::string& name, auto&& fn) {
    std::vector<cplx> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = fn(j, d.xi[j]);
    d.names.push_back(name);
    d.norms.push_back(xi_norm(v, g.dk()));
    d.terms.push_back(std::move(v));
  };

  if (order == 2) {
    add("4t^2 xi^2 u", [&](std::size_t j, double x) { return 4.0 * t * t * x * x * f0[j]; });
    add("2it sgn u", [&](std::size_t j, double x) { return 2.0 * I * t * sgn(x) * f0[j]; });
    add("4it|xi| d1u", [&](std::size_t j, double x) { return 4.0 * I * t * std::abs(x) * d1[j]; });
    add("-d2u", [&](std::size_t j, double) { return -d2[j]; });
  } else {
    add("8it^3 xi^2|xi| u", [&](std::size_t j, double x) { return 8.0 * I * t * t * t * x * x * std::abs(x) * f0[j]; });
    add("-12t^2 xi u", [&](std::size_t j, double x) { return -12.0 * t * t * x * f0[j]; });
    add("-12t^2 xi^2 d1u", [&](std::size_t j, double x) { return -12.0 * t * t * x * x * d1[j]; });
    add("-6it sgn d1u", [&](std::size_t j, double x) { return -6.0 * I * t * sgn(x) * d1[j]; });
    add("-6it|xi| d2u", [&](std::size_t j, double x) { return -6.0 * I * t * std::abs(x) * d2[j]; });
    add("d3u", [&](std::size_t j, double) { return d3[j]; });
  }

  const double sign = order == 2 ? -1.0 : 1.0;
  d.total.assign(n, cplx(0.0));
  for (std::size_t j = 0; j < n; ++j) {
    cplx s(0.0);
    for (const auto& term : d.terms) s += term[j];
    const double x = d.xi[j];
    d.total[j] = sign * std::polar(1.0, -t * x * std::abs(x)) * s;
  }

  // u0hat(0) from the cached mean, so zero-mean projections give exactly 0.
  const double mass = 2.0 * g.half_length() * u0.mean();
  if (order == 3) d.dirac_slot = -4.0 * I * t * mass;
  d.sgn_jump = 4.0 * std::abs(t) * std::abs(mass);
  d.sgn_jump_zero_mean = 4.0 * std::abs(t) * std::abs(2.0 * g.half_length() * zero_mean_projection(u0).mean());
  return d;
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Persistence: return persistence_experiment(cfg);
    case ExperimentKind::Soliton: return soliton_experiment(cfg);
    case ExperimentKind::DecayBarrier: return decay_barrier_experiment(cfg);
    case ExperimentKind::MeanThreshold: {
      PairedRecord p = mean_threshold_experiment(cfg, cfg.amplitude);
      ExperimentRecord rec = std::move(p.datum);
      for (auto& t : p.control.traces) {
        NormTrace renamed("control/" + t.name(), t.run_id());
        for (std::size_t i = 0; i < t.size(); ++i) renamed.append(t.times()[i], t.values()[i]);
        rec.traces.push_back(std::move(renamed));
      }
      rec.verdict["control"] = p.control.verdict;
      rec.verdict["traces"] = trace_names(rec.traces);
      return rec;
    }
    case ExperimentKind::LinearMoment: {
      cfg.validate();
      const LinearMomentReport rep = linear_moment_condition_experiment(cfg.k, cfg);
      ExperimentRecord rec;
      rec.config = cfg;
      rec.fingerprint = environment_fingerprint();
      rec.traces.push_back(series("compliant_vs_L", cfg.label, rep.L, rep.compliant));
      if (!rep.violating.empty()) rec.traces.push_back(series("violating_vs_L", cfg.label, rep.L, rep.violating));
      json v = to_json(rep);
      v["experiment"] = "linear_moment";
      v["bounded"] = rep.compliant_ratio < 1.5;
      v["traces"] = trace_names(rec.traces);
      rec.verdict = std::move(v);
      return rec;
    }
  }
  throw ValidationError("unhandled experiment kind");
}

std::vector<ExperimentRecord> run_sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                        const std::filesystem::path& index_dir) {
  if (parallelism < 1) throw ValidationError("parallelism must be >= 1");
  std::vector<std::filesystem::path> dirs;
  std::set<std::string> seen;
  for (const auto& c : configs) {
    const auto dir = c.output_dir.empty() ? index_dir / c.label : c.output_dir;
    if (!seen.insert(dir.lexically_normal().generic_string()).second)
      throw ValidationError("sweep output directories must be distinct: " + dir.string());
    dirs.push_back(dir);
  }

  std::vector<ExperimentRecord> records(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        records[i] = run_experiment(configs[i]);
      } catch (const std::exception& e) {
        ExperimentRecord failed;
        failed.config = configs[i];
        failed.fingerprint = environment_fingerprint();
        failed.failed = true;
        failed.error = e.what();
        failed.verdict = {{"failed", true}, {"error", e.what()}, {"traces", json::array()}};
        records[i] = std::move(failed);
      }
      persist_record(records[i], dirs[i]);
    }
  };
  const auto width = std::min<std::size_t>(static_cast<std::size_t>(parallelism), std::max<std::size_t>(configs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json index{{"count", records.size()}, {"failures", 0}, {"experiments", json::array()}};
  int failures = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    json e{{"label", configs[i].label},
           {"kind", to_string(configs[i].kind)},
           {"output_dir", dirs[i].generic_string()},
           {"status", records[i].failed ? "failed" : "ok"}};
    if (records[i].failed) {
      e["error"] = records[i].error;
      ++failures;
    }
    index["experiments"].push_back(e);
  }
  index["failures"] = failures;
  std::filesystem::create_directories(index_dir);
  write_json(index_dir / "index.json", index);
  return records;
}

json to_json(const LinearMomentReport& r) {
  return {{"operation", "linear_moment_condition_experiment"},
          {"k", r.k},
          {"L", r.L},
          {"compliant", r.compliant},
          {"violating", r.violating},
          {"compliant_ratio", r.compliant_ratio},
          {"violating_monotone", r.violating_monotone},
          {"compliant_moments", r.compliant_moments},
          {"violating_moments", r.violating_moments}};
}

json to_json(const DuhamelTerms& d) {
  json terms = json::array();
  for (std::size_t i = 0; i < d.names.size(); ++i) terms.push_back({{"name", d.names[i]}, {"l2_norm", d.norms[i]}});
  return {{"operation", "duhamel_phase_terms"},
          {"order", d.order},
          {"t", d.t},
          {"terms", terms},
          {"total_l2_norm", xi_norm(d.total, d.xi.size() > 1 ? d.xi[1] - d.xi[0] : 1.0)},
          {"dirac_slot", {d.dirac_slot.real(), d.dirac_slot.imag()}},
          {"sgn_jump", d.sgn_jump},
          {"sgn_jump_zero_mean", d.sgn_jump_zero_mean}};
}

}  // namespace bolab
