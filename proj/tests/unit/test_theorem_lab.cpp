#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../oracles.hpp"
#include "bolab/errors.hpp"
#include "bolab/field_io.hpp"
#include "bolab/records.hpp"
#include "bolab/spectral_core.hpp"
#include "bolab/theorem_lab.hpp"

using namespace bolab;
namespace fs = std::filesystem;
using oracle::pi;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bolab_theorem_lab_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return out;
}

ExperimentConfig small_persistence(const std::string& label) {
  ExperimentConfig c;
  c.label = label;
  c.kind = ExperimentKind::Persistence;
  c.datum.kind = DatumKind::Gaussian;
  c.n_points = 512;
  c.half_length = 64.0;
  c.solver.t_end = 0.2;
  c.solver.dt = 2e-3;
  c.snapshot_every = 10;
  c.seed = 1;
  return c;
}

ExperimentConfig even_pair_config() {
  ExperimentConfig c;
  c.label = "barrier";
  c.kind = ExperimentKind::DecayBarrier;
  c.datum.kind = DatumKind::GaussianPair;
  c.datum.width = 1.0;
  c.datum.width_b = 2.0;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("datum recipes") {
  auto g = make_grid(1024, 64.0);
  DatumRecipe d;
  d.kind = DatumKind::Gaussian;
  d.amplitude = 2.0;
  d.center = 1.5;
  d.width = 0.75;
  const Field u = make_datum(g, d, 0);
  for (std::size_t i = 0; i < u.size(); i += 37) {
    const double x = g->x(i);
    CHECK(u[i] == doctest::Approx(2.0 * std::exp(-(x - 1.5) * (x - 1.5) / (2.0 * 0.5625))).epsilon(1e-15));
  }

  d.kind = DatumKind::GaussianPair;
  d.center_b = -2.0;
  d.width_b = 1.5;
  const Field pair = make_datum(g, d, 0);
  CHECK(std::abs(conserved_I1(pair)) < 1e-13);
  CHECK(pair.l2_norm() > 0.1);

  d.kind = DatumKind::Soliton;
  d.c = 0.5;
  d.x0 = 3.0;
  const Field s = make_datum(g, d, 0);
  CHECK(s[g->n_points() / 2 + static_cast<std::size_t>(3.0 / g->dx())] == doctest::Approx(oracle::phi(0.5, 0.0)).epsilon(1e-14));

  d.kind = DatumKind::RandomSmooth;
  d.width = 3.0;
  const Field r1 = make_datum(g, d, 42), r2 = make_datum(g, d, 42), r3 = make_datum(g, d, 43);
  CHECK(oracle::max_abs_diff(r1, r2) == 0.0);
  CHECK(oracle::max_abs_diff(r1, r3) > 1e-3);

  d.width = -1.0;
  CHECK_THROWS_AS(make_datum(g, d, 0), ValidationError);

  const fs::path dir = scratch("datum");
  fs::create_directories(dir);
  write_field_csv(dir / "u.csv", r1);
  write_field_binary(dir / "u.bin", r1);
  d = {};
  d.kind = DatumKind::File;
  d.path = (dir / "u.csv").string();
  CHECK(oracle::max_abs_diff(make_datum(g, d, 0), r1) == 0.0);
  d.path = (dir / "u.bin").string();
  CHECK(oracle::max_abs_diff(make_datum(g, d, 0), r1) == 0.0);
  d.path = (dir / "missing.csv").string();
  CHECK_THROWS_AS(make_datum(g, d, 0), ValidationError);
  CHECK_THROWS_AS(make_datum(make_grid(512, 64.0), DatumRecipe{DatumKind::File, 1, 0, 1, 0, 1, 0, 2, 6, 2,
                                                                (dir / "u.csv").string()},
                             0),
                  ValidationError);
  for (DatumKind k : {DatumKind::Soliton, DatumKind::Gaussian, DatumKind::GaussianPair, DatumKind::RandomSmooth,
                      DatumKind::File})
    CHECK(datum_kind_from_string(to_string(k)) == k);
}

TEST_CASE("config validation and JSON") {
  ExperimentConfig c = small_persistence("cfg");
  CHECK_NOTHROW(c.validate());
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  auto bad = to_json(c);
  bad.erase("seed");
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["colour"] = "blue";
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["r"] = 3.0;  // r > s
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["grid"]["n"] = 1000;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["L_list"] = {128.0, 64.0};
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["k"] = 5;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = to_json(c);
  bad["s"] = "one";
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  CHECK_THROWS_AS(load_config(scratch("nope") / "c.json"), ValidationError);
  for (ExperimentKind k : {ExperimentKind::Persistence, ExperimentKind::MeanThreshold, ExperimentKind::DecayBarrier,
                           ExperimentKind::LinearMoment, ExperimentKind::Soliton})
    CHECK(experiment_kind_from_string(to_string(k)) == k);
}

TEST_CASE("persistence experiment") {
  ExperimentConfig c = small_persistence("zero");
  c.datum.amplitude = 0.0;
  const ExperimentRecord z = persistence_experiment(c);
  CHECK(z.verdict["persistent"] == true);
  for (const auto& t : z.traces)
    if (t.name().rfind("weighted", 0) == 0 || t.name() == "sobolev_s")
      for (double v : t.values()) CHECK(v == 0.0);

  c = small_persistence("gauss");
  c.s = 2.0;
  c.r = 2.0;
  const ExperimentRecord g = persistence_experiment(c);
  CHECK(g.verdict["persistent"] == true);
  for (const std::string name : g.verdict["traces"]) CHECK(g.find_trace(name) != nullptr);
  REQUIRE(g.find_trace("weighted_r_N16") != nullptr);
  // Truncated weights are pointwise monotone in N, so are the traces.
  const auto n4 = g.find_trace("weighted_r_N4")->values();
  const auto n64 = g.find_trace("weighted_r_N64")->values();
  for (std::size_t i = 0; i < n4.size(); ++i) CHECK(n64[i] >= n4[i]);
  CHECK(g.verdict["moment_strictly_increasing"] == true);

  c = small_persistence("soliton");
  c.datum.kind = DatumKind::Soliton;
  c.n_points = 1024;
  c.half_length = 128.0;
  CHECK(persistence_experiment(c).verdict["persistent"] == true);

  c.s = 3.0;
  c.r = 2.5;
  CHECK_THROWS_AS(persistence_experiment(c), ValidationError);
}

TEST_CASE("soliton experiment") {
  ExperimentConfig c;
  c.label = "sol";
  c.kind = ExperimentKind::Soliton;
  c.datum.kind = DatumKind::Soliton;
  c.n_points = 2048;
  c.half_length = 128.0;
  c.solver.t_end = 0.2;
  c.solver.dt = 1e-3;
  const ExperimentRecord r = soliton_experiment(c);
  CHECK(r.verdict["max_relative_error"].get<double>() < 5e-3);
  CHECK(r.verdict["I1_drift_abs"].get<double>() < 1e-12);
  CHECK(r.verdict["I2_drift_rel"].get<double>() < 1e-8);
  CHECK(r.verdict["I1_exact"].get<double>() == doctest::Approx(-4.0 * pi));
  c.datum.kind = DatumKind::Gaussian;
  CHECK_THROWS_AS(soliton_experiment(c), ValidationError);
}

TEST_CASE("mean threshold experiment") {
  ExperimentConfig c;
  c.label = "threshold";
  c.kind = ExperimentKind::MeanThreshold;
  c.s = 2.5;
  c.r = 2.5;
  c.datum.kind = DatumKind::Gaussian;
  c.datum.width = std::sqrt(2.0);

  const PairedRecord zero = mean_threshold_experiment(c, 0.0);
  CHECK(zero.datum.verdict["branches_identical"] == true);
  for (double g : zero.datum.find_trace("gap_5/2_vs_L")->values()) CHECK(g == 0.0);

  const PairedRecord one = mean_threshold_experiment(c, 1.0);
  CHECK(one.datum.verdict["gap_positive"] == true);
  CHECK(one.datum.verdict["gap_monotone"] == true);
  CHECK(one.datum.verdict["datum_2.4_stable"] == true);
  // The zero-mean control has a finite weighted norm on the line, so its trace converges in L.
  const auto ctrl = one.control.find_trace("weighted_5/2_vs_L")->values();
  CHECK(ctrl.back() / ctrl.front() < 1.001);

  const PairedRecord two = mean_threshold_experiment(c, 2.0);
  const auto g1 = one.datum.find_trace("gap_5/2_vs_L")->values();
  const auto g2 = two.datum.find_trace("gap_5/2_vs_L")->values();
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] > g1[i]);

  ExperimentConfig low = c;
  low.s = 2.0;
  low.r = 2.0;
  CHECK_THROWS_AS(mean_threshold_experiment(low, 1.0), ValidationError);
  ExperimentConfig sol = c;
  sol.datum.kind = DatumKind::Soliton;
  CHECK_THROWS_AS(mean_threshold_experiment(sol, 1.0), ValidationError);

  // Dispatch merges the control traces.
  ExperimentConfig merged = c;
  merged.amplitude = 1.0;
  const ExperimentRecord rec = run_experiment(merged);
  CHECK(rec.find_trace("control/weighted_5/2_vs_L") != nullptr);
  CHECK(rec.verdict["control"]["experiment"] == "mean_threshold_control");
}

TEST_CASE("decay barrier experiment") {
  const ExperimentRecord r = decay_barrier_experiment(even_pair_config());
  // Even zero-mean datum: the moment starts at 0 and rises with slope ||u0||^2 / 2.
  const auto m = r.find_trace("first_moment")->values();
  CHECK(std::abs(m.front()) < 1e-12);
  CHECK(r.verdict["moment_strictly_increasing"] == true);
  CHECK(r.verdict["moment_slope_rel_error"].get<double>() < 1e-3);
  CHECK(r.verdict["barrier_growing"] == true);
  CHECK(r.verdict["control_stable"] == true);

  ExperimentConfig zero = even_pair_config();
  zero.datum.amplitude = 0.0;
  const ExperimentRecord z = decay_barrier_experiment(zero);
  for (double v : z.find_trace("first_moment")->values()) CHECK(v == 0.0);
  CHECK(z.verdict["non_null"] == false);

  ExperimentConfig massive = even_pair_config();
  massive.datum.kind = DatumKind::Gaussian;
  CHECK_THROWS_AS(decay_barrier_experiment(massive), ValidationError);
}

TEST_CASE("moment removal") {
  auto g = make_grid(1024, 64.0);
  const Field v = Field::sample(g, [](double x) { return (1.0 + 0.6 * x + 0.35 * x * x) * std::exp(-x * x / 16.0); });
  for (int count = 1; count <= 3; ++count) {
    const Field w = remove_moments(v, count);
    for (int j = 0; j < count; ++j) {
      double m = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        m += std::pow(g->x(i), j) * w[i];
        scale += std::abs(std::pow(g->x(i), j) * v[i]);
      }
      CHECK(std::abs(m) < 1e-13 * scale);
    }
  }
  CHECK(oracle::max_abs_diff(remove_moments(v, 0), v) == 0.0);
}

TEST_CASE("linear moment conditions") {
  ExperimentConfig c;
  for (int k : {1, 2}) {
    const LinearMomentReport r = linear_moment_condition_experiment(k, c);
    CHECK(r.compliant_ratio < 1.5);
    CHECK(r.violating.empty());
  }
  for (int k : {3, 4}) {
    CAPTURE(k);
    const LinearMomentReport r = linear_moment_condition_experiment(k, c);
    CHECK(r.compliant_ratio < 1.5);
    for (int j = 0; j < k - 2; ++j) CHECK(std::abs(r.compliant_moments[static_cast<std::size_t>(j)]) < 1e-12);
    CHECK(r.violating_moments[static_cast<std::size_t>(k - 3)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.violating_monotone);
  }
  // k = 3: U(t) v0 has a tail ~ 2t m / (pi |x|^3) when the mass m is nonzero, so the squared
  // weighted norm gains a fixed amount per unit length: doubling L roughly doubles the increment.
  const LinearMomentReport r3 = linear_moment_condition_experiment(3, c);
  const double inc1 = r3.violating[1] * r3.violating[1] - r3.violating[0] * r3.violating[0];
  const double inc2 = r3.violating[2] * r3.violating[2] - r3.violating[1] * r3.violating[1];
  CHECK(inc2 / inc1 > 1.5);
  CHECK(inc2 / inc1 < 2.5);
  const double tail = 2.0 * std::pow(2.0 / pi, 2) * 64.0;  // both sides, L from 64 to 128
  CHECK(inc1 == doctest::Approx(tail).epsilon(0.3));
  CHECK_THROWS_AS(linear_moment_condition_experiment(0, c), ValidationError);
}

TEST_CASE("Duhamel phase terms against finite differences") {
  auto g = make_grid(1024, 64.0);
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const Field u0 = oracle::random_localized(g, 900 + seed, 1.5, 1.0);
    const double t = 0.5 + 0.1 * seed;
    auto phased = [&](double xi) { return std::polar(1.0, -t * xi * std::abs(xi)) * oracle::direct_fourier(u0, xi); };
    for (int order : {2, 3}) {
      const DuhamelTerms d = duhamel_phase_terms(u0, t, order);
      const double h = 0.01;
      double worst = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < d.xi.size(); ++j) {
        const double xi = d.xi[j];
        if (std::abs(xi) < 5 * h || std::abs(xi) > 4.0) continue;
        const cplx fd = order == 2 ? oracle::fd2(phased, xi, h) : oracle::fd3(phased, xi, h);
        worst = std::max(worst, std::abs(fd - d.total[j]));
        scale = std::max(scale, std::abs(d.total[j]));
      }
      CHECK(worst < 1e-8 * scale);
    }
  }
}

TEST_CASE("Duhamel phase terms: structure") {
  auto g = make_grid(512, 32.0);
  const Field u0 = oracle::random_localized(g, 5, 1.5, 1.0);
  const DuhamelTerms d0 = duhamel_phase_terms(u0, 0.0, 2);
  for (std::size_t i = 0; i + 1 < d0.norms.size(); ++i) CHECK(d0.norms[i] == 0.0);
  CHECK(d0.norms.back() > 0.0);

  const DuhamelTerms d3 = duhamel_phase_terms(u0, 1.0, 3);
  CHECK(d3.names.size() == 6);
  const cplx mass = oracle::direct_fourier(u0, 0.0);
  CHECK(std::abs(d3.dirac_slot - cplx(0.0, -4.0) * mass) < 1e-12 * std::abs(mass) + 1e-14);
  CHECK(d3.sgn_jump == doctest::Approx(4.0 * std::abs(mass)).epsilon(1e-12));
  CHECK(d3.sgn_jump_zero_mean == 0.0);

  const DuhamelTerms z = duhamel_phase_terms(zero_mean_projection(u0), 1.0, 3);
  CHECK(z.dirac_slot == cplx(0.0, 0.0));
  CHECK(z.sgn_jump == 0.0);
  CHECK_THROWS_AS(duhamel_phase_terms(u0, 1.0, 4), ValidationError);
  CHECK(to_json(d3)["terms"].size() == 6);
  CHECK(std::abs(fourier_at(u0, 0.37) - oracle::direct_fourier(u0, 0.37)) < 1e-13);
}

TEST_CASE("sweeps") {
  const fs::path root = scratch("sweep");

  const auto empty = run_sweep({}, 2, root / "empty");
  CHECK(empty.empty());
  const auto idx = read_json(root / "empty" / "index.json");
  CHECK(idx["count"] == 0);
  CHECK(idx["experiments"].empty());

  std::vector<ExperimentConfig> cfgs{small_persistence("a"), small_persistence("b"), even_pair_config()};
  cfgs[1].datum.kind = DatumKind::RandomSmooth;
  cfgs[1].datum.width = 3.0;
  cfgs[1].seed = 77;
  cfgs[2].L_list = {32.0, 64.0, 128.0};
  run_sweep(cfgs, 1, root / "seq");
  run_sweep(cfgs, 3, root / "par");
  run_sweep(cfgs, 1, root / "again");
  const auto seq = tree(root / "seq");
  CHECK(seq.size() > 10);
  auto strip_index = [](std::map<std::string, std::string> t) {
    t.erase("index.json");  // mentions its own directory
    return t;
  };
  CHECK(strip_index(seq) == strip_index(tree(root / "par")));
  CHECK(strip_index(seq) == strip_index(tree(root / "again")));

  // A failing experiment is recorded and does not stop the others.
  std::vector<ExperimentConfig> mixed{small_persistence("ok"), even_pair_config()};
  mixed[1].datum.kind = DatumKind::Gaussian;  // nonzero mean: rejected by the barrier experiment
  const auto recs = run_sweep(mixed, 2, root / "mixed");
  CHECK_FALSE(recs[0].failed);
  CHECK(recs[1].failed);
  CHECK(recs[1].error.find("zero-mean") != std::string::npos);
  const auto mi = read_json(root / "mixed" / "index.json");
  CHECK(mi["failures"] == 1);
  CHECK(mi["experiments"][1]["status"] == "failed");
  CHECK(read_json(root / "mixed" / "barrier" / "verdict.json")["status"] == "failed");

  std::vector<ExperimentConfig> clash{small_persistence("x"), small_persistence("x")};
  CHECK_THROWS_AS(run_sweep(clash, 1, root / "clash"), ValidationError);
  CHECK_THROWS_AS(run_sweep(cfgs, 0, root / "zero"), ValidationError);
  fs::remove_all(root);
}
