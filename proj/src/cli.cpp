#include "bolab/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bolab/errors.hpp"
#include "bolab/field_io.hpp"
#include "bolab/invariants.hpp"
#include "bolab/spectral_core.hpp"
#include "bolab/records.hpp"
#include "bolab/theorem_lab.hpp"
#include "bolab/weighted_analysis.hpp"

namespace bolab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Field load_field(const std::string& path) {
  const fs::path p(path);
  if (!fs::exists(p)) throw ValidationError("field file not found: " + path);
  return p.extension() == ".bin" ? read_field_binary(p) : read_field_csv(p);
}

void emit(const json& j, const fs::path& file, std::ostream& out) {
  fs::create_directories(file.parent_path());
  write_json(file, j);
  out << j.dump(2) << "\n";
}

}  // namespace

std::string default_output_root() {
  const char* env = std::getenv("BO_LAB_OUT");
  return env && *env ? std::string(env) : std::string("bo_lab_out");
}

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benjamin-Ono pseudospectral lab", "bo_lab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", [] { return environment_fingerprint().dump(); });
  std::string out_dir;
  app.add_option("--out", out_dir, "output directory (default $BO_LAB_OUT or bo_lab_out)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "evolve a configured datum and write the trajectory");
  std::string solve_config;
  int snapshot_every = 0;
  solve_cmd->add_option("--config", solve_config, "experiment config (JSON)")->required();
  solve_cmd->add_option("--snapshot-every", snapshot_every, "override the config's snapshot cadence");

  // soliton-test
  auto* sol_cmd = app.add_subcommand("soliton-test", "track the exact soliton and record conservation drifts");
  ExperimentConfig sol_cfg;
  sol_cfg.label = "soliton-test";
  sol_cfg.kind = ExperimentKind::Soliton;
  sol_cfg.datum.kind = DatumKind::Soliton;
  sol_cfg.n_points = 4096;
  sol_cfg.half_length = 128.0;
  sol_cfg.snapshot_every = 50;
  std::string sol_integrator = "if-rk4";
  sol_cmd->add_option("--n", sol_cfg.n_points, "grid points")->capture_default_str();
  sol_cmd->add_option("--L", sol_cfg.half_length, "half length")->capture_default_str();
  sol_cmd->add_option("--dt", sol_cfg.solver.dt, "time step")->capture_default_str();
  sol_cmd->add_option("--t-end", sol_cfg.solver.t_end, "final time")->capture_default_str();
  sol_cmd->add_option("--c", sol_cfg.datum.c, "soliton speed")->capture_default_str();
  sol_cmd->add_option("--x0", sol_cfg.datum.x0, "soliton center")->capture_default_str();
  sol_cmd->add_option("--snapshot-every", sol_cfg.snapshot_every)->capture_default_str();
  sol_cmd->add_option("--integrator", sol_integrator)->check(CLI::IsMember({"if-rk4", "etdrk4"}));
  sol_cmd->add_option("--seed", sol_cfg.seed)->capture_default_str();

  // invariants
  auto* inv_cmd = app.add_subcommand("invariants", "conserved quantities of a field or trajectory");
  std::string inv_field, inv_traj;
  auto* inv_f = inv_cmd->add_option("--field", inv_field, "field file (.csv or .bin)");
  auto* inv_t = inv_cmd->add_option("--trajectory", inv_traj, "trajectory directory");
  inv_f->excludes(inv_t);
  inv_cmd->require_option(1);

  // norms
  auto* norm_cmd = app.add_subcommand("norms", "Sobolev, weighted and Z norms of a field");
  std::string norm_field;
  double norm_s = 1.0, norm_r = 1.0;
  std::vector<int> norm_N;
  norm_cmd->add_option("--field", norm_field)->required();
  norm_cmd->add_option("--s", norm_s)->capture_default_str();
  norm_cmd->add_option("--r", norm_r)->capture_default_str();
  norm_cmd->add_option("--N", norm_N, "truncations for w_N^r norms");

  // a2
  auto* a2_cmd = app.add_subcommand("a2", "A2 constant of a weight over a dyadic interval family");
  std::string a2_kind = "power";
  double a2_exp = 0.0;
  int a2_N = 1;
  A2Family a2_family;
  std::vector<int> a2_scan;
  a2_cmd->add_option("--weight", a2_kind)->check(CLI::IsMember({"power", "bracket", "truncated"}));
  auto* a2_alpha = a2_cmd->add_option("--alpha", a2_exp, "exponent (alpha, r or theta)");
  a2_cmd->add_option("--exponent", a2_exp)->excludes(a2_alpha);
  a2_cmd->add_option("--N", a2_N, "truncation for the truncated weight");
  a2_cmd->add_option("--half-length", a2_family.half_length)->capture_default_str();
  a2_cmd->add_option("--levels", a2_family.levels)->capture_default_str();
  a2_cmd->add_option("--scan", a2_scan, "uniformity scan of w_N^theta over these N");

  // stein
  auto* st_cmd = app.add_subcommand("stein", "pointwise Stein derivative by dyadic quadrature");
  std::string st_field, st_function = "gaussian";
  double st_b = 0.5, st_x = 0.0, st_cutoff = 0.0, st_t = 1.0;
  auto* st_f = st_cmd->add_option("--field", st_field, "field file");
  st_cmd->add_option("--function", st_function, "built-in: gaussian, step, linear, phase")
      ->check(CLI::IsMember({"gaussian", "step", "linear", "phase"}))
      ->excludes(st_f);
  st_cmd->add_option("--b", st_b)->capture_default_str();
  st_cmd->add_option("--x", st_x)->capture_default_str();
  st_cmd->add_option("--cutoff", st_cutoff, "integration radius (default: domain radius or 1)");
  st_cmd->add_option("--t", st_t, "time for the phase function")->capture_default_str();

  // sweep
  auto* sw_cmd = app.add_subcommand("sweep", "run several experiment configs");
  std::vector<std::string> sw_configs;
  int sw_jobs = 1;
  sw_cmd->add_option("--config", sw_configs, "experiment configs")->required();
  sw_cmd->add_option("--jobs", sw_jobs)->check(CLI::PositiveNumber)->capture_default_str();

  // report
  auto* rep_cmd = app.add_subcommand("report", "rewrite summary.md and plots.json of a record");
  std::string rep_dir;
  rep_cmd->add_option("--record", rep_dir)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  const fs::path root = out_dir.empty() ? fs::path(default_output_root()) : fs::path(out_dir);
  try {
    if (*solve_cmd) {
      ExperimentConfig cfg = load_config(solve_config);
      if (snapshot_every > 0) cfg.snapshot_every = snapshot_every;
      const GridPtr grid = make_grid(cfg.n_points, cfg.half_length);
      const Field u0 = make_datum(grid, cfg.datum, cfg.seed);
      const fs::path dir = out_dir.empty() && !cfg.output_dir.empty() ? cfg.output_dir : root;
      const Trajectory traj = solve(u0, cfg.solver, cfg.snapshot_every);
      write_trajectory(traj, dir);
      out << "wrote " << traj.snapshots.size() << " snapshots to " << dir.string() << "\n";
    } else if (*sol_cmd) {
      sol_cfg.solver.integrator = integrator_from_string(sol_integrator);
      sol_cfg.validate();
      const ExperimentRecord rec = soliton_experiment(sol_cfg);
      persist_record(rec, root);
      out << rec.verdict.dump(2) << "\n";
    } else if (*inv_cmd) {
      if (!inv_field.empty()) {
        const Field u = load_field(inv_field);
        const MomentResult m = first_moment(u);
        const json j{{"operation", "invariants"},
                     {"I1", conserved_I1(u)},
                     {"I2", conserved_I2(u)},
                     {"I3", conserved_I3(u)},
                     {"first_moment", m.value},
                     {"boundary_contaminated", m.boundary_contaminated}};
        emit(j, root / "invariants.json", out);
      } else {
        if (!fs::exists(fs::path(inv_traj) / "meta.json"))
          throw ValidationError("not a trajectory directory: " + inv_traj);
        const Trajectory traj = read_trajectory(inv_traj);
        fs::create_directories(root / "traces");
        json j{{"operation", "invariants"}, {"traces", json::array()}};
        for (const auto& t : invariant_traces(traj, fs::path(inv_traj).filename().string())) {
          write_trace_csv(root / "traces" / (t.name() + ".csv"), t);
          j["traces"].push_back({{"name", t.name()}, {"first", t.values().front()}, {"last", t.values().back()}});
        }
        emit(j, root / "invariants.json", out);
      }
    } else if (*norm_cmd) {
      if (norm_s < 0.0 || norm_r < 0.0) throw ValidationError("norms need s, r >= 0");
      const Field u = load_field(norm_field);
      json j{{"operation", "norms"},
             {"s", norm_s},
             {"r", norm_r},
             {"l2", u.l2_norm()},
             {"sobolev_s", bessel_potential(u, norm_s).l2_norm()},
             {"bracket_r", weighted_l2_norm(u, WeightSpec::bracket(norm_r))},
             {"z_norm", z_norm(u, norm_s, norm_r)}};
      json wn = json::object();
      for (int N : norm_N) wn[std::to_string(N)] = weighted_l2_norm(u, WeightSpec::truncated(N, norm_r));
      j["truncated_r"] = wn;
      emit(j, root / "norms.json", out);
    } else if (*a2_cmd) {
      if (!a2_scan.empty()) {
        A2Family f = a2_family;
        if (a2_cmd->count("--half-length") == 0) f.half_length = 0.0;
        emit(to_json(a2_uniformity_scan(a2_exp, a2_scan, f)), root / "a2.json", out);
      } else {
        WeightSpec w{weight_kind_from_string(a2_kind), a2_exp, a2_N, 1.0};
        json j = to_json(a2_constant(w, a2_family));
        j["weight"] = to_json(w);
        emit(j, root / "a2.json", out);
      }
    } else if (*st_cmd) {
      SteinResult r;
      if (!st_field.empty()) {
        const Field f = load_field(st_field);
        const double cutoff = st_cutoff > 0.0 ? st_cutoff : f.grid().half_length();
        r = stein_derivative(f, st_b, st_x, cutoff);
      } else {
        ComplexFunction fn;
        SteinOptions opts;
        double cutoff = st_cutoff > 0.0 ? st_cutoff : 1.0;
        if (st_function == "gaussian") fn = [](double y) { return cplx(std::exp(-y * y), 0.0); };
        if (st_function == "step") fn = [](double y) { return cplx(y > 0.0 ? 1.0 : (y < 0.0 ? 0.0 : 0.5), 0.0); };
        if (st_function == "linear") fn = [](double y) { return cplx(y, 0.0); };
        if (st_function == "phase") {
          if (!(st_t > 0.0)) throw ValidationError("phase function needs t > 0");
          fn = [t = st_t](double y) { return std::polar(1.0, -t * y * std::abs(y)); };
          if (st_cutoff <= 0.0) cutoff = 32.0 / std::sqrt(st_t);
          opts.tail_mean_square = 2.0;
        }
        r = stein_derivative(fn, st_b, st_x, cutoff, opts);
      }
      emit(to_json(r), root / "stein.json", out);
    } else if (*sw_cmd) {
      std::vector<ExperimentConfig> cfgs;
      for (const auto& p : sw_configs) cfgs.push_back(load_config(p));
      const auto records = run_sweep(cfgs, sw_jobs, root);
      int failed = 0;
      for (const auto& r : records) failed += r.failed ? 1 : 0;
      out << "sweep: " << records.size() << " experiments, " << failed << " failed; index at "
          << (root / "index.json").string() << "\n";
    } else if (*rep_cmd) {
      const ExperimentRecord rec = load_record(rep_dir);
      const fs::path dir = out_dir.empty() ? fs::path(rep_dir) : root;
      emit_plot_data(rec, dir);
      std::ofstream(dir / "summary.md", std::ios::binary) << summary_markdown(rec);
      out << summary_markdown(rec);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    err << "runtime failure at t=" << e.time() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace bolab
