#include "bolab/records.hpp"

#include <fftw3.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bolab/errors.hpp"
#include "bolab/field_io.hpp"

#ifndef BOLAB_VERSION
#define BOLAB_VERSION "unknown"
#endif

namespace bolab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string trace_file_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (c == '/') out += "__";
    else out += ok ? c : '_';
  }
  return out + ".csv";
}

std::string x_label(const NormTrace& t) {
  const std::string& n = t.name();
  return n.size() > 5 && n.compare(n.size() - 5, 5, "_vs_L") == 0 ? "L" : "t";
}

std::pair<double, double> fitted_line(const NormTrace& t) {
  if (t.size() < 2) return {0.0, t.empty() ? 0.0 : t.values()[0]};
  const double slope = fit_slope(t.times(), t.values());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    xm += t.times()[i];
    ym += t.values()[i];
  }
  xm /= static_cast<double>(t.size());
  ym /= static_cast<double>(t.size());
  return {slope, ym - slope * xm};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot write " + path.string(), 0.0);
  out << text;
}

std::string scalar_text(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

nlohmann::json environment_fingerprint() {
  std::ostringstream compiler;
#if defined(__clang__)
  compiler << "clang " << __clang_version__;
#elif defined(__GNUC__)
  compiler << "gcc " << __VERSION__;
#else
  compiler << "unknown";
#endif
  return {{"bolab_version", BOLAB_VERSION},
          {"compiler", compiler.str()},
          {"cxx_standard", static_cast<long>(__cplusplus)},
          {"fftw", std::string(fftw_version)},
          {"fftw_planner", "estimate"}};
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
}

json to_json(const SolverConfig& c) {
  return {{"dt", c.dt},
          {"t_end", c.t_end},
          {"dealias_fraction", c.dealias_fraction},
          {"integrator", to_string(c.integrator)},
          {"power", c.power},
          {"sign", to_string(c.sign)},
          {"dispersion", to_string(c.dispersion)},
          {"nonlinear", c.nonlinear},
          {"cfl", c.cfl},
          {"blowup_threshold", c.blowup_threshold}};
}

SolverConfig solver_from_json(const json& j) {
  static const std::set<std::string> known{"dt",    "t_end", "dealias_fraction", "integrator", "power",
                                           "sign",  "dispersion", "nonlinear",  "cfl",        "blowup_threshold"};
  if (!j.is_object()) throw ValidationError("solver config must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ValidationError("unknown solver key '" + key + "'");
  SolverConfig c;
  c.dt = j.value("dt", c.dt);
  c.t_end = j.value("t_end", c.t_end);
  c.dealias_fraction = j.value("dealias_fraction", c.dealias_fraction);
  if (j.contains("integrator")) c.integrator = integrator_from_string(j.at("integrator").get<std::string>());
  c.power = j.value("power", c.power);
  if (j.contains("sign")) c.sign = sign_from_string(j.at("sign").get<std::string>());
  if (j.contains("dispersion")) c.dispersion = dispersion_from_string(j.at("dispersion").get<std::string>());
  c.nonlinear = j.value("nonlinear", c.nonlinear);
  c.cfl = j.value("cfl", c.cfl);
  c.blowup_threshold = j.value("blowup_threshold", c.blowup_threshold);
  c.validate();
  return c;
}

json plot_manifest(const ExperimentRecord& record) {
  json series = json::array();
  for (const auto& t : record.traces) {
    const auto [slope, intercept] = fitted_line(t);
    json s{{"name", t.name()},
           {"file", "traces/" + trace_file_name(t.name())},
           {"x_label", x_label(t)},
           {"y_label", t.name()},
           {"points", t.size()},
           {"fitted_line", {{"slope", slope}, {"intercept", intercept}}}};
    if (t.name() == "first_moment" && record.verdict.contains("moment_target_slope"))
      s["target_slope"] = record.verdict["moment_target_slope"];
    series.push_back(std::move(s));
  }
  return {{"label", record.config.label}, {"kind", to_string(record.config.kind)}, {"series", series}};
}

void emit_plot_data(const ExperimentRecord& record, const fs::path& dir) {
  fs::create_directories(dir / "traces");
  for (const auto& t : record.traces) write_trace_csv(dir / "traces" / trace_file_name(t.name()), t);
  write_json(dir / "plots.json", plot_manifest(record));
}

std::string summary_markdown(const ExperimentRecord& r) {
  std::ostringstream md;
  md << "# " << r.config.label << "\n\n";
  md << "- kind: " << to_string(r.config.kind) << "\n";
  md << "- status: " << (r.failed ? "failed" : "ok") << "\n";
  if (r.failed) md << "- error: " << r.error << "\n";
  md << "- seed: " << r.config.seed << "\n";
  md << "- grid: n=" << r.config.n_points << " L=" << format_double(r.config.half_length) << "\n\n";
  if (r.verdict.is_object()) {
    md << "## Verdict\n\n";
    for (const auto& [key, value] : r.verdict.items()) {
      if (key == "traces" || value.is_object()) continue;
      md << "- " << key << ": " << scalar_text(value) << "\n";
    }
    md << "\n";
  }
  if (!r.traces.empty()) {
    md << "## Traces\n\n| trace | points | first | last | max | fitted slope |\n|---|---|---|---|---|---|\n";
    for (const auto& t : r.traces) {
      if (t.empty()) continue;
      md << "| " << t.name() << " | " << t.size() << " | " << format_double(t.values().front()) << " | "
         << format_double(t.values().back()) << " | " << format_double(t.max_value()) << " | "
         << format_double(fitted_line(t).first) << " |\n";
    }
  }
  return md.str();
}

void persist_record(const ExperimentRecord& record, const fs::path& dir) {
  if (record.verdict.contains("traces"))
    for (const auto& name : record.verdict["traces"])
      if (!record.find_trace(name.get<std::string>()))
        throw std::logic_error("verdict refers to missing trace " + name.get<std::string>());
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(record.config));
  json verdict{{"status", record.failed ? "failed" : "ok"},
               {"verdict", record.verdict},
               {"fingerprint", record.fingerprint}};
  if (record.failed) verdict["error"] = record.error;
  write_json(dir / "verdict.json", verdict);
  write_text(dir / "summary.md", summary_markdown(record));
  emit_plot_data(record, dir);
}

ExperimentRecord load_record(const fs::path& dir) {
  if (!fs::exists(dir / "config.json") || !fs::exists(dir / "verdict.json"))
    throw ValidationError("not a record directory: " + dir.string());
  ExperimentRecord r;
  r.config = config_from_json(read_json(dir / "config.json"));
  const json v = read_json(dir / "verdict.json");
  r.failed = v.value("status", "ok") == "failed";
  r.error = v.value("error", "");
  r.verdict = v.value("verdict", json::object());
  r.fingerprint = v.value("fingerprint", json::object());
  if (r.verdict.contains("traces"))
    for (const auto& name : r.verdict["traces"])
      r.traces.push_back(read_trace_csv(dir / "traces" / trace_file_name(name.get<std::string>())));
  return r;
}

void write_trajectory(const Trajectory& traj, const fs::path& dir) {
  if (traj.snapshots.empty()) throw ValidationError("empty trajectory");
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.csv", i);
    write_field_csv(dir / name, traj.snapshots[i]);
    files.push_back(name);
  }
  const auto& g = traj.snapshots.front().grid();
  json meta{{"config", to_json(traj.config)},
            {"grid", {{"n", g.n_points()}, {"L", g.half_length()}}},
            {"times", traj.times},
            {"snapshots", files}};
  write_json(dir / "meta.json", meta);
}

Trajectory read_trajectory(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  Trajectory t;
  try {
    t.config = solver_from_json(meta.at("config"));
    const GridPtr grid = make_grid(meta.at("grid").at("n").get<std::size_t>(), meta.at("grid").at("L").get<double>());
    t.times = meta.at("times").get<std::vector<double>>();
    for (const auto& f : meta.at("snapshots")) t.snapshots.push_back(read_field_csv(dir / f.get<std::string>(), grid));
  } catch (const json::exception& e) {
    throw ValidationError("malformed trajectory metadata: " + std::string(e.what()));
  }
  if (t.times.size() != t.snapshots.size()) throw ValidationError("trajectory times and snapshots differ in length");
  return t;
}

}  // namespace bolab
