#include "bolab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bolab/errors.hpp"
#include "bolab/field_io.hpp"
#include "bolab/spectral_core.hpp"

namespace bolab {

NormTrace::NormTrace(std::string name, std::string run_id)
    : name_(std::move(name)), run_id_(std::move(run_id)) {}

void NormTrace::append(double time, double value) {
  if (!times_.empty() && !(time > times_.back()))
    throw ValidationError("trace '" + name_ + "': times must be strictly increasing");
  times_.push_back(time);
  values_.push_back(value);
}

double NormTrace::max_value() const {
  if (values_.empty()) throw ValidationError("empty trace");
  return *std::max_element(values_.begin(), values_.end());
}

void write_trace_csv(std::ostream& out, const NormTrace& trace) {
  out << "# name=" << trace.name() << " run=" << trace.run_id() << '\n';
  out << "time,value\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << format_double(trace.times()[i]) << ',' << format_double(trace.values()[i]) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const NormTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
}

NormTrace read_trace_csv(std::istream& in) {
  std::string line;
  std::string name, run;
  bool have_header = false;
  NormTrace trace;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        if (tok.rfind("name=", 0) == 0) name = tok.substr(5);
        if (tok.rfind("run=", 0) == 0) run = tok.substr(4);
      }
      trace = NormTrace(name, run);
      have_header = true;
      continue;
    }
    if (line == "time,value") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("malformed trace row: " + line);
    trace.append(parse_double(line.substr(0, comma), "time"), parse_double(line.substr(comma + 1), "value"));
  }
  if (!have_header) throw ValidationError("trace CSV lacks a '# name=... run=...' header");
  return trace;
}

NormTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file " + path.string());
  return read_trace_csv(in);
}

double conserved_I1(const Field& u) { return u.mean() * 2.0 * u.grid().half_length(); }

double conserved_I2(const Field& u) {
  const double n = u.l2_norm();
  return n * n;
}

double conserved_I3(const Field& u) {
  const Field half = fractional_derivative(u, 0.5);
  std::vector<double> integrand(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    integrand[i] = half[i] * half[i] + u[i] * u[i] * u[i] / 3.0;
  return u.grid().dx() * neumaier_sum(integrand);
}

MomentResult first_moment(const Field& u) {
  const SpectralGrid& g = u.grid();
  std::vector<double> integrand(u.size());
  // Trapezoid on [-L, L]: the seam sample enters as (-L u_0 + L u_0)/2 = 0.
  for (std::size_t i = 1; i < u.size(); ++i) integrand[i] = g.x(i) * u[i];
  MomentResult r;
  r.value = g.dx() * neumaier_sum(integrand);
  const double L = g.half_length();
  const double edge = (1.0 + L * L) * std::max(std::abs(u[0]), std::abs(u[u.size() - 1]));
  r.boundary_level = edge;
  r.boundary_contaminated = edge >= 1e-8 * u.max_abs() && edge > 0.0;
  return r;
}

double fit_slope(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw ValidationError("slope fit needs at least two matching samples");
  const double n = static_cast<double>(times.size());
  double tm = 0.0, vm = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    tm += times[i];
    vm += values[i];
  }
  tm /= n;
  vm /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    num += (times[i] - tm) * (values[i] - vm);
    den += (times[i] - tm) * (times[i] - tm);
  }
  if (den == 0.0) throw ValidationError("slope fit needs distinct times");
  return num / den;
}

std::vector<NormTrace> invariant_traces(const Trajectory& traj, const std::string& run_id) {
  std::vector<NormTrace> out{NormTrace("I1", run_id), NormTrace("I2", run_id),
                             NormTrace("I3", run_id), NormTrace("first_moment", run_id)};
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Field& u = traj.snapshots[i];
    const double t = traj.times[i];
    out[0].append(t, conserved_I1(u));
    out[1].append(t, conserved_I2(u));
    out[2].append(t, conserved_I3(u));
    out[3].append(t, first_moment(u).value);
  }
  return out;
}

}  // namespace bolab
