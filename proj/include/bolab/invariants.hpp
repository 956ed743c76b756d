#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bolab/dynamics.hpp"
#include "bolab/field.hpp"

namespace bolab {

/// Time series of one named functional.
class NormTrace {
 public:
  NormTrace() = default;
  NormTrace(std::string name, std::string run_id);

  /// Times must be strictly increasing.
  void append(double time, double value);

  const std::string& name() const noexcept { return name_; }
  const std::string& run_id() const noexcept { return run_id_; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  double max_value() const;

 private:
  std::string name_;
  std::string run_id_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// CSV with a `# name=<name> run=<run>` header line, then `time,value` and one row per sample.
void write_trace_csv(std::ostream& out, const NormTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const NormTrace& trace);
NormTrace read_trace_csv(std::istream& in);
NormTrace read_trace_csv(const std::filesystem::path& path);

/// Mass: integral of u, exactly mean * 2L.
double conserved_I1(const Field& u);
/// Integral of u^2.
double conserved_I2(const Field& u);
/// Integral of |D^{1/2} u|^2 + u^3/3, the Hamiltonian conserved by u_t + H u_xx + u u_x = 0.
double conserved_I3(const Field& u);

struct MomentResult {
  double value = 0.0;
  /// Set when <x>^2 |u| at the domain edge is not below 1e-8 max|u|.
  bool boundary_contaminated = false;
  double boundary_level = 0.0;
};

/// Integral of x u over the fundamental domain [-L, L] (trapezoid, seam sample weighted 0).
MomentResult first_moment(const Field& u);

/// Least-squares slope of values against times.
double fit_slope(std::span<const double> times, std::span<const double> values);

/// Traces of I1, I2, I3 and the first moment along a trajectory.
std::vector<NormTrace> invariant_traces(const Trajectory& traj, const std::string& run_id);

}  // namespace bolab
