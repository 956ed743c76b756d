#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bolab/errors.hpp"
#include "bolab/spectral_core.hpp"
#include "bolab/weighted_analysis.hpp"

namespace bolab {

namespace {

double bracket(double x) { return std::sqrt(1.0 + x * x); }

// Integral of the quintic smoothstep 6s^5 - 15s^4 + 10s^3, i.e. s^6 - 3s^5 + 2.5s^4.
double smoothstep_integral(double s) { return s * s * s * s * (2.5 + s * (-3.0 + s)); }

Field weighted(const Field& u, const std::function<double(double)>& rho) {
  const auto& g = u.grid();
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho(g.x(i)) * u[i];
  return Field(u.grid_ptr(), std::move(out));
}

}  // namespace

void WeightSpec::validate() const {
  if (!std::isfinite(exponent)) throw ValidationError("weight exponent must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("weight scale must be positive");
  if (kind == WeightKind::Truncated && truncation_N < 1)
    throw ValidationError("truncation N must be a positive integer");
}

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::Bracket: return "bracket";
    case WeightKind::Truncated: return "truncated";
    case WeightKind::Power: return "power";
  }
  return "?";
}

WeightKind weight_kind_from_string(const std::string& s) {
  if (s == "bracket") return WeightKind::Bracket;
  if (s == "truncated") return WeightKind::Truncated;
  if (s == "power") return WeightKind::Power;
  throw ValidationError("unknown weight kind '" + s + "'");
}

nlohmann::json to_json(const WeightSpec& w) {
  nlohmann::json j{{"kind", to_string(w.kind)}, {"exponent", w.exponent}, {"scale", w.scale}};
  if (w.kind == WeightKind::Truncated) j["N"] = w.truncation_N;
  return j;
}

double truncated_weight(double x, int N) {
  const double y = bracket(x);
  const double a = bracket(static_cast<double>(N));
  if (y <= a) return y;
  const double top = 4.0 * N - a;
  if (y >= top) return 2.0 * N;
  const double s = (y - a) / (top - a);
  // Clamp guards the last ulp so the weight never overshoots its plateau.
  return std::min(2.0 * N, a + (top - a) * (s - smoothstep_integral(s)));
}

double evaluate_weight(const WeightSpec& w, double x) {
  double base = 1.0;
  switch (w.kind) {
    case WeightKind::Bracket: base = bracket(x); break;
    case WeightKind::Truncated: base = truncated_weight(x, w.truncation_N); break;
    case WeightKind::Power: base = std::abs(x); break;
  }
  if (w.exponent == 0.0) return w.scale;
  return w.scale * std::pow(base, w.exponent);
}

double weighted_l2_norm(const Field& u, const WeightSpec& w) {
  w.validate();
  return weighted(u, [&](double x) { return evaluate_weight(w, x); }).l2_norm();
}

double z_norm(const Field& u, double s, double r) {
  if (s < 0.0 || r < 0.0) throw ValidationError("z_norm needs s, r >= 0");
  return bessel_potential(u, s).l2_norm() + weighted_l2_norm(u, WeightSpec::bracket(r));
}

double weighted_hilbert_ratio(const Field& f, const WeightSpec& w) {
  w.validate();
  auto root = [&](double x) { return std::sqrt(evaluate_weight(w, x)); };
  const double den = weighted(f, root).l2_norm();
  if (den == 0.0) return 0.0;
  return weighted(hilbert_transform(f), root).l2_norm() / den;
}

InterpolationReport interpolation_check(const Field& f, double a, double b, double theta,
                                        InterpolationWeight weight, int N) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("interpolation needs a, b > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("interpolation needs theta in (0,1)");
  if (weight == InterpolationWeight::Truncated && N < 1)
    throw ValidationError("truncation N must be a positive integer");
  auto rho = [&](double x) {
    return weight == InterpolationWeight::Bracket ? bracket(x) : truncated_weight(x, N);
  };
  InterpolationReport r;
  r.lhs = bessel_potential(weighted(f, [&](double x) { return std::pow(rho(x), (1.0 - theta) * b); }),
                           theta * a)
              .l2_norm();
  r.weighted = weighted(f, [&](double x) { return std::pow(rho(x), b); }).l2_norm();
  r.smooth = bessel_potential(f, a).l2_norm();
  r.rhs = std::pow(r.weighted, 1.0 - theta) * std::pow(r.smooth, theta);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

nlohmann::json to_json(const InterpolationReport& r) {
  return {{"operation", "interpolation_check"}, {"lhs", r.lhs},  {"weighted", r.weighted},
          {"smooth", r.smooth},                 {"rhs", r.rhs},  {"ratio", r.ratio}};
}

}  // namespace bolab
