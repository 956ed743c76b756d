#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bolab/errors.hpp"
#include "bolab/weighted_analysis.hpp"

namespace bolab {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

constexpr int kMaxSingularLevels = 1000;
constexpr double kLevelTol = 1e-13;

struct Averages {
  double w = 0.0;
  double inv = 0.0;
  bool divergent = false;
};

double smooth_integral(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  // Shallow depth: on tiny intervals the error estimate is pure roundoff and deep recursion
  // would never terminate early.
  return gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-12);
}

// Integral of |x|^alpha over [a, b] with 0 outside (a, b).
double power_integral(double alpha, double a, double b) {
  if (b <= 0.0) return power_integral(alpha, -b, -a);
  const double e = alpha + 1.0;
  if (e == 0.0) return std::log(b / a);
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

// Integral of f over [a, b] for a weight that is smooth away from |x| in `breaks`.
double piecewise_integral(const std::function<double(double)>& f, double a, double b,
                          const std::vector<double>& breaks) {
  double total = 0.0;
  double lo = a;
  for (double c : breaks) {
    if (c <= lo || c >= b) continue;
    total += smooth_integral(f, lo, c);
    lo = c;
  }
  return total + smooth_integral(f, lo, b);
}

class A2Evaluator {
 public:
  A2Evaluator(const WeightSpec& w, double bound) : w_(w), bound_(bound) {
    if (w.kind == WeightKind::Truncated) {
      const double N = w.truncation_N;
      const double a = std::sqrt(1.0 + N * N);
      const double top = 4.0 * N - a;
      const double x_top = std::sqrt(top * top - 1.0);
      breaks_ = {-x_top, -N, 0.0, N, x_top};
    } else {
      breaks_ = {0.0};
    }
  }

  Averages averages(double lo, double hi) const {
    auto w = [this](double x) { return evaluate_weight(w_, x); };
    auto inv = [this](double x) { return 1.0 / evaluate_weight(w_, x); };
    const double len = hi - lo;
    Averages out;
    if (w_.singular_at_origin() && (lo >= 0.0 || hi <= 0.0) && lo != 0.0 && hi != 0.0) {
      out.w = w_.scale * power_integral(w_.exponent, lo, hi) / len;
      out.inv = power_integral(-w_.exponent, lo, hi) / (w_.scale * len);
      return out;
    }
    if (!w_.singular_at_origin()) {
      out.w = piecewise_integral(w, lo, hi, breaks_) / len;
      out.inv = piecewise_integral(inv, lo, hi, breaks_) / len;
      return out;
    }
    // The interval touches the singularity: integrate each side on open dyadic cells toward 0,
    // watching the partial product for divergence.
    double sw = 0.0, si = 0.0;
    const double left = -lo, right = hi;
    for (int m = 0; m < kMaxSingularLevels; ++m) {
      double dw = 0.0, di = 0.0;
      for (double side : {left, right}) {
        if (side <= 0.0) continue;
        const double b = side * std::ldexp(1.0, -m);
        const double a = 0.5 * b;
        dw += gauss<double, 20>::integrate(w, a, b);
        di += gauss<double, 20>::integrate(inv, a, b);
      }
      sw += dw;
      si += di;
      const double product = (sw / len) * (si / len);
      if (product > bound_) {
        out.w = sw / len;
        out.inv = si / len;
        out.divergent = true;
        return out;
      }
      if (m > 4 && dw <= kLevelTol * sw && di <= kLevelTol * si) {
        out.w = sw / len;
        out.inv = si / len;
        return out;
      }
    }
    out.w = sw / len;
    out.inv = si / len;
    out.divergent = true;  // refinement never settled
    return out;
  }

 private:
  WeightSpec w_;
  double bound_;
  std::vector<double> breaks_;
};

}  // namespace

A2Result a2_constant(const WeightSpec& w, const A2Family& family) {
  w.validate();
  if (!(family.half_length > 0.0)) throw ValidationError("A2 scan half-length must be positive");
  if (family.levels < 0) throw ValidationError("A2 scan levels must be >= 0");
  if (!(family.stride_fraction > 0.0 && family.stride_fraction <= 1.0))
    throw ValidationError("A2 stride fraction must lie in (0, 1]");

  const double R = family.half_length;
  A2Result result;
  result.constant = 0.0;

  if (w.is_constant()) {
    for (int j = 0; j <= family.levels; ++j) {
      const double len = 2.0 * R * std::ldexp(1.0, -j);
      const double stride = family.stride_fraction * len;
      result.intervals += static_cast<std::size_t>(std::floor((2.0 * R - len) / stride + 1e-9)) + 1;
      result.level_max.push_back(1.0);
    }
    result.constant = 1.0;
    result.worst_left = -R;
    result.worst_right = R;
    return result;
  }

  const A2Evaluator eval(w, family.divergence_bound);
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  for (int j = 0; j <= family.levels && !result.divergent; ++j) {
    const double len = 2.0 * R * std::ldexp(1.0, -j);
    const double stride = family.stride_fraction * len;
    const auto count = static_cast<std::size_t>(std::floor((2.0 * R - len) / stride + 1e-9)) + 1;
    result.intervals += count;

    struct Best {
      double product = -1.0;
      std::size_t index = 0;
      bool divergent = false;
    };
    std::vector<Best> best(workers);
    auto work = [&](unsigned wid) {
      Best b;
      for (std::size_t c = wid; c < count; c += workers) {
        const double lo = -R + static_cast<double>(c) * stride;
        const Averages av = eval.averages(lo, lo + len);
        const double p = av.w * av.inv;
        if (av.divergent) {
          if (!b.divergent || c < b.index) b = {p, c, true};
        } else if (!b.divergent && (p > b.product || (p == b.product && c < b.index))) {
          b = {p, c, false};
        }
      }
      best[wid] = b;
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& t : pool) t.join();

    // Deterministic reduction: a divergent interval wins, ties broken by the lowest center.
    Best top;
    for (const Best& b : best) {
      if (b.product < 0.0 && !b.divergent) continue;
      const bool better = top.product < 0.0 ||
                          (b.divergent && !top.divergent) ||
                          (b.divergent == top.divergent &&
                           (b.divergent ? b.index < top.index
                                        : (b.product > top.product ||
                                           (b.product == top.product && b.index < top.index))));
      if (better) top = b;
    }
    if (top.divergent || top.product > result.constant) {
      const double lo = -R + static_cast<double>(top.index) * stride;
      result.constant = std::max(result.constant, top.product);
      result.worst_left = lo;
      result.worst_right = lo + len;
    }
    if (top.divergent || result.constant > family.divergence_bound) result.divergent = true;
    result.level_max.push_back(result.constant);
  }
  return result;
}

A2Scan a2_uniformity_scan(double theta, std::span<const int> N_list, A2Family family) {
  if (!(theta > -1.0 && theta < 1.0)) throw ValidationError("uniformity scan needs theta in (-1, 1)");
  A2Scan scan;
  scan.theta = theta;
  double lo = 0.0, hi = 0.0;
  for (int N : N_list) {
    if (N < 1) throw ValidationError("truncation N must be a positive integer");
    A2Family f = family;
    if (!(f.half_length > 0.0)) f.half_length = 8.0 * N;
    A2Result r = a2_constant(WeightSpec::truncated(N, theta), f);
    if (scan.results.empty()) {
      lo = hi = r.constant;
    } else {
      lo = std::min(lo, r.constant);
      hi = std::max(hi, r.constant);
    }
    scan.N.push_back(N);
    scan.results.push_back(std::move(r));
  }
  scan.uniformity_ratio = scan.results.empty() ? 1.0 : hi / lo;
  return scan;
}

nlohmann::json to_json(const A2Result& r) {
  return {{"operation", "a2_constant"},
          {"constant", r.constant},
          {"divergent", r.divergent},
          {"intervals", r.intervals},
          {"worst_interval", {r.worst_left, r.worst_right}},
          {"level_max", r.level_max}};
}

nlohmann::json to_json(const A2Scan& s) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : s.results) results.push_back(to_json(r));
  return {{"operation", "a2_uniformity_scan"},
          {"theta", s.theta},
          {"N", s.N},
          {"results", results},
          {"uniformity_ratio", s.uniformity_ratio}};
}

}  // namespace bolab
