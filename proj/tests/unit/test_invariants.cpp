#include "doctest.h"

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "bolab/dynamics.hpp"
#include "bolab/errors.hpp"
#include "bolab/invariants.hpp"
#include "bolab/theorem_lab.hpp"

using namespace bolab;
using oracle::pi;

TEST_CASE("I1") {
  auto g = make_grid(4096, 128.0);
  CHECK(conserved_I1(Field::zeros(g)) == 0.0);
  const double I1 = conserved_I1(soliton(g, 1.0, 0.0));
  CHECK(I1 == doctest::Approx(oracle::phi_mass(128.0)).epsilon(1e-8));
  // The truncated tail costs 8 atan(1/L) ~ 8/L.
  CHECK(std::abs(I1 + 4.0 * pi) == doctest::Approx(8.0 * std::atan(1.0 / 128.0)).epsilon(1e-5));
}

TEST_CASE("I2") {
  CHECK(conserved_I2(Field::zeros(make_grid(64, 4.0))) == 0.0);
  for (double c : {0.5, 1.0, 2.0}) {
    for (double L : {64.0, 128.0}) {
      auto g = make_grid(static_cast<std::size_t>(32 * L), L);
      const double I2 = conserved_I2(soliton(g, c, 0.0));
      CHECK(I2 == doctest::Approx(oracle::phi_energy(c, L)).epsilon(1e-9));
      // Tail: 16c^2 * 2 int_L^inf (cx)^-4 dx = 32/(3 c^2 L^3).
      CHECK(std::abs(I2 - 8.0 * pi * c) <= 1.01 * 32.0 / (3.0 * c * c * L * L * L));
    }
  }
}

TEST_CASE("I3 on a single mode") {
  auto g = make_grid(128, 10.0);
  const double a = 1.7, kappa = 3.0 * pi / 10.0;
  const Field u = Field::sample(g, [&](double x) { return a * std::cos(kappa * x); });
  // D^{1/2} term: a^2 kappa L; cubic term integrates to zero.
  CHECK(conserved_I3(u) == doctest::Approx(a * a * kappa * 10.0).epsilon(1e-12));
  CHECK(conserved_I3(Field::zeros(g)) == 0.0);
}

TEST_CASE("conservation along the flow") {
  auto g = make_grid(512, 32.0);
  SolverConfig c;
  c.dt = 1e-3;
  c.t_end = 1.0;
  for (unsigned seed = 0; seed < 3; ++seed) {
    const Field u0 = oracle::random_localized(g, 50 + seed, 2.0, 1.0);
    const Trajectory tr = solve(u0, c, 100);
    const Field& u1 = tr.snapshots.back();
    CHECK(std::abs(conserved_I1(u1) - conserved_I1(u0)) <= 1e-12 * std::max(1.0, u0.l2_norm()));
    CHECK(std::abs(conserved_I2(u1) - conserved_I2(u0)) <= 1e-8 * conserved_I2(u0));
    CHECK(std::abs(conserved_I3(u1) - conserved_I3(u0)) <= 1e-6 * std::abs(conserved_I3(u0)));
  }
}

TEST_CASE("first moment") {
  auto g = make_grid(4096, 128.0);
  const MomentResult even = first_moment(soliton(g, 1.0, 0.0));
  CHECK(std::abs(even.value) < 1e-10);
  CHECK(even.boundary_contaminated);

  // int_{-L}^{L} x phi(x - 1) dx = -4 [log(1+y^2)/2 + atan y] from y = -L-1 to L-1.
  const double L = 128.0;
  auto F = [](double y) { return 0.5 * std::log(1.0 + y * y) + std::atan(y); };
  const double exact = -4.0 * (F(L - 1.0) - F(-L - 1.0));
  const MomentResult shifted = first_moment(soliton(g, 1.0, 1.0));
  // The sampled field wraps at the seam where u(L) != u(-L); that endpoint term is O(dx L^-1).
  CHECK(shifted.value == doctest::Approx(exact).epsilon(1e-5));
  CHECK(std::abs(shifted.value + 4.0 * pi) < 0.2);  // shift identity up to the tail

  const Field bump = Field::sample(g, [](double x) { return std::exp(-(x - 2.0) * (x - 2.0)); });
  const MomentResult m = first_moment(bump);
  CHECK_FALSE(m.boundary_contaminated);
  CHECK(m.value == doctest::Approx(2.0 * std::sqrt(pi)).epsilon(1e-12));
}

TEST_CASE("moment law on a short run") {
  auto g = make_grid(1024, 64.0);
  DatumRecipe pair;
  pair.kind = DatumKind::GaussianPair;
  pair.amplitude = 2.0;
  pair.width = 1.0;
  pair.width_b = 2.0;
  const Field u0 = make_datum(g, pair, 0);
  SolverConfig c;
  c.dt = 2e-3;
  c.t_end = 1.0;
  const Trajectory tr = solve(u0, c, 20);
  const auto traces = invariant_traces(tr, "law");
  const NormTrace& m = traces[3];
  CHECK(m.name() == "first_moment");
  CHECK(m.size() >= 20);
  const double slope = fit_slope(m.times(), m.values());
  CHECK(slope == doctest::Approx(0.5 * conserved_I2(u0)).epsilon(1e-3));
  for (std::size_t i = 1; i < m.size(); ++i) CHECK(m.values()[i] > m.values()[i - 1]);
}

TEST_CASE("fit_slope") {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> v{1.0, 3.5, 6.0, 8.5};
  CHECK(fit_slope(t, v) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(fit_slope(std::vector<double>{1.0}, std::vector<double>{2.0}), ValidationError);
}

TEST_CASE("norm traces") {
  NormTrace t("I2", "run-7");
  t.append(0.0, 1.5);
  t.append(0.1, 1.25);
  CHECK_THROWS_AS(t.append(0.1, 2.0), ValidationError);
  CHECK_THROWS_AS(t.append(0.05, 2.0), ValidationError);
  t.append(0.3, 1.0 / 3.0);
  CHECK(t.max_value() == 1.5);

  std::stringstream ss;
  write_trace_csv(ss, t);
  CHECK(ss.str().rfind("# name=I2 run=run-7\ntime,value\n", 0) == 0);
  const NormTrace back = read_trace_csv(ss);
  CHECK(back.name() == "I2");
  CHECK(back.run_id() == "run-7");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.times()[i] == t.times()[i]);
    CHECK(back.values()[i] == t.values()[i]);
  }

  std::stringstream bad("# name=x run=y\ntime,value\n0,1\nzero,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ValidationError);
  std::stringstream unordered("# name=x run=y\ntime,value\n1,1\n0,2\n");
  CHECK_THROWS_AS(read_trace_csv(unordered), ValidationError);
}
