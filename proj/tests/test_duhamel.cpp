#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracwave/fracwave.hpp"

using namespace fracwave;

namespace {

Field constant_field(const Grid& g, double c) {
  Field f(g);
  for (auto& v : f.values) v = c;
  return f;
}

Field gaussian(const Grid& g, double width = 0.3) {
  return sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int i = 0; i < g.d; ++i) r2 += x[i] * x[i];
    return std::exp(-r2 / (2.0 * width * width));
  });
}

SourceTerm test_source() {
  return SourceTerm{[](double t, const Grid& g) {
                      Field f = gaussian(g, 0.4);
                      for (auto& v : f.values) v *= std::sin(3.0 * t);
                      return f;
                    },
                    "sine-modulated gaussian"};
}

}  // namespace

TEST_CASE("zero source reduces to the homogeneous solver exactly") {
  const Grid g = make_grid(1, 64, 2.0);
  const Field u0 = gaussian(g);
  const Field u1 = constant_field(g, 0.1);
  StepperConfig cfg{FracOrder(0.5), 1.0 / 128.0, Scheme::strang_split,
                    constant_field(g, 0.4), constant_field(g, 0.2)};
  const SourceTerm zero{[](double, const Grid& gg) { return Field(gg); }, "zero"};
  const SolverState a = evolve(SolverState{u0, u1, 0.0}, cfg, 0.5);
  const SolverState b = direct_source_solve(u0, u1, cfg, zero, 0.5);
  // free(dt/2) twice vs free(dt) once differ only in round-off.
  CHECK(l2_norm(a.u - b.u) < 1e-12);
  CHECK(l2_norm(a.ut - b.ut) < 1e-12);
}

TEST_CASE("duhamel_solve agrees with the direct forced solve on a 64-point grid") {
  const Grid g = make_grid(1, 64, 2.0);
  const Field u0 = gaussian(g);
  const Field u1 = Field(g);
  const double T = 0.5, dt = 1.0 / 128.0;
  StepperConfig cfg{FracOrder(0.5), dt, Scheme::strang_split,
                    constant_field(g, 0.6), constant_field(g, 0.3)};
  const SourceTerm f = test_source();
  const int M = 17;
  const SolverState direct = direct_source_solve(u0, u1, cfg, f, T);
  const SolverState via = duhamel_solve(u0, u1, cfg, f, T, M);
  const double dtau = T / (M - 1);
  const double tol = kDuhamelC1 * dt * dt + kDuhamelC2 * dtau * dtau;
  CHECK(l2_norm(via.u - direct.u) <= tol);
}

TEST_CASE("agreement error shrinks under refinement of both dt and M") {
  const Grid g = make_grid(1, 64, 2.0);
  const Field u0 = gaussian(g);
  const Field u1 = Field(g);
  const double T = 0.5;
  const SourceTerm f = test_source();
  auto err = [&](double dt, int M) {
    StepperConfig cfg{FracOrder(0.5), dt, Scheme::strang_split,
                      constant_field(g, 0.6), constant_field(g, 0.3)};
    const SolverState direct = direct_source_solve(u0, u1, cfg, f, T);
    const SolverState via = duhamel_solve(u0, u1, cfg, f, T, M);
    return l2_norm(via.u - direct.u);
  };
  const double coarse = err(1.0 / 64.0, 9);
  const double fine = err(1.0 / 128.0, 17);
  const double finest = err(1.0 / 256.0, 33);
  CHECK(fine < coarse);
  CHECK(finest < fine);
  // Combined second-order tolerance holds at every refinement level.
  auto tol = [&](double dt, int M) {
    const double dtau = T / (M - 1);
    return kDuhamelC1 * dt * dt + kDuhamelC2 * dtau * dtau;
  };
  CHECK(coarse <= tol(1.0 / 64.0, 9));
  CHECK(fine <= tol(1.0 / 128.0, 17));
  CHECK(finest <= tol(1.0 / 256.0, 33));
}

TEST_CASE("quadrature and time-grid guards") {
  const Grid g = make_grid(1, 64, 2.0);
  StepperConfig cfg{FracOrder(0.5), 1.0 / 64.0, Scheme::strang_split, Field(g),
                    Field(g)};
  const SourceTerm f = test_source();
  CHECK_THROWS_AS(duhamel_solve(Field(g), Field(g), cfg, f, 0.5, 2),
                  QuadratureUnderResolved);
  CHECK_THROWS_AS(duhamel_solve(Field(g), Field(g), cfg, f, 0.1001, 9), Error);
  CHECK_THROWS_AS(direct_source_solve(Field(g), Field(g), cfg, f, -0.5), Error);
}

TEST_CASE("duhamel quadrature is deterministic across thread counts") {
  const Grid g = make_grid(1, 64, 2.0);
  const Field u0 = gaussian(g);
  StepperConfig cfg{FracOrder(0.5), 1.0 / 64.0, Scheme::strang_split,
                    constant_field(g, 0.2), constant_field(g, 0.1)};
  const SourceTerm f = test_source();
  const SolverState s1 = duhamel_solve(u0, Field(g), cfg, f, 0.5, 9, 1);
  const SolverState s2 = duhamel_solve(u0, Field(g), cfg, f, 0.5, 9, 2);
  const SolverState s8 = duhamel_solve(u0, Field(g), cfg, f, 0.5, 9, 8);
  CHECK(s1.u.values == s2.u.values);
  CHECK(s1.u.values == s8.u.values);
  CHECK(s1.ut.values == s8.ut.values);
}

TEST_CASE("source term wrapper validates its output") {
  const Grid g = make_grid(1, 64, 2.0);
  const Grid other = make_grid(1, 128, 2.0);
  const SourceTerm wrong{[other](double, const Grid&) { return Field(other); },
                         "wrong grid"};
  CHECK_THROWS_AS(wrong(0.0, g), GridMismatch);
  const SourceTerm nan_source{[](double, const Grid& gg) {
                                Field f(gg);
                                f.values[0] = std::numeric_limits<double>::quiet_NaN();
                                return f;
                              },
                              "nan"};
  CHECK_THROWS_AS(nan_source(0.0, g), NonFinite);
}
