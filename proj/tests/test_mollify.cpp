#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracwave/fracwave.hpp"

using namespace fracwave;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double discrete_mass(const Field& f) {
  double hd = 1.0;
  for (int i = 0; i < f.grid.d; ++i) hd *= f.grid.h;
  return hd * pairwise_sum(f.values);
}

}  // namespace

TEST_CASE("mollifier profile: nonnegative, unit mass, supported in the unit ball") {
  const Grid g = make_grid(1, 512, 1.5);
  const Mollifier psi = make_mollifier(g);
  CHECK(discrete_mass(psi.profile) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < psi.profile.values.size(); ++i) {
    CHECK(psi.profile.values[i] >= 0.0);
    if (std::abs(g.coord(static_cast<int>(i))) >= 1.0)
      CHECK(psi.profile.values[i] == 0.0);
  }
  CHECK(psi.alpha > 0.0);
}

TEST_CASE("make_mollifier rejects unresolvable grids") {
  CHECK_THROWS_AS(make_mollifier(make_grid(1, 512, 0.9)), UnderResolved);
  CHECK_THROWS_AS(make_mollifier(make_grid(1, 4, 1.5)), UnderResolved);
}

TEST_CASE("eps = 1 reproduces the profile itself") {
  const Grid g = make_grid(1, 512, 1.5);
  const Mollifier psi = make_mollifier(g);
  const Field net = mollifying_net(psi, 1.0, g);
  double err = 0.0;
  for (std::size_t i = 0; i < net.values.size(); ++i)
    err = std::max(err, std::abs(net.values[i] - psi.profile.values[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("mollifying net: unit mass and the 1/eps sup-norm scaling in d = 1") {
  const Grid g = make_grid(1, 1024, 1.5);
  const Mollifier psi = make_mollifier(g);
  const double sup1 = lp_norm(psi.profile, kInf);
  for (double eps : {0.5, 0.25, 0.125, 0.0625}) {
    const Field net = mollifying_net(psi, eps, g);
    CHECK(discrete_mass(net) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp_norm(net, kInf) == doctest::Approx(sup1 / eps).epsilon(0.02));
    for (double v : net.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("mollifying net resolution and range guards") {
  const Grid g = make_grid(1, 64, 1.5);  // h = 3/64
  const Mollifier psi = make_mollifier(g);
  CHECK_THROWS_AS(mollifying_net(psi, 0.1, g), EpsilonUnderResolved);  // < 4h
  CHECK_THROWS_AS(mollifying_net(psi, 0.0, g), EpsilonUnderResolved);
  CHECK_THROWS_AS(mollifying_net(psi, 1.5, g), EpsilonUnderResolved);
  CHECK_NOTHROW(mollifying_net(psi, 0.5, g));
}

TEST_CASE("off-center nets concentrate at the requested point") {
  const Grid g = make_grid(1, 512, 1.5);
  const Mollifier psi = make_mollifier(g);
  const Field net = mollifying_net(psi, 0.25, g, {0.5, 0.0, 0.0});
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < net.values.size(); ++i)
    if (net.values[i] > net.values[argmax]) argmax = i;
  CHECK(std::abs(g.coord(static_cast<int>(argmax)) - 0.5) <= 0.5 * g.h + 1e-12);
}

TEST_CASE("regularize preserves constants and unit mass") {
  const Grid g = make_grid(1, 256, 1.5);
  const Mollifier psi = make_mollifier(g);
  const Field psi_eps = mollifying_net(psi, 0.25, g);
  Field c(g);
  for (auto& v : c.values) v = 2.75;
  const Field out = regularize(c, psi_eps);
  for (double v : out.values) CHECK(v == doctest::Approx(2.75).epsilon(1e-12));

  const Field bump = sample(g, [](const std::array<double, 3>& x) {
    return std::exp(-8.0 * x[0] * x[0]);
  });
  const Field smoothed = regularize(bump, psi_eps);
  CHECK(discrete_mass(smoothed) == doctest::Approx(discrete_mass(bump)).epsilon(1e-12));
  for (double v : smoothed.values) CHECK(v >= 0.0);  // clamped nonnegativity
}

TEST_CASE("coefficient families reproduce the expected sup-norm scalings") {
  const Grid g = make_grid(1, 512, 0.5);  // h = 2^-9, so eps >= 2^-7 resolves
  const Mollifier psi = reference_mollifier(1);

  const std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};

  CoefficientSpec delta;
  delta.kind = CoefficientKind::delta;
  std::vector<double> sup_delta;
  for (double e : eps)
    sup_delta.push_back(lp_norm(evaluate_coefficient(delta, psi, e, g), kInf));
  const ModeratenessFit fit1 = fit_moderateness(eps, sup_delta);
  CHECK(fit1.N_hat == doctest::Approx(1.0).epsilon(0.05));

  CoefficientSpec delta2;
  delta2.kind = CoefficientKind::delta_squared;
  std::vector<double> sup_delta2;
  for (double e : eps)
    sup_delta2.push_back(lp_norm(evaluate_coefficient(delta2, psi, e, g), kInf));
  const ModeratenessFit fit2 = fit_moderateness(eps, sup_delta2);
  CHECK(fit2.N_hat == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("smooth coefficient with a constant base stays constant") {
  const Grid g = make_grid(1, 256, 1.5);
  const Mollifier psi = make_mollifier(g);
  CoefficientSpec spec;
  spec.kind = CoefficientKind::smooth;
  Field one(g);
  for (auto& v : one.values) v = 1.0;
  spec.base = one;
  for (double e : {0.5, 0.25, 0.125}) {
    const Field a = evaluate_coefficient(spec, psi, e, g);
    for (double v : a.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Absent base: the zero coefficient.
  CoefficientSpec empty;
  empty.kind = CoefficientKind::smooth;
  const Field z = evaluate_coefficient(empty, psi, 0.25, g);
  for (double v : z.values) CHECK(v == 0.0);
  // Negative base is rejected.
  CoefficientSpec bad = spec;
  Field neg(g);
  neg.values[0] = -1.0;
  bad.base = neg;
  CHECK_THROWS_AS(evaluate_coefficient(bad, psi, 0.25, g), NegativeBase);
}

TEST_CASE("perturbation values and the perturbed net") {
  CHECK(perturbation_value(PerturbationKind::none, 0.1) == 0.0);
  CHECK(perturbation_value(PerturbationKind::exp_negligible, 0.1) ==
        doctest::Approx(std::exp(-10.0)));
  CHECK(perturbation_value(PerturbationKind::eps_squared, 0.1) ==
        doctest::Approx(0.01));

  const Grid g = make_grid(1, 256, 1.5);
  const Mollifier psi = make_mollifier(g);
  CoefficientSpec a;
  a.kind = CoefficientKind::delta;
  const CoefficientNet net = coefficient_net(a);
  const CoefficientNet pert = negligible_perturbation(net, true, false);
  const double eps = 0.25;
  auto [a0, b0] = net.evaluate(psi, eps, g);
  auto [a1, b1] = pert.evaluate(psi, eps, g);
  const double c = std::exp(-1.0 / eps);
  for (std::size_t i = 0; i < a0.values.size(); ++i)
    CHECK(a1.values[i] - a0.values[i] == doctest::Approx(c).epsilon(1e-12));
  for (std::size_t i = 0; i < b0.values.size(); ++i)
    CHECK(b1.values[i] == b0.values[i]);
}

TEST_CASE("fit_moderateness: exact power laws, constants and degenerate input") {
  const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> norms;
  for (double e : eps) norms.push_back(3.0 * std::pow(e, -1.5));
  const ModeratenessFit fit = fit_moderateness(eps, norms);
  CHECK(fit.N_hat == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));

  const std::vector<double> const_norms(eps.size(), 7.0);
  const ModeratenessFit flat = fit_moderateness(eps, const_norms);
  CHECK(flat.N_hat == 0.0);
  CHECK(flat.r2 == 1.0);

  CHECK_THROWS_AS(fit_moderateness({0.5, 0.25, 0.125}, {1.0, 2.0, 3.0}), DegenerateFit);
  CHECK_THROWS_AS(fit_moderateness({0.5, 0.25, 0.25, 0.125}, {1.0, 2.0, 3.0, 4.0}),
                  DegenerateFit);
  CHECK_THROWS_AS(fit_moderateness({0.5, 0.25, 0.125, 0.0625}, {1.0, 2.0, 0.0, 4.0}),
                  DegenerateFit);
}
