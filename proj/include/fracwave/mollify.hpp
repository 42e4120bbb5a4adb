#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "fracwave/fracops.hpp"
#include "fracwave/grid.hpp"

namespace fracwave {

namespace detail {

// Compactly supported bump exp(-1/(1-|x|^2)) inside the unit ball.
inline double bump(const std::array<double, 3>& x, int d) {
  double r2 = 0.0;
  for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

}  // namespace detail

// Friedrichs mollifier: nonnegative bump supported in |x| < 1 with
// discrete unit mass on its reference grid.
struct Mollifier {
  Field profile;
  double alpha = 0.0;  // normalization of the analytic profile
};

inline Mollifier make_mollifier(const Grid& grid) {
  if (grid.L < 1.0)
    throw UnderResolved("make_mollifier: box half-width L must be >= 1 to contain the unit-ball support");
  if (2.0 / grid.h < 8.0)
    throw UnderResolved("make_mollifier: unit ball needs >= 8 points per axis");
  Field raw = sample(grid, [&](const std::array<double, 3>& x) {
    return detail::bump(x, grid.d);
  });
  const double hd = detail::pow_int(grid.h, grid.d);
  const double mass = hd * pairwise_sum(raw.values);
  if (!(mass > 0.0)) throw UnderResolved("make_mollifier: vanishing discrete mass");
  Mollifier psi;
  psi.alpha = 1.0 / mass;
  psi.profile = psi.alpha * raw;
  return psi;
}

// psi_eps(x) = eps^-d * psi(x/eps) (mass-preserving d-dimensional scaling of
// the paper's 1-D net with omega(eps) = eps), sampled on `grid` and
// renormalized so the discrete integral is exactly 1.
inline Field mollifying_net(const Mollifier& psi, double eps, const Grid& grid,
                            const std::array<double, 3>& center = {0.0, 0.0, 0.0}) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw EpsilonUnderResolved("mollifying_net: eps must lie in (0, 1]");
  if (eps < 4.0 * grid.h)
    throw EpsilonUnderResolved("mollifying_net: eps = " + std::to_string(eps) +
                               " is below the resolution rule eps >= 4h = " +
                               std::to_string(4.0 * grid.h));
  const double scale = psi.alpha / detail::pow_int(eps, grid.d);
  Field raw = sample(grid, [&](const std::array<double, 3>& x) {
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int i = 0; i < grid.d; ++i) y[i] = (x[i] - center[i]) / eps;
    return scale * detail::bump(y, grid.d);
  });
  const double hd = detail::pow_int(grid.h, grid.d);
  const double mass = hd * pairwise_sum(raw.values);
  if (!(mass > 0.0)) throw EpsilonUnderResolved("mollifying_net: net not resolved by the grid");
  return (1.0 / mass) * raw;
}

// Count of negative spectral-convolution residuals clamped to zero across
// the process lifetime.
inline std::atomic<long>& clamp_counter() {
  static std::atomic<long> n{0};
  return n;
}

// f * psi_eps on the torus via multiplication of transforms. Nonnegative
// inputs stay nonnegative up to a -1e-13 spectral floor, which is clamped.
inline Field regularize(const Field& f, const Field& psi_eps) {
  check_same_grid(f.grid, psi_eps.grid, "regularize");
  SpectralField F = forward(f);
  const SpectralField P = forward(psi_eps);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= P.coeffs[i];
  Field out = inverse(F);

  double fmin = 0.0;
  for (double v : f.values) fmin = std::min(fmin, v);
  if (fmin >= 0.0) {
    const double floor = -1e-13 * std::max(1.0, lp_norm(f, std::numeric_limits<double>::infinity()));
    for (auto& v : out.values) {
      if (v < 0.0) {
        if (v < floor)
          throw NegativeBase("regularize: convolution of nonnegative input went below the spectral floor");
        v = 0.0;
        clamp_counter().fetch_add(1);
      }
    }
  }
  return out;
}

enum class CoefficientKind { delta, delta_squared, smooth, custom };

enum class PerturbationKind { none, exp_negligible, eps_squared };

// Additive constant used by the perturbed coefficient families.
inline double perturbation_value(PerturbationKind kind, double eps) {
  switch (kind) {
    case PerturbationKind::none: return 0.0;
    case PerturbationKind::exp_negligible: return std::exp(-1.0 / eps);
    case PerturbationKind::eps_squared: return eps * eps;
  }
  return 0.0;
}

// One coefficient family eps -> field >= 0.
struct CoefficientSpec {
  CoefficientKind kind = CoefficientKind::smooth;
  double amplitude = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::optional<Field> base;  // smooth kind: the unregularized coefficient
  std::function<Field(double, const Grid&)> evaluator;  // custom kind
};

inline Field evaluate_coefficient(const CoefficientSpec& spec, const Mollifier& psi,
                                  double eps, const Grid& grid) {
  switch (spec.kind) {
    case CoefficientKind::delta:
      return spec.amplitude * mollifying_net(psi, eps, grid, spec.center);
    case CoefficientKind::delta_squared: {
      // eps^-2d * psi^2(x/eps), the d-dimensional analogue of the 1-D family.
      const double scale =
          spec.amplitude * psi.alpha * psi.alpha / detail::pow_int(eps * eps, grid.d);
      if (eps < 4.0 * grid.h)
        throw EpsilonUnderResolved("delta_squared family: eps below resolution rule eps >= 4h");
      return sample(grid, [&](const std::array<double, 3>& x) {
        std::array<double, 3> y{0.0, 0.0, 0.0};
        for (int i = 0; i < grid.d; ++i) y[i] = (x[i] - spec.center[i]) / eps;
        const double b = detail::bump(y, grid.d);
        return scale * b * b;
      });
    }
    case CoefficientKind::smooth: {
      if (!spec.base) {
        return Field(grid);  // absent base means the zero coefficient
      }
      check_same_grid(spec.base->grid, grid, "evaluate_coefficient");
      for (double v : spec.base->values)
        if (v < 0.0) throw NegativeBase("smooth coefficient base must be nonnegative");
      return spec.amplitude * regularize(*spec.base, mollifying_net(psi, eps, grid));
    }
    case CoefficientKind::custom:
      if (!spec.evaluator) throw Error("custom coefficient spec lacks an evaluator");
      return spec.evaluator(eps, grid);
  }
  throw Error("unreachable coefficient kind");
}

// Family eps -> (a_eps, b_eps) of nonnegative coefficient fields, with
// optional negligible (or polynomial control) perturbations.
struct CoefficientNet {
  CoefficientSpec a;
  CoefficientSpec b;
  PerturbationKind perturbation = PerturbationKind::none;
  bool perturb_a = false;
  bool perturb_b = false;

  std::pair<Field, Field> evaluate(const Mollifier& psi, double eps,
                                   const Grid& grid) const {
    Field fa = evaluate_coefficient(a, psi, eps, grid);
    Field fb = evaluate_coefficient(b, psi, eps, grid);
    if (perturbation != PerturbationKind::none) {
      const double c = perturbation_value(perturbation, eps);
      if (perturb_a)
        for (auto& v : fa.values) v += c;
      if (perturb_b)
        for (auto& v : fb.values) v += c;
    }
    for (double v : fa.values)
      if (v < 0.0) throw NegativeCoefficient("a_eps must be nonnegative");
    for (double v : fb.values)
      if (v < 0.0) throw NegativeCoefficient("b_eps must be nonnegative");
    return {std::move(fa), std::move(fb)};
  }
};

inline CoefficientNet coefficient_net(CoefficientSpec a, CoefficientSpec b = {}) {
  CoefficientNet net;
  net.a = std::move(a);
  net.b = std::move(b);
  return net;
}

// Returns the net with the constant e^(-1/eps) added to the selected
// coefficients; the difference net is L^inf-negligible.
inline CoefficientNet negligible_perturbation(const CoefficientNet& net, bool on_a = true,
                                              bool on_b = false) {
  CoefficientNet out = net;
  out.perturbation = PerturbationKind::exp_negligible;
  out.perturb_a = on_a;
  out.perturb_b = on_b;
  return out;
}

struct ModeratenessFit {
  double N_hat = 0.0;
  double r2 = 1.0;
};

// Least-squares slope of log(norm) against log(1/eps): the estimated
// moderateness exponent N with ||f_eps|| ~ eps^-N.
inline ModeratenessFit fit_moderateness(const std::vector<double>& eps_list,
                                        const std::vector<double>& norm_list) {
  const std::size_t n = eps_list.size();
  if (n != norm_list.size() || n < 4)
    throw DegenerateFit("fit_moderateness needs >= 4 matching samples");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(eps_list[i] > eps_list[i + 1]))
      throw DegenerateFit("eps samples must be strictly decreasing");
  for (double v : norm_list)
    if (!(v > 0.0)) throw DegenerateFit("norms must be positive");

  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(1.0 / eps_list[i]);
    y[i] = std::log(norm_list[i]);
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  ModeratenessFit fit;
  if (syy <= 1e-24 * n * (1.0 + ym * ym)) {
    // Constant norms: slope 0 is an exact fit.
    fit.N_hat = 0.0;
    fit.r2 = 1.0;
    return fit;
  }
  fit.N_hat = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - ym - fit.N_hat * (x[i] - xm);
    ss_res += r * r;
  }
  fit.r2 = 1.0 - ss_res / syy;
  return fit;
}

}  // namespace fracwave
