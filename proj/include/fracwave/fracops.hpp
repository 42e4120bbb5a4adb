#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "fracwave/grid.hpp"

namespace fracwave {

// Fractional order s > 0 of (-Delta)^s.
struct FracOrder {
  double s = 0.5;

  explicit FracOrder(double order) : s(order) {
    if (!(s > 0.0)) throw Error("FracOrder: order must be positive");
  }
};

namespace detail {

// Immutable per-(grid, sigma) cache of the symbol |xi|^(2*sigma) on the
// frequency lattice.
inline std::shared_ptr<const std::vector<double>> symbol_powers(const Grid& g,
                                                                double sigma) {
  using Key = std::tuple<int, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;

  const Key key{g.d, g.N, g.L, sigma};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto powers = std::make_shared<std::vector<double>>(g.size());
  for (std::size_t i = 0; i < powers->size(); ++i) {
    const auto idx = unflatten(i, g.d, g.N);
    double xi2 = 0.0;
    for (int axis = 0; axis < g.d; ++axis) {
      const double xi = g.freq(idx[axis]);
      xi2 += xi * xi;
    }
    (*powers)[i] = (xi2 == 0.0) ? (sigma == 0.0 ? 1.0 : 0.0) : std::pow(xi2, sigma);
  }
  cache.emplace(key, powers);
  return powers;
}

}  // namespace detail

// (-Delta)^sigma f via the Fourier multiplier |xi|^(2*sigma). sigma = 0 is
// the identity; the xi = 0 bin is annihilated for sigma > 0.
inline Field frac_laplacian(const Field& f, double sigma) {
  if (!(sigma >= 0.0)) throw Error("frac_laplacian: sigma must be >= 0");
  check_finite(f, "frac_laplacian");
  if (sigma == 0.0) return f;
  SpectralField F = forward(f);
  const auto powers = detail::symbol_powers(f.grid, sigma);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= (*powers)[i];
  return inverse(F);
}

inline SpectralField frac_laplacian(const SpectralField& F, double sigma) {
  if (!(sigma >= 0.0)) throw Error("frac_laplacian: sigma must be >= 0");
  if (sigma == 0.0) return F;
  SpectralField out = F;
  const auto powers = detail::symbol_powers(F.grid, sigma);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] *= (*powers)[i];
  return out;
}

// Quadrature L^p norm: (h^d sum |f|^p)^(1/p); grid max for p = infinity.
inline double lp_norm(const Field& f, double p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!(p >= 1.0)) throw InvalidP("p must be in [1, inf], got " + std::to_string(p));
  check_finite(f, "lp_norm");
  const auto& v = f.values;
  if (p == inf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  const double hd = detail::pow_int(f.grid.h, f.grid.d);
  if (p == 2.0) return l2_norm(f);
  const double s = pairwise_sum_transformed(
      0, v.size(), [&](std::size_t i) { return std::pow(std::abs(v[i]), p); });
  return std::pow(hd * s, 1.0 / p);
}

// ||f||_{L2} + ||(-Delta)^{s/2} f||_{L2}; the default H^s norm.
inline double hs_norm(const Field& f, const FracOrder& s) {
  return l2_norm(f) + l2_norm(frac_laplacian(f, s.s / 2.0));
}

// Integral form: sqrt of the lattice sum of (1+|xi|^{2s})|f_hat|^2.
inline double hs_norm_integral(const Field& f, const FracOrder& s) {
  SpectralField F = forward(f);
  const auto powers = detail::symbol_powers(f.grid, s.s);
  const double scale = 1.0 / detail::pow_int(2.0 * f.grid.L, f.grid.d);
  const double sum = pairwise_sum_transformed(0, F.coeffs.size(), [&](std::size_t i) {
    return (1.0 + (*powers)[i]) * std::norm(F.coeffs[i]);
  });
  return std::sqrt(scale * sum);
}

// ||u||_1 = ||u||_{L2} + ||(-Delta)^{s/2} u||_{L2} + ||u_t||_{L2}.
inline double norm1(const Field& u, const Field& ut, const FracOrder& s) {
  check_same_grid(u.grid, ut.grid, "norm1");
  return l2_norm(u) + l2_norm(frac_laplacian(u, s.s / 2.0)) + l2_norm(ut);
}

// ||u||_2 = ||u||_1 + ||(-Delta)^s u||_{L2}.
inline double norm2(const Field& u, const Field& ut, const FracOrder& s) {
  check_same_grid(u.grid, ut.grid, "norm2");
  return norm1(u, ut, s) + l2_norm(frac_laplacian(u, s.s));
}

struct SobolevCheck {
  double lhs = 0.0;    // ||f||_{L^q}, q = 2d/(d-2s)
  double rhs = 0.0;    // ||(-Delta)^{s/2} f||_{L2}
  double ratio = 0.0;  // lhs/rhs; undefined_ratio set when rhs vanishes
  bool undefined_ratio = false;
};

// Evaluates both sides of the fractional Sobolev inequality
// ||f||_{L^q} <= C(d,s) ||(-Delta)^{s/2} f||_{L2}; never asserts.
inline SobolevCheck sobolev_check(const Field& f, const FracOrder& s, int d) {
  if (!(d > 2.0 * s.s))
    throw OrderTooLarge("sobolev_check requires d > 2s (d = " + std::to_string(d) +
                        ", s = " + std::to_string(s.s) + ")");
  const double q = 2.0 * d / (d - 2.0 * s.s);
  SobolevCheck out;
  out.lhs = lp_norm(f, q);
  out.rhs = l2_norm(frac_laplacian(f, s.s / 2.0));
  if (out.rhs > 0.0) {
    out.ratio = out.lhs / out.rhs;
  } else {
    out.undefined_ratio = true;
  }
  return out;
}

// Projects out the mean; on the torus constants are outside the scope of the
// continuum Sobolev inequality.
inline Field remove_mean(const Field& f) {
  double mean = pairwise_sum(f.values) / static_cast<double>(f.values.size());
  Field out = f;
  for (auto& v : out.values) v -= mean;
  return out;
}

}  // namespace fracwave
