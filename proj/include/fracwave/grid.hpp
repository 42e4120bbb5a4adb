#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracwave/errors.hpp"
#include "fracwave/fft.hpp"
#include "fracwave/reduce.hpp"

namespace fracwave {

// Periodic box [-L, L]^d with N points per axis, h = 2L/N. The discrete
// frequency lattice per axis is xi_j = pi*j/L for j in {-N/2, ..., N/2-1}.
struct Grid {
  int d = 1;
  int N = 0;
  double L = 0.0;
  double h = 0.0;

  std::size_t size() const {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(N);
    return n;
  }

  // Real-space coordinate of storage index j on one axis: x_j = -L + j*h.
  double coord(int j) const { return -L + j * h; }

  // Signed frequency of storage index j on one axis (DFT order: 0..N/2-1
  // are nonnegative, N/2..N-1 wrap to negative).
  double freq(int j) const {
    const int js = (j < N / 2) ? j : j - N;
    return std::numbers::pi * js / L;
  }

  bool operator==(const Grid& o) const { return d == o.d && N == o.N && L == o.L; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Grid make_grid(int d, int N, double L) {
  if (d < 1 || d > 3) throw InvalidGrid("dimension must be 1, 2 or 3, got " + std::to_string(d));
  if (N < 4 || !is_power_of_two(N))
    throw InvalidGrid("N must be a power of two >= 4, got " + std::to_string(N));
  if (!(L > 0.0)) throw InvalidGrid("L must be positive");
  Grid g;
  g.d = d;
  g.N = N;
  g.L = L;
  g.h = 2.0 * L / N;
  return g;
}

// Real-space samples, row-major, length N^d.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}
};

// Fourier coefficients in the same row-major layout as Field. The forward
// transform carries the h^d quadrature weight, so coeffs approximate the
// continuum transform evaluated on the frequency lattice.
struct SpectralField {
  Grid grid;
  std::vector<std::complex<double>> coeffs;

  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid(g), coeffs(g.size(), {0.0, 0.0}) {}
};

inline void check_finite(const Field& f, const char* where) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw NonFinite(std::string(where) + ": field contains NaN/Inf");
}

inline void check_finite(const SpectralField& f, const char* where) {
  for (const auto& c : f.coeffs)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NonFinite(std::string(where) + ": spectrum contains NaN/Inf");
}

inline void check_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw GridMismatch(std::string(where) + ": operands live on different grids");
}

namespace detail {

// Decomposes a flat row-major index into per-axis indices.
inline std::array<int, 3> unflatten(std::size_t idx, int d, int N) {
  std::array<int, 3> out{0, 0, 0};
  for (int axis = d - 1; axis >= 0; --axis) {
    out[axis] = static_cast<int>(idx % static_cast<std::size_t>(N));
    idx /= static_cast<std::size_t>(N);
  }
  return out;
}

// (-1)^(k0+...+k_{d-1}) for the x offset -L per axis: e^{-i xi_k (-L)} with
// xi_k = pi*k_signed/L equals (-1)^k (N even makes signed/storage parity agree).
inline double offset_phase(std::size_t idx, int d, int N) {
  int parity = 0;
  std::size_t rest = idx;
  for (int axis = 0; axis < d; ++axis) {
    parity += static_cast<int>(rest % static_cast<std::size_t>(N));
    rest /= static_cast<std::size_t>(N);
  }
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

inline double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace detail

inline SpectralField forward(const Field& f) {
  check_finite(f, "forward");
  const Grid& g = f.grid;
  SpectralField out(g);
  std::vector<std::complex<double>> buf(f.values.begin(), f.values.end());
  std::vector<int> shape(static_cast<std::size_t>(g.d), g.N);
  detail::FftEngine::instance().transform(buf, shape, FFTW_FORWARD);
  const double hd = detail::pow_int(g.h, g.d);
  for (std::size_t i = 0; i < buf.size(); ++i)
    out.coeffs[i] = buf[i] * (hd * detail::offset_phase(i, g.d, g.N));
  return out;
}

inline Field inverse(const SpectralField& F) {
  check_finite(F, "inverse");
  const Grid& g = F.grid;
  const double hd = detail::pow_int(g.h, g.d);
  std::vector<std::complex<double>> buf(F.coeffs.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = F.coeffs[i] * (detail::offset_phase(i, g.d, g.N) / hd);
  std::vector<int> shape(static_cast<std::size_t>(g.d), g.N);
  detail::FftEngine::instance().transform(buf, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  Field out(g);
  for (std::size_t i = 0; i < buf.size(); ++i) out.values[i] = buf[i].real() * scale;
  check_finite(out, "inverse");
  return out;
}

// Quadrature inner product h^d * sum f*g with pairwise summation.
inline double l2_inner(const Field& f, const Field& g) {
  check_same_grid(f.grid, g.grid, "l2_inner");
  const double hd = detail::pow_int(f.grid.h, f.grid.d);
  const auto& a = f.values;
  const auto& b = g.values;
  return hd * pairwise_sum_transformed(0, a.size(),
                                       [&](std::size_t i) { return a[i] * b[i]; });
}

inline double l2_norm(const Field& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

// Discrete counterpart of (2pi)^-d * integral |f_hat|^2 d(xi); equals the
// quadrature L2 mass by Parseval under our normalization.
inline double spectral_l2_sq(const SpectralField& F) {
  const double scale = 1.0 / detail::pow_int(2.0 * F.grid.L, F.grid.d);
  const auto& c = F.coeffs;
  return scale * pairwise_sum_transformed(0, c.size(),
                                          [&](std::size_t i) { return std::norm(c[i]); });
}

// Builds a field by sampling fn at the grid nodes; fn receives the d
// coordinates (unused trailing entries are zero).
template <typename Fn>
Field sample(const Grid& g, Fn&& fn) {
  Field out(g);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = detail::unflatten(i, g.d, g.N);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int axis = 0; axis < g.d; ++axis) x[axis] = g.coord(idx[axis]);
    out.values[i] = fn(x);
  }
  return out;
}

// In-place y += alpha*x.
inline void axpy(double alpha, const Field& x, Field& y) {
  check_same_grid(x.grid, y.grid, "axpy");
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += alpha * x.values[i];
}

inline Field operator+(const Field& a, const Field& b) {
  check_same_grid(a.grid, b.grid, "operator+");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  check_same_grid(a.grid, b.grid, "operator-");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

inline Field operator*(double s, const Field& a) {
  Field out = a;
  for (auto& v : out.values) v *= s;
  return out;
}

// Fraction of the quadrature L2 mass sitting in the outer shell
// max_i |x_i| >= shell*L. Experiments keep this below 1e-8 so the periodic
// truncation of R^d stays honest.
inline double boundary_mass_fraction(const Field& f, double shell = 0.9) {
  const Grid& g = f.grid;
  const double cut = shell * g.L;
  double total = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto idx = detail::unflatten(i, g.d, g.N);
    double amax = 0.0;
    for (int axis = 0; axis < g.d; ++axis)
      amax = std::max(amax, std::abs(g.coord(idx[axis])));
    const double m = f.values[i] * f.values[i];
    total += m;
    if (amax >= cut) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

}  // namespace fracwave
