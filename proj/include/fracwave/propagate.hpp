#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "fracwave/fracops.hpp"
#include "fracwave/grid.hpp"

namespace fracwave {

// (u, u_t) pair plus the current time.
struct SolverState {
  Field u;
  Field ut;
  double t = 0.0;
};

enum class Scheme { strang_split, leapfrog };

struct StepperConfig {
  FracOrder s{0.5};
  double dt = 1e-3;
  Scheme scheme = Scheme::strang_split;
  Field a;  // mass coefficient a_eps >= 0
  Field b;  // dissipation coefficient b_eps >= 0
};

// Largest |xi| on the lattice: pi*(N/2)/L per axis.
inline double max_frequency(const Grid& g) {
  const double per_axis = std::numbers::pi * (g.N / 2) / g.L;
  return per_axis * std::sqrt(static_cast<double>(g.d));
}

// dt bound theta / max(|xi_max|^s, sqrt(||a||_inf), ||b||_inf) with
// theta = 0.5. Stability bound for leapfrog; accuracy bound for splitting.
inline double cfl_bound(const Grid& g, const FracOrder& s, const Field& a,
                        const Field& b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double wmax = std::pow(max_frequency(g), s.s);
  const double am = std::sqrt(lp_norm(a, inf));
  const double bm = lp_norm(b, inf);
  return 0.5 / std::max({wmax, am, bm, 1e-300});
}

namespace detail {

// Exact solution over time t of v'' + b v' + a v = 0 for one point/mode,
// via exp of [[0,1],[-a,-b]]: eigenvalues mu +- sqrt(q), mu = -b/2,
// q = b^2/4 - a. The defective case b^2 = 4a uses the Jordan-block
// exponential under the relative switch |b^2 - 4a| < 1e-9 * max(1, b^2).
template <typename V>
inline void local_osc_flow(V& v, V& w, double a, double b, double t) {
  const double mu = -0.5 * b;
  const double disc = b * b - 4.0 * a;
  double C, S;
  if (std::abs(disc) < 1e-9 * std::max(1.0, b * b)) {
    C = 1.0;
    S = t;
  } else if (disc > 0.0) {
    const double r = 0.5 * std::sqrt(disc);
    C = std::cosh(r * t);
    S = std::sinh(r * t) / r;
  } else {
    const double r = 0.5 * std::sqrt(-disc);
    C = std::cos(r * t);
    S = std::sin(r * t) / r;
  }
  const double e = std::exp(mu * t);
  // exp(At) = e^{mu t} [C*I + S*(A - mu*I)], A - mu*I = [[b/2, 1], [-a, -b/2]].
  const V v_new = e * (C * v + S * (0.5 * b * v + w));
  const V w_new = e * (C * w + S * (-a * v - 0.5 * b * w));
  v = v_new;
  w = w_new;
}

// Exact per-bin rotation of u_hat'' + omega^2 u_hat = 0 with omega = |xi|^s;
// the xi = 0 bin degenerates to the drift u_hat += t * u_hat_t.
inline void free_mode_flow(std::complex<double>& u, std::complex<double>& ut,
                           double omega, double t) {
  if (omega == 0.0) {
    u += t * ut;
    return;
  }
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  const std::complex<double> u_new = c * u + (s / omega) * ut;
  const std::complex<double> ut_new = -omega * s * u + c * ut;
  u = u_new;
  ut = ut_new;
}

// Impulse factor of the splitting: with u frozen, integrate
// u_t' = -a u - b u_t exactly over t. For b = 0 this is the kick
// u_t -= t a u; in general u_t(t) = e^{-bt} u_t(0) - a u t phi(bt) with
// phi(z) = (1 - e^{-z})/z.
inline void damping_kick(double u, double& ut, double a, double b, double t) {
  const double z = b * t;
  const double phi = (std::abs(z) < 1e-12) ? 1.0 : -std::expm1(-z) / z;
  ut = std::exp(-z) * ut - a * u * t * phi;
}

}  // namespace detail

// Exact Fourier propagator of u_tt + (-Delta)^s u = 0 over dt.
inline SolverState free_flow(const SolverState& state, double dt, const FracOrder& s) {
  check_finite(state.u, "free_flow");
  check_finite(state.ut, "free_flow");
  check_same_grid(state.u.grid, state.ut.grid, "free_flow");
  SpectralField U = forward(state.u);
  SpectralField Ut = forward(state.ut);
  const auto omegas = detail::symbol_powers(state.u.grid, s.s / 2.0);  // |xi|^s
  for (std::size_t i = 0; i < U.coeffs.size(); ++i)
    detail::free_mode_flow(U.coeffs[i], Ut.coeffs[i], (*omegas)[i], dt);
  SolverState out;
  out.u = inverse(U);
  out.ut = inverse(Ut);
  out.t = state.t + dt;
  return out;
}

// Exact pointwise flow of v_tt + a(x) v + b(x) v_t = 0 over dt.
inline SolverState local_flow(const SolverState& state, double dt, const Field& a,
                              const Field& b) {
  check_same_grid(state.u.grid, a.grid, "local_flow");
  check_same_grid(state.u.grid, b.grid, "local_flow");
  SolverState out = state;
  for (std::size_t i = 0; i < out.u.values.size(); ++i) {
    const double ai = a.values[i];
    const double bi = b.values[i];
    if (ai < 0.0 || bi < 0.0)
      throw NegativeCoefficient("local_flow requires a_eps >= 0 and b_eps >= 0");
    detail::local_osc_flow(out.u.values[i], out.ut.values[i], ai, bi, dt);
  }
  out.t = state.t + dt;
  return out;
}

// Impulse form of the local factor used inside the splitting: the position
// drift u' = u_t lives entirely in the free flow, so the local factor only
// updates the velocity (exactly, with u frozen). a = b = 0 makes it the
// identity.
inline SolverState local_kick(const SolverState& state, double dt, const Field& a,
                              const Field& b) {
  check_same_grid(state.u.grid, a.grid, "local_kick");
  check_same_grid(state.u.grid, b.grid, "local_kick");
  SolverState out = state;
  for (std::size_t i = 0; i < out.u.values.size(); ++i) {
    const double ai = a.values[i];
    const double bi = b.values[i];
    if (ai < 0.0 || bi < 0.0)
      throw NegativeCoefficient("local_kick requires a_eps >= 0 and b_eps >= 0");
    detail::damping_kick(out.u.values[i], out.ut.values[i], ai, bi, dt);
  }
  out.t = state.t + dt;
  return out;
}

// kick(dt/2) o free(dt) o kick(dt/2); second-order accurate, and exactly the
// free propagator when a = b = 0.
inline SolverState strang_step(const SolverState& state, const StepperConfig& cfg) {
  SolverState s1 = local_kick(state, 0.5 * cfg.dt, cfg.a, cfg.b);
  SolverState s2 = free_flow(s1, cfg.dt, cfg.s);
  SolverState s3 = local_kick(s2, 0.5 * cfg.dt, cfg.a, cfg.b);
  s3.t = state.t + cfg.dt;
  return s3;
}

// Velocity-Verlet step with the damping half-kicks applied implicitly;
// retained as a cross-check against the splitting scheme.
inline SolverState leapfrog_step(const SolverState& state, const StepperConfig& cfg) {
  const double dt = cfg.dt;
  SolverState out = state;
  Field force = frac_laplacian(out.u, cfg.s.s);
  for (std::size_t i = 0; i < out.u.values.size(); ++i) {
    const double ai = cfg.a.values[i];
    const double bi = cfg.b.values[i];
    if (ai < 0.0 || bi < 0.0)
      throw NegativeCoefficient("leapfrog_step requires a_eps >= 0 and b_eps >= 0");
    const double acc = -force.values[i] - ai * out.u.values[i];
    out.ut.values[i] = (out.ut.values[i] + 0.5 * dt * acc) / (1.0 + 0.5 * dt * bi);
    out.u.values[i] += dt * out.ut.values[i];
  }
  force = frac_laplacian(out.u, cfg.s.s);
  for (std::size_t i = 0; i < out.u.values.size(); ++i) {
    const double acc = -force.values[i] - cfg.a.values[i] * out.u.values[i];
    out.ut.values[i] =
        (out.ut.values[i] + 0.5 * dt * acc) / (1.0 + 0.5 * dt * cfg.b.values[i]);
  }
  out.t = state.t + dt;
  return out;
}

inline SolverState step(const SolverState& state, const StepperConfig& cfg) {
  return cfg.scheme == Scheme::strang_split ? strang_step(state, cfg)
                                            : leapfrog_step(state, cfg);
}

// Closed-form modal solution of u_hat'' + b0 u_hat' + (|xi|^{2s} + a0) u_hat = 0
// at time t, for constant coefficients a0, b0 >= 0.
inline std::pair<SpectralField, SpectralField> modal_oracle(const SpectralField& u0_hat,
                                                            const SpectralField& u1_hat,
                                                            double a0, double b0,
                                                            const FracOrder& s,
                                                            double t) {
  if (a0 < 0.0 || b0 < 0.0) throw NegativeCoefficient("modal_oracle requires a0, b0 >= 0");
  check_same_grid(u0_hat.grid, u1_hat.grid, "modal_oracle");
  SpectralField U = u0_hat;
  SpectralField Ut = u1_hat;
  const auto sym = detail::symbol_powers(U.grid, s.s);  // |xi|^{2s}
  for (std::size_t i = 0; i < U.coeffs.size(); ++i) {
    detail::local_osc_flow(U.coeffs[i], Ut.coeffs[i], (*sym)[i] + a0, b0, t);
  }
  return {std::move(U), std::move(Ut)};
}

// Observer callback invoked at step 0, every `stride` steps, and at the
// final step.
struct Observer {
  int stride = 10;
  std::function<void(const SolverState&, long step)> fn;
};

inline SolverState evolve(SolverState state, const StepperConfig& cfg, double T,
                          const std::vector<Observer>& observers = {}) {
  if (T < 0.0) throw Error("evolve: T must be nonnegative");
  const long steps = std::lround(T / cfg.dt);
  if (std::abs(steps * cfg.dt - T) > 1e-12 * std::max(1.0, T))
    throw Error("evolve: dt must divide T within 1e-12");

  auto notify = [&](const SolverState& st, long k) {
    for (const auto& obs : observers)
      if (obs.fn && (k == 0 || k == steps || (obs.stride > 0 && k % obs.stride == 0)))
        obs.fn(st, k);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double initial_mag =
      std::max({lp_norm(state.u, inf), lp_norm(state.ut, inf), 1e-300});

  notify(state, 0);
  for (long k = 1; k <= steps; ++k) {
    state = step(state, cfg);
    double mag = 0.0;
    for (double v : state.u.values) mag = std::max(mag, std::abs(v));
    for (double v : state.ut.values) mag = std::max(mag, std::abs(v));
    if (!std::isfinite(mag) || mag > 1e12 * initial_mag)
      throw Unstable("evolve: solution magnitude exceeded 1e12 x initial at t = " +
                     std::to_string(state.t));
    notify(state, k);
  }
  return state;
}

}  // namespace fracwave
