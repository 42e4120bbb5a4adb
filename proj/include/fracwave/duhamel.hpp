#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fracwave/propagate.hpp"
#include "fracwave/reduce.hpp"

namespace fracwave {

// Time-dependent forcing f(t, x).
struct SourceTerm {
  std::function<Field(double, const Grid&)> evaluator;
  std::string description;

  Field operator()(double t, const Grid& g) const {
    Field f = evaluator(t, g);
    check_finite(f, "SourceTerm");
    check_same_grid(f.grid, g, "SourceTerm");
    return f;
  }
};

// Nonhomogeneous stepping: the splitting step with a midpoint source kick
// ut += dt * f(t + dt/2). Symmetric composition, second-order accurate, and
// identical to the homogeneous stepper for f = 0.
inline SolverState direct_source_step(const SolverState& state, const StepperConfig& cfg,
                                      const SourceTerm& source) {
  const double dt = cfg.dt;
  SolverState s = local_kick(state, 0.5 * dt, cfg.a, cfg.b);
  s = free_flow(s, 0.5 * dt, cfg.s);
  const Field f_mid = source(state.t + 0.5 * dt, state.u.grid);
  axpy(dt, f_mid, s.ut);
  s = free_flow(s, 0.5 * dt, cfg.s);
  s = local_kick(s, 0.5 * dt, cfg.a, cfg.b);
  s.t = state.t + dt;
  return s;
}

inline SolverState direct_source_solve(const Field& u0, const Field& u1,
                                       const StepperConfig& cfg, const SourceTerm& source,
                                       double T,
                                       const std::vector<Observer>& observers = {}) {
  if (T < 0.0) throw Error("direct_source_solve: T must be nonnegative");
  const long steps = std::lround(T / cfg.dt);
  if (std::abs(steps * cfg.dt - T) > 1e-12 * std::max(1.0, T))
    throw Error("direct_source_solve: dt must divide T within 1e-12");

  SolverState state{u0, u1, 0.0};
  auto notify = [&](const SolverState& st, long k) {
    for (const auto& obs : observers)
      if (obs.fn && (k == 0 || k == steps || (obs.stride > 0 && k % obs.stride == 0)))
        obs.fn(st, k);
  };
  notify(state, 0);
  for (long k = 1; k <= steps; ++k) {
    state = direct_source_step(state, cfg, source);
    notify(state, k);
  }
  return state;
}

// Duhamel superposition: u(T) = w(T) + integral_0^T v(T; tau) d(tau), with w
// the homogeneous solve and v(.; tau) launched from rest at tau with
// velocity data f(tau, .). The tau-integral uses the composite trapezoid
// rule over M nodes snapped to step boundaries. O(M) full solves; an oracle
// for small grids, not a production path.
inline SolverState duhamel_solve(const Field& u0, const Field& u1,
                                 const StepperConfig& cfg, const SourceTerm& source,
                                 double T, int quadrature_points,
                                 unsigned n_threads = 1) {
  if (quadrature_points < 3)
    throw QuadratureUnderResolved("duhamel_solve needs at least 3 quadrature points");
  if (!(T > 0.0)) throw Error("duhamel_solve: T must be positive");
  const long steps = std::lround(T / cfg.dt);
  if (std::abs(steps * cfg.dt - T) > 1e-12 * std::max(1.0, T))
    throw Error("duhamel_solve: dt must divide T within 1e-12");

  const Grid& grid = u0.grid;
  const int M = quadrature_points;

  // Quadrature nodes snapped to the time grid so every v-solve starts on a
  // step boundary.
  std::vector<double> tau(M);
  for (int m = 0; m < M; ++m) {
    const double raw = T * m / (M - 1);
    tau[m] = std::lround(raw / cfg.dt) * cfg.dt;
  }

  SolverState w = evolve(SolverState{u0, u1, 0.0}, cfg, T);

  std::vector<SolverState> v(M);
  parallel_for(static_cast<std::size_t>(M), n_threads, [&](std::size_t m) {
    if (tau[m] >= T) {
      // v(T, .; T) = 0 contributes nothing.
      v[m] = SolverState{Field(grid), Field(grid), T};
      return;
    }
    SolverState init{Field(grid), source(tau[m], grid), tau[m]};
    v[m] = evolve(std::move(init), cfg, T - tau[m]);
  });

  // Non-uniform composite trapezoid weights over the snapped nodes.
  SolverState out = std::move(w);
  for (int m = 0; m < M; ++m) {
    const double left = (m == 0) ? tau[0] : tau[m - 1];
    const double right = (m == M - 1) ? tau[M - 1] : tau[m + 1];
    const double weight = 0.5 * (right - left);
    if (weight == 0.0) continue;
    axpy(weight, v[m].u, out.u);
    axpy(weight, v[m].ut, out.ut);
  }
  out.t = T;
  return out;
}

}  // namespace fracwave
