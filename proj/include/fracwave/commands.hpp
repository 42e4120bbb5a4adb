#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "fracwave/config.hpp"
#include "fracwave/duhamel.hpp"
#include "fracwave/experiments.hpp"
#include "fracwave/io.hpp"

namespace fracwave {

// Frozen constants of the Duhamel agreement tolerance C1*dt^2 + C2*(T/M)^2.
// Measured utilization on the reference check (d=1, N=64, constant
// coefficients, sine-modulated gaussian source) is ~0.25 of the tolerance,
// stable across (dt, M) refinement levels.
inline constexpr double kDuhamelC1 = 2.5;
inline constexpr double kDuhamelC2 = 0.5;

namespace detail {

inline nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["study"] = v.study;
  j["pass"] = v.pass;
  j["metrics"] = v.metrics;
  j["thresholds"] = v.thresholds;
  j["paper_ref"] = v.paper_ref;
  return j;
}

inline void write_verdict(const std::filesystem::path& dir, const Verdict& v) {
  std::ofstream os(dir / "verdict.json");
  if (!os) throw IoError("cannot write verdict.json");
  os << verdict_to_json(v).dump(2) << "\n";
}

inline void require_cfl(const RunConfig& cfg, const Grid& g, const Field& a,
                        const Field& b) {
  const double bound = cfl_bound(g, FracOrder(cfg.s), a, b);
  if (cfg.dt > bound)
    throw ConfigError("dt = " + std::to_string(cfg.dt) +
                      " violates the CFL rule dt <= 0.5/max(|xi_max|^s, sqrt(||a||_inf), "
                      "||b||_inf) = " +
                      std::to_string(bound));
}

}  // namespace detail

// Exit codes: 0 success, 2 configuration error, 3 solver instability.
inline int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir,
                     unsigned /*n_threads*/ = 1) {
  try {
    const Grid grid = make_grid(cfg.d, cfg.N, cfg.L);
    const Mollifier& psi = reference_mollifier(cfg.d);
    const CoefficientNet net = build_net(cfg, grid);
    auto [a, b] = net.evaluate(psi, cfg.eps, grid);
    detail::require_cfl(cfg, grid, a, b);
    const Field u0 = build_data(cfg.u0, grid, psi);
    const Field u1 = build_data(cfg.u1, grid, psi);
    const FracOrder s(cfg.s);
    StepperConfig scfg{s, cfg.dt,
                       cfg.scheme == "leapfrog" ? Scheme::leapfrog : Scheme::strang_split,
                       a, b};

    std::filesystem::create_directories(out_dir);
    EnergyProbe probe(a, b, s);
    double max_boundary = 0.0;
    Observer bmass{cfg.observer_stride, [&](const SolverState& st, long) {
                     max_boundary = std::max(max_boundary, boundary_mass_fraction(st.u));
                   }};
    SolverState fin;
    try {
      fin = evolve(SolverState{u0, u1, 0.0}, scfg, cfg.T,
                   {probe.observer(cfg.observer_stride), bmass});
    } catch (const Unstable& e) {
      std::cerr << e.what() << "\n";
      return 3;
    }

    CsvWriter csv(out_dir / "energy.csv", kEnergyCsvHeader);
    for (const auto& r : probe.records())
      csv.write_row({r.t, r.E, r.dissipated, r.norm1, r.norm2, r.l2_u, r.l2_ut});
    write_fwf1(out_dir / "u_final.fwf1", fin.u, fin.t);
    write_fwf1(out_dir / "ut_final.fwf1", fin.ut, fin.t);

    // The nonlocal operator gives solutions algebraic tails, so the
    // boundary-mass diagnostic is reported for box-size calibration rather
    // than gated: it decays like L^-3 and reaches 1e-8 only for very large
    // boxes.
    Verdict v = energy_audit(probe.records(), cfg.dt);
    v.metrics["max_boundary_mass_fraction"] = max_boundary;
    detail::write_verdict(out_dir, v);
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

enum class SweepMode { moderateness, negligibility };

inline int cmd_sweep(const RunConfig& cfg, SweepMode mode,
                     const std::filesystem::path& out_dir, unsigned n_threads = 1) {
  try {
    const Grid grid = make_grid(cfg.d, cfg.N, cfg.L);
    const Mollifier& psi = reference_mollifier(cfg.d);
    if (cfg.eps_list.size() < 4)
      throw ConfigError("sweep needs an eps_list with at least 4 entries");
    const CoefficientNet net = build_net(cfg, grid);
    {
      auto [a, b] = net.evaluate(psi, cfg.eps_list.back(), grid);
      detail::require_cfl(cfg, grid, a, b);
    }
    const Field u0 = build_data(cfg.u0, grid, psi);
    const Field u1 = build_data(cfg.u1, grid, psi);
    const DataNet data = constant_data(u0, u1);
    SweepConfig scfg{grid, FracOrder(cfg.s), cfg.T, cfg.dt, cfg.eps_list,
                     cfg.observer_stride, n_threads};

    std::filesystem::create_directories(out_dir);
    std::vector<SweepRecord> records;
    Verdict verdict;
    if (mode == SweepMode::moderateness) {
      ModeratenessResult res = moderateness_sweep(net, psi, data, scfg);
      records = std::move(res.records);
      verdict = std::move(res.verdict);
    } else {
      PerturbationToggles toggles;
      toggles.kind = cfg.perturbation.kind == "eps_squared"
                         ? PerturbationKind::eps_squared
                         : PerturbationKind::exp_negligible;
      toggles.on_a = cfg.perturbation.on_a;
      toggles.on_b = cfg.perturbation.on_b;
      toggles.on_u0 = cfg.perturbation.on_u0;
      toggles.on_u1 = cfg.perturbation.on_u1;
      if (!toggles.on_a && !toggles.on_b && !toggles.on_u0 && !toggles.on_u1)
        toggles.on_a = true;
      // The sweep itself runs the unperturbed net; the perturbation kind/
      // toggles describe the comparison family.
      CoefficientNet clean = net;
      clean.perturbation = PerturbationKind::none;
      NegligibilityResult res = negligibility_sweep(clean, psi, data, scfg, toggles);
      records = std::move(res.records);
      verdict = std::move(res.verdict);
      for (std::size_t i = 0; i < res.slopes.size(); ++i)
        verdict.metrics["slope_" + std::to_string(i)] = res.slopes[i];
    }

    CsvWriter csv(out_dir / "sweep.csv", kSweepCsvHeader);
    for (const auto& r : records)
      csv.write_row({r.eps, r.coef_linf, r.coef_lds, r.coef_ld2s, r.data_hs, r.data_l2,
                     r.sup_norm1, r.sup_norm2, r.terminal_err});
    detail::write_verdict(out_dir, verdict);
    return 0;
  } catch (const Unstable& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

inline int cmd_coherence(const RunConfig& cfg, const std::filesystem::path& out_dir,
                         unsigned n_threads = 1) {
  try {
    const Grid grid = make_grid(cfg.d, cfg.N, cfg.L);
    const Mollifier& psi = reference_mollifier(cfg.d);
    if (cfg.eps_list.size() < 2)
      throw ConfigError("coherence needs an eps_list with at least 2 entries");
    if (cfg.coeff_a.kind != "smooth" || cfg.coeff_b.kind != "smooth")
      throw ConfigError("coherence requires smooth coefficient kinds");
    const Field a = cfg.coeff_a.has_base
                        ? cfg.coeff_a.amplitude * build_profile(cfg.coeff_a.base, grid)
                        : Field(grid);
    const Field b = cfg.coeff_b.has_base
                        ? cfg.coeff_b.amplitude * build_profile(cfg.coeff_b.base, grid)
                        : Field(grid);
    for (double v : a.values)
      if (v < 0.0) throw ConfigError("coherence coefficient a must be nonnegative");
    for (double v : b.values)
      if (v < 0.0) throw ConfigError("coherence coefficient b must be nonnegative");
    detail::require_cfl(cfg, grid, a, b);
    const Field u0 = build_data(cfg.u0, grid, psi);
    const Field u1 = build_data(cfg.u1, grid, psi);
    SweepConfig scfg{grid, FracOrder(cfg.s), cfg.T, cfg.dt, cfg.eps_list,
                     cfg.observer_stride, n_threads};

    std::filesystem::create_directories(out_dir);
    CoherenceResult res = coherence_study(a, b, u0, u1, psi, scfg, cfg.dt_ref);

    CsvWriter csv(out_dir / "coherence.csv", kCoherenceCsvHeader);
    for (std::size_t i = 0; i < res.eps_list.size(); ++i)
      csv.write_row({res.eps_list[i], res.errors[i]});
    detail::write_verdict(out_dir, res.verdict);
    return 0;
  } catch (const Unstable& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

inline int cmd_duhamel_check(const RunConfig& cfg, const std::filesystem::path& out_dir,
                             unsigned n_threads = 1) {
  try {
    const Grid grid = make_grid(cfg.d, cfg.N, cfg.L);
    const Mollifier& psi = reference_mollifier(cfg.d);
    if (cfg.quadrature_points < 3)
      throw ConfigError("duhamel-check needs quadrature_points >= 3");
    const CoefficientNet net = build_net(cfg, grid);
    auto [a, b] = net.evaluate(psi, cfg.eps, grid);
    detail::require_cfl(cfg, grid, a, b);
    const Field u0 = build_data(cfg.u0, grid, psi);
    const Field u1 = build_data(cfg.u1, grid, psi);
    const SourceTerm source = build_source(cfg.source);
    StepperConfig scfg{FracOrder(cfg.s), cfg.dt, Scheme::strang_split, a, b};

    std::filesystem::create_directories(out_dir);
    const SolverState via_duhamel =
        duhamel_solve(u0, u1, scfg, source, cfg.T, cfg.quadrature_points, n_threads);
    const SolverState direct = direct_source_solve(u0, u1, scfg, source, cfg.T);
    const double diff = l2_norm(via_duhamel.u - direct.u);
    const double dtau = cfg.T / (cfg.quadrature_points - 1);
    const double tol = kDuhamelC1 * cfg.dt * cfg.dt + kDuhamelC2 * dtau * dtau;

    Verdict v;
    v.study = "duhamel_check";
    v.paper_ref = "u(t) = w(t) + integral_0^t v(t; tau) d tau";
    v.metrics["l2_difference"] = diff;
    v.metrics["quadrature_points"] = cfg.quadrature_points;
    v.thresholds["tolerance"] = tol;
    v.pass = diff <= tol;
    detail::write_verdict(out_dir, v);
    return 0;
  } catch (const Unstable& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace fracwave
