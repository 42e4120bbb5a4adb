#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracwave/experiments.hpp"
#include "fracwave/io.hpp"
#include "fracwave/mollify.hpp"

namespace fracwave {

namespace detail {

using json = nlohmann::json;

// Unknown keys are errors: configs fail closed.
inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + context);
}

inline std::array<double, 3> parse_center(const json& obj, const std::string& context) {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  if (!obj.contains("center")) return c;
  const auto& arr = obj.at("center");
  if (!arr.is_array() || arr.size() > 3)
    throw ConfigError(context + ".center must be an array of up to 3 numbers");
  for (std::size_t i = 0; i < arr.size(); ++i) c[i] = arr[i].get<double>();
  return c;
}

}  // namespace detail

// Base profile of a smooth coefficient, described in config.
struct ProfileConfig {
  std::string profile = "constant";  // constant | cosine | gaussian
  double value = 0.0;                // constant
  double offset = 0.0;               // cosine: offset + amplitude*prod cos(k pi x/L)
  double amplitude = 0.0;
  int k = 1;
  double width = 0.3;                // gaussian
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

struct CoefficientConfig {
  std::string kind = "smooth";  // delta | delta_squared | smooth
  double amplitude = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  ProfileConfig base;  // smooth kind only
  bool has_base = false;
};

struct PerturbConfig {
  std::string kind = "none";  // none | exp_negligible | eps_squared
  bool on_a = false;
  bool on_b = false;
  bool on_u0 = false;
  bool on_u1 = false;
};

struct DataConfig {
  std::string preset = "zero";  // zero | gaussian | cosine_mode | delta_like | from_file
  double amplitude = 1.0;
  double width = 0.3;
  int k = 1;
  double eps = 0.25;  // delta_like: its own fixed regularization parameter
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::string path;  // from_file
};

struct SourceConfig {
  std::string preset = "zero";  // zero | sine_gaussian
  double amplitude = 1.0;
  double omega = 1.0;
  double width = 0.3;
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

struct RunConfig {
  int d = 1;
  int N = 128;
  double L = 3.141592653589793;
  double s = 0.5;
  double T = 1.0;
  double dt = 1e-3;
  std::string scheme = "strang_split";
  CoefficientConfig coeff_a;
  CoefficientConfig coeff_b;
  PerturbConfig perturbation;
  DataConfig u0;
  DataConfig u1;
  SourceConfig source;
  double eps = 0.25;
  std::vector<double> eps_list;
  int observer_stride = 10;
  std::uint64_t seed = 0;
  int quadrature_points = 17;
  double dt_ref = 0.0;
};

namespace detail {

inline ProfileConfig parse_profile(const json& obj, const std::string& context) {
  check_keys(obj, {"profile", "value", "offset", "amplitude", "k", "width", "center"},
             context);
  ProfileConfig p;
  p.profile = obj.value("profile", "constant");
  if (p.profile != "constant" && p.profile != "cosine" && p.profile != "gaussian")
    throw ConfigError(context + ": unknown profile '" + p.profile + "'");
  p.value = obj.value("value", 0.0);
  p.offset = obj.value("offset", 0.0);
  p.amplitude = obj.value("amplitude", 0.0);
  p.k = obj.value("k", 1);
  p.width = obj.value("width", 0.3);
  p.center = parse_center(obj, context);
  return p;
}

inline CoefficientConfig parse_coefficient(const json& obj, const std::string& context) {
  check_keys(obj, {"kind", "amplitude", "center", "base"}, context);
  CoefficientConfig c;
  c.kind = obj.value("kind", "smooth");
  if (c.kind != "delta" && c.kind != "delta_squared" && c.kind != "smooth")
    throw ConfigError(context + ": unknown coefficient kind '" + c.kind + "'");
  c.amplitude = obj.value("amplitude", 1.0);
  c.center = parse_center(obj, context);
  if (obj.contains("base")) {
    c.base = parse_profile(obj.at("base"), context + ".base");
    c.has_base = true;
  }
  return c;
}

inline DataConfig parse_data(const json& obj, const std::string& context) {
  check_keys(obj, {"preset", "amplitude", "width", "k", "eps", "center", "path"}, context);
  DataConfig d;
  d.preset = obj.value("preset", "zero");
  const std::set<std::string> presets{"zero", "gaussian", "cosine_mode", "delta_like",
                                      "from_file"};
  if (!presets.count(d.preset))
    throw ConfigError(context + ": unknown data preset '" + d.preset + "'");
  d.amplitude = obj.value("amplitude", 1.0);
  d.width = obj.value("width", 0.3);
  d.k = obj.value("k", 1);
  d.eps = obj.value("eps", 0.25);
  d.center = parse_center(obj, context);
  d.path = obj.value("path", "");
  if (d.preset == "from_file" && d.path.empty())
    throw ConfigError(context + ": from_file preset requires 'path'");
  return d;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::check_keys;
  check_keys(j,
             {"grid", "s", "T", "dt", "scheme", "coefficients", "data", "source", "eps",
              "eps_list", "observer_stride", "seed", "quadrature_points", "dt_ref"},
             "config");
  RunConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, {"d", "N", "L"}, "grid");
    cfg.d = g.value("d", 1);
    cfg.N = g.value("N", 128);
    cfg.L = g.value("L", cfg.L);
  }
  cfg.s = j.value("s", 0.5);
  cfg.T = j.value("T", 1.0);
  cfg.dt = j.value("dt", 1e-3);
  cfg.scheme = j.value("scheme", "strang_split");
  if (cfg.scheme != "strang_split" && cfg.scheme != "leapfrog")
    throw ConfigError("unknown scheme '" + cfg.scheme + "'");
  if (j.contains("coefficients")) {
    const auto& c = j.at("coefficients");
    check_keys(c, {"a", "b", "perturbation"}, "coefficients");
    if (c.contains("a")) cfg.coeff_a = detail::parse_coefficient(c.at("a"), "coefficients.a");
    if (c.contains("b")) cfg.coeff_b = detail::parse_coefficient(c.at("b"), "coefficients.b");
    if (c.contains("perturbation")) {
      const auto& p = c.at("perturbation");
      check_keys(p, {"kind", "on_a", "on_b", "on_u0", "on_u1"}, "coefficients.perturbation");
      cfg.perturbation.kind = p.value("kind", "none");
      if (cfg.perturbation.kind != "none" && cfg.perturbation.kind != "exp_negligible" &&
          cfg.perturbation.kind != "eps_squared")
        throw ConfigError("unknown perturbation kind '" + cfg.perturbation.kind + "'");
      cfg.perturbation.on_a = p.value("on_a", false);
      cfg.perturbation.on_b = p.value("on_b", false);
      cfg.perturbation.on_u0 = p.value("on_u0", false);
      cfg.perturbation.on_u1 = p.value("on_u1", false);
    }
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, {"u0", "u1"}, "data");
    if (d.contains("u0")) cfg.u0 = detail::parse_data(d.at("u0"), "data.u0");
    if (d.contains("u1")) cfg.u1 = detail::parse_data(d.at("u1"), "data.u1");
  }
  if (j.contains("source")) {
    const auto& s = j.at("source");
    detail::check_keys(s, {"preset", "amplitude", "omega", "width", "center"}, "source");
    cfg.source.preset = s.value("preset", "zero");
    if (cfg.source.preset != "zero" && cfg.source.preset != "sine_gaussian")
      throw ConfigError("unknown source preset '" + cfg.source.preset + "'");
    cfg.source.amplitude = s.value("amplitude", 1.0);
    cfg.source.omega = s.value("omega", 1.0);
    cfg.source.width = s.value("width", 0.3);
    cfg.source.center = detail::parse_center(s, "source");
  }
  cfg.eps = j.value("eps", 0.25);
  if (j.contains("eps_list")) {
    for (const auto& v : j.at("eps_list")) cfg.eps_list.push_back(v.get<double>());
    for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i)
      if (!(cfg.eps_list[i] > cfg.eps_list[i + 1]))
        throw ConfigError("eps_list must be strictly decreasing");
  }
  cfg.observer_stride = j.value("observer_stride", 10);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.quadrature_points = j.value("quadrature_points", 17);
  cfg.dt_ref = j.value("dt_ref", 0.0);
  if (!(cfg.s > 0.0)) throw ConfigError("s must be positive");
  if (!(cfg.T >= 0.0)) throw ConfigError("T must be nonnegative");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.observer_stride < 1) throw ConfigError("observer_stride must be >= 1");
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("failed to parse " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Building runtime objects from a config
// ---------------------------------------------------------------------------

// Reference grids on which the mollifier profile is normalized.
inline const Mollifier& reference_mollifier(int d) {
  static const Mollifier psi1 = make_mollifier(make_grid(1, 1024, 1.5));
  static const Mollifier psi2 = make_mollifier(make_grid(2, 256, 1.5));
  static const Mollifier psi3 = make_mollifier(make_grid(3, 64, 1.5));
  switch (d) {
    case 1: return psi1;
    case 2: return psi2;
    case 3: return psi3;
  }
  throw ConfigError("dimension must be 1, 2 or 3");
}

inline Field build_profile(const ProfileConfig& p, const Grid& g) {
  if (p.profile == "constant") {
    Field f(g);
    for (auto& v : f.values) v = p.value;
    return f;
  }
  if (p.profile == "cosine") {
    return sample(g, [&](const std::array<double, 3>& x) {
      double prod = 1.0;
      for (int i = 0; i < g.d; ++i)
        prod *= std::cos(p.k * std::numbers::pi * x[i] / g.L);
      return p.offset + p.amplitude * prod;
    });
  }
  // gaussian
  return sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int i = 0; i < g.d; ++i) {
      const double dx = x[i] - p.center[i];
      r2 += dx * dx;
    }
    return p.amplitude * std::exp(-r2 / (2.0 * p.width * p.width));
  });
}

inline CoefficientSpec build_coefficient_spec(const CoefficientConfig& c, const Grid& g) {
  CoefficientSpec spec;
  spec.amplitude = c.amplitude;
  spec.center = c.center;
  if (c.kind == "delta") {
    spec.kind = CoefficientKind::delta;
  } else if (c.kind == "delta_squared") {
    spec.kind = CoefficientKind::delta_squared;
  } else {
    spec.kind = CoefficientKind::smooth;
    if (c.has_base) spec.base = build_profile(c.base, g);
  }
  return spec;
}

inline CoefficientNet build_net(const RunConfig& cfg, const Grid& g) {
  CoefficientNet net;
  net.a = build_coefficient_spec(cfg.coeff_a, g);
  net.b = build_coefficient_spec(cfg.coeff_b, g);
  if (cfg.perturbation.kind == "exp_negligible")
    net.perturbation = PerturbationKind::exp_negligible;
  else if (cfg.perturbation.kind == "eps_squared")
    net.perturbation = PerturbationKind::eps_squared;
  net.perturb_a = cfg.perturbation.on_a;
  net.perturb_b = cfg.perturbation.on_b;
  return net;
}

inline Field build_data(const DataConfig& d, const Grid& g, const Mollifier& psi) {
  if (d.preset == "zero") return Field(g);
  if (d.preset == "gaussian") {
    return sample(g, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int i = 0; i < g.d; ++i) {
        const double dx = x[i] - d.center[i];
        r2 += dx * dx;
      }
      return d.amplitude * std::exp(-r2 / (2.0 * d.width * d.width));
    });
  }
  if (d.preset == "cosine_mode") {
    return sample(g, [&](const std::array<double, 3>& x) {
      double prod = 1.0;
      for (int i = 0; i < g.d; ++i)
        prod *= std::cos(d.k * std::numbers::pi * x[i] / g.L);
      return d.amplitude * prod;
    });
  }
  if (d.preset == "delta_like")
    return d.amplitude * mollifying_net(psi, d.eps, g, d.center);
  // from_file
  if (!std::filesystem::exists(d.path))
    throw ConfigError("data file does not exist: " + d.path);
  Fwf1Snapshot snap = read_fwf1(d.path);
  check_same_grid(snap.field.grid, g, "build_data");
  return std::move(snap.field);
}

inline SourceTerm build_source(const SourceConfig& s) {
  if (s.preset == "zero") {
    return SourceTerm{[](double, const Grid& g) { return Field(g); }, "zero"};
  }
  const SourceConfig cfg = s;
  return SourceTerm{[cfg](double t, const Grid& g) {
                      Field f = sample(g, [&](const std::array<double, 3>& x) {
                        double r2 = 0.0;
                        for (int i = 0; i < g.d; ++i) {
                          const double dx = x[i] - cfg.center[i];
                          r2 += dx * dx;
                        }
                        return cfg.amplitude * std::exp(-r2 / (2.0 * cfg.width * cfg.width));
                      });
                      return std::sin(cfg.omega * t) * f;
                    },
                    "sine_gaussian"};
}

}  // namespace fracwave
