#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracwave/fracwave.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = ".";
  unsigned threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "Path to the JSON run configuration")
      ->required();
  sub->add_option("--out", args.out, "Output directory for CSV/JSON/snapshot files");
  sub->add_option("--threads", args.threads, "Worker threads for sweeps and quadrature")
      ->check(CLI::PositiveNumber);
}

int run(const CommonArgs& args,
        int (*fn)(const fracwave::RunConfig&, const std::filesystem::path&, unsigned)) {
  fracwave::RunConfig cfg;
  try {
    cfg = fracwave::load_config(args.config);
  } catch (const fracwave::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return fn(cfg, args.out, args.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver for the fractional telegraph equation with "
               "regularized singular coefficients"};
  app.require_subcommand(1);

  CommonArgs solve_args, mod_args, neg_args, coh_args, duh_args;
  CLI::App* solve = app.add_subcommand("solve", "Single run with energy audit");
  add_common(solve, solve_args);
  CLI::App* mod = app.add_subcommand("sweep-moderateness",
                                     "Norm growth across the regularization net");
  add_common(mod, mod_args);
  CLI::App* neg = app.add_subcommand("sweep-negligibility",
                                     "Solution response to negligible perturbations");
  add_common(neg, neg_args);
  CLI::App* coh = app.add_subcommand("coherence",
                                     "Convergence to the smooth-coefficient solution");
  add_common(coh, coh_args);
  CLI::App* duh = app.add_subcommand("duhamel-check",
                                     "Superposition identity vs direct forced solve");
  add_common(duh, duh_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (solve->parsed()) return run(solve_args, fracwave::cmd_solve);
  if (mod->parsed())
    return run(mod_args, [](const fracwave::RunConfig& c, const std::filesystem::path& o,
                            unsigned t) {
      return fracwave::cmd_sweep(c, fracwave::SweepMode::moderateness, o, t);
    });
  if (neg->parsed())
    return run(neg_args, [](const fracwave::RunConfig& c, const std::filesystem::path& o,
                            unsigned t) {
      return fracwave::cmd_sweep(c, fracwave::SweepMode::negligibility, o, t);
    });
  if (coh->parsed()) return run(coh_args, fracwave::cmd_coherence);
  if (duh->parsed()) return run(duh_args, fracwave::cmd_duhamel_check);
  return 2;
}
