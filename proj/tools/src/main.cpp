#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "parahom/errors.hpp"
#include "parahom/solver.hpp"

namespace {

using namespace parahom::cli;

int resolve_workers(int flag, int from_config) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("PARAHOM_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring PARAHOM_WORKERS='" << env << "'\n";
  }
  return from_config > 0 ? from_config : 1;
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
  std::optional<double> tol;
};

int run_command(const std::string& name, const Flags& f) {
  const Command cmd = find_command(name);
  Config cfg;
  try {
    cfg = load_config(f.config);
    if (f.seed) cfg.run.seed = *f.seed;
    if (f.tol) {
      if (!(*f.tol > 0.0)) throw SchemaError("--tol: must be positive");
      cfg.run.tol = *f.tol;
    }
    if (!f.out.empty()) cfg.run.out = f.out;
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return kExitSchema;
  }
  const Context ctx = make_context(cfg, resolve_workers(f.workers, cfg.run.workers));
  const std::string resolved = to_json(ctx.config).dump(2) + "\n";
  const std::string hash = sha256_hex(resolved);

  std::optional<RunWriter> writer;
  try {
    writer.emplace(ctx.config.run.out, name);
    writer->write("config.resolved.json", resolved);
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  int code = kExitOk;
  std::string status = "complete";
  try {
    code = cmd(ctx, *writer);
    if (code == kExitSolver) status = "partial: solver failure on some samples";
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    code = kExitSchema;
    status = "invalid config";
  } catch (const parahom::ConfigError& e) {
    std::cerr << anchor(ctx.config, "", e.what()) << "\n";
    code = kExitSchema;
    status = "invalid config";
  } catch (const parahom::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (iterations " << e.report().iterations << ", residual "
              << e.report().relative_residual << ")\n";
    code = kExitSolver;
    status = "partial: solver failure";
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const parahom::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  try {
    writer->finish(hash, ctx.config.run.seed, status);
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parahom: space-time random parabolic homogenization experiments"};
  app.set_version_flag("--version", std::string(PARAHOM_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const char* names[] = {"effective", "beta-sweep", "fluxcor-verify", "rate",      "residual",
                         "fluct",     "minrad",     "commutator",     "dump-field"};
  const char* help[] = {"effective tensor per sample",
                        "massive corrector sweep over beta",
                        "flux corrector identities and growth profile",
                        "two-scale convergence rate in eps",
                        "two-scale expansion residual under mesh refinement",
                        "corrector fluctuation moments and stationarity",
                        "minimal radius per sample",
                        "homogenization commutator variance scaling",
                        "write one field as PHOM"};
  std::string chosen;
  for (std::size_t k = 0; k < std::size(names); ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    sub->add_option("--config", flags.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", flags.seed, "override run.seed");
    sub->add_option("--workers", flags.workers, "worker threads (else PARAHOM_WORKERS, else config)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output directory (overrides run.out)");
    sub->add_option("--tol", flags.tol, "solver relative tolerance");
    sub->callback([&chosen, k, &names] { chosen = names[k]; });
  }
  std::string run_dir, plot_out;
  CLI::App* plot = app.add_subcommand("plotdata", "long-format CSV series from a finished run");
  plot->add_option("--run", run_dir, "run directory")->required();
  plot->add_option("--out", plot_out, "output directory (default RUN/plotdata)");
  plot->callback([&chosen] { chosen = "plotdata"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }
  if (chosen == "plotdata") return emit_plotdata(run_dir, plot_out.empty() ? run_dir + "/plotdata" : plot_out);
  return run_command(chosen, flags);
}
