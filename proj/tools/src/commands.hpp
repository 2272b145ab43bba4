// Subcommand implementations; each returns the process status.
#pragma once

#include <string>

#include "config.hpp"
#include "output.hpp"
#include "parahom/corrector.hpp"
#include "parahom/rate.hpp"

namespace parahom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

struct Context {
  Config config;  // resolved: CLI overrides applied
  int workers = 1;
  CellOptions cell;
};

Context make_context(Config c, int workers);
TwoScaleSetup make_setup(const Context& ctx);

using Command = int (*)(const Context&, RunWriter&);
Command find_command(const std::string& name);

// reads a finished run directory, writes plotdata.csv into out_dir
int emit_plotdata(const std::string& run_dir, const std::string& out_dir);

}  // namespace parahom::cli
