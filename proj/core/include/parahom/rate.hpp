/// @file rate.hpp
/// @brief Monte Carlo homogenization-error experiments over a list of eps.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parahom/corrector.hpp"
#include "parahom/macro.hpp"

namespace parahom {

// Shared description of a two-scale run; make_problem turns it into a CylinderProblem for one eps.
struct TwoScaleSetup {
  int dim = 2;
  EnsembleSpec spec{};
  MacroGeometry geometry = MacroGeometry::torus;
  double box = 1.0;
  double horizon = 0.03125;
  double h_micro = 0.125;
  double tau_micro = 0.125;
  // micro torus equals the rescaled macro box (side box/eps, period horizon/eps^2);
  // otherwise the fixed micro torus below is tiled
  bool locked_period = true;
  double micro_length = 4.0;
  double micro_period = 4.0;
  SourceFunction source;
  std::uint64_t seed = 1;
  int workers = 1;
  SolverOptions solver{};
  CellOptions cell{};
  // reference abar: Monte Carlo over independent tori of this size
  int rve_samples = 4;
  double rve_length = 16.0;
  double rve_period = 16.0;
};

void validate(const TwoScaleSetup& s);
Lattice micro_lattice(const TwoScaleSetup& s, double eps);
CylinderProblem make_problem(const TwoScaleSetup& s, double eps);
// sample index for realization `sample` at the eps with position `eps_index`
std::uint64_t realization_index(int eps_index, int sample);
RveEstimate reference_effective(const TwoScaleSetup& s);

struct RateRow {
  double eps = 0.0;
  int sample = 0;
  double err_l2 = 0.0;
  double w_norm = -1.0;    // -1 when the expansion was not assembled
  double residual = -1.0;
  bool failed = false;
};

struct RateSummaryRow {
  double eps = 0.0;
  double mean_err = 0.0;
  double stderr_err = 0.0;
  int samples = 0;
};

struct RateResult {
  Tensor2 abar_ref;
  double abar_ref_stderr = 0.0;
  std::vector<RateRow> rows;
  std::vector<RateSummaryRow> summary;
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool slope_defined = false;  // false when every error vanishes
  int failures = 0;
};

struct RateOptions {
  std::vector<double> eps_list;
  int samples = 16;
  bool with_expansion = false;  // also solve correctors and assemble w (expensive)
  std::optional<Tensor2> abar;  // skip the reference Monte Carlo
};

RateResult rate_experiment(const TwoScaleSetup& s, const RateOptions& o);

}  // namespace parahom
