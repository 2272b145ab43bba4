#include "parahom/rate.hpp"

#include <cmath>

#include "parahom/expansion.hpp"
#include "parahom/parallel.hpp"
#include "parahom/rng.hpp"
#include "parahom/stats.hpp"

namespace parahom {

namespace {

int whole(double x, const char* what) {
  const long v = std::lround(x);
  if (v < 1 || std::abs(x - static_cast<double>(v)) > 1e-8 * std::max(1.0, x))
    throw ConfigError(std::string("two-scale setup: ") + what + " is not a whole number of micro steps");
  return static_cast<int>(v);
}

}  // namespace

void validate(const TwoScaleSetup& s) {
  if (s.dim < 1 || s.dim > kMaxDim) throw ConfigError("two-scale setup: d must be 1, 2 or 3");
  if (!(s.box > 0.0) || !(s.horizon > 0.0)) throw ConfigError("two-scale setup: box and horizon must be positive");
  if (!(s.h_micro > 0.0) || !(s.tau_micro > 0.0)) throw ConfigError("two-scale setup: micro spacings must be positive");
  if (s.rve_samples < 1) throw ConfigError("two-scale setup: rve_samples must be >= 1");
  validate(s.spec);
}

Lattice micro_lattice(const TwoScaleSetup& s, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("two-scale setup: eps must lie in (0, 1]");
  const double length = s.locked_period ? s.box / eps : s.micro_length;
  const double period = s.locked_period ? s.horizon / (eps * eps) : s.micro_period;
  const int n = whole(length / s.h_micro, "micro torus side");
  const int nt = whole(period / s.tau_micro, "micro time period");
  if (nt < 2) throw ConfigError("two-scale setup: micro time period must span at least two steps");
  return make_lattice(s.dim, n, nt, length, s.tau_micro);
}

CylinderProblem make_problem(const TwoScaleSetup& s, double eps) {
  validate(s);
  CylinderProblem p;
  p.geometry = s.geometry;
  p.box = s.box;
  p.horizon = s.horizon;
  p.eps = eps;
  p.micro = micro_lattice(s, eps);
  p.source = s.source;
  validate(p);
  validate(s.spec, p.micro);
  return p;
}

std::uint64_t realization_index(int eps_index, int sample) {
  return (static_cast<std::uint64_t>(eps_index) << 32) | static_cast<std::uint32_t>(sample);
}

RveEstimate reference_effective(const TwoScaleSetup& s) {
  validate(s);
  const int n = whole(s.rve_length / s.h_micro, "rve side");
  const int nt = whole(s.rve_period / s.tau_micro, "rve period");
  const Lattice lat = make_lattice(s.dim, n, nt, s.rve_length, s.tau_micro);
  return rve_effective(s.spec, lat, s.rve_samples, combine_key(s.seed, 0x7e5ULL), s.cell, s.workers);
}

RateResult rate_experiment(const TwoScaleSetup& s, const RateOptions& o) {
  validate(s);
  if (o.eps_list.size() < 2) throw ConfigError("rate: need at least two eps values");
  if (o.samples < 1) throw ConfigError("rate: need at least one sample");
  RateResult res;
  if (o.abar) {
    res.abar_ref = *o.abar;
  } else {
    const RveEstimate rve = reference_effective(s);
    res.abar_ref = rve.mean;
    res.abar_ref_stderr = rve.scalar_stderr;
  }

  std::vector<std::vector<double>> errors(o.eps_list.size());
  double u0_scale = 0.0;
  for (std::size_t e = 0; e < o.eps_list.size(); ++e) {
    const double eps = o.eps_list[e];
    const CylinderProblem p = make_problem(s, eps);
    const MacroSolution u0 = solve_hom(res.abar_ref, p, s.solver);
    u0_scale = std::max(u0_scale, spacetime_l2(u0.u));
    std::vector<RateRow> rows(static_cast<std::size_t>(o.samples));
    parallel_for(rows.size(), s.workers, [&](std::size_t k) {
      RateRow& row = rows[k];
      row.eps = eps;
      row.sample = static_cast<int>(k);
      try {
        const CoefficientField a =
            sample(s.spec, p.micro, s.seed, realization_index(static_cast<int>(e), static_cast<int>(k)));
        const MacroSolution ue = solve_eps(a, p, s.solver);
        row.err_l2 = spacetime_l2(ue.u - u0.u);
        if (o.with_expansion) {
          const CorrectorSet c = solve_cell(a, 0.0, s.cell);
          const Tensor2 own = effective(a, c);
          const FluxCorrector sigma = solve_sigma(flux(a, c, own));
          const TwoScaleInputs in{p, a, c, sigma, res.abar_ref, ue.u, u0.u};
          const Expansion ex = expansion(in);
          row.w_norm = ex.report.w_l2;
          row.residual = residual_check(in, ex).relative;
        }
      } catch (const SolverError&) {
        row.failed = true;
      }
    });
    RateSummaryRow sum;
    sum.eps = eps;
    for (const RateRow& r : rows) {
      if (r.failed) {
        ++res.failures;
        continue;
      }
      errors[e].push_back(r.err_l2);
    }
    sum.samples = static_cast<int>(errors[e].size());
    sum.mean_err = sample_mean(errors[e]);
    sum.stderr_err = errors[e].size() > 1 ? sample_stddev(errors[e]) / std::sqrt(errors[e].size()) : 0.0;
    res.summary.push_back(sum);
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
  }

  res.slope_defined = true;
  for (const RateSummaryRow& r : res.summary)
    if (r.samples == 0 || !(r.mean_err > 1e-12 * std::max(u0_scale, 1e-300))) res.slope_defined = false;
  if (!res.slope_defined) return res;

  std::vector<double> x, y;
  for (const RateSummaryRow& r : res.summary) {
    x.push_back(std::log(r.eps));
    y.push_back(std::log(r.mean_err));
  }
  res.slope = linear_fit(x, y).slope;

  // bootstrap over samples, independently per eps
  const int reps = 200;
  const KeyedStream rng = KeyedStream(s.seed).split(0x51095ULL);
  std::vector<double> slopes;
  for (int b = 0; b < reps; ++b) {
    std::vector<double> yb;
    for (std::size_t e = 0; e < errors.size(); ++e) {
      const KeyedStream rs = rng.split(static_cast<std::uint64_t>(b)).split(e);
      const std::uint64_t n = errors[e].size();
      double m = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) m += errors[e][static_cast<std::size_t>(rs.bits(i) % n)];
      yb.push_back(std::log(m / static_cast<double>(n)));
    }
    slopes.push_back(linear_fit(x, yb).slope);
  }
  res.slope_stderr = sample_stddev(slopes);
  return res;
}

}  // namespace parahom
