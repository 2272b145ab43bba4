#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "parahom/expansion.hpp"
#include "parahom/parallel.hpp"
#include "parahom/phom.hpp"
#include "parahom/stats.hpp"

namespace parahom::cli {

using ojson = nlohmann::ordered_json;

Context make_context(Config c, int workers) {
  Context ctx;
  c.run.workers = workers;
  ctx.config = std::move(c);
  ctx.workers = workers;
  ctx.cell.solver.tol = ctx.config.run.tol;
  ctx.cell.method = ctx.config.run.method == "time_marching" ? CellMethod::time_marching : CellMethod::space_time;
  return ctx;
}

TwoScaleSetup make_setup(const Context& ctx) {
  const Config& c = ctx.config;
  const TwoScaleConfig& t = c.twoscale;
  TwoScaleSetup s;
  s.dim = c.lattice.d;
  s.spec = c.ensemble;
  s.geometry = geometry_from_string(t.geometry);
  s.box = t.box;
  s.horizon = t.horizon;
  s.h_micro = t.h_micro;
  s.tau_micro = t.tau_micro ? *t.tau_micro : t.h_micro * t.h_micro;
  s.locked_period = t.locked_period;
  s.micro_length = t.micro_length;
  s.micro_period = t.micro_period;
  s.source = make_source(t.source, s.geometry, t.box);
  s.seed = c.run.seed;
  s.workers = ctx.workers;
  s.solver.tol = c.run.tol;
  s.cell = ctx.cell;
  s.rve_samples = t.rve_samples;
  s.rve_length = t.rve_length;
  s.rve_period = t.rve_period;
  return s;
}

namespace {

ojson tensor_json(const Tensor2& t) {
  ojson rows = ojson::array();
  for (int i = 0; i < t.dim; ++i) {
    ojson r = ojson::array();
    for (int k = 0; k < t.dim; ++k) r.push_back(t(i, k));
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> tensor_header(int d, const std::string& prefix) {
  std::vector<std::string> h;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) h.push_back(prefix + std::to_string(i + 1) + std::to_string(k + 1));
  return h;
}

std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void put_tensor(Csv& csv, const Tensor2& t) {
  for (int i = 0; i < t.dim; ++i)
    for (int k = 0; k < t.dim; ++k) csv << t(i, k);
}

struct Failures {
  std::mutex m;
  std::vector<std::pair<int, std::string>> list;
  void add(int sample, const std::string& what) {
    std::lock_guard lock(m);
    list.emplace_back(sample, what);
  }
  ojson json() {
    std::sort(list.begin(), list.end());
    ojson a = ojson::array();
    for (auto& [s, w] : list) a.push_back({{"sample", s}, {"error", w}});
    return a;
  }
};

int finish_status(Failures& f) { return f.list.empty() ? kExitOk : kExitSolver; }

// ---- effective ----
int cmd_effective(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  validate(c.ensemble, lat);
  const int n = c.run.samples;
  struct Row {
    Tensor2 abar;
    double residual = 0.0, grad_max = 0.0;
    int iterations = 0;
    bool ok = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(n));
  Failures fails;
  parallel_for(rows.size(), ctx.workers, [&](std::size_t s) {
    try {
      const CoefficientField a = sample(c.ensemble, lat, c.run.seed, s);
      const CorrectorSet cs = solve_cell(a, 0.0, ctx.cell);
      Row& r = rows[s];
      r.abar = effective(a, cs);
      for (int j = 0; j < lat.dim; ++j) {
        r.residual = std::max(r.residual, max_abs(corrector_residual(a, cs, j)));
        for (const ScalarField& g : cs.grad_phi[static_cast<std::size_t>(j)]) r.grad_max = std::max(r.grad_max, max_abs(g));
        r.iterations = std::max(r.iterations, cs.reports[static_cast<std::size_t>(j)].iterations);
      }
      r.ok = true;
    } catch (const SolverError& e) {
      fails.add(static_cast<int>(s), e.what());
    }
  });
  Csv csv(join(join({"sample"}, tensor_header(lat.dim, "a")), {"residual_max", "grad_phi_max", "iterations"}));
  Tensor2 mean = Tensor2::zero(lat.dim);
  int good = 0;
  double worst = 0.0;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (!rows[s].ok) continue;
    csv.row() << static_cast<int>(s);
    put_tensor(csv, rows[s].abar);
    csv << rows[s].residual << rows[s].grad_max << rows[s].iterations;
    for (int i = 0; i < lat.dim; ++i)
      for (int k = 0; k < lat.dim; ++k) mean(i, k) += rows[s].abar(i, k);
    worst = std::max(worst, rows[s].residual);
    ++good;
  }
  for (int i = 0; i < lat.dim; ++i)
    for (int k = 0; k < lat.dim; ++k) mean(i, k) /= std::max(good, 1);
  w.write("effective.csv", csv.str());
  ojson j;
  j["abar_mean"] = tensor_json(mean);
  j["samples"] = good;
  j["residual_max"] = worst;
  j["failures"] = fails.json();
  w.write_json("effective_summary.json", j);
  return finish_status(fails);
}

// ---- beta-sweep ----
int cmd_beta_sweep(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  validate(c.ensemble, lat);
  std::vector<double> betas = c.run.betas;
  std::sort(betas.begin(), betas.end(), std::greater<>());
  Csv csv(join(join({"sample", "beta"}, tensor_header(lat.dim, "a")), {"grad_norm", "phi_norm", "iterations", "residual"}));
  std::vector<std::vector<BetaSweepRow>> out(static_cast<std::size_t>(c.run.samples));
  Failures fails;
  parallel_for(out.size(), ctx.workers, [&](std::size_t s) {
    try {
      const CoefficientField a = sample(c.ensemble, lat, c.run.seed, s);
      out[s] = beta_sweep(a, betas, ctx.cell);
      const CorrectorSet c0 = solve_cell(a, 0.0, ctx.cell);
      BetaSweepRow r;
      r.beta = 0.0;
      r.abar = effective(a, c0);
      double g2 = 0.0, p2 = 0.0;
      for (int j = 0; j < lat.dim; ++j) {
        for (const ScalarField& g : c0.grad_phi[static_cast<std::size_t>(j)]) g2 += std::pow(rms(g), 2);
        p2 += std::pow(rms(c0.phi[static_cast<std::size_t>(j)]), 2);
        if (c0.reports[static_cast<std::size_t>(j)].relative_residual >= r.report.relative_residual)
          r.report = c0.reports[static_cast<std::size_t>(j)];
      }
      r.grad_norm = std::sqrt(g2);
      r.phi_norm = std::sqrt(p2);
      out[s].push_back(r);
    } catch (const SolverError& e) {
      fails.add(static_cast<int>(s), e.what());
    }
  });
  for (std::size_t s = 0; s < out.size(); ++s)
    for (const BetaSweepRow& r : out[s]) {
      csv.row() << static_cast<int>(s) << r.beta;
      put_tensor(csv, r.abar);
      csv << r.grad_norm << r.phi_norm << r.report.iterations << r.report.relative_residual;
    }
  w.write("beta_sweep.csv", csv.str());
  ojson j;
  j["betas"] = betas;
  j["failures"] = fails.json();
  w.write_json("beta_sweep_summary.json", j);
  return finish_status(fails);
}

// ---- fluxcor-verify ----
int cmd_fluxcor(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  validate(c.ensemble, lat);
  std::vector<double> radii;
  for (double r = std::max(1.0, lat.h); r <= 0.5 * lat.length + 1e-12 && r * r <= 0.5 * lat.time_period() + 1e-12;
       r *= 2.0)
    radii.push_back(r);
  struct Row {
    IdentityReport id;
    std::vector<GrowthRow> growth;
    bool ok = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(c.run.samples));
  Failures fails;
  parallel_for(rows.size(), ctx.workers, [&](std::size_t s) {
    try {
      const SampleFields f = solve_sample(c.ensemble, lat, c.run.seed, s, ctx.cell);
      rows[s].id = verify_identities(f.sigma, f.q, f.correctors, &f.a);
      if (!radii.empty()) rows[s].growth = growth_profile(f.sigma, 0, radii);
      rows[s].ok = true;
    } catch (const SolverError& e) {
      fails.add(static_cast<int>(s), e.what());
    }
  });
  Csv id({"sample", "poisson", "divergence", "time_row", "flux_divergence", "skew"});
  Csv gr({"sample", "r", "rms_increment", "mu_d", "offsets"});
  IdentityReport worst;
  std::map<double, std::vector<double>> by_r;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (!rows[s].ok) continue;
    const IdentityReport& r = rows[s].id;
    id.row() << static_cast<int>(s) << r.poisson << r.divergence << r.time_row << r.flux_divergence << r.skew;
    worst.poisson = std::max(worst.poisson, r.poisson);
    worst.divergence = std::max(worst.divergence, r.divergence);
    worst.time_row = std::max(worst.time_row, r.time_row);
    worst.flux_divergence = std::max(worst.flux_divergence, r.flux_divergence);
    worst.skew = std::max(worst.skew, r.skew);
    for (const GrowthRow& g : rows[s].growth) {
      gr.row() << static_cast<int>(s) << g.radius << g.rms_increment << mu_d(g.radius, lat.dim) << g.offsets;
      by_r[g.radius].push_back(g.rms_increment);
    }
  }
  w.write("fluxcor.csv", id.str());
  w.write("growth.csv", gr.str());
  ojson j;
  j["max"] = {{"poisson", worst.poisson},
              {"divergence", worst.divergence},
              {"time_row", worst.time_row},
              {"flux_divergence", worst.flux_divergence},
              {"skew", worst.skew}};
  ojson g = ojson::array();
  for (auto& [r, v] : by_r) {
    double m2 = 0.0;
    for (double x : v) m2 += x * x;
    const double rms_all = std::sqrt(m2 / static_cast<double>(v.size()));
    g.push_back({{"r", r}, {"rms", rms_all}, {"mu_d", mu_d(r, lat.dim)}, {"ratio", rms_all / mu_d(r, lat.dim)}});
  }
  j["growth"] = g;
  j["failures"] = fails.json();
  w.write_json("fluxcor_summary.json", j);
  return finish_status(fails);
}

// ---- rate ----
int cmd_rate(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const TwoScaleSetup s = make_setup(ctx);
  RateOptions o;
  o.eps_list = c.run.eps;
  o.samples = c.run.samples;
  o.with_expansion = c.twoscale.with_expansion;
  if (c.twoscale.abar) o.abar = Tensor2::scalar(s.dim, *c.twoscale.abar);
  const RateResult r = rate_experiment(s, o);
  Csv csv({"eps", "sample", "err_L2", "w_norm", "residual", "failed"});
  for (const RateRow& row : r.rows)
    csv.row() << row.eps << row.sample << row.err_l2 << row.w_norm << row.residual << row.failed;
  w.write("rate.csv", csv.str());
  ojson j;
  j["abar_ref"] = tensor_json(r.abar_ref);
  j["abar_ref_stderr"] = r.abar_ref_stderr;
  j["slope_defined"] = r.slope_defined;
  j["slope"] = r.slope_defined ? ojson(r.slope) : ojson(nullptr);
  j["slope_stderr"] = r.slope_defined ? ojson(r.slope_stderr) : ojson(nullptr);
  ojson rows = ojson::array();
  for (const RateSummaryRow& q : r.summary)
    rows.push_back({{"eps", q.eps}, {"mean_err", q.mean_err}, {"stderr", q.stderr_err}, {"samples", q.samples}});
  j["per_eps"] = rows;
  j["failures"] = r.failures;
  w.write_json("rate_summary.json", j);
  return r.failures ? kExitSolver : kExitOk;
}

// ---- residual ----
int cmd_residual(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  TwoScaleSetup s = make_setup(ctx);
  const double eps = c.run.eps.at(0);
  std::vector<double> hs = c.twoscale.h_micro_list.empty() ? std::vector<double>{s.h_micro} : c.twoscale.h_micro_list;
  Csv csv({"h_micro", "eps", "err_L2", "w_L2", "grad_w_L2", "residual", "residual_L2", "residual_without_sigma",
           "degenerate"});
  ojson rows = ojson::array();
  double prev = -1.0;
  // refinement keeps tau_micro / h_micro fixed
  const double tau_ratio = s.tau_micro / s.h_micro;
  for (double h : hs) {
    s.h_micro = h;
    s.tau_micro = tau_ratio * h;
    const CylinderProblem p = make_problem(s, eps);
    const CoefficientField a = sample(s.spec, p.micro, s.seed, 0);
    const CorrectorSet cs = solve_cell(a, 0.0, s.cell);
    const Tensor2 abar = effective(a, cs);
    const FluxCorrector sigma = solve_sigma(flux(a, cs, abar));
    const MacroSolution ue = solve_eps(a, p, s.solver);
    const MacroSolution u0 = solve_hom(abar, p, s.solver);
    const TwoScaleInputs in{p, a, cs, sigma, abar, ue.u, u0.u};
    Expansion e = expansion(in);
    e.report.seed = s.seed;
    const ResidualReport full = residual_check(in, e, true);
    const ResidualReport bare = residual_check(in, e, false);
    csv.row() << h << eps << e.report.err_l2 << e.report.w_l2 << e.report.grad_w_l2 << full.relative
              << full.relative_l2 << bare.relative << e.report.degenerate;
    ojson r = {{"h_micro", h},
               {"residual", full.relative},
               {"residual_absolute", full.absolute},
               {"residual_without_sigma", bare.relative},
               {"err_L2", e.report.err_l2},
               {"w_L2", e.report.w_l2},
               {"degenerate", e.report.degenerate}};
    if (prev > 0.0) r["reduction_factor"] = prev / full.relative;
    prev = full.relative;
    rows.push_back(r);
  }
  w.write("residual.csv", csv.str());
  w.write_json("residual_summary.json", ojson{{"eps", eps}, {"rows", rows}});
  return kExitOk;
}

// ---- fluct ----
int cmd_fluct(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  FluctOptions o;
  o.p_list = c.run.p;
  o.max_p = c.run.max_p;
  o.theta = c.run.theta;
  o.seed = c.run.seed;
  o.workers = ctx.workers;
  o.cell = ctx.cell;
  const FluctResult r = fluct_suite(c.ensemble, lat, c.run.samples, o);
  Csv est({"label", "p", "n_samples", "estimate", "half_width"});
  for (const MomentEstimate& m : r.estimates) est.row() << m.label << m.p << m.n_samples << m.estimate << m.half_width;
  w.write("fluct.csv", est.str());
  Csv per({"sample", "grad_energy", "grad_energy_shifted", "increment_sq", "sigma_top_increment_sq", "chi", "censored",
           "chi_shifted", "censored_shifted"});
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const FluctSample& f = r.samples[s];
    per.row() << static_cast<int>(s) << f.grad_energy << f.grad_energy_shifted << f.increment << f.growth << f.chi.chi
              << f.chi.censored << f.chi_shifted.chi << f.chi_shifted.censored;
  }
  w.write("fluct_samples.csv", per.str());
  ojson j;
  ojson st = ojson::array();
  for (const StationarityCheck& s : r.stationarity)
    st.push_back({{"label", s.label},
                  {"mean_origin", s.mean_origin},
                  {"half_width_origin", s.half_width_origin},
                  {"mean_shifted", s.mean_shifted},
                  {"half_width_shifted", s.half_width_shifted},
                  {"agree", s.agree}});
  j["stationarity"] = st;
  j["censored_fraction"] = r.censored_fraction;
  j["increment_distance"] = r.increment_distance;
  j["failures"] = r.failures;
  w.write_json("fluct_summary.json", j);
  return r.failures ? kExitSolver : kExitOk;
}

// ---- minrad ----
int cmd_minrad(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  validate(c.ensemble, lat);
  const std::vector<double> radii = dyadic_radii(lat);
  std::vector<MinimalRadiusSample> out(static_cast<std::size_t>(c.run.samples));
  std::vector<char> ok(out.size(), 0);
  Failures fails;
  parallel_for(out.size(), ctx.workers, [&](std::size_t s) {
    try {
      const SampleFields f = solve_sample(c.ensemble, lat, c.run.seed, s, ctx.cell);
      out[s] = minimal_radius(f.correctors, f.sigma, c.run.theta, radii);
      ok[s] = 1;
    } catch (const SolverError& e) {
      fails.add(static_cast<int>(s), e.what());
    }
  });
  Csv chi({"sample", "chi", "censored"});
  Csv fun({"sample", "R", "first", "second"});
  std::vector<double> chi2;
  int censored = 0, good = 0;
  for (std::size_t s = 0; s < out.size(); ++s) {
    if (!ok[s]) continue;
    ++good;
    chi.row() << static_cast<int>(s) << out[s].chi << out[s].censored;
    for (std::size_t k = 0; k < out[s].radii.size(); ++k)
      fun.row() << static_cast<int>(s) << out[s].radii[k] << out[s].first[k] << out[s].second[k];
    if (out[s].censored)
      ++censored;
    else
      chi2.push_back(out[s].chi * out[s].chi);
  }
  w.write("minrad.csv", chi.str());
  w.write("minrad_functionals.csv", fun.str());
  ojson j;
  j["theta"] = c.run.theta;
  j["radii"] = radii;
  j["samples"] = good;
  j["censored_fraction"] = good ? static_cast<double>(censored) / good : 0.0;
  j["mean_chi_squared_uncensored"] = sample_mean(chi2);
  j["failures"] = fails.json();
  w.write_json("minrad_summary.json", j);
  return finish_status(fails);
}

// ---- commutator ----
TestFlux bump_flux(double box, double horizon, int dim) {
  return [box, horizon, dim](const std::array<double, kMaxDim>& x, double t) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double z = (x[i] - 0.5 * box) / (0.25 * box);
      r2 += z * z;
    }
    const double zt = (t - 0.5 * horizon) / (0.25 * horizon);
    r2 += zt * zt;
    std::array<double, kMaxDim> v{};
    if (r2 < 1.0) v[0] = std::pow(1.0 - r2, 4);
    return v;
  };
}

int cmd_commutator(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const TwoScaleSetup s = make_setup(ctx);
  std::optional<Tensor2> abar;
  if (c.twoscale.abar) abar = Tensor2::scalar(s.dim, *c.twoscale.abar);
  const CommutatorResult r =
      variance_scaling(s, c.run.eps, c.run.samples, bump_flux(s.box, s.horizon, s.dim), abar);
  Csv csv({"eps", "sample", "H"});
  for (std::size_t e = 0; e < r.values.size(); ++e)
    for (std::size_t k = 0; k < r.values[e].size(); ++k) csv.row() << r.rows[e].eps << static_cast<int>(k) << r.values[e][k];
  w.write("commutator.csv", csv.str());
  ojson rows = ojson::array();
  for (const CommutatorRow& q : r.rows)
    rows.push_back({{"eps", q.eps},
                    {"samples", q.samples},
                    {"mean", q.mean},
                    {"sd", q.sd},
                    {"rescaled_sd", q.rescaled_sd},
                    {"rescaled_half_width", q.rescaled_half_width}});
  w.write_json("commutator_summary.json",
               ojson{{"abar_ref", tensor_json(r.abar_ref)}, {"rows", rows}, {"failures", r.failures}});
  return r.failures ? kExitSolver : kExitOk;
}

// ---- dump-field ----
std::string phom_bytes(const ScalarField& u) {
  const std::vector<unsigned char> b = encode_phom(u);
  return std::string(b.begin(), b.end());
}

int cmd_dump(const Context& ctx, RunWriter& w) {
  const Config& c = ctx.config;
  const Lattice lat = make_run_lattice(c);
  validate(c.ensemble, lat);
  const int d = lat.dim;
  const DumpConfig& dc = c.dump;
  ojson j;
  j["field"] = dc.field;
  j["lattice"] = {{"d", lat.dim}, {"n", lat.n}, {"n_t", lat.n_t}, {"L", lat.length}, {"tau", lat.tau}};
  const CoefficientField a = sample(c.ensemble, lat, c.run.seed, 0);
  if (dc.field == "coefficient") {
    if (a.isotropic()) {
      w.write("coefficient.phom", phom_bytes(ScalarField(lat, std::vector<double>(a.scalar().begin(), a.scalar().end()))));
    } else {
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          auto e = a.entry(i, k);
          w.write("coefficient_" + std::to_string(i + 1) + std::to_string(k + 1) + ".phom",
                  phom_bytes(ScalarField(lat, std::vector<double>(e.begin(), e.end()))));
        }
    }
  } else {
    if (dc.j >= d) throw SchemaError(anchor(c, "/dump/j", "direction must be below d"));
    const SampleFields f = solve_sample(c.ensemble, lat, c.run.seed, 0, ctx.cell);
    if (dc.field == "phi") {
      w.write("phi_" + std::to_string(dc.j + 1) + ".phom", phom_bytes(f.correctors.phi[static_cast<std::size_t>(dc.j)]));
    } else {
      if (dc.k > d || dc.i > d) throw SchemaError(anchor(c, "/dump", "sigma indices must be at most d"));
      w.write("sigma_" + std::to_string(dc.k + 1) + std::to_string(dc.i + 1) + std::to_string(dc.j + 1) + ".phom",
              phom_bytes(f.sigma.component(dc.k, dc.i, dc.j)));
    }
  }
  w.write_json("dump_summary.json", j);
  return kExitOk;
}

}  // namespace

Command find_command(const std::string& name) {
  static const std::map<std::string, Command> table = {
      {"effective", cmd_effective}, {"beta-sweep", cmd_beta_sweep}, {"fluxcor-verify", cmd_fluxcor},
      {"rate", cmd_rate},           {"residual", cmd_residual},     {"fluct", cmd_fluct},
      {"minrad", cmd_minrad},       {"commutator", cmd_commutator}, {"dump-field", cmd_dump}};
  auto it = table.find(name);
  return it == table.end() ? nullptr : it->second;
}

}  // namespace parahom::cli
