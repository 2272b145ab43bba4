#include "parahom/corrector.hpp"

#include <algorithm>
#include <cmath>

#include "parahom/parallel.hpp"

namespace parahom {

bool CorrectorSet::converged() const noexcept {
  return std::all_of(reports.begin(), reports.end(), [](const SolveReport& r) { return r.converged; });
}

namespace {

// beta + dt_b - div_b(M grad_f) on the full lattice
LinearOperator space_time_operator(std::shared_ptr<const DivergenceForm> L, double beta) {
  LinearOperator op;
  op.constant_nullspace = beta == 0.0;
  op.symmetric = false;
  op.apply = [L, beta](const ScalarField& u, ScalarField& out) {
    const Lattice& lat = u.lattice();
    L->apply(u, out);
    if (beta != 0.0)
      for (std::size_t s = 0; s < out.size(); ++s) out[s] += beta * u[s];
    kernels::add_backward_difference(u.data(), out.data(), axis_layout(lat, lat.dim, u.size()), 1.0 / lat.tau);
  };
  return op;
}

SolveResult solve_space_time(const CoefficientField& a, const FaceCoefficients& M, double beta, int j,
                             const CellOptions& opts) {
  auto L = std::make_shared<const DivergenceForm>(M);
  const LinearOperator A = space_time_operator(L, beta);
  const LinearOperator P = parabolic_preconditioner(a.lattice(), beta, M.mean_scalar());
  const ScalarField b = unit_source(M, j);
  return bicgstab(A, b, opts.solver, &P);
}

struct SliceSystem {
  std::vector<DivergenceForm> L;  // one per time slice
  std::vector<ScalarField> b;     // div_b(M e_j) per slice, filled per direction
};

SolveResult solve_time_marching(const CoefficientField& a, const SliceSystem& sys, double beta, int j,
                                const CellOptions& opts) {
  const Lattice& lat = a.lattice();
  const Lattice sl = lat.slice();
  const double inv_tau = 1.0 / lat.tau;
  const double shift = beta + inv_tau;

  std::vector<ScalarField> b;
  b.reserve(static_cast<std::size_t>(lat.n_t));
  double bnorm2 = 0.0;
  for (int m = 0; m < lat.n_t; ++m) {
    b.push_back(unit_source(sys.L[m].coefficients(), j));
    const double nb = norm2(b.back());
    bnorm2 += nb * nb;
  }
  const double bnorm = std::sqrt(bnorm2);
  ScalarField phi(lat);
  if (bnorm == 0.0) return {phi, SolveReport{0, 0.0, true}};

  const double a0 = sys.L.front().coefficients().mean_scalar();
  const ConstantInverse pre = ConstantInverse::slice(sl, shift, Tensor2::scalar(lat.dim, a0), Boundary::periodic);
  const LinearOperator P = pre.as_operator();
  // per-step target keeps the accumulated space-time residual below tol * ||b||
  const double step_abs = 0.1 * opts.solver.tol * bnorm / std::sqrt(static_cast<double>(lat.n_t));
  SolverOptions step_opts;
  step_opts.tol = 1e-14;
  step_opts.abs_tol = step_abs;

  ScalarField prev(sl), rhs(sl);
  int iterations = 0;
  bool settled = false;
  for (int period = 0; period < opts.max_periods && !settled; ++period) {
    const ScalarField start = prev;
    for (int m = 0; m < lat.n_t; ++m) {
      const DivergenceForm& Lm = sys.L[m];
      LinearOperator B;
      B.symmetric = Lm.coefficients().isotropic();
      B.apply = [&Lm, shift](const ScalarField& u, ScalarField& out) {
        Lm.apply(u, out);
        for (std::size_t s = 0; s < out.size(); ++s) out[s] += shift * u[s];
      };
      for (std::size_t s = 0; s < rhs.size(); ++s) rhs[s] = prev[s] * inv_tau + b[m][s];
      SolveResult r = B.symmetric ? cg(B, rhs, step_opts, &P, &prev) : bicgstab(B, rhs, step_opts, &P, &prev);
      iterations += r.report.iterations;
      prev = std::move(r.x);
      insert_slice(phi, m, prev);
    }
    // the stored period started from `start`; its seam residual is (end - start) / tau
    ScalarField diff = prev;
    diff -= start;
    settled = norm2(diff) * inv_tau <= 0.5 * opts.solver.tol * bnorm;
  }
  if (beta == 0.0) {
    const double m = mean(phi);
    for (double& v : phi.values()) v -= m;
  }
  // true space-time residual
  ScalarField res(lat);
  {
    ScalarField lphi(sl);
    for (int m = 0; m < lat.n_t; ++m) {
      const ScalarField cur = extract_slice(phi, m);
      const ScalarField before = extract_slice(phi, (m + lat.n_t - 1) % lat.n_t);
      sys.L[m].apply(cur, lphi);
      for (std::size_t s = 0; s < lphi.size(); ++s)
        lphi[s] += beta * cur[s] + (cur[s] - before[s]) * inv_tau - b[m][s];
      insert_slice(res, m, lphi);
    }
  }
  SolveReport rep;
  rep.iterations = iterations;
  rep.relative_residual = norm2(res) / bnorm;
  rep.converged = settled && rep.relative_residual <= opts.solver.tol;
  if (!rep.converged) throw SolverError("time-marching corrector did not reach the periodic state", rep);
  return {std::move(phi), rep};
}

}  // namespace

CorrectorSet solve_cell(const CoefficientField& a, double beta, const CellOptions& opts) {
  if (beta < 0.0 || !std::isfinite(beta)) throw ConfigError("solve_cell: beta must be finite and >= 0");
  const Lattice& lat = a.lattice();
  const int d = lat.dim;
  CorrectorSet out;
  out.beta = beta;
  const FaceCoefficients M(a);
  SliceSystem sys;
  if (opts.method == CellMethod::time_marching)
    for (int m = 0; m < lat.n_t; ++m) sys.L.emplace_back(FaceCoefficients(extract_slice(a, m)));
  for (int j = 0; j < d; ++j) {
    SolveResult r = opts.method == CellMethod::space_time ? solve_space_time(a, M, beta, j, opts)
                                                          : solve_time_marching(a, sys, beta, j, opts);
    out.grad_phi.push_back(grad_f(r.x));
    out.phi.push_back(std::move(r.x));
    out.reports.push_back(r.report);
  }
  return out;
}

ScalarField corrector_residual(const CoefficientField& a, const CorrectorSet& c, int j) {
  const FaceCoefficients M(a);
  const ScalarField& phi = c.phi.at(static_cast<std::size_t>(j));
  require_same_lattice(a.lattice(), phi.lattice(), "corrector_residual");
  const VectorField F = face_flux(M, c.grad_phi.at(static_cast<std::size_t>(j)), j);
  ScalarField r = dt_b(phi);
  r -= div_b(F);
  if (c.beta != 0.0) r.axpy(c.beta, phi);
  return r;
}

Tensor2 effective(const CoefficientField& a, const CorrectorSet& c) {
  const int d = a.dim();
  if (static_cast<int>(c.phi.size()) != d) throw CompatibilityError("effective: corrector count does not match d");
  for (const auto& p : c.phi) require_same_lattice(a.lattice(), p.lattice(), "effective");
  const FaceCoefficients M(a);
  Tensor2 abar = Tensor2::zero(d);
  VectorField F;
  for (int j = 0; j < d; ++j) {
    face_flux(M, c.grad_phi[j], j, F);
    for (int i = 0; i < d; ++i) abar(i, j) = mean(F[i]);
  }
  return abar;
}

FluxField flux(const CoefficientField& a, const CorrectorSet& c, const Tensor2& abar) {
  const int d = a.dim();
  if (static_cast<int>(c.phi.size()) != d) throw CompatibilityError("flux: corrector count does not match d");
  const FaceCoefficients M(a);
  FluxField out;
  out.dim = d;
  for (int j = 0; j < d; ++j) {
    require_same_lattice(a.lattice(), c.phi[j].lattice(), "flux");
    VectorField F = face_flux(M, c.grad_phi[j], j);
    VectorField q;
    for (int i = 0; i < d; ++i) {
      ScalarField qi(a.lattice(), abar(i, j));
      qi -= F[i];
      q.push_back(std::move(qi));
    }
    ScalarField qt = c.phi[j];
    const double m = mean(qt);
    for (double& v : qt.values()) v -= m;
    q.push_back(std::move(qt));
    out.q.push_back(std::move(q));
  }
  return out;
}

ScalarField flux_divergence(const FluxField& q, int j) { return div_st(q.q.at(static_cast<std::size_t>(j))); }

std::vector<BetaSweepRow> beta_sweep(const CoefficientField& a, std::span<const double> betas,
                                     const CellOptions& opts) {
  std::vector<BetaSweepRow> rows;
  for (double beta : betas) {
    if (!(beta > 0.0)) throw ConfigError("beta_sweep: every beta must be positive");
    const CorrectorSet c = solve_cell(a, beta, opts);
    BetaSweepRow row;
    row.beta = beta;
    row.abar = effective(a, c);
    double g2 = 0.0, p2 = 0.0;
    for (std::size_t j = 0; j < c.phi.size(); ++j) {
      for (const auto& g : c.grad_phi[j]) g2 += rms(g) * rms(g);
      p2 += rms(c.phi[j]) * rms(c.phi[j]);
    }
    row.grad_norm = std::sqrt(g2);
    row.phi_norm = std::sqrt(p2);
    row.report = *std::max_element(c.reports.begin(), c.reports.end(), [](const auto& x, const auto& y) {
      return x.relative_residual < y.relative_residual;
    });
    rows.push_back(row);
  }
  return rows;
}

RveEstimate rve_effective(const EnsembleSpec& spec, const Lattice& lat, int n_samples, std::uint64_t seed,
                          const CellOptions& opts, int workers) {
  if (n_samples < 1) throw ConfigError("rve_effective: need at least one sample");
  RveEstimate est;
  est.samples.assign(static_cast<std::size_t>(n_samples), Tensor2::zero(lat.dim));
  parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t s) {
    const CoefficientField a = sample(spec, lat, seed, s);
    est.samples[s] = effective(a, solve_cell(a, 0.0, opts));
  });
  const int d = lat.dim;
  est.mean = Tensor2::zero(d);
  est.stderr_of_mean = Tensor2::zero(d);
  std::vector<double> diag;
  for (const auto& t : est.samples) {
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) est.mean(i, k) += t(i, k) / n_samples;
    diag.push_back(t.trace() / d);
  }
  if (n_samples > 1) {
    for (const auto& t : est.samples)
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          const double e = t(i, k) - est.mean(i, k);
          est.stderr_of_mean(i, k) += e * e / (n_samples - 1);
        }
    for (double& v : est.stderr_of_mean.v) v = std::sqrt(v / n_samples);
  }
  double m = 0.0;
  for (double x : diag) m += x / n_samples;
  double var = 0.0;
  for (double x : diag) var += (x - m) * (x - m);
  est.scalar = m;
  est.scalar_stderr = n_samples > 1 ? std::sqrt(var / (n_samples - 1) / n_samples) : 0.0;
  return est;
}

}  // namespace parahom
