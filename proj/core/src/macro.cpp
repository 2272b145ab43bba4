#include "parahom/macro.hpp"

#include <cmath>

#include "parahom/diffusion.hpp"
#include "parahom/smoothing.hpp"

namespace parahom {

namespace {

bool near_integer(double x, long& out) {
  out = std::lround(x);
  return std::abs(x - static_cast<double>(out)) <= 1e-8 * std::max(1.0, std::abs(x));
}

}  // namespace

void validate(const CylinderProblem& p) {
  if (!(p.eps > 0.0 && p.eps <= 1.0)) throw ConfigError("problem: eps must lie in (0, 1]");
  if (!(p.box > 0.0) || !(p.horizon > 0.0)) throw ConfigError("problem: R0 and T must be positive");
  if (p.micro.dim < 1 || p.micro.n < 2) throw ConfigError("problem: micro lattice not set");
  if (p.micro.h > 0.125 + 1e-12) throw ConfigError("problem: micro spacing must resolve eps/8 (h_micro <= 1/8)");
  long n = 0, steps = 0;
  if (!near_integer(p.box / (p.eps * p.micro.h), n) || n < 3)
    throw ConfigError("problem: R0 / (eps h_micro) must be an integer >= 3");
  if (!near_integer(p.horizon / (p.eps * p.eps * p.micro.tau), steps) || steps < 1)
    throw ConfigError("problem: T / (eps^2 tau_micro) must be a positive integer");
  if (p.geometry == MacroGeometry::torus && n % p.micro.n != 0)
    throw ConfigError("problem: on the torus R0 / eps must be a whole number of micro periods");
}

int macro_steps(const CylinderProblem& p) {
  return static_cast<int>(std::lround(p.horizon / (p.eps * p.eps * p.micro.tau)));
}

Lattice macro_lattice(const CylinderProblem& p) {
  validate(p);
  Lattice lat;
  lat.dim = p.micro.dim;
  lat.n = static_cast<int>(std::lround(p.box / (p.eps * p.micro.h)));
  lat.n_t = macro_steps(p) + 1;
  lat.length = p.box;
  lat.h = p.box / lat.n;
  lat.tau = p.horizon / macro_steps(p);
  return lat;
}

std::vector<std::size_t> micro_site_map(const CylinderProblem& p) {
  const Lattice mac = macro_lattice(p);
  const std::size_t ns = mac.spatial_sites();
  std::vector<std::size_t> map(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    SiteCoord c = site_coord(mac, s);
    c[mac.dim] = 0;
    for (int i = 0; i < mac.dim; ++i) c[i] %= p.micro.n;
    map[s] = site_index(p.micro, c);
  }
  return map;
}

int micro_time(const CylinderProblem& p, int level) { return level % p.micro.n_t; }

CoefficientField tile_slice(const CoefficientField& micro, const CylinderProblem& p, int level) {
  require_same_lattice(micro.lattice(), p.micro, "tile_slice");
  const Lattice mac = macro_lattice(p);
  const Lattice sl = mac.slice();
  CoefficientField out(sl, micro.isotropic());
  const std::vector<std::size_t> map = micro_site_map(p);
  const std::size_t off = p.micro.spatial_sites() * static_cast<std::size_t>(micro_time(p, level));
  const int d = mac.dim;
  const int comps = micro.isotropic() ? 1 : d * d;
  for (int c = 0; c < comps; ++c) {
    const int i = micro.isotropic() ? 0 : c / d;
    const int k = micro.isotropic() ? 0 : c % d;
    auto src = micro.entry(i, k);
    auto dst = out.entry(i, k);
    for (std::size_t s = 0; s < map.size(); ++s) dst[s] = src[off + map[s]];
  }
  return out;
}

ScalarField tile_field(const ScalarField& micro, const CylinderProblem& p) {
  require_same_lattice(micro.lattice(), p.micro, "tile_field");
  const Lattice mac = macro_lattice(p);
  const std::vector<std::size_t> map = micro_site_map(p);
  const std::size_t ns = map.size();
  const std::size_t ns_micro = p.micro.spatial_sites();
  ScalarField out(mac);
  for (int m = 0; m < mac.n_t; ++m) {
    const double* src = micro.data() + ns_micro * static_cast<std::size_t>(micro_time(p, m));
    double* dst = out.data() + ns * static_cast<std::size_t>(m);
    for (std::size_t s = 0; s < ns; ++s) dst[s] = src[map[s]];
  }
  return out;
}

CoefficientField tile_coefficients(const CoefficientField& micro, const CylinderProblem& p) {
  require_same_lattice(micro.lattice(), p.micro, "tile_coefficients");
  const Lattice mac = macro_lattice(p);
  CoefficientField out(mac, micro.isotropic());
  const std::vector<std::size_t> map = micro_site_map(p);
  const std::size_t ns = map.size();
  const std::size_t ns_micro = p.micro.spatial_sites();
  const int d = mac.dim;
  const int comps = micro.isotropic() ? 1 : d * d;
  for (int c = 0; c < comps; ++c) {
    const int i = micro.isotropic() ? 0 : c / d;
    const int k = micro.isotropic() ? 0 : c % d;
    auto src = micro.entry(i, k);
    auto dst = out.entry(i, k);
    for (int m = 0; m < mac.n_t; ++m) {
      const std::size_t so = ns_micro * static_cast<std::size_t>(micro_time(p, m));
      const std::size_t doff = ns * static_cast<std::size_t>(m);
      for (std::size_t s = 0; s < ns; ++s) dst[doff + s] = src[so + map[s]];
    }
  }
  return out;
}

std::vector<char> boundary_mask(const CylinderProblem& p) {
  const Lattice mac = macro_lattice(p);
  std::vector<char> mask(mac.spatial_sites(), 0);
  if (p.geometry == MacroGeometry::torus) return mask;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    const SiteCoord c = site_coord(mac, s);
    for (int i = 0; i < mac.dim; ++i)
      if (c[i] == 0) mask[s] = 1;
  }
  return mask;
}

ScalarField source_field(const CylinderProblem& p) {
  const Lattice mac = macro_lattice(p);
  ScalarField F(mac);
  if (!p.source) return F;
  for (std::size_t s = 0; s < F.size(); ++s) {
    const SiteCoord c = site_coord(mac, s);
    std::array<double, kMaxDim> x{};
    for (int i = 0; i < mac.dim; ++i) x[i] = c[i] * mac.h;
    F[s] = p.source(x, c[mac.dim] * mac.tau);
  }
  return F;
}

namespace {

struct StepSolver {
  const CylinderProblem& p;
  Lattice mac;
  Lattice sl;
  std::vector<char> mask;
  std::vector<std::size_t> boundary;
  SolverOptions opts;

  StepSolver(const CylinderProblem& prob, const SolverOptions& o)
      : p(prob), mac(macro_lattice(prob)), sl(mac.slice()), mask(boundary_mask(prob)), opts(o) {
    for (std::size_t s = 0; s < mask.size(); ++s)
      if (mask[s]) boundary.push_back(s);
  }

  // coefficient slice for each level (level >= 1)
  template <class SliceFn>
  MacroSolution run(SliceFn&& slice_at, const Tensor2& precond_tensor) {
    MacroSolution sol;
    sol.u = ScalarField(mac);
    const ScalarField F = source_field(p);
    const double inv_tau = 1.0 / mac.tau;
    const Boundary bnd = p.geometry == MacroGeometry::torus ? Boundary::periodic : Boundary::dirichlet;
    const ConstantInverse pre = ConstantInverse::slice(sl, inv_tau, precond_tensor, bnd);
    const LinearOperator P = pre.as_operator();
    ScalarField prev(sl), rhs(sl), masked(sl);
    for (int m = 1; m < mac.n_t; ++m) {
      const CoefficientField a = slice_at(m);
      const DivergenceForm L{FaceCoefficients(a)};
      LinearOperator B;
      B.symmetric = a.isotropic();
      B.apply = [&](const ScalarField& u, ScalarField& out) {
        masked = u;
        for (std::size_t s : boundary) masked[s] = 0.0;
        L.apply(masked, out);
        for (std::size_t s = 0; s < out.size(); ++s) out[s] += inv_tau * masked[s];
        for (std::size_t s : boundary) out[s] = u[s];
      };
      const std::size_t off = sl.spatial_sites() * static_cast<std::size_t>(m);
      for (std::size_t s = 0; s < rhs.size(); ++s) rhs[s] = prev[s] * inv_tau + F[off + s];
      for (std::size_t s : boundary) rhs[s] = 0.0;
      SolveResult r = B.symmetric ? cg(B, rhs, opts, &P, &prev) : bicgstab(B, rhs, opts, &P, &prev);
      sol.total_iterations += r.report.iterations;
      sol.worst_residual = std::max(sol.worst_residual, r.report.relative_residual);
      prev = std::move(r.x);
      insert_slice(sol.u, m, prev);
    }
    return sol;
  }
};

Tensor2 diagonal_part(const Tensor2& t) {
  Tensor2 d = Tensor2::zero(t.dim);
  for (int i = 0; i < t.dim; ++i) d(i, i) = t(i, i);
  return d;
}

}  // namespace

MacroSolution solve_eps(const CoefficientField& a_micro, const CylinderProblem& p, const SolverOptions& opts) {
  validate(p);
  require_same_lattice(a_micro.lattice(), p.micro, "solve_eps");
  StepSolver solver(p, opts);
  const double a0 = FaceCoefficients(a_micro).mean_scalar();
  return solver.run([&](int m) { return tile_slice(a_micro, p, m); }, Tensor2::scalar(p.micro.dim, a0));
}

MacroSolution solve_hom(const Tensor2& abar, const CylinderProblem& p, const SolverOptions& opts) {
  validate(p);
  if (abar.dim != p.micro.dim) throw CompatibilityError("solve_hom: abar dimension mismatch");
  const Lattice mac = macro_lattice(p);
  const Lattice sl = mac.slice();
  if (p.geometry == MacroGeometry::torus) {
    // constant coefficients on the torus: each step is one exact Fourier solve
    MacroSolution sol;
    sol.u = ScalarField(mac);
    const ScalarField F = source_field(p);
    const double inv_tau = 1.0 / mac.tau;
    const ConstantInverse inv = ConstantInverse::slice(sl, inv_tau, abar, Boundary::periodic);
    ScalarField prev(sl), rhs(sl), next(sl);
    for (int m = 1; m < mac.n_t; ++m) {
      const std::size_t off = sl.spatial_sites() * static_cast<std::size_t>(m);
      for (std::size_t s = 0; s < rhs.size(); ++s) rhs[s] = prev[s] * inv_tau + F[off + s];
      inv.apply(rhs, next);
      prev = next;
      insert_slice(sol.u, m, prev);
    }
    return sol;
  }
  const bool iso = abar.is_diagonal() && abar(0, 0) == abar(abar.dim - 1, abar.dim - 1) &&
                   (abar.dim < 3 || abar(1, 1) == abar(0, 0));
  CoefficientField a(sl, iso);
  if (iso) {
    std::fill(a.scalar().begin(), a.scalar().end(), abar(0, 0));
  } else {
    for (int i = 0; i < abar.dim; ++i)
      for (int k = 0; k < abar.dim; ++k) std::ranges::fill(a.entry(i, k), abar(i, k));
  }
  StepSolver solver(p, opts);
  return solver.run([&](int) { return a; }, diagonal_part(abar));
}

ScalarField cutoff_field(const CylinderProblem& p) {
  const Lattice mac = macro_lattice(p);
  ScalarField psi(mac);
  const std::size_t ns = mac.spatial_sites();
  std::vector<double> spatial(ns, 1.0);
  if (p.geometry == MacroGeometry::dirichlet_box) {
    for (std::size_t s = 0; s < ns; ++s) {
      const SiteCoord c = site_coord(mac, s);
      double dist = p.box;
      for (int i = 0; i < mac.dim; ++i) {
        const double x = c[i] * mac.h;
        dist = std::min({dist, x, p.box - x});
      }
      spatial[s] = cutoff_profile(dist, p.eps);
    }
  }
  for (int m = 0; m < mac.n_t; ++m) {
    const double pt = cutoff_profile(std::sqrt(m * mac.tau), p.eps);
    for (std::size_t s = 0; s < ns; ++s) psi[static_cast<std::size_t>(m) * ns + s] = spatial[s] * pt;
  }
  return psi;
}

double spacetime_l2(const ScalarField& u) {
  const Lattice& lat = u.lattice();
  const std::size_t ns = lat.spatial_sites();
  double total = 0.0;
  for (std::size_t s = ns; s < u.size(); ++s) total += u[s] * u[s];
  return std::sqrt(total * lat.cell_volume());
}

}  // namespace parahom
