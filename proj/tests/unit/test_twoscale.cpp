#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "parahom/expansion.hpp"
#include "parahom/smoothing.hpp"
#include "parahom/stats.hpp"

using namespace parahom;

namespace {

EnsembleSpec constant(double v) {
  EnsembleSpec s;
  s.kind = EnsembleKind::constant;
  s.value = v;
  return s;
}

EnsembleSpec board(double cell) {
  EnsembleSpec s;
  s.kind = EnsembleKind::checkerboard;
  s.mu = 0.5;
  s.phases = {0.5, 2.0};
  s.corr_length = cell;
  return s;
}

double box_source(const std::array<double, kMaxDim>& x, double t) {
  return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]) * (1.0 + t);
}

CylinderProblem box_problem(const Lattice& micro, double eps, double horizon) {
  CylinderProblem p;
  p.geometry = MacroGeometry::dirichlet_box;
  p.box = 1.0;
  p.horizon = horizon;
  p.eps = eps;
  p.micro = micro;
  p.source = box_source;
  return p;
}

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-12;
  return o;
}

}  // namespace

TEST_CASE("smoothing kernels: normalized, supported in the half ball, off-centre") {
  const Lattice lat = make_lattice(2, 64, 64, 1.0, 1.0 / 1024);
  for (double eps : {0.25, 0.125}) {
    const SpatialStencil k = spatial_kernel(lat, eps);
    double total = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t e = 0; e < k.weights.size(); ++e) {
      total += k.weights[e];
      const double x = k.offsets[e][0] * lat.h, y = k.offsets[e][1] * lat.h;
      CHECK(std::hypot(x, y) <= 0.5 * eps + 1e-12);
      CHECK(k.weights[e] > 0.0);
      cx += k.weights[e] * x;
      cy += k.weights[e] * y;
    }
    CHECK(total == doctest::Approx(1.0));
    // centroid of the bump: 1/4 along the diagonal, in units of eps
    CHECK(cx / eps == doctest::Approx(0.25 / std::sqrt(2.0)).epsilon(0.05));
    CHECK(cy / eps == doctest::Approx(0.25 / std::sqrt(2.0)).epsilon(0.05));
    const TemporalStencil t = temporal_kernel(lat, eps);
    double tw = 0.0;
    for (std::size_t e = 0; e < t.lags.size(); ++e) {
      CHECK(t.lags[e] >= 0);
      CHECK(t.lags[e] * lat.tau <= 0.25 * eps * eps + 1e-12);
      tw += t.weights[e];
    }
    CHECK(tw == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(spatial_kernel(lat, 0.5 * lat.h), ConfigError);
}

TEST_CASE("smoothing preserves constants; first-order Taylor defect [DERIVED]") {
  const Lattice lat = make_lattice(1, 512, 16, 1.0, 1e-4);
  const ScalarField c(lat, 3.0);
  const ScalarField kc = smooth_K(c, 0.0625), sc = smooth_S(c, 0.0625);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(kc[i] == doctest::Approx(3.0));
    CHECK(sc[i] == doctest::Approx(3.0));
  }
  // f = sin(2 pi x): f - K f ~ eps m f', m = first moment of the stencil in units of eps
  ScalarField f(lat);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(2 * std::numbers::pi * site_coord(lat, i)[0] * lat.h);
  const double eps = 1.0 / 64;
  const SpatialStencil st = spatial_kernel(lat, eps);
  double m = 0.0, m2 = 0.0;
  for (std::size_t e = 0; e < st.weights.size(); ++e) {
    m += st.weights[e] * st.offsets[e][0] * lat.h;
    m2 += st.weights[e] * std::pow(st.offsets[e][0] * lat.h, 2);
  }
  const ScalarField kf = smooth_K(f, eps);
  double err = 0.0, pred = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = site_coord(lat, i)[0] * lat.h;
    err = std::max(err, std::abs(kf[i] - f[i]));
    pred = std::max(pred, std::abs(m * 2 * std::numbers::pi * std::cos(2 * std::numbers::pi * x)));
  }
  CHECK(err == doctest::Approx(pred).epsilon(0.02 + 4 * std::numbers::pi * std::numbers::pi * m2 / pred));
  // zero extension: the first level sees only the lag-0 weight
  const ScalarField s0 = smooth_S(c, 0.0625, TimeExtension::zero);
  const TemporalStencil ts = temporal_kernel(lat, 0.0625);
  double w0 = 0.0;
  for (std::size_t e = 0; e < ts.lags.size(); ++e)
    if (ts.lags[e] == 0) w0 += ts.weights[e];
  CHECK(s0[0] == doctest::Approx(3.0 * w0));
}

TEST_CASE("cutoff profile") {
  const double eps = 0.1;
  CHECK(cutoff_profile(0.0, eps) == 0.0);
  CHECK(cutoff_profile(0.2, eps) == 0.0);
  CHECK(cutoff_profile(0.4, eps) == 1.0);
  CHECK(cutoff_profile(1.0, eps) == 1.0);
  CHECK(cutoff_profile(0.3, eps) == doctest::Approx(0.5));
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = cutoff_profile(0.2 + 0.002 * i, eps);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("problem validation and lattice mapping") {
  const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
  CylinderProblem p = box_problem(micro, 0.5, 0.125);
  validate(p);
  const Lattice mac = macro_lattice(p);
  CHECK(mac.n == 16);
  CHECK(mac.h == doctest::Approx(1.0 / 16));
  CHECK(mac.tau == doctest::Approx(0.25 * 0.125));
  CHECK(macro_steps(p) == 4);
  CHECK(mac.n_t == 5);
  const auto map = micro_site_map(p);
  CHECK(map[site_index(mac.slice(), {9, 10, 0, 0})] == site_index(micro.slice(), {1, 2, 0, 0}));
  CHECK(micro_time(p, 11) == 3);
  const auto mask = boundary_mask(p);
  CHECK(mask[site_index(mac.slice(), {0, 5, 0, 0})]);
  CHECK_FALSE(mask[site_index(mac.slice(), {1, 5, 0, 0})]);

  CylinderProblem bad = p;
  bad.eps = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = p;
  bad.micro = make_lattice(2, 4, 8, 1.0, 0.125);  // h_micro = 1/4
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = p;
  bad.horizon = 0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = p;
  bad.geometry = MacroGeometry::torus;
  bad.micro = make_lattice(2, 24, 8, 3.0, 0.125);  // 16 macro nodes, 24 micro sites
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("macro evolution matches a dense implicit Euler solve [DERIVED]") {
  const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
  const CoefficientField a = sample(board(0.25), micro, 12, 0);
  const CylinderProblem p = box_problem(micro, 0.5, 0.125);
  const Lattice mac = macro_lattice(p);
  const MacroSolution ue = solve_eps(a, p, tight());
  oracle::Grid g{2, mac.n, 1, mac.h, mac.tau};
  const auto map = micro_site_map(p);
  const auto ref = oracle::implicit_euler_box(
      g, macro_steps(p),
      [&](int m, int z) {
        return a.scalar()[map[static_cast<std::size_t>(z)] + micro.spatial_sites() * static_cast<std::size_t>(micro_time(p, m))];
      },
      [&](int m, int z) {
        const SiteCoord c = site_coord(mac.slice(), static_cast<std::size_t>(z));
        return box_source({c[0] * mac.h, c[1] * mac.h, 0.0}, m * mac.tau);
      });
  const std::size_t ns = mac.spatial_sites();
  double scale = 0.0;
  for (const auto& lvl : ref)
    for (double v : lvl) scale = std::max(scale, std::abs(v));
  REQUIRE(scale > 0.0);
  for (int m = 0; m < mac.n_t; ++m)
    for (std::size_t z = 0; z < ns; ++z)
      CHECK(ue.u[static_cast<std::size_t>(m) * ns + z] == doctest::Approx(ref[static_cast<std::size_t>(m)][z]).scale(scale).epsilon(1e-9));

  const Tensor2 abar = Tensor2::scalar(2, 1.3);
  const MacroSolution u0 = solve_hom(abar, p, tight());
  const auto ref0 = oracle::implicit_euler_box(
      g, macro_steps(p), [](int, int) { return 1.3; },
      [&](int m, int z) {
        const SiteCoord c = site_coord(mac.slice(), static_cast<std::size_t>(z));
        return box_source({c[0] * mac.h, c[1] * mac.h, 0.0}, m * mac.tau);
      });
  for (int m = 0; m < mac.n_t; ++m)
    for (std::size_t z = 0; z < ns; ++z)
      CHECK(u0.u[static_cast<std::size_t>(m) * ns + z] == doctest::Approx(ref0[static_cast<std::size_t>(m)][z]).scale(scale).epsilon(1e-9));
}

TEST_CASE("constant coefficients collapse the two-scale machinery [TRIVIAL]") {
  for (MacroGeometry geo : {MacroGeometry::dirichlet_box, MacroGeometry::torus}) {
    const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
    const CoefficientField a = sample(constant(2.0), micro, 1, 0);
    CylinderProblem p = box_problem(micro, 0.25, 0.0625);
    p.geometry = geo;
    p.box = geo == MacroGeometry::torus ? 0.5 : 1.0;
    const CorrectorSet c = solve_cell(a);
    const Tensor2 abar = effective(a, c);
    const FluxCorrector sigma = solve_sigma(flux(a, c, abar));
    const MacroSolution ue = solve_eps(a, p, tight());
    const MacroSolution u0 = solve_hom(abar, p, tight());
    CHECK(max_abs(ue.u - u0.u) <= 1e-10);
    const TwoScaleInputs in{p, a, c, sigma, abar, ue.u, u0.u};
    const Expansion e = expansion(in);
    CHECK(e.report.w_l2 <= 1e-10);
    const ResidualReport r = residual_check(in, e);
    CHECK(r.relative <= 1e-10);
    const VectorField h = sample_test_flux(
        [](const std::array<double, kMaxDim>&, double) { return std::array<double, kMaxDim>{1.0, -0.5, 0.0}; },
        macro_lattice(p));
    CHECK(commutator(h, p, a, c, abar, ue.u, u0.u) == 0.0);
  }
}

TEST_CASE("degenerate eps is reported, zero test flux gives zero commutator") {
  const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
  const CoefficientField a = sample(board(0.25), micro, 3, 0);
  const CylinderProblem p = box_problem(micro, 1.0, 0.25);
  const CorrectorSet c = solve_cell(a);
  const Tensor2 abar = effective(a, c);
  const FluxCorrector sigma = solve_sigma(flux(a, c, abar));
  const MacroSolution ue = solve_eps(a, p), u0 = solve_hom(abar, p);
  const TwoScaleInputs in{p, a, c, sigma, abar, ue.u, u0.u};
  const Expansion e = expansion(in);
  CHECK(e.report.degenerate);
  CHECK(std::isfinite(e.report.err_l2));
  const VectorField zero = sample_test_flux(
      [](const std::array<double, kMaxDim>&, double) { return std::array<double, kMaxDim>{}; }, macro_lattice(p));
  CHECK(commutator(zero, p, a, c, abar, ue.u, u0.u) == 0.0);
}

TEST_CASE("norms") {
  const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
  const CylinderProblem p = box_problem(micro, 0.5, 0.125);
  const Lattice mac = macro_lattice(p);
  CHECK(spacetime_l2(ScalarField(mac, 2.0)) == doctest::Approx(2.0 * std::sqrt(p.horizon * 1.0)));
  ScalarField r(mac);
  CHECK(h_minus1_norm(r, p) == 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::cos(0.37 * static_cast<double>(i));
  const double n1 = h_minus1_norm(r, p);
  CHECK(n1 > 0.0);
  CHECK(h_minus1_norm(3.0 * r, p) == doctest::Approx(3.0 * n1));
}

TEST_CASE("expansion improves on the raw difference; sigma terms matter [DERIVED]") {
  const int k = 8;
  const Lattice micro = make_lattice(2, 4 * k, 4 * k, 4.0, 1.0 / k);
  const CoefficientField a = sample(board(1.0), micro, 3, 0);
  CellOptions o;
  o.method = CellMethod::time_marching;
  const CorrectorSet c = solve_cell(a, 0.0, o);
  const Tensor2 abar = effective(a, c);
  const FluxCorrector sigma = solve_sigma(flux(a, c, abar));
  const CylinderProblem p = box_problem(micro, 0.125, 0.375);
  const MacroSolution ue = solve_eps(a, p), u0 = solve_hom(abar, p);
  const TwoScaleInputs in{p, a, c, sigma, abar, ue.u, u0.u};
  const Expansion e = expansion(in);
  CHECK(e.report.w_l2 < e.report.err_l2);
  const ResidualReport with = residual_check(in, e, true), without = residual_check(in, e, false);
  CHECK(std::isfinite(with.relative));
  CHECK(without.relative > 5.0 * with.relative);
}

TEST_CASE("rate experiment: constant medium leaves the slope undefined [TRIVIAL]") {
  TwoScaleSetup s;
  s.spec = constant(1.0);
  s.box = 0.5;
  s.horizon = 1.0 / 16;
  s.source = [](const std::array<double, kMaxDim>& x, double) {
    return std::sin(4 * std::numbers::pi * x[0]) * std::sin(4 * std::numbers::pi * x[1]);
  };
  RateOptions o;
  o.eps_list = {0.5, 0.25};
  o.samples = 2;
  o.abar = Tensor2::scalar(2, 1.0);
  const RateResult r = rate_experiment(s, o);
  CHECK_FALSE(r.slope_defined);
  for (const RateRow& row : r.rows) CHECK(row.err_l2 <= 1e-10);
  CHECK(realization_index(0, 1) != realization_index(1, 1));
  o.eps_list = {0.5};
  CHECK_THROWS_AS(rate_experiment(s, o), ConfigError);
}
