#include "parahom/expansion.hpp"

#include <cmath>

#include "parahom/diffusion.hpp"
#include "parahom/smoothing.hpp"

namespace parahom {

namespace {

ScalarField shifted(const ScalarField& u, int axis, int s) {
  SiteCoord off{};
  off[axis] = s;
  return shift(u, off);
}

// out_i = sum_k M_ik v_k on the given sites
void accumulate_matrix_product(const FaceCoefficients& M, const VectorField& v, double scale, VectorField& out) {
  const int d = M.dim();
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      if (M.isotropic() && i != k) continue;
      auto m = M.face(i, k);
      const double* src = v[static_cast<std::size_t>(k)].data();
      double* dst = out[static_cast<std::size_t>(i)].data();
      for (std::size_t s = 0; s < m.size(); ++s) dst[s] += scale * m[s] * src[s];
    }
}

// y_i: unreduced micro position of each macro node
ScalarField micro_position(const Lattice& mac, const CylinderProblem& p, int axis) {
  ScalarField y(mac);
  for (std::size_t s = 0; s < y.size(); ++s) y[s] = site_coord(mac, s)[axis] * p.micro.h;
  return y;
}

ScalarField product(const ScalarField& a, const ScalarField& b) {
  ScalarField r(a.lattice());
  for (std::size_t s = 0; s < r.size(); ++s) r[s] = a[s] * b[s];
  return r;
}

void zero_excluded(ScalarField& r, const std::vector<char>& mask) {
  const std::size_t ns = mask.size();
  std::fill(r.data(), r.data() + ns, 0.0);  // level 0 is data, not an equation
  for (std::size_t m = ns; m < r.size(); m += ns)
    for (std::size_t s = 0; s < ns; ++s)
      if (mask[s]) r[m + s] = 0.0;
}

double l2_levels(const ScalarField& u) { return spacetime_l2(u); }

// sigma~_{l,t,j} on the macro grid
ScalarField shifted_sigma(const TwoScaleInputs& in, const ShiftConstants& sc, const Lattice& mac, int l, int j,
                          const VectorField& y) {
  const int d = mac.dim;
  ScalarField s = tile_field(in.sigma.component(l, d, j), in.problem);
  for (int i = 0; i < d; ++i) {
    const double c = sc.pi[static_cast<std::size_t>(j)](i, l);
    if (c != 0.0) s.axpy(-c, y[static_cast<std::size_t>(i)]);
  }
  return s;
}

}  // namespace

ShiftConstants shift_constants(const CorrectorSet& c, const FluxCorrector& sigma, double eps) {
  const int d = sigma.dim();
  const Lattice& lat = sigma.lattice();
  ShiftConstants sc;
  const ParabolicBox box = parabolic_box(lat, 2.0 / eps);
  const SiteCoord origin{};
  const std::size_t ns = lat.spatial_sites();
  for (int j = 0; j < d; ++j) {
    sc.alpha.push_back(mean(c.phi[static_cast<std::size_t>(j)]));
    Tensor2 pi = Tensor2::zero(d);
    for (int l = 0; l < d; ++l) {
      const ScalarField s = sigma.component(l, d, j);
      for (int k = 0; k < d; ++k) pi(k, l) = box_average(diff_forward(s, k), origin, box);
    }
    sc.pi.push_back(pi);
    std::vector<std::vector<double>> beta(static_cast<std::size_t>(d * d));
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l) {
        auto& row = beta[static_cast<std::size_t>(i * d + l)];
        row.assign(static_cast<std::size_t>(lat.n_t), 0.0);
        if (i == l) continue;
        const ScalarField s = sigma.component(i, l, j);
        for (int m = 0; m < lat.n_t; ++m) {
          double total = 0.0;
          const double* v = s.data() + ns * static_cast<std::size_t>(m);
          for (std::size_t q = 0; q < ns; ++q) total += v[q];
          row[static_cast<std::size_t>(m)] = total / static_cast<double>(ns);
        }
      }
    sc.beta.push_back(std::move(beta));
  }
  return sc;
}

std::vector<ScalarField> test_functions(const ScalarField& u0, const CylinderProblem& p) {
  const ScalarField psi = cutoff_field(p);
  std::vector<ScalarField> g;
  if (max_abs(psi) == 0.0) {
    // eps too large for the cylinder: nothing to smooth
    for (int j = 0; j < u0.lattice().dim; ++j) g.emplace_back(u0.lattice());
    return g;
  }
  for (int j = 0; j < u0.lattice().dim; ++j) {
    ScalarField v = product(psi, diff_forward(u0, j));
    g.push_back(smooth_S(smooth_K(v, p.eps), p.eps, TimeExtension::zero));
  }
  return g;
}

Expansion expansion(const TwoScaleInputs& in) {
  const CylinderProblem& p = in.problem;
  const Lattice mac = macro_lattice(p);
  require_same_lattice(in.u_eps.lattice(), mac, "expansion");
  require_same_lattice(in.u_0.lattice(), mac, "expansion");
  require_same_lattice(in.sigma.lattice(), p.micro, "expansion");
  require_same_lattice(in.a.lattice(), p.micro, "expansion");
  const int d = mac.dim;
  const double eps = p.eps;

  Expansion e;
  e.report.eps = eps;
  e.report.degenerate = 4.0 * eps >= 0.5 * p.box;
  e.shifts = shift_constants(in.correctors, in.sigma, eps);
  e.test = test_functions(in.u_0, p);
  VectorField y;
  for (int i = 0; i < d; ++i) y.push_back(micro_position(mac, p, i));

  e.w = in.u_eps - in.u_0;
  const double err = l2_levels(e.w);
  for (int j = 0; j < d; ++j) {
    const ScalarField& g = e.test[static_cast<std::size_t>(j)];
    ScalarField phi = tile_field(in.correctors.phi[static_cast<std::size_t>(j)], p);
    for (double& v : phi.values()) v -= e.shifts.alpha[static_cast<std::size_t>(j)];
    e.w.axpy(-eps, product(phi, g));
    for (int l = 0; l < d; ++l) {
      const ScalarField yl = shifted(shifted_sigma(in, e.shifts, mac, l, j, y), l, -1);
      e.w.axpy(-eps * eps, product(yl, diff_backward(g, l)));
    }
  }
  // boundary nodes of the box are zero by construction; enforce them against round-off
  const std::vector<char> mask = boundary_mask(p);
  const std::size_t ns = mask.size();
  for (std::size_t m = 0; m < e.w.size(); m += ns)
    for (std::size_t s = 0; s < ns; ++s)
      if (mask[s]) e.w[m + s] = 0.0;

  e.report.err_l2 = err;
  e.report.w_l2 = l2_levels(e.w);
  double g2 = 0.0;
  for (const ScalarField& c : grad_f(e.w)) g2 += std::pow(l2_levels(c), 2);
  e.report.grad_w_l2 = std::sqrt(g2);
  return e;
}

double h_minus1_norm(const ScalarField& r, const CylinderProblem& p) {
  const Lattice& mac = r.lattice();
  const Lattice sl = mac.slice();
  const bool torus = p.geometry == MacroGeometry::torus;
  const ConstantInverse inv = ConstantInverse::slice(sl, torus ? 1.0 : 0.0, Tensor2::scalar(mac.dim, 1.0),
                                                     torus ? Boundary::periodic : Boundary::dirichlet);
  const std::vector<char> mask = boundary_mask(p);
  ScalarField psi(sl);
  double total = 0.0;
  for (int m = 1; m < mac.n_t; ++m) {
    ScalarField level = extract_slice(r, m);
    for (std::size_t s = 0; s < mask.size(); ++s)
      if (mask[s]) level[s] = 0.0;
    inv.apply(level, psi);
    total += dot(level, psi);
  }
  return std::sqrt(std::max(total, 0.0) * mac.cell_volume());
}

ResidualReport residual_check(const TwoScaleInputs& in, const Expansion& e, bool include_sigma_terms) {
  const CylinderProblem& p = in.problem;
  const Lattice mac = macro_lattice(p);
  require_same_lattice(e.w.lattice(), mac, "residual_check");
  const int d = mac.dim;
  const double eps = p.eps;
  const ShiftConstants& sc = e.shifts;
  const FaceCoefficients M(tile_coefficients(in.a, p));
  const std::size_t ns = mac.spatial_sites();

  VectorField f(static_cast<std::size_t>(d), ScalarField(mac));
  ScalarField extra(mac);

  // (M - abar)(D u_0 - g)
  {
    VectorField v;
    for (int k = 0; k < d; ++k) v.push_back(diff_forward(in.u_0, k) - e.test[static_cast<std::size_t>(k)]);
    accumulate_matrix_product(M, v, 1.0, f);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) f[static_cast<std::size_t>(i)].axpy(-in.abar(i, k), v[static_cast<std::size_t>(k)]);
  }

  VectorField y;
  if (include_sigma_terms)
    for (int i = 0; i < d; ++i) y.push_back(micro_position(mac, p, i));

  for (int j = 0; j < d; ++j) {
    const ScalarField& g = e.test[static_cast<std::size_t>(j)];
    ScalarField phi = tile_field(in.correctors.phi[static_cast<std::size_t>(j)], p);
    for (double& v : phi.values()) v -= sc.alpha[static_cast<std::size_t>(j)];
    // eps M_ik S_k(phi) D^f_k g
    {
      VectorField v;
      for (int k = 0; k < d; ++k) v.push_back(product(shifted(phi, k, 1), diff_forward(g, k)));
      accumulate_matrix_product(M, v, eps, f);
    }
    if (!include_sigma_terms) continue;

    VectorField G;  // D^b_l g
    for (int l = 0; l < d; ++l) G.push_back(diff_backward(g, l));
    const ScalarField dtg = dt_b(g);

    // -eps S_{-l}(sigma_ilj - beta_ilj(t)) S_i D^b_l g
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l) {
        if (i == l) continue;
        ScalarField s = tile_field(in.sigma.component(i, l, j), p);
        const auto& beta = sc.beta[static_cast<std::size_t>(j)][static_cast<std::size_t>(i * d + l)];
        for (int m = 0; m < mac.n_t; ++m) {
          const double b = beta[static_cast<std::size_t>(micro_time(p, m))];
          double* v = s.data() + ns * static_cast<std::size_t>(m);
          for (std::size_t q = 0; q < ns; ++q) v[q] -= b;
        }
        f[static_cast<std::size_t>(i)].axpy(-eps, product(shifted(s, l, -1), shifted(G[static_cast<std::size_t>(l)], i, 1)));
      }

    // eps M_ik (D^micro_k S_{-l} sigma~_ltj) D^b_l g  and  eps^2 M_ik S_k(S_{-l} sigma~_ltj) D^f_k D^b_l g
    {
      VectorField v4(static_cast<std::size_t>(d), ScalarField(mac));
      VectorField v5(static_cast<std::size_t>(d), ScalarField(mac));
      for (int l = 0; l < d; ++l) {
        const ScalarField micro_l = shifted(in.sigma.component(l, d, j), l, -1);
        const ScalarField yl = shifted(shifted_sigma(in, sc, mac, l, j, y), l, -1);
        const ScalarField& Gl = G[static_cast<std::size_t>(l)];
        for (int k = 0; k < d; ++k) {
          ScalarField dk = tile_field(diff_forward(micro_l, k), p);
          const double pk = sc.pi[static_cast<std::size_t>(j)](k, l);
          for (double& v : dk.values()) v -= pk;
          v4[static_cast<std::size_t>(k)] += product(dk, Gl);
          v5[static_cast<std::size_t>(k)] += product(shifted(yl, k, 1), diff_forward(Gl, k));
        }
      }
      accumulate_matrix_product(M, v4, eps, f);
      accumulate_matrix_product(M, v5, eps * eps, f);
    }

    // -eps^2 T(sigma~_itj) dt_b g
    for (int i = 0; i < d; ++i) {
      const ScalarField s = shifted(shifted_sigma(in, sc, mac, i, j, y), d, -1);
      f[static_cast<std::size_t>(i)].axpy(-eps * eps, product(s, dtg));
    }

    double trace = 0.0;
    for (int l = 0; l < d; ++l) trace += sc.pi[static_cast<std::size_t>(j)](l, l);
    extra.axpy(-eps * trace, dtg);
  }

  ScalarField rhs = div_b(f);
  rhs += extra;

  const DivergenceForm L(M);
  ScalarField lhs(mac);
  L.apply(e.w, lhs);
  lhs += dt_b(e.w);

  const std::vector<char> mask = boundary_mask(p);
  ScalarField mismatch = lhs - rhs;
  zero_excluded(mismatch, mask);
  zero_excluded(rhs, mask);

  ResidualReport r;
  r.absolute = h_minus1_norm(mismatch, p);
  r.rhs = h_minus1_norm(rhs, p);
  r.relative = r.rhs > 0.0 ? r.absolute / r.rhs : r.absolute;
  r.absolute_l2 = spacetime_l2(mismatch);
  const double rhs_l2 = spacetime_l2(rhs);
  r.relative_l2 = rhs_l2 > 0.0 ? r.absolute_l2 / rhs_l2 : r.absolute_l2;
  return r;
}

}  // namespace parahom
