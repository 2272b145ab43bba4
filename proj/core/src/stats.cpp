#include "parahom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "parahom/expansion.hpp"
#include "parahom/parallel.hpp"
#include "parahom/rng.hpp"

namespace parahom {

double mu_d(double r, int d) {
  if (r < 0.0) throw ConfigError("mu_d: r must be non-negative");
  if (d < 1) throw ConfigError("mu_d: d must be positive");
  if (d <= 2) return std::sqrt(2.0 + r);
  if (d == 3) return std::sqrt(std::log(2.0 + r));
  return 1.0;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("linear_fit: abscissae coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

Band bootstrap(std::span<const double> samples, const Statistic& stat, std::uint64_t seed, int resamples) {
  Band b;
  if (samples.empty()) return b;
  b.estimate = stat(samples);
  if (samples.size() < 2 || resamples < 2) {
    b.lo = b.hi = b.estimate;
    return b;
  }
  const KeyedStream rng = KeyedStream(seed).split(0xb007);
  std::vector<double> reps(static_cast<std::size_t>(resamples));
  std::vector<double> draw(samples.size());
  const std::uint64_t n = samples.size();
  for (int r = 0; r < resamples; ++r) {
    const KeyedStream rs = rng.split(static_cast<std::uint64_t>(r));
    for (std::uint64_t i = 0; i < n; ++i) draw[i] = samples[static_cast<std::size_t>(rs.bits(i) % n)];
    reps[static_cast<std::size_t>(r)] = stat(draw);
  }
  b.lo = quantile(reps, 0.025);
  b.hi = quantile(reps, 0.975);
  b.half_width = 0.5 * (b.hi - b.lo);
  b.stddev = sample_stddev(reps);
  return b;
}

MomentEstimate moment(const std::string& label, std::span<const double> values, int p, std::uint64_t seed) {
  MomentEstimate m;
  m.label = label;
  m.p = p;
  m.n_samples = static_cast<int>(values.size());
  const Statistic stat = [p](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
  };
  const Band b = bootstrap(values, stat, combine_key(seed, static_cast<std::uint64_t>(p)));
  m.estimate = b.estimate;
  m.half_width = b.half_width;
  return m;
}

StationarityCheck compare_means(const std::string& label, std::span<const double> a, std::span<const double> b,
                                std::uint64_t seed) {
  StationarityCheck c;
  c.label = label;
  const Statistic mean_stat = [](std::span<const double> v) { return sample_mean(v); };
  const Band ba = bootstrap(a, mean_stat, combine_key(seed, 1));
  const Band bb = bootstrap(b, mean_stat, combine_key(seed, 2));
  c.mean_origin = ba.estimate;
  c.half_width_origin = ba.half_width;
  c.mean_shifted = bb.estimate;
  c.half_width_shifted = bb.half_width;
  c.agree = std::abs(ba.estimate - bb.estimate) <= 3.0 * std::max(ba.half_width, bb.half_width);
  return c;
}

// ---- minimal radius ----

std::vector<double> dyadic_radii(const Lattice& lat) {
  std::vector<double> r;
  const double top = 0.25 * lat.length;
  for (double v = std::max(1.0, lat.h); v <= top * (1 + 1e-12); v *= 2.0) r.push_back(v);
  return r;
}

namespace {

struct BoxSites {
  std::vector<std::size_t> index;
  std::vector<std::array<double, kMaxDim>> x;  // offset from the centre, physical units
  std::vector<int> level;                      // time offset index within the box
  int levels = 0;
};

BoxSites gather(const Lattice& lat, const SiteCoord& center, const ParabolicBox& box) {
  BoxSites b;
  const int d = lat.dim;
  b.levels = box.count[d];
  SiteCoord k{};
  for (int a = 0; a <= d; ++a) k[a] = 0;
  while (true) {
    SiteCoord c = center;
    std::array<double, kMaxDim> x{};
    for (int a = 0; a <= d; ++a) c[a] += box.lo[a] + k[a];
    for (int a = 0; a < d; ++a) x[a] = (box.lo[a] + k[a]) * lat.h;
    b.index.push_back(site_index(lat, c));
    b.x.push_back(x);
    b.level.push_back(k[d]);
    int a = 0;
    for (; a <= d; ++a) {
      if (++k[a] < box.count[a]) break;
      k[a] = 0;
    }
    if (a > d) break;
  }
  return b;
}

double box_mean(const ScalarField& u, const BoxSites& b) {
  double s = 0.0;
  for (std::size_t i : b.index) s += u[i];
  return s / static_cast<double>(b.index.size());
}

double box_variance(const ScalarField& u, const BoxSites& b) {
  const double m = box_mean(u, b);
  double s = 0.0;
  for (std::size_t i : b.index) s += (u[i] - m) * (u[i] - m);
  return s / static_cast<double>(b.index.size());
}

// mean over the box of (u - slice mean at the same time level)^2
double slice_variance(const ScalarField& u, const BoxSites& b) {
  std::vector<double> sum(static_cast<std::size_t>(b.levels), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(b.levels), 0);
  for (std::size_t q = 0; q < b.index.size(); ++q) {
    sum[static_cast<std::size_t>(b.level[q])] += u[b.index[q]];
    ++cnt[static_cast<std::size_t>(b.level[q])];
  }
  double s = 0.0;
  for (std::size_t q = 0; q < b.index.size(); ++q) {
    const std::size_t l = static_cast<std::size_t>(b.level[q]);
    const double v = u[b.index[q]] - sum[l] / cnt[l];
    s += v * v;
  }
  return s / static_cast<double>(b.index.size());
}

}  // namespace

void resolve_chi(MinimalRadiusSample& s) {
  const std::size_t n = s.radii.size();
  std::size_t first_ok = n;  // index from which every radius passes
  for (std::size_t i = n; i-- > 0;) {
    if (s.first[i] + s.second[i] <= s.theta)
      first_ok = i;
    else
      break;
  }
  s.censored = first_ok == n;
  s.chi = s.censored ? (n ? s.radii.back() : 1.0) : std::max(1.0, s.radii[first_ok]);
}

MinimalRadiusSample minimal_radius(const CorrectorSet& c, const FluxCorrector& sigma, double theta,
                                   const std::vector<double>& radii, const SiteCoord& center) {
  if (!(theta > 0.0)) throw ConfigError("minimal_radius: theta must be positive");
  const Lattice& lat = sigma.lattice();
  const int d = lat.dim;
  MinimalRadiusSample out;
  out.theta = theta;
  out.radii = radii;

  // sigma_(d+1)ij and its forward spatial gradient, for i, j spatial
  std::vector<ScalarField> top;
  std::vector<VectorField> top_grad;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      top.push_back(sigma.component(d, i, j));
      top_grad.push_back(grad_f(top.back()));
    }

  for (double R : radii) {
    const BoxSites b = gather(lat, center, parabolic_box(lat, R));
    double first = 0.0;
    for (const ScalarField& phi : c.phi) first += box_variance(phi, b);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int i = k + 1; i < d; ++i) {
          double sign = 1.0;
          first += 2.0 * slice_variance(sigma.stored(k, i, j, sign), b);
        }
    for (const VectorField& g : top_grad)
      for (const ScalarField& comp : g) first += box_variance(comp, b);

    double second = 0.0;
    for (std::size_t f = 0; f < top.size(); ++f) {
      const ScalarField& s = top[f];
      const double m = box_mean(s, b);
      std::array<double, kMaxDim> slope{};
      for (int a = 0; a < d; ++a) slope[a] = box_mean(top_grad[f][static_cast<std::size_t>(a)], b);
      double acc = 0.0;
      for (std::size_t q = 0; q < b.index.size(); ++q) {
        double v = s[b.index[q]] - m;
        for (int a = 0; a < d; ++a) v -= b.x[q][a] * slope[a];
        acc += v * v;
      }
      second += acc / static_cast<double>(b.index.size());
    }
    out.first.push_back(std::sqrt(first) / R);
    out.second.push_back(std::sqrt(second) / (R * R));
  }
  resolve_chi(out);
  return out;
}

// ---- per-sample pipeline ----

SampleFields solve_sample(const EnsembleSpec& spec, const Lattice& lat, std::uint64_t seed, std::uint64_t index,
                          const CellOptions& opts) {
  SampleFields s;
  s.a = sample(spec, lat, seed, index);
  s.correctors = solve_cell(s.a, 0.0, opts);
  s.abar = effective(s.a, s.correctors);
  s.q = flux(s.a, s.correctors, s.abar);
  s.sigma = solve_sigma(s.q);
  return s;
}

SiteCoord shifted_origin(const Lattice& lat) {
  SiteCoord z{};
  for (int a = 0; a < lat.dim; ++a) z[a] = lat.n / 2;
  z[lat.dim] = lat.n_t / 2;
  return z;
}

namespace {

ScalarField squared(const ScalarField& u) {
  ScalarField r(u.lattice());
  for (std::size_t s = 0; s < r.size(); ++s) r[s] = u[s] * u[s];
  return r;
}

// |(grad phi_j, grad sigma_kij)|^2 summed over j, k in 0..d, i spatial
ScalarField grad_energy_density(const SampleFields& f) {
  const int d = f.a.lattice().dim;
  ScalarField e(f.a.lattice());
  for (const VectorField& g : f.correctors.grad_phi)
    for (const ScalarField& comp : g) e += squared(comp);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k <= d; ++k)
      for (int i = k + 1; i <= d; ++i) {
        double sign = 1.0;
        const ScalarField& s = f.sigma.stored(k, i, j, sign);
        const double weight = i == d ? 1.0 : 2.0;  // (k, i) and (i, k) both count when both are spatial
        for (const ScalarField& comp : grad_f(s)) e.axpy(weight, squared(comp));
      }
  return e;
}

double grad_energy_at(const SampleFields& f, const ParabolicBox& box, const SiteCoord& z) {
  return box_average(grad_energy_density(f), z, box);
}



// |avg_{Q_1(z)} (phi_j, sigma_kij) - avg_{Q_1(0)} (phi_j, sigma_kij)|^2 over j, k in 0..d, i spatial
double increment_sq(const SampleFields& f, const ParabolicBox& box, const SiteCoord& z) {
  const int d = f.a.lattice().dim;
  const SiteCoord origin{};
  double acc = 0.0;
  for (const ScalarField& phi : f.correctors.phi) {
    const double v = box_average(phi, z, box) - box_average(phi, origin, box);
    acc += v * v;
  }
  for (int j = 0; j < d; ++j)
    for (int k = 0; k <= d; ++k)
      for (int i = k + 1; i <= d; ++i) {
        double sign = 1.0;
        const ScalarField& s = f.sigma.stored(k, i, j, sign);
        const double v = box_average(s, z, box) - box_average(s, origin, box);
        acc += (i == d ? 1.0 : 2.0) * v * v;
      }
  return acc;
}

// |avg_{Q_1(z)} sigma_(d+1)ij - avg_{Q_1(0)} sigma_(d+1)ij|^2 over i, j spatial
double top_increment_sq(const SampleFields& f, const ParabolicBox& box, const SiteCoord& z) {
  const int d = f.a.lattice().dim;
  const SiteCoord origin{};
  double acc = 0.0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      double sign = 1.0;
      const ScalarField& s = f.sigma.stored(i, d, j, sign);
      const double v = box_average(s, z, box) - box_average(s, origin, box);
      acc += v * v;
    }
  return acc;
}

}  // namespace

FluctResult fluct_suite(const EnsembleSpec& spec, const Lattice& lat, int n_samples, const FluctOptions& o) {
  if (n_samples < 8) throw ConfigError("fluct_suite: need at least 8 samples");
  for (int p : o.p_list)
    if (p < 1 || p > o.max_p) throw ConfigError("fluct_suite: moment order p must lie in [1, " + std::to_string(o.max_p) + "]");
  validate(spec, lat);
  const int d = lat.dim;
  const ParabolicBox unit = parabolic_box(lat, 1.0);
  const SiteCoord shifted = shifted_origin(lat);
  // increment and growth offsets: a quarter of the side along e_1
  SiteCoord inc{};
  inc[0] = lat.n / 4;
  const std::vector<double> radii = dyadic_radii(lat);

  FluctResult res;
  res.increment_distance = inc[0] * lat.h;
  res.growth_distance = inc[0] * lat.h;
  std::vector<FluctSample> samples(static_cast<std::size_t>(n_samples));
  std::vector<char> ok(static_cast<std::size_t>(n_samples), 0);
  parallel_for(static_cast<std::size_t>(n_samples), o.workers, [&](std::size_t s) {
    try {
      const SampleFields f = solve_sample(spec, lat, o.seed, s, o.cell);
      FluctSample& out = samples[s];
      out.grad_energy = grad_energy_at(f, unit, SiteCoord{});
      out.grad_energy_shifted = grad_energy_at(f, unit, shifted);
      out.increment = increment_sq(f, unit, inc);
      out.growth = top_increment_sq(f, unit, inc);
      out.chi = minimal_radius(f.correctors, f.sigma, o.theta, radii);
      out.chi_shifted = minimal_radius(f.correctors, f.sigma, o.theta, radii, shifted);
      ok[s] = 1;
    } catch (const SolverError&) {
    }
  });
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (ok[s])
      res.samples.push_back(samples[s]);
    else
      ++res.failures;
  }

  std::vector<double> energy, energy_shift, increment, growth, chi, chi_shift;
  int censored = 0;
  for (const FluctSample& f : res.samples) {
    energy.push_back(f.grad_energy);
    energy_shift.push_back(f.grad_energy_shifted);
    increment.push_back(std::sqrt(f.increment));
    growth.push_back(std::sqrt(f.growth) / mu_d(res.growth_distance, d));
    if (f.chi.censored)
      ++censored;
    else
      chi.push_back(f.chi.chi);
    if (!f.chi_shifted.censored) chi_shift.push_back(f.chi_shifted.chi);
  }
  res.censored_fraction = res.samples.empty() ? 0.0 : static_cast<double>(censored) / res.samples.size();
  for (int p : o.p_list) {
    // the first quantity is already quadratic; the increments enter through their 2p-th power
    res.estimates.push_back(moment("grad_energy_Q1", energy, p, o.seed));
    MomentEstimate m = moment("increment_Q1", increment, 2 * p, o.seed);
    m.estimate *= m.estimate;
    m.half_width *= 2.0 * std::sqrt(m.estimate);
    m.p = p;
    res.estimates.push_back(m);
    MomentEstimate g = moment("sigma_top_increment_over_mu2", growth, 2 * p, o.seed);
    g.estimate *= g.estimate;
    g.half_width *= 2.0 * std::sqrt(g.estimate);
    g.p = p;
    res.estimates.push_back(g);
    res.estimates.push_back(moment("chi_star_uncensored", chi, p, o.seed));
  }
  res.stationarity.push_back(compare_means("grad_energy_Q1", energy, energy_shift, o.seed));
  res.stationarity.push_back(compare_means("chi_star", chi, chi_shift, o.seed));
  return res;
}

// ---- commutator ----

VectorField sample_test_flux(const TestFlux& h, const Lattice& mac) {
  VectorField out(static_cast<std::size_t>(mac.dim), ScalarField(mac));
  for (std::size_t s = 0; s < out[0].size(); ++s) {
    const SiteCoord c = site_coord(mac, s);
    std::array<double, kMaxDim> x{};
    for (int i = 0; i < mac.dim; ++i) x[i] = c[i] * mac.h;
    const auto v = h(x, c[mac.dim] * mac.tau);
    for (int i = 0; i < mac.dim; ++i) out[static_cast<std::size_t>(i)][s] = v[i];
  }
  return out;
}

double commutator(const VectorField& h_test, const CylinderProblem& p, const CoefficientField& a,
                  const CorrectorSet& c, const Tensor2& abar, const ScalarField& u_eps, const ScalarField& u_0) {
  const Lattice mac = macro_lattice(p);
  const int d = mac.dim;
  if (static_cast<int>(h_test.size()) != d) throw ConfigError("commutator: test flux needs d components");
  for (const ScalarField& hc : h_test) require_same_lattice(hc.lattice(), mac, "commutator");
  require_same_lattice(u_eps.lattice(), mac, "commutator");
  require_same_lattice(u_0.lattice(), mac, "commutator");
  bool any = false;
  for (const ScalarField& hc : h_test) any = any || max_abs(hc) > 0.0;
  if (!any) return 0.0;

  const std::vector<ScalarField> g = test_functions(u_0, p);
  VectorField v;
  for (int k = 0; k < d; ++k) {
    ScalarField vk = diff_forward(u_eps, k) - diff_forward(u_0, k);
    for (int j = 0; j < d; ++j) {
      const ScalarField gp = tile_field(c.grad_phi[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)], p);
      const ScalarField& gj = g[static_cast<std::size_t>(j)];
      for (std::size_t s = 0; s < vk.size(); ++s) vk[s] -= gp[s] * gj[s];
    }
    v.push_back(std::move(vk));
  }
  const FaceCoefficients M(tile_coefficients(a, p));
  const std::size_t ns = mac.spatial_sites();
  double total = 0.0;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const ScalarField& hi = h_test[static_cast<std::size_t>(i)];
      const ScalarField& vk = v[static_cast<std::size_t>(k)];
      const double ab = abar(i, k);
      if (M.isotropic() && i != k) {
        if (ab == 0.0) continue;
        for (std::size_t s = ns; s < vk.size(); ++s) total -= hi[s] * ab * vk[s];
        continue;
      }
      auto m = M.face(i, k);
      for (std::size_t s = ns; s < vk.size(); ++s) total += hi[s] * (m[s] - ab) * vk[s];
    }
  return total * mac.cell_volume();
}

CommutatorResult variance_scaling(const TwoScaleSetup& setup, const std::vector<double>& eps_list, int n_samples,
                                  const TestFlux& h, std::optional<Tensor2> abar) {
  validate(setup);
  if (n_samples < 2) throw ConfigError("variance_scaling: need at least two samples");
  CommutatorResult res;
  if (abar) {
    res.abar_ref = *abar;
  } else {
    res.abar_ref = reference_effective(setup).mean;
  }
  const int d = micro_lattice(setup, eps_list.at(0)).dim;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const CylinderProblem p = make_problem(setup, eps);
    const Lattice mac = macro_lattice(p);
    const VectorField htest = sample_test_flux(h, mac);
    const MacroSolution u0 = solve_hom(res.abar_ref, p, setup.solver);
    std::vector<double> values(static_cast<std::size_t>(n_samples), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(n_samples), 0);
    parallel_for(static_cast<std::size_t>(n_samples), setup.workers, [&](std::size_t s) {
      try {
        const CoefficientField a =
            sample(setup.spec, p.micro, setup.seed, realization_index(static_cast<int>(e), static_cast<int>(s)));
        const CorrectorSet c = solve_cell(a, 0.0, setup.cell);
        const MacroSolution ue = solve_eps(a, p, setup.solver);
        values[s] = commutator(htest, p, a, c, res.abar_ref, ue.u, u0.u);
        ok[s] = 1;
      } catch (const SolverError&) {
      }
    });
    std::vector<double> good;
    for (std::size_t s = 0; s < values.size(); ++s) {
      if (ok[s])
        good.push_back(values[s]);
      else
        ++res.failures;
    }
    CommutatorRow row;
    row.eps = eps;
    row.samples = static_cast<int>(good.size());
    row.mean = sample_mean(good);
    const double scale = std::pow(eps, -0.5 * (d + 2));
    const Band b = bootstrap(good, [](std::span<const double> v) { return sample_stddev(v); },
                             combine_key(setup.seed, e));
    row.sd = b.estimate;
    row.rescaled_sd = b.estimate * scale;
    row.rescaled_half_width = b.half_width * scale;
    res.rows.push_back(row);
    res.values.push_back(std::move(good));
  }
  return res;
}

}  // namespace parahom
