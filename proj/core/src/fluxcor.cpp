#include "parahom/fluxcor.hpp"

#include <cmath>
#include <optional>

namespace parahom {

int sigma_pair_index(int dim, int k, int i) {
  // pairs (k, i) with k < i over 0..dim, lexicographic
  int idx = 0;
  for (int a = 0; a <= dim; ++a)
    for (int b = a + 1; b <= dim; ++b) {
      if (a == k && b == i) return idx;
      ++idx;
    }
  throw ConfigError("sigma_pair_index: need k < i <= d");
}

FluxCorrector::FluxCorrector(int dim, std::vector<std::vector<ScalarField>> upper)
    : dim_(dim), upper_(std::move(upper)) {}

const Lattice& FluxCorrector::lattice() const { return upper_.at(0).at(0).lattice(); }

const ScalarField& FluxCorrector::stored(int k, int i, int j, double& sign) const {
  if (k == i) throw ConfigError("FluxCorrector::stored: diagonal entries are not stored");
  sign = k < i ? 1.0 : -1.0;
  const int a = std::min(k, i), b = std::max(k, i);
  return upper_.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(sigma_pair_index(dim_, a, b)));
}

ScalarField FluxCorrector::component(int k, int i, int j) const {
  if (k == i) return ScalarField(lattice());
  double sign = 1.0;
  ScalarField out = stored(k, i, j, sign);
  if (sign < 0.0) out *= -1.0;
  return out;
}

FluxCorrector solve_sigma(const FluxField& q) {
  const int d = q.dim;
  if (static_cast<int>(q.q.size()) != d) throw CompatibilityError("solve_sigma: flux field has wrong size");
  std::vector<std::vector<ScalarField>> upper;
  for (int j = 0; j < d; ++j) {
    const VectorField& qj = q.q[j];
    if (static_cast<int>(qj.size()) != d + 1) throw CompatibilityError("solve_sigma: need d+1 flux components");
    std::vector<ScalarField> P;
    for (int i = 0; i <= d; ++i) {
      // zero mean holds exactly only up to roundoff (a laminate gives q of size 1e-16)
      ScalarField qi = qj[i];
      const double m = mean(qi);
      for (double& v : qi.values()) v -= m;
      P.push_back(spectral_poisson(qi));
    }
    std::vector<ScalarField> pairs;
    for (int k = 0; k <= d; ++k)
      for (int i = k + 1; i <= d; ++i) {
        ScalarField s = diff_forward(P[i], k);
        s -= diff_forward(P[k], i);
        pairs.push_back(std::move(s));
      }
    upper.push_back(std::move(pairs));
  }
  return FluxCorrector(d, std::move(upper));
}

namespace {

struct Accum {
  double res2 = 0.0;
  double ref2 = 0.0;
  void add(const ScalarField& res, const ScalarField& ref) {
    const double r = norm2(res), f = norm2(ref);
    res2 += r * r;
    ref2 += f * f;
  }
  double relative() const { return ref2 > 0.0 ? std::sqrt(res2 / ref2) : std::sqrt(res2); }
};

}  // namespace

IdentityReport verify_identities(const FluxCorrector& sigma, const FluxField& q, const CorrectorSet& phi,
                                 const CoefficientField* a) {
  const int d = sigma.dim();
  if (q.dim != d || static_cast<int>(phi.phi.size()) != d)
    throw CompatibilityError("verify_identities: dimension mismatch");
  IdentityReport rep;
  Accum poisson, divergence, time_row, fdiv;
  std::optional<FaceCoefficients> M;
  if (a) M.emplace(*a);
  for (int j = 0; j < d; ++j) {
    const VectorField& qj = q.q[j];
    // skew symmetry of the accessor (exact by construction, measured anyway)
    for (int k = 0; k <= d; ++k)
      for (int i = 0; i <= d; ++i) {
        if (k == i) continue;
        const ScalarField a = sigma.component(k, i, j);
        const ScalarField b = sigma.component(i, k, j);
        for (std::size_t s = 0; s < a.size(); ++s) rep.skew = std::max(rep.skew, std::abs(a[s] + b[s]));
      }
    for (int k = 0; k <= d; ++k)
      for (int i = 0; i <= d; ++i) {
        if (k == i) continue;
        ScalarField rhs = diff_forward(qj[i], k);
        rhs -= diff_forward(qj[k], i);
        ScalarField res = lap_st(sigma.component(k, i, j));
        res -= rhs;
        poisson.add(res, rhs);
      }
    for (int i = 0; i < d; ++i) {
      ScalarField res(qj[i].lattice());
      for (int k = 0; k <= d; ++k) {
        if (k == i) continue;
        res += diff_backward(sigma.component(k, i, j), k);
      }
      res -= qj[i];
      divergence.add(res, qj[i]);
    }
    {
      const double Mj = mean(phi.phi[j]);
      ScalarField ref(phi.phi[j].lattice(), Mj);
      ref -= phi.phi[j];
      ScalarField res(ref.lattice());
      for (int i = 0; i < d; ++i) res += diff_backward(sigma.component(d, i, j), i);
      res -= ref;
      time_row.add(res, ref);
    }
    {
      // relative to the size of the individual terms that cancel
      const ScalarField div = div_st(qj);
      double terms = 0.0;
      for (int i = 0; i <= d; ++i) terms += norm2(diff_backward(qj[i], i));
      if (M) terms += norm2(unit_source(*M, j));
      ScalarField ref(div.lattice(), 0.0);
      ref[0] = terms;
      fdiv.add(div, ref);
    }
  }
  rep.poisson = poisson.relative();
  rep.divergence = divergence.relative();
  rep.time_row = time_row.relative();
  rep.flux_divergence = fdiv.relative();
  return rep;
}

std::vector<GrowthRow> growth_profile(const FluxCorrector& sigma, int j, const std::vector<double>& radii,
                                      double box_radius) {
  const Lattice& lat = sigma.lattice();
  const int d = lat.dim;
  const ParabolicBox box = parabolic_box(lat, box_radius);
  std::vector<ScalarField> rows;
  for (int i = 0; i < d; ++i) rows.push_back(sigma.component(d, i, j));
  std::vector<double> origin;
  for (const auto& f : rows) origin.push_back(box_average(f, SiteCoord{}, box));
  std::vector<GrowthRow> out;
  for (double r : radii) {
    const double ms = r / lat.h, mt = r * r / lat.tau;
    if (!(r > 0.0) || r > 0.5 * lat.length + 1e-12 || r * r > 0.5 * lat.time_period() + 1e-12)
      throw ConfigError("growth_profile: radius exceeds half the torus");
    const int ks = static_cast<int>(std::lround(ms));
    const int kt = static_cast<int>(std::lround(mt));
    std::vector<SiteCoord> offsets;
    for (int a = 0; a < d; ++a)
      for (int sgn : {-1, 1}) {
        SiteCoord z{};
        z[a] = sgn * ks;
        offsets.push_back(z);
      }
    for (int sgn : {-1, 1}) {
      SiteCoord z{};
      z[d] = sgn * kt;
      offsets.push_back(z);
    }
    double acc = 0.0;
    int count = 0;
    for (const auto& z : offsets)
      for (int i = 0; i < d; ++i) {
        const double inc = box_average(rows[i], z, box) - origin[i];
        acc += inc * inc;
        ++count;
      }
    out.push_back(GrowthRow{r, std::sqrt(acc / count), static_cast<int>(offsets.size())});
  }
  return out;
}

}  // namespace parahom
