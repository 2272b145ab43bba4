#include "parahom/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "parahom/fourier.hpp"
#include "parahom/rng.hpp"

namespace parahom {

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::constant: return "constant";
    case EnsembleKind::laminate_space: return "laminate_space";
    case EnsembleKind::laminate_time: return "laminate_time";
    case EnsembleKind::checkerboard: return "checkerboard";
    case EnsembleKind::gaussian: return "gaussian";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  for (auto k : {EnsembleKind::constant, EnsembleKind::laminate_space, EnsembleKind::laminate_time,
                 EnsembleKind::checkerboard, EnsembleKind::gaussian})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown ensemble kind '" + name + "'");
}

namespace {

constexpr double kRangeSlack = 1e-12;

bool in_range(double v, double mu) { return v >= mu * (1 - kRangeSlack) && v <= (1 / mu) * (1 + kRangeSlack); }

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

}  // namespace

void validate(const EnsembleSpec& spec) {
  if (!(spec.mu > 0.0 && spec.mu <= 1.0)) throw ConfigError("ensemble: mu must lie in (0, 1]");
  if (!(spec.corr_length > 0.0) || !std::isfinite(spec.corr_length))
    throw ConfigError("ensemble: corr_length must be positive");
  switch (spec.kind) {
    case EnsembleKind::constant:
      if (!in_range(spec.value, spec.mu)) throw ConfigError("ensemble: constant value outside [mu, 1/mu]");
      break;
    case EnsembleKind::laminate_space:
    case EnsembleKind::laminate_time:
    case EnsembleKind::checkerboard:
      if (spec.phases.size() != 2) throw ConfigError("ensemble: exactly two phases required");
      for (double p : spec.phases)
        if (!in_range(p, spec.mu)) throw ConfigError("ensemble: phase value outside [mu, 1/mu]");
      if (spec.periods < 1) throw ConfigError("ensemble: periods must be >= 1");
      break;
    case EnsembleKind::gaussian:
      break;
  }
  if (!spec.isotropic && spec.kind != EnsembleKind::gaussian)
    throw ConfigError("ensemble: anisotropic fields are only available for the gaussian kind");
}

void validate(const EnsembleSpec& spec, const Lattice& lat) {
  validate(spec);
  if (!spec.isotropic && lat.dim > 2) throw ConfigError("ensemble: anisotropic gaussian requires d <= 2");
  if (spec.kind == EnsembleKind::checkerboard) {
    if (!near_integer(lat.length / spec.corr_length))
      throw ConfigError("ensemble: checkerboard cells must tile the torus (L / corr_length not integer)");
    if (spec.time_dependent && !near_integer(lat.time_period() / (spec.corr_length * spec.corr_length)))
      throw ConfigError("ensemble: checkerboard time cells must tile the period (n_t tau / corr_length^2)");
  }
  if ((spec.kind == EnsembleKind::laminate_space && lat.n % (2 * spec.periods) != 0) ||
      (spec.kind == EnsembleKind::laminate_time && lat.n_t % (2 * spec.periods) != 0))
    throw ConfigError("ensemble: laminate layers must contain a whole number of sites");
}

CoefficientField::CoefficientField(const Lattice& lat, bool isotropic)
    : lat_(lat), isotropic_(isotropic || lat.dim == 1),
      data_(lat.sites() * (isotropic_ ? 1 : static_cast<std::size_t>(lat.dim * lat.dim)), 0.0) {}

std::span<double> CoefficientField::entry(int i, int k) {
  const std::size_t n = lat_.sites();
  if (isotropic_) {
    if (i != k) throw CompatibilityError("isotropic coefficient field has no off-diagonal storage");
    return {data_.data(), n};
  }
  return {data_.data() + static_cast<std::size_t>(i * lat_.dim + k) * n, n};
}

std::span<const double> CoefficientField::entry(int i, int k) const {
  return const_cast<CoefficientField*>(this)->entry(i, k);
}

double CoefficientField::value(std::size_t site, int i, int k) const noexcept {
  if (isotropic_) return i == k ? data_[site] : 0.0;
  return data_[static_cast<std::size_t>(i * lat_.dim + k) * lat_.sites() + site];
}

Tensor2 CoefficientField::at(std::size_t site) const noexcept {
  Tensor2 t = Tensor2::zero(lat_.dim);
  for (int i = 0; i < lat_.dim; ++i)
    for (int k = 0; k < lat_.dim; ++k) t(i, k) = value(site, i, k);
  return t;
}

namespace {

double map_to_range(double g, double mu) { return mu + (1.0 / mu - mu) * 0.5 * (1.0 + std::tanh(g)); }

long floor_mod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

void fill_checkerboard(const EnsembleSpec& spec, const Lattice& lat, std::uint64_t seed, std::uint64_t index,
                       std::span<double> out) {
  const KeyedStream base = sample_stream(seed, index);
  const double l = spec.corr_length;
  const double lt = l * l;
  const long cells = std::lround(lat.length / l);
  const long tcells = spec.time_dependent ? std::lround(lat.time_period() / lt) : 1;
  std::array<double, kMaxDim + 1> offset{};
  if (spec.random_offset) {
    const KeyedStream off = base.split(0x0ff5e7);
    for (int k = 0; k <= lat.dim; ++k) offset[k] = off.uniform(static_cast<std::uint64_t>(k));
  }
  const KeyedStream phase = base.split(0xce115);
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const SiteCoord c = site_coord(lat, s);
    std::uint64_t key = 0x5eed;
    long parity = 0;
    for (int i = 0; i < lat.dim; ++i) {
      const long ci = floor_mod(static_cast<long>(std::floor(c[i] * lat.h / l + offset[i])), cells);
      key = combine_key(key, static_cast<std::uint64_t>(ci));
      parity += ci;
    }
    long ct = 0;
    if (spec.time_dependent) ct = floor_mod(static_cast<long>(std::floor(c[lat.dim] * lat.tau / lt + offset[lat.dim])), tcells);
    key = combine_key(key, static_cast<std::uint64_t>(ct));
    parity += ct;
    int which;
    if (spec.random)
      which = phase.uniform(key) < 0.5 ? 0 : 1;
    else
      which = static_cast<int>(parity % 2);
    out[s] = spec.phases[static_cast<std::size_t>(which)];
  }
}

}  // namespace

ScalarField gaussian_field(const Lattice& lat, double corr_length, bool time_dependent, std::uint64_t seed,
                           std::uint64_t sample_index, std::uint64_t stream) {
  const KeyedStream noise = sample_stream(seed, sample_index).split(0x6a055 + stream);
  const std::vector<int> dims = fourier_dims(lat, true);
  ComplexFourier fft(dims);
  auto c = fft.data();
  const double l = corr_length;
  const double lt = l * l;
  const double two_pi = 2.0 * std::numbers::pi;
  // signed wave number of an FFT index
  auto signed_k = [](int m, int n) { return m <= n / 2 ? m : m - n; };
  double total = 0.0;
  std::vector<double> weight(c.size());
  for (std::size_t s = 0; s < c.size(); ++s) {
    const SiteCoord m = site_coord(lat, s);
    double e = 0.0;
    std::uint64_t key = 0x3a7e;
    for (int i = 0; i < lat.dim; ++i) {
      const int k = signed_k(m[i], lat.n);
      const double kappa = two_pi * k / lat.length;
      e += 0.5 * l * l * kappa * kappa;
      key = combine_key(key, static_cast<std::uint64_t>(static_cast<std::int64_t>(k)));
    }
    const int kt = signed_k(m[lat.dim], lat.n_t);
    if (!time_dependent && kt != 0) {
      weight[s] = 0.0;
      c[s] = 0.0;
      continue;
    }
    const double omega = two_pi * kt / lat.time_period();
    e += 0.5 * lt * lt * omega * omega;
    key = combine_key(key, static_cast<std::uint64_t>(static_cast<std::int64_t>(kt)));
    weight[s] = std::exp(-e);
    total += weight[s];
    const double re = noise.normal(2 * key);
    const double im = noise.normal(2 * key + 1);
    c[s] = std::complex<double>(re, im) * std::sqrt(0.5);
  }
  // lattice index order is (t, x_d, ..., x_1) row-major, the same as the FFT layout
  for (std::size_t s = 0; s < c.size(); ++s) c[s] *= std::sqrt(weight[s] / total);
  fft.backward();
  ScalarField g(lat);
  for (std::size_t s = 0; s < c.size(); ++s) g[s] = std::sqrt(2.0) * c[s].real();
  return g;
}

CoefficientField sample(const EnsembleSpec& spec, const Lattice& lat, std::uint64_t seed, std::uint64_t sample_index) {
  validate(spec, lat);
  const bool iso = spec.isotropic || lat.dim == 1;
  CoefficientField a(lat, iso);
  const std::size_t n = lat.sites();
  switch (spec.kind) {
    case EnsembleKind::constant:
      std::fill(a.scalar().begin(), a.scalar().end(), spec.value);
      break;
    case EnsembleKind::laminate_space: {
      const int layer = lat.n / (2 * spec.periods);
      for (std::size_t s = 0; s < n; ++s) {
        const SiteCoord c = site_coord(lat, s);
        a.scalar()[s] = spec.phases[static_cast<std::size_t>((c[0] / layer) % 2)];
      }
      break;
    }
    case EnsembleKind::laminate_time: {
      const int layer = lat.n_t / (2 * spec.periods);
      for (std::size_t s = 0; s < n; ++s) {
        const SiteCoord c = site_coord(lat, s);
        a.scalar()[s] = spec.phases[static_cast<std::size_t>((c[lat.dim] / layer) % 2)];
      }
      break;
    }
    case EnsembleKind::checkerboard:
      fill_checkerboard(spec, lat, seed, sample_index, a.scalar());
      break;
    case EnsembleKind::gaussian: {
      if (iso) {
        const ScalarField g = gaussian_field(lat, spec.corr_length, spec.time_dependent, seed, sample_index, 0);
        for (std::size_t s = 0; s < n; ++s) a.scalar()[s] = map_to_range(g[s], spec.mu);
        break;
      }
      // d = 2: eigenvalues from two fields, rotation angle from a third
      const ScalarField g1 = gaussian_field(lat, spec.corr_length, spec.time_dependent, seed, sample_index, 1);
      const ScalarField g2 = gaussian_field(lat, spec.corr_length, spec.time_dependent, seed, sample_index, 2);
      const ScalarField g3 = gaussian_field(lat, spec.corr_length, spec.time_dependent, seed, sample_index, 3);
      auto a00 = a.entry(0, 0), a01 = a.entry(0, 1), a10 = a.entry(1, 0), a11 = a.entry(1, 1);
      for (std::size_t s = 0; s < n; ++s) {
        const double l1 = map_to_range(g1[s], spec.mu);
        const double l2 = map_to_range(g2[s], spec.mu);
        const double th = std::numbers::pi * 0.5 * (1.0 + std::tanh(g3[s]));
        const double cs = std::cos(th), sn = std::sin(th);
        a00[s] = l1 * cs * cs + l2 * sn * sn;
        a11[s] = l1 * sn * sn + l2 * cs * cs;
        a01[s] = (l1 - l2) * cs * sn;
        a10[s] = a01[s];
      }
      break;
    }
  }
  return a;
}

namespace {

// eigenvalue range of a symmetric 3x3 matrix (trigonometric method)
std::pair<double, double> sym3_range(const Tensor2& m) {
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  if (p1 == 0.0) {
    const double a = m(0, 0), b = m(1, 1), c = m(2, 2);
    return {std::min({a, b, c}), std::max({a, b, c})};
  }
  const double q = m.trace() / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) + (m(2, 2) - q) * (m(2, 2) - q) +
                    2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Tensor2 b = m;
  for (int i = 0; i < 3; ++i) b(i, i) -= q;
  for (double& x : b.v) x /= p;
  const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                     b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                     b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e3, e1};
}

}  // namespace

EllipticityReport ellipticity_report(const CoefficientField& a) {
  EllipticityReport rep{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const int d = a.dim();
  for (std::size_t s = 0; s < a.lattice().sites(); ++s) {
    Tensor2 m = a.at(s);
    // symmetric part
    for (int i = 0; i < d; ++i)
      for (int k = i + 1; k < d; ++k) m(i, k) = m(k, i) = 0.5 * (m(i, k) + m(k, i));
    double lo, hi;
    if (d == 1) {
      lo = hi = m(0, 0);
    } else if (d == 2) {
      const double tr = 0.5 * (m(0, 0) + m(1, 1));
      const double disc = std::sqrt(0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(0, 1));
      lo = tr - disc;
      hi = tr + disc;
    } else {
      std::tie(lo, hi) = sym3_range(m);
    }
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
    rep.max_eigenvalue = std::max(rep.max_eigenvalue, hi);
  }
  return rep;
}

CoefficientField extract_slice(const CoefficientField& a, int m) {
  const Lattice& lat = a.lattice();
  if (m < 0 || m >= lat.n_t) throw ConfigError("extract_slice: time index out of range");
  CoefficientField out(lat.slice(), a.isotropic());
  const std::size_t ns = lat.spatial_sites();
  const int d = a.dim();
  const int comps = a.isotropic() ? 1 : d * d;
  for (int c = 0; c < comps; ++c) {
    const int i = a.isotropic() ? 0 : c / d;
    const int k = a.isotropic() ? 0 : c % d;
    auto src = a.entry(i, k);
    auto dst = out.entry(i, k);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(ns * static_cast<std::size_t>(m)),
              src.begin() + static_cast<std::ptrdiff_t>(ns * static_cast<std::size_t>(m + 1)), dst.begin());
  }
  return out;
}

CoefficientField shift(const CoefficientField& a, const SiteCoord& offset) {
  CoefficientField out(a.lattice(), a.isotropic());
  const int d = a.dim();
  const int comps = a.isotropic() ? 1 : d * d;
  for (int c = 0; c < comps; ++c) {
    const int i = a.isotropic() ? 0 : c / d;
    const int k = a.isotropic() ? 0 : c % d;
    auto src = a.entry(i, k);
    ScalarField tmp(a.lattice(), std::vector<double>(src.begin(), src.end()));
    const ScalarField moved = shift(tmp, offset);
    auto dst = out.entry(i, k);
    std::copy(moved.values().begin(), moved.values().end(), dst.begin());
  }
  return out;
}

}  // namespace parahom
