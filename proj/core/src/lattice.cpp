#include "parahom/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace parahom {

std::size_t Lattice::spatial_sites() const noexcept {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

std::size_t Lattice::stride(int axis) const noexcept {
  if (axis >= dim) return spatial_sites();
  std::size_t s = 1;
  for (int i = 0; i < axis; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

Lattice Lattice::slice() const noexcept {
  Lattice s = *this;
  s.n_t = 1;
  return s;
}

double Lattice::cell_volume() const noexcept { return std::pow(h, dim) * tau; }

Lattice make_lattice(int d, int n, int n_t, double length, std::optional<double> tau) {
  if (d < 1 || d > kMaxDim) throw ConfigError("lattice: d must be 1, 2 or 3, got " + std::to_string(d));
  if (n < 2) throw ConfigError("lattice: n must be >= 2, got " + std::to_string(n));
  if (n_t < 2) throw ConfigError("lattice: n_t must be >= 2, got " + std::to_string(n_t));
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("lattice: L must be positive");
  Lattice lat;
  lat.dim = d;
  lat.n = n;
  lat.n_t = n_t;
  lat.length = length;
  lat.h = length / n;
  lat.tau = tau ? *tau : lat.h * lat.h;
  if (!(lat.tau > 0.0) || !std::isfinite(lat.tau)) throw ConfigError("lattice: tau must be positive");
  return lat;
}

namespace {
inline int wrap(long x, int n) noexcept {
  long r = x % n;
  return static_cast<int>(r < 0 ? r + n : r);
}
}  // namespace

std::size_t site_index(const Lattice& lat, const SiteCoord& c) noexcept {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int i = 0; i < lat.dim; ++i) {
    idx += static_cast<std::size_t>(wrap(c[i], lat.n)) * stride;
    stride *= static_cast<std::size_t>(lat.n);
  }
  idx += static_cast<std::size_t>(wrap(c[lat.dim], lat.n_t)) * stride;
  return idx;
}

SiteCoord site_coord(const Lattice& lat, std::size_t index) noexcept {
  SiteCoord c{};
  const std::size_t ns = lat.spatial_sites();
  c[lat.dim] = static_cast<int>(index / ns);
  std::size_t rem = index % ns;
  for (int i = 0; i < lat.dim; ++i) {
    c[i] = static_cast<int>(rem % static_cast<std::size_t>(lat.n));
    rem /= static_cast<std::size_t>(lat.n);
  }
  return c;
}

void require_same_lattice(const Lattice& a, const Lattice& b, const char* what) {
  if (!(a == b)) throw CompatibilityError(std::string(what) + ": lattice mismatch");
}

ScalarField::ScalarField(const Lattice& lat, double value) : lat_(lat), v_(lat.sites(), value) {}

ScalarField::ScalarField(const Lattice& lat, std::vector<double> values) : lat_(lat), v_(std::move(values)) {
  if (v_.size() != lat_.sites()) throw CompatibilityError("ScalarField: value count does not match lattice");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_lattice(lat_, o.lat_, "ScalarField +=");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_lattice(lat_, o.lat_, "ScalarField -=");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
  for (double& x : v_) x *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
  require_same_lattice(lat_, o.lat_, "ScalarField axpy");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
  return *this;
}

void ScalarField::fill(double value) noexcept { std::fill(v_.begin(), v_.end(), value); }

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

AxisLayout axis_layout(const Lattice& lat, int axis, std::size_t total) {
  AxisLayout ax;
  ax.inner = lat.stride(axis);
  ax.len = static_cast<std::size_t>(axis < lat.dim ? lat.n : total / lat.spatial_sites());
  ax.outer = total / (ax.inner * ax.len);
  return ax;
}

namespace kernels {

void forward_difference(const double* in, double* out, const AxisLayout& ax, double inv_h) noexcept {
  const std::size_t block = ax.len * ax.inner;
  for (std::size_t o = 0; o < ax.outer; ++o) {
    const double* b = in + o * block;
    double* r = out + o * block;
    for (std::size_t x = 0; x < ax.len; ++x) {
      const std::size_t xp = (x + 1 == ax.len) ? 0 : x + 1;
      const double* u0 = b + x * ax.inner;
      const double* u1 = b + xp * ax.inner;
      double* w = r + x * ax.inner;
      for (std::size_t i = 0; i < ax.inner; ++i) w[i] = (u1[i] - u0[i]) * inv_h;
    }
  }
}

void backward_difference(const double* in, double* out, const AxisLayout& ax, double inv_h) noexcept {
  const std::size_t block = ax.len * ax.inner;
  for (std::size_t o = 0; o < ax.outer; ++o) {
    const double* b = in + o * block;
    double* r = out + o * block;
    for (std::size_t x = 0; x < ax.len; ++x) {
      const std::size_t xm = (x == 0) ? ax.len - 1 : x - 1;
      const double* u0 = b + x * ax.inner;
      const double* u1 = b + xm * ax.inner;
      double* w = r + x * ax.inner;
      for (std::size_t i = 0; i < ax.inner; ++i) w[i] = (u0[i] - u1[i]) * inv_h;
    }
  }
}

void add_backward_difference(const double* in, double* out, const AxisLayout& ax, double scale) noexcept {
  const std::size_t block = ax.len * ax.inner;
  for (std::size_t o = 0; o < ax.outer; ++o) {
    const double* b = in + o * block;
    double* r = out + o * block;
    for (std::size_t x = 0; x < ax.len; ++x) {
      const std::size_t xm = (x == 0) ? ax.len - 1 : x - 1;
      const double* u0 = b + x * ax.inner;
      const double* u1 = b + xm * ax.inner;
      double* w = r + x * ax.inner;
      for (std::size_t i = 0; i < ax.inner; ++i) w[i] += (u0[i] - u1[i]) * scale;
    }
  }
}

void shift_axis(const double* in, double* out, const AxisLayout& ax, long shift) noexcept {
  const std::size_t block = ax.len * ax.inner;
  const long len = static_cast<long>(ax.len);
  for (std::size_t o = 0; o < ax.outer; ++o) {
    for (long x = 0; x < len; ++x) {
      long xs = (x + shift) % len;
      if (xs < 0) xs += len;
      const double* src = in + o * block + static_cast<std::size_t>(xs) * ax.inner;
      double* dst = out + o * block + static_cast<std::size_t>(x) * ax.inner;
      std::copy(src, src + ax.inner, dst);
    }
  }
}

}  // namespace kernels

namespace {
void check_axis(const Lattice& lat, int axis) {
  if (axis < 0 || axis > lat.dim) throw ConfigError("axis out of range");
}
}  // namespace

ScalarField diff_forward(const ScalarField& u, int axis) {
  const Lattice& lat = u.lattice();
  check_axis(lat, axis);
  ScalarField out(lat);
  kernels::forward_difference(u.data(), out.data(), axis_layout(lat, axis, u.size()), 1.0 / lat.spacing(axis));
  return out;
}

ScalarField diff_backward(const ScalarField& u, int axis) {
  const Lattice& lat = u.lattice();
  check_axis(lat, axis);
  ScalarField out(lat);
  kernels::backward_difference(u.data(), out.data(), axis_layout(lat, axis, u.size()), 1.0 / lat.spacing(axis));
  return out;
}

VectorField grad_f(const ScalarField& u) {
  VectorField g;
  g.reserve(static_cast<std::size_t>(u.lattice().dim));
  for (int i = 0; i < u.lattice().dim; ++i) g.push_back(diff_forward(u, i));
  return g;
}

namespace {
ScalarField divergence(const VectorField& v, int components) {
  if (v.empty()) throw CompatibilityError("divergence of empty vector field");
  const Lattice& lat = v.front().lattice();
  if (static_cast<int>(v.size()) != components)
    throw CompatibilityError("divergence: wrong number of components");
  ScalarField out(lat);
  for (int i = 0; i < components; ++i) {
    require_same_lattice(lat, v[i].lattice(), "divergence");
    kernels::add_backward_difference(v[i].data(), out.data(), axis_layout(lat, i, out.size()),
                                     1.0 / lat.spacing(i));
  }
  return out;
}
}  // namespace

ScalarField div_b(const VectorField& v) {
  if (v.empty()) throw CompatibilityError("div_b of empty vector field");
  return divergence(v, v.front().lattice().dim);
}

ScalarField div_st(const VectorField& v) {
  if (v.empty()) throw CompatibilityError("div_st of empty vector field");
  return divergence(v, v.front().lattice().dim + 1);
}

ScalarField dt_b(const ScalarField& u) { return diff_backward(u, u.lattice().dim); }
ScalarField dt_f(const ScalarField& u) { return diff_forward(u, u.lattice().dim); }

ScalarField lap_st(const ScalarField& u) {
  const Lattice& lat = u.lattice();
  ScalarField out(lat);
  std::vector<double> tmp(u.size());
  for (int k = 0; k <= lat.dim; ++k) {
    const AxisLayout ax = axis_layout(lat, k, u.size());
    const double inv = 1.0 / lat.spacing(k);
    kernels::forward_difference(u.data(), tmp.data(), ax, inv);
    kernels::add_backward_difference(tmp.data(), out.data(), ax, inv);
  }
  return out;
}

ScalarField shift(const ScalarField& u, const SiteCoord& offset) {
  const Lattice& lat = u.lattice();
  ScalarField cur = u;
  ScalarField next(lat);
  for (int k = 0; k <= lat.dim; ++k) {
    if (offset[k] == 0) continue;
    kernels::shift_axis(cur.data(), next.data(), axis_layout(lat, k, u.size()), offset[k]);
    std::swap(cur, next);
  }
  return cur;
}

ScalarField extract_slice(const ScalarField& u, int m) {
  const Lattice& lat = u.lattice();
  if (m < 0 || m >= lat.n_t) throw ConfigError("extract_slice: time index out of range");
  const std::size_t ns = lat.spatial_sites();
  const auto begin = u.values().begin() + static_cast<std::ptrdiff_t>(ns * static_cast<std::size_t>(m));
  return ScalarField(lat.slice(), std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(ns)));
}

void insert_slice(ScalarField& u, int m, const ScalarField& slice) {
  const Lattice& lat = u.lattice();
  if (m < 0 || m >= lat.n_t) throw ConfigError("insert_slice: time index out of range");
  require_same_lattice(lat.slice(), slice.lattice(), "insert_slice");
  std::copy(slice.values().begin(), slice.values().end(),
            u.values().begin() + static_cast<std::ptrdiff_t>(lat.spatial_sites() * static_cast<std::size_t>(m)));
}

double mean(const ScalarField& u) noexcept {
  if (u.size() == 0) return 0.0;
  // pairwise-ish accumulation in blocks keeps the error small for large lattices
  double total = 0.0;
  const double* p = u.data();
  const std::size_t n = u.size();
  constexpr std::size_t kBlock = 4096;
  for (std::size_t s = 0; s < n; s += kBlock) {
    double part = 0.0;
    const std::size_t e = std::min(n, s + kBlock);
    for (std::size_t i = s; i < e; ++i) part += p[i];
    total += part;
  }
  return total / static_cast<double>(n);
}

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_lattice(a.lattice(), b.lattice(), "dot");
  double total = 0.0;
  const std::size_t n = a.size();
  constexpr std::size_t kBlock = 4096;
  for (std::size_t s = 0; s < n; s += kBlock) {
    double part = 0.0;
    const std::size_t e = std::min(n, s + kBlock);
    for (std::size_t i = s; i < e; ++i) part += a[i] * b[i];
    total += part;
  }
  return total;
}

double norm2(const ScalarField& u) noexcept {
  double total = 0.0;
  for (double x : u.values()) total += x * x;
  return std::sqrt(total);
}

double rms(const ScalarField& u) noexcept {
  return u.size() == 0 ? 0.0 : norm2(u) / std::sqrt(static_cast<double>(u.size()));
}

double max_abs(const ScalarField& u) noexcept {
  double m = 0.0;
  for (double x : u.values()) m = std::max(m, std::abs(x));
  return m;
}

std::size_t ParabolicBox::sites() const noexcept {
  std::size_t s = 1;
  for (int c : count) s *= static_cast<std::size_t>(std::max(c, 1));
  return s;
}

ParabolicBox lattice_box(const Lattice& lat, int half_space, int half_time) {
  if (half_space < 0 || half_time < 0) throw ConfigError("box half-width must be non-negative");
  ParabolicBox box;
  box.count.fill(1);
  for (int k = 0; k <= lat.dim; ++k) {
    const int half = k < lat.dim ? half_space : half_time;
    const int ext = lat.extent(k);
    if (2 * half + 1 >= ext) {
      box.lo[k] = -(ext / 2);
      box.count[k] = ext;
    } else {
      box.lo[k] = -half;
      box.count[k] = 2 * half + 1;
    }
  }
  return box;
}

ParabolicBox parabolic_box(const Lattice& lat, double r) {
  constexpr double kSlack = 1e-9;
  const double ms = std::floor(r / lat.h + kSlack);
  const double mt = std::floor(r * r / lat.tau + kSlack);
  if (!(r > 0.0) || ms < 1.0 || mt < 1.0)
    throw ConfigError("box_average: radius below one lattice spacing");
  const double cap = 1e8;
  return lattice_box(lat, static_cast<int>(std::min(ms, cap)), static_cast<int>(std::min(mt, cap)));
}

double box_average(const ScalarField& u, const SiteCoord& center, const ParabolicBox& box) {
  const Lattice& lat = u.lattice();
  std::array<std::vector<std::size_t>, kMaxDim + 1> offs;
  for (int k = 0; k <= kMaxDim; ++k) {
    if (k > lat.dim) {
      offs[k] = {0};
      continue;
    }
    const int ext = lat.extent(k);
    const std::size_t stride = lat.stride(k);
    offs[k].resize(static_cast<std::size_t>(box.count[k]));
    for (int j = 0; j < box.count[k]; ++j)
      offs[k][j] = static_cast<std::size_t>(wrap(static_cast<long>(center[k]) + box.lo[k] + j, ext)) * stride;
  }
  // slot order: spatial axes 0..d-1 then time at slot d; unused slots hold a single zero
  double total = 0.0;
  for (std::size_t a3 : offs[3])
    for (std::size_t a2 : offs[2])
      for (std::size_t a1 : offs[1]) {
        const std::size_t base = a3 + a2 + a1;
        for (std::size_t a0 : offs[0]) total += u[base + a0];
      }
  return total / static_cast<double>(box.sites());
}

double box_average(const ScalarField& u, const SiteCoord& center, double r) {
  return box_average(u, center, parabolic_box(u.lattice(), r));
}

}  // namespace parahom
