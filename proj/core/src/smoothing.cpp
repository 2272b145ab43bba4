#include "parahom/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace parahom {

namespace {

constexpr double kRadius = 0.25;

double bump(double r2) noexcept {
  if (r2 >= 1.0) return 0.0;
  const double b = 1.0 - r2;
  return b * b * b * b;
}

}  // namespace

double spatial_bump(const double* y, int dim) noexcept {
  const double c = kRadius / std::sqrt(static_cast<double>(dim));
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double z = (y[i] - c) / kRadius;
    r2 += z * z;
  }
  return bump(r2);
}

double temporal_bump(double s) noexcept {
  const double z = (s - 0.5 * kRadius) / (0.5 * kRadius);
  return bump(z * z);
}

SpatialStencil spatial_kernel(const Lattice& lat, double eps) {
  if (!(eps >= lat.h)) throw ConfigError("smoothing: eps below one lattice spacing");
  const int d = lat.dim;
  const int reach = static_cast<int>(std::ceil(0.5 * eps / lat.h)) + 1;
  if (2 * reach + 1 > lat.n) throw ConfigError("smoothing: kernel support exceeds the lattice");
  SpatialStencil st;
  SiteCoord o{};
  std::array<int, kMaxDim> k{};
  k.fill(-reach);
  double total = 0.0;
  while (true) {
    double y[kMaxDim];
    for (int i = 0; i < d; ++i) y[i] = k[i] * lat.h / eps;
    const double w = spatial_bump(y, d);
    if (w > 0.0) {
      for (int i = 0; i < d; ++i) o[i] = k[i];
      st.offsets.push_back(o);
      st.weights.push_back(w);
      total += w;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++k[i] <= reach) break;
      k[i] = -reach;
    }
    if (i == d) break;
  }
  if (st.weights.empty()) throw ConfigError("smoothing: spatial kernel not resolved by the lattice");
  for (double& w : st.weights) w /= total;
  return st;
}

TemporalStencil temporal_kernel(const Lattice& lat, double eps) {
  const double span = eps * eps / lat.tau;  // lattice steps per unit of s
  const int reach = static_cast<int>(std::ceil(0.25 * span));
  TemporalStencil st;
  double total = 0.0;
  for (int m = 0; m <= reach; ++m) {
    const double w = temporal_bump(m / span);
    if (w > 0.0) {
      st.lags.push_back(m);
      st.weights.push_back(w);
      total += w;
    }
  }
  if (st.weights.empty()) throw ConfigError("smoothing: temporal kernel not resolved by the lattice");
  if (reach >= lat.n_t) throw ConfigError("smoothing: temporal kernel exceeds the lattice");
  for (double& w : st.weights) w /= total;
  return st;
}

namespace {

int wrap(int x, int n) {
  const int r = x % n;
  return r < 0 ? r + n : r;
}

}  // namespace

ScalarField smooth_K(const ScalarField& u, double eps) {
  const Lattice& lat = u.lattice();
  const SpatialStencil st = spatial_kernel(lat, eps);
  const int d = lat.dim;
  const int n = lat.n;
  const std::size_t ns = lat.spatial_sites();
  ScalarField out(lat);
  // source index table per axis: coordinate -> (coordinate - offset) * stride
  std::vector<std::size_t> t0(static_cast<std::size_t>(n)), t1(static_cast<std::size_t>(d > 1 ? n : 1), 0),
      t2(static_cast<std::size_t>(d > 2 ? n : 1), 0);
  for (std::size_t e = 0; e < st.weights.size(); ++e) {
    const SiteCoord& o = st.offsets[e];
    const double w = st.weights[e];
    for (int x = 0; x < n; ++x) t0[x] = static_cast<std::size_t>(wrap(x - o[0], n));
    if (d > 1)
      for (int x = 0; x < n; ++x) t1[x] = static_cast<std::size_t>(wrap(x - o[1], n)) * static_cast<std::size_t>(n);
    if (d > 2)
      for (int x = 0; x < n; ++x)
        t2[x] = static_cast<std::size_t>(wrap(x - o[2], n)) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    for (int t = 0; t < lat.n_t; ++t) {
      const double* src = u.data() + static_cast<std::size_t>(t) * ns;
      double* dst = out.data() + static_cast<std::size_t>(t) * ns;
      std::size_t idx = 0;
      for (std::size_t a2 : t2)
        for (std::size_t a1 : t1) {
          const double* row = src + a2 + a1;
          for (int x = 0; x < n; ++x) dst[idx++] += w * row[t0[x]];
        }
    }
  }
  return out;
}

ScalarField smooth_S(const ScalarField& u, double eps, TimeExtension ext) {
  const Lattice& lat = u.lattice();
  const TemporalStencil ts = temporal_kernel(lat, eps);
  const ScalarField k = smooth_K(u, eps);
  const std::size_t ns = lat.spatial_sites();
  ScalarField out(lat);
  for (int t = 0; t < lat.n_t; ++t) {
    double* dst = out.data() + static_cast<std::size_t>(t) * ns;
    for (std::size_t e = 0; e < ts.lags.size(); ++e) {
      int src_t = t - ts.lags[e];
      if (src_t < 0) {
        if (ext == TimeExtension::zero) continue;
        src_t = wrap(src_t, lat.n_t);
      }
      const double* src = k.data() + static_cast<std::size_t>(src_t) * ns;
      const double w = ts.weights[e];
      for (std::size_t s = 0; s < ns; ++s) dst[s] += w * src[s];
    }
  }
  return out;
}

double cutoff_profile(double dist, double eps) noexcept {
  const double x = std::clamp((dist - 2.0 * eps) / (2.0 * eps), 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

}  // namespace parahom
