// Independent reference computations for the tests. Deliberately naive: explicit
// index arithmetic, dense matrices and O(N^2) transforms, no library operators.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

// Lattice shape: d spatial axes of n sites, n_t levels; index = t*n^d + x1 + n*x2 + ...
struct Grid {
  int d = 2;
  int n = 4;
  int n_t = 4;
  double h = 1.0;
  double tau = 1.0;

  int spatial() const {
    int s = 1;
    for (int a = 0; a < d; ++a) s *= n;
    return s;
  }
  int size() const { return spatial() * n_t; }
  int extent(int axis) const { return axis < d ? n : n_t; }
  double spacing(int axis) const { return axis < d ? h : tau; }
  std::array<int, 4> coord(int idx) const {
    std::array<int, 4> c{};
    for (int a = 0; a < d; ++a) {
      c[static_cast<std::size_t>(a)] = idx % n;
      idx /= n;
    }
    c[static_cast<std::size_t>(d)] = idx;
    return c;
  }
  int index(std::array<int, 4> c) const {
    int idx = 0;
    int stride = 1;
    for (int a = 0; a < d; ++a) {
      const int x = ((c[static_cast<std::size_t>(a)] % n) + n) % n;
      idx += x * stride;
      stride *= n;
    }
    const int t = ((c[static_cast<std::size_t>(d)] % n_t) + n_t) % n_t;
    return idx + t * stride;
  }
  int neighbor(int idx, int axis, int step) const {
    auto c = coord(idx);
    c[static_cast<std::size_t>(axis)] += step;
    return index(c);
  }
};

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

// Gaussian elimination with partial pivoting.
inline Vec dense_solve(Mat A, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    if (std::abs(A[piv][k]) < 1e-300) throw std::runtime_error("dense_solve: singular");
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = A[r][k] / A[k][k];
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) A[r][c] -= f * A[k][c];
      b[r] -= f * b[k];
    }
  }
  Vec x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= A[k][c] * x[c];
    x[k] = s / A[k][k];
  }
  return x;
}

inline double mean(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---- Fourier: naive DFT solve of the space-time Laplacian ----

// lap_st symbol at mode m: -sum_axes (2 - 2 cos(2 pi m_a / N_a)) / h_a^2
inline Vec naive_poisson(const Grid& g, const Vec& f) {
  const int N = g.size();
  std::vector<std::complex<double>> F(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const auto mk = g.coord(k);
    std::complex<double> s = 0.0;
    for (int z = 0; z < N; ++z) {
      const auto cz = g.coord(z);
      double phase = 0.0;
      for (int a = 0; a <= g.d; ++a)
        phase += 2.0 * std::numbers::pi * mk[static_cast<std::size_t>(a)] * cz[static_cast<std::size_t>(a)] / g.extent(a);
      s += f[static_cast<std::size_t>(z)] * std::exp(std::complex<double>(0.0, -phase));
    }
    double sym = 0.0;
    for (int a = 0; a <= g.d; ++a) {
      const double th = 2.0 * std::numbers::pi * mk[static_cast<std::size_t>(a)] / g.extent(a);
      sym -= (2.0 - 2.0 * std::cos(th)) / (g.spacing(a) * g.spacing(a));
    }
    F[static_cast<std::size_t>(k)] = (k == 0) ? 0.0 : s / sym;
  }
  Vec u(static_cast<std::size_t>(N));
  for (int z = 0; z < N; ++z) {
    const auto cz = g.coord(z);
    std::complex<double> s = 0.0;
    for (int k = 0; k < N; ++k) {
      const auto mk = g.coord(k);
      double phase = 0.0;
      for (int a = 0; a <= g.d; ++a)
        phase += 2.0 * std::numbers::pi * mk[static_cast<std::size_t>(a)] * cz[static_cast<std::size_t>(a)] / g.extent(a);
      s += F[static_cast<std::size_t>(k)] * std::exp(std::complex<double>(0.0, phase));
    }
    u[static_cast<std::size_t>(z)] = s.real() / N;
  }
  return u;
}

inline Vec forward_diff(const Grid& g, const Vec& u, int axis) {
  Vec out(u.size());
  for (int z = 0; z < g.size(); ++z)
    out[static_cast<std::size_t>(z)] =
        (u[static_cast<std::size_t>(g.neighbor(z, axis, 1))] - u[static_cast<std::size_t>(z)]) / g.spacing(axis);
  return out;
}

// ---- isotropic cell problem, assembled densely ----

// face value between z and z + e_i
inline double face(const Grid& g, const Vec& a, int z, int i) {
  return 0.5 * (a[static_cast<std::size_t>(z)] + a[static_cast<std::size_t>(g.neighbor(z, i, 1))]);
}

// dt_b phi - div_b(M (grad_f phi + e_j)) = 0 on the space-time torus, zero mean.
inline Vec cell_corrector(const Grid& g, const Vec& a, int j) {
  const int N = g.size();
  Mat A(static_cast<std::size_t>(N), Vec(static_cast<std::size_t>(N), 0.0));
  Vec b(static_cast<std::size_t>(N), 0.0);
  const double h2 = g.h * g.h;
  for (int z = 0; z < N; ++z) {
    auto& row = A[static_cast<std::size_t>(z)];
    row[static_cast<std::size_t>(z)] += 1.0 / g.tau;
    row[static_cast<std::size_t>(g.neighbor(z, g.d, -1))] -= 1.0 / g.tau;
    for (int i = 0; i < g.d; ++i) {
      const int zp = g.neighbor(z, i, 1), zm = g.neighbor(z, i, -1);
      const double mp = face(g, a, z, i), mm = face(g, a, zm, i);
      row[static_cast<std::size_t>(z)] += (mp + mm) / h2;
      row[static_cast<std::size_t>(zp)] -= mp / h2;
      row[static_cast<std::size_t>(zm)] -= mm / h2;
    }
    b[static_cast<std::size_t>(z)] = (face(g, a, z, j) - face(g, a, g.neighbor(z, j, -1), j)) / g.h;
  }
  // constants span the kernel; the rank-one term pins the mean to zero
  for (auto& row : A)
    for (double& x : row) x += 1.0 / N;
  return dense_solve(A, b);
}

// abar_ij = mean of M_i (D_i phi_j + delta_ij)
inline double effective_entry(const Grid& g, const Vec& a, const Vec& phi_j, int i, int j) {
  double s = 0.0;
  for (int z = 0; z < g.size(); ++z) {
    const double grad = (phi_j[static_cast<std::size_t>(g.neighbor(z, i, 1))] - phi_j[static_cast<std::size_t>(z)]) / g.h;
    s += face(g, a, z, i) * (grad + (i == j ? 1.0 : 0.0));
  }
  return s / g.size();
}

// q_ij for i < d, and phi_j - mean at slot d
inline std::vector<Vec> flux(const Grid& g, const Vec& a, const Vec& phi_j, int j, const std::vector<double>& abar_col) {
  std::vector<Vec> q(static_cast<std::size_t>(g.d + 1), Vec(static_cast<std::size_t>(g.size())));
  const double m = mean(phi_j);
  for (int z = 0; z < g.size(); ++z) {
    for (int i = 0; i < g.d; ++i) {
      const double grad = (phi_j[static_cast<std::size_t>(g.neighbor(z, i, 1))] - phi_j[static_cast<std::size_t>(z)]) / g.h;
      q[static_cast<std::size_t>(i)][static_cast<std::size_t>(z)] =
          abar_col[static_cast<std::size_t>(i)] - face(g, a, z, i) * (grad + (i == j ? 1.0 : 0.0));
    }
    q[static_cast<std::size_t>(g.d)][static_cast<std::size_t>(z)] = phi_j[static_cast<std::size_t>(z)] - m;
  }
  return q;
}

// sigma_ki = D_k P_i - D_i P_k with lap_st P_i = q_i
inline Vec sigma_component(const Grid& g, const std::vector<Vec>& q, int k, int i) {
  const Vec Pi = naive_poisson(g, q[static_cast<std::size_t>(i)]);
  const Vec Pk = naive_poisson(g, q[static_cast<std::size_t>(k)]);
  const Vec a = forward_diff(g, Pi, k), b = forward_diff(g, Pk, i);
  Vec s(a.size());
  for (std::size_t z = 0; z < s.size(); ++z) s[z] = a[z] - b[z];
  return s;
}

// ---- laminates: closed forms for the face-averaged discretization ----

// a depends on x1 only: abar_11 is the harmonic mean of the x1-faces, abar_22 the arithmetic mean
inline std::array<double, 2> laminate_space(const std::vector<double>& a_of_x1) {
  const std::size_t n = a_of_x1.size();
  double inv = 0.0, arith = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    inv += 1.0 / (0.5 * (a_of_x1[x] + a_of_x1[(x + 1) % n]));
    arith += a_of_x1[x];
  }
  return {static_cast<double>(n) / inv, arith / static_cast<double>(n)};
}

// continuum laminate limit for equal-volume phases
inline std::array<double, 2> laminate_continuum(double a1, double a2) {
  return {2.0 / (1.0 / a1 + 1.0 / a2), 0.5 * (a1 + a2)};
}

// ---- minimal-radius functionals by brute force ----

struct BoxScan {
  std::vector<double> first, second;
};

// phi[j], sigma_spatial[j][(k,i)] for k < i < d, sigma_top[j][i] = sigma_(d+1) i j.
inline BoxScan minimal_radius_scan(const Grid& g, const std::vector<Vec>& phi,
                                   const std::vector<std::vector<Vec>>& sigma_spatial,
                                   const std::vector<std::vector<Vec>>& sigma_top, const std::vector<double>& radii,
                                   std::array<int, 4> center) {
  BoxScan out;
  for (double R : radii) {
    // per axis: list of offsets
    std::vector<std::vector<int>> offs(static_cast<std::size_t>(g.d + 1));
    for (int a = 0; a <= g.d; ++a) {
      const int w = a < g.d ? static_cast<int>(std::floor(R / g.h + 1e-12))
                            : static_cast<int>(std::floor(R * R / g.tau + 1e-12));
      auto& o = offs[static_cast<std::size_t>(a)];
      if (2 * w + 1 >= g.extent(a)) {
        const int lo = -(g.extent(a) / 2);
        for (int k = 0; k < g.extent(a); ++k) o.push_back(lo + k);
      } else {
        for (int k = -w; k <= w; ++k) o.push_back(k);
      }
    }
    // enumerate box
    std::vector<int> sites, level;
    std::vector<std::array<double, 3>> xs;
    std::array<std::size_t, 4> k{};
    while (true) {
      std::array<int, 4> c = center;
      std::array<double, 3> x{};
      for (int a = 0; a <= g.d; ++a) {
        const int o = offs[static_cast<std::size_t>(a)][k[static_cast<std::size_t>(a)]];
        c[static_cast<std::size_t>(a)] += o;
        if (a < g.d) x[static_cast<std::size_t>(a)] = o * g.h;
      }
      sites.push_back(g.index(c));
      level.push_back(static_cast<int>(k[static_cast<std::size_t>(g.d)]));
      xs.push_back(x);
      int a = 0;
      for (; a <= g.d; ++a) {
        if (++k[static_cast<std::size_t>(a)] < offs[static_cast<std::size_t>(a)].size()) break;
        k[static_cast<std::size_t>(a)] = 0;
      }
      if (a > g.d) break;
    }
    const double cnt = static_cast<double>(sites.size());
    auto avg = [&](const Vec& u) {
      double s = 0.0;
      for (int z : sites) s += u[static_cast<std::size_t>(z)];
      return s / cnt;
    };
    auto var = [&](const Vec& u) {
      const double m = avg(u);
      double s = 0.0;
      for (int z : sites) s += (u[static_cast<std::size_t>(z)] - m) * (u[static_cast<std::size_t>(z)] - m);
      return s / cnt;
    };
    const int nlev = static_cast<int>(offs[static_cast<std::size_t>(g.d)].size());
    auto slice_var = [&](const Vec& u) {
      std::vector<double> s(static_cast<std::size_t>(nlev), 0.0), c(static_cast<std::size_t>(nlev), 0.0);
      for (std::size_t q = 0; q < sites.size(); ++q) {
        s[static_cast<std::size_t>(level[q])] += u[static_cast<std::size_t>(sites[q])];
        c[static_cast<std::size_t>(level[q])] += 1.0;
      }
      double acc = 0.0;
      for (std::size_t q = 0; q < sites.size(); ++q) {
        const auto l = static_cast<std::size_t>(level[q]);
        const double v = u[static_cast<std::size_t>(sites[q])] - s[l] / c[l];
        acc += v * v;
      }
      return acc / cnt;
    };
    double first = 0.0, second = 0.0;
    for (const Vec& p : phi) first += var(p);
    for (const auto& per_j : sigma_spatial)
      for (const Vec& s : per_j) first += 2.0 * slice_var(s);
    for (const auto& per_j : sigma_top)
      for (const Vec& s : per_j) {
        std::array<double, 3> slope{};
        for (int a = 0; a < g.d; ++a) {
          const Vec grad = forward_diff(g, s, a);
          first += var(grad);
          slope[static_cast<std::size_t>(a)] = avg(grad);
        }
        const double m = avg(s);
        double acc = 0.0;
        for (std::size_t q = 0; q < sites.size(); ++q) {
          double v = s[static_cast<std::size_t>(sites[q])] - m;
          for (int a = 0; a < g.d; ++a) v -= xs[q][static_cast<std::size_t>(a)] * slope[static_cast<std::size_t>(a)];
          acc += v * v;
        }
        second += acc / cnt;
      }
    out.first.push_back(std::sqrt(first) / R);
    out.second.push_back(std::sqrt(second) / (R * R));
  }
  return out;
}

// smallest grid radius from which every larger one passes; -1 when censored
inline double chi_from_scan(const BoxScan& s, const std::vector<double>& radii, double theta) {
  int first_ok = static_cast<int>(radii.size());
  for (int i = static_cast<int>(radii.size()) - 1; i >= 0; --i) {
    if (s.first[static_cast<std::size_t>(i)] + s.second[static_cast<std::size_t>(i)] <= theta)
      first_ok = i;
    else
      break;
  }
  if (first_ok == static_cast<int>(radii.size())) return -1.0;
  return std::max(1.0, radii[static_cast<std::size_t>(first_ok)]);
}

// ---- macro evolution: dense implicit Euler on the Dirichlet box ----

// u^m - tau div_b(M^m grad_f u^m) = u^{m-1} + tau F^m on interior nodes, u = 0 on node 0 of each axis.
// coeff(level, node) gives the isotropic coefficient at that macro node.
inline std::vector<Vec> implicit_euler_box(const Grid& g, int steps, const std::function<double(int, int)>& coeff,
                                           const std::function<double(int, int)>& source) {
  Grid s = g;
  s.n_t = 1;
  const int N = s.size();
  auto boundary = [&](int z) {
    const auto c = s.coord(z);
    for (int a = 0; a < s.d; ++a)
      if (c[static_cast<std::size_t>(a)] == 0) return true;
    return false;
  };
  std::vector<Vec> u(static_cast<std::size_t>(steps + 1), Vec(static_cast<std::size_t>(N), 0.0));
  const double h2 = g.h * g.h;
  for (int m = 1; m <= steps; ++m) {
    Vec a(static_cast<std::size_t>(N));
    for (int z = 0; z < N; ++z) a[static_cast<std::size_t>(z)] = coeff(m, z);
    Mat A(static_cast<std::size_t>(N), Vec(static_cast<std::size_t>(N), 0.0));
    Vec b(static_cast<std::size_t>(N), 0.0);
    for (int z = 0; z < N; ++z) {
      auto& row = A[static_cast<std::size_t>(z)];
      if (boundary(z)) {
        row[static_cast<std::size_t>(z)] = 1.0;
        continue;
      }
      row[static_cast<std::size_t>(z)] += 1.0;
      for (int i = 0; i < s.d; ++i) {
        const int zp = s.neighbor(z, i, 1), zm = s.neighbor(z, i, -1);
        const double mp = face(s, a, z, i), mm = face(s, a, zm, i);
        row[static_cast<std::size_t>(z)] += g.tau * (mp + mm) / h2;
        if (!boundary(zp)) row[static_cast<std::size_t>(zp)] -= g.tau * mp / h2;
        if (!boundary(zm)) row[static_cast<std::size_t>(zm)] -= g.tau * mm / h2;
      }
      b[static_cast<std::size_t>(z)] = u[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(z)] + g.tau * source(m, z);
    }
    u[static_cast<std::size_t>(m)] = dense_solve(A, b);
  }
  return u;
}

}  // namespace oracle
