#pragma once

#include <array>
#include <cmath>

namespace parahom {

// Small dense d x d matrix, d <= 3, row-major.
struct Tensor2 {
  int dim = 0;
  std::array<double, 9> v{};

  static Tensor2 zero(int d) {
    Tensor2 t;
    t.dim = d;
    return t;
  }
  static Tensor2 scalar(int d, double s) {
    Tensor2 t = zero(d);
    for (int i = 0; i < d; ++i) t(i, i) = s;
    return t;
  }
  double& operator()(int i, int k) noexcept { return v[static_cast<std::size_t>(3 * i + k)]; }
  double operator()(int i, int k) const noexcept { return v[static_cast<std::size_t>(3 * i + k)]; }
  double trace() const noexcept {
    double t = 0.0;
    for (int i = 0; i < dim; ++i) t += (*this)(i, i);
    return t;
  }
  double max_abs_diff(const Tensor2& o) const noexcept {
    double m = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) m = std::fmax(m, std::fabs((*this)(i, k) - o(i, k)));
    return m;
  }
  bool is_diagonal() const noexcept {
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k)
        if (i != k && (*this)(i, k) != 0.0) return false;
    return true;
  }
};

}  // namespace parahom
