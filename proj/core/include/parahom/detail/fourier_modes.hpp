#pragma once

#include <numbers>

namespace parahom {

template <class Fn>
void for_each_mode(const Lattice& lat, bool include_time, Fn&& fn) {
  const std::vector<int> dims = fourier_dims(lat, include_time);
  const int rank = static_cast<int>(dims.size());
  std::vector<int> ext(dims);
  ext.back() = dims.back() / 2 + 1;
  // lattice axis of each dim position
  std::vector<int> axis(rank);
  for (int p = 0; p < rank; ++p) {
    if (include_time)
      axis[p] = (p == 0) ? lat.dim : lat.dim - p;
    else
      axis[p] = lat.dim - 1 - p;
  }
  std::array<double, kMaxDim + 1> theta{};
  std::vector<int> m(rank, 0);
  std::size_t total = 1;
  for (int e : ext) total *= static_cast<std::size_t>(e);
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (int p = 0; p < rank; ++p) theta[axis[p]] = 2.0 * std::numbers::pi * m[p] / dims[p];
    fn(idx, theta);
    for (int p = rank - 1; p >= 0; --p) {
      if (++m[p] < ext[p]) break;
      m[p] = 0;
    }
  }
}

}  // namespace parahom
