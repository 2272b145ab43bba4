/// @file fourier.hpp
/// @brief Thin RAII layer over FFTW for lattice-shaped transforms.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "parahom/lattice.hpp"

namespace parahom {

// Real <-> half-complex transform over a row-major array (last dim fastest).
class RealFourier {
 public:
  explicit RealFourier(std::vector<int> dims);
  ~RealFourier();
  RealFourier(const RealFourier&) = delete;
  RealFourier& operator=(const RealFourier&) = delete;
  RealFourier(RealFourier&&) noexcept;
  RealFourier& operator=(RealFourier&&) noexcept;

  std::span<double> real() noexcept;
  std::span<std::complex<double>> spectrum() noexcept;
  void forward();
  // unnormalized inverse followed by division by the number of points
  void inverse();
  const std::vector<int>& dims() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Complex <-> complex transform (used for real parts of complex Gaussian sums).
class ComplexFourier {
 public:
  explicit ComplexFourier(std::vector<int> dims);
  ~ComplexFourier();
  ComplexFourier(const ComplexFourier&) = delete;
  ComplexFourier& operator=(const ComplexFourier&) = delete;

  std::span<std::complex<double>> data() noexcept;
  // sum_k c_k exp(+i k.x) (unnormalized backward transform)
  void backward();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sine transform (DST-I) on the interior nodes 1..n-1 of each spatial axis of a slice.
class DirichletSine {
 public:
  explicit DirichletSine(const Lattice& slice);
  ~DirichletSine();
  DirichletSine(const DirichletSine&) = delete;
  DirichletSine& operator=(const DirichletSine&) = delete;

  std::span<double> data() noexcept;  // (n-1)^d interior values, axis 0 fastest
  void forward();
  void inverse();  // includes normalization

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Row-major FFT dims of a lattice (time first when include_time, then x_d ... x_1).
std::vector<int> fourier_dims(const Lattice& lat, bool include_time);

// Angle theta_k = 2 pi m_k / extent_k of every half-spectrum entry, indexed by lattice axis
// (slot d is time). Calls fn(spectrum_index, angles).
template <class Fn>
void for_each_mode(const Lattice& lat, bool include_time, Fn&& fn);

}  // namespace parahom

#include "parahom/detail/fourier_modes.hpp"
