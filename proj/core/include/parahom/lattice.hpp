/// @file lattice.hpp
/// @brief Periodic space-time lattice, scalar fields and the difference operators.
///
/// Layout is time-major: site index = t * n^d + x_1 + n x_2 + n^2 x_3.
/// Axis numbering: 0..d-1 are spatial, axis d is time.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "parahom/errors.hpp"

namespace parahom {

inline constexpr int kMaxDim = 3;

using SiteCoord = std::array<int, kMaxDim + 1>;  // x_1..x_d, then t at slot d

struct Lattice {
  int dim = 0;
  int n = 0;
  int n_t = 0;
  double length = 0.0;
  double h = 0.0;
  double tau = 0.0;

  std::size_t spatial_sites() const noexcept;
  std::size_t sites() const noexcept { return spatial_sites() * static_cast<std::size_t>(n_t); }
  double time_period() const noexcept { return n_t * tau; }
  double spacing(int axis) const noexcept { return axis < dim ? h : tau; }
  int extent(int axis) const noexcept { return axis < dim ? n : n_t; }
  std::size_t stride(int axis) const noexcept;
  // Lattice of one time slice (n_t = 1); used by time stepping.
  Lattice slice() const noexcept;
  // Volume element h^d tau.
  double cell_volume() const noexcept;

  bool operator==(const Lattice&) const = default;
};

// Validated constructor: d in {1,2,3}, n >= 2, n_t >= 2, length > 0.
// tau defaults to h^2.
Lattice make_lattice(int d, int n, int n_t, double length, std::optional<double> tau = std::nullopt);

std::size_t site_index(const Lattice& lat, const SiteCoord& c) noexcept;  // wraps periodically
SiteCoord site_coord(const Lattice& lat, std::size_t index) noexcept;

void require_same_lattice(const Lattice& a, const Lattice& b, const char* what);

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Lattice& lat, double value = 0.0);
  ScalarField(const Lattice& lat, std::vector<double> values);

  const Lattice& lattice() const noexcept { return lat_; }
  std::size_t size() const noexcept { return v_.size(); }
  std::span<double> values() noexcept { return v_; }
  std::span<const double> values() const noexcept { return v_; }
  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }
  double& operator[](std::size_t i) noexcept { return v_[i]; }
  double operator[](std::size_t i) const noexcept { return v_[i]; }
  double& at(const SiteCoord& c) noexcept { return v_[site_index(lat_, c)]; }
  double at(const SiteCoord& c) const noexcept { return v_[site_index(lat_, c)]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s) noexcept;
  // this += s * o
  ScalarField& axpy(double s, const ScalarField& o);
  void fill(double value) noexcept;

 private:
  Lattice lat_{};
  std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

using VectorField = std::vector<ScalarField>;

// Loop shape of one axis over a contiguous buffer: index = (o * len + x) * inner + i.
struct AxisLayout {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};
AxisLayout axis_layout(const Lattice& lat, int axis, std::size_t total);

namespace kernels {
// out = (in(x+1) - in(x)) * inv_h, periodic along the axis.
void forward_difference(const double* in, double* out, const AxisLayout& ax, double inv_h) noexcept;
// out = (in(x) - in(x-1)) * inv_h
void backward_difference(const double* in, double* out, const AxisLayout& ax, double inv_h) noexcept;
// out += (in(x) - in(x-1)) * scale
void add_backward_difference(const double* in, double* out, const AxisLayout& ax, double scale) noexcept;
// out = in(x + shift) along the axis
void shift_axis(const double* in, double* out, const AxisLayout& ax, long shift) noexcept;
}  // namespace kernels

ScalarField diff_forward(const ScalarField& u, int axis);
ScalarField diff_backward(const ScalarField& u, int axis);
VectorField grad_f(const ScalarField& u);          // d spatial forward differences
ScalarField div_b(const VectorField& v);           // sum of spatial backward differences
ScalarField div_st(const VectorField& v);          // d spatial + 1 temporal backward differences
ScalarField dt_b(const ScalarField& u);
ScalarField dt_f(const ScalarField& u);
ScalarField lap_st(const ScalarField& u);          // sum_k D^b_k D^f_k over all d+1 axes
ScalarField shift(const ScalarField& u, const SiteCoord& offset);  // result(z) = u(z + offset)

// time slice m as a field on lat.slice(), and the reverse copy
ScalarField extract_slice(const ScalarField& u, int m);
void insert_slice(ScalarField& u, int m, const ScalarField& slice);

double mean(const ScalarField& u) noexcept;
double dot(const ScalarField& a, const ScalarField& b);
double norm2(const ScalarField& u) noexcept;    // Euclidean norm over sites
double rms(const ScalarField& u) noexcept;      // sqrt(mean(u^2))
double max_abs(const ScalarField& u) noexcept;

// Discrete parabolic cube Q_r: spatial half-width floor(r/h), temporal half-width floor(r^2/tau).
// An axis whose box would cover the whole period is taken in full once.
struct ParabolicBox {
  std::array<int, kMaxDim + 1> lo{};     // first offset per axis
  std::array<int, kMaxDim + 1> count{};  // number of offsets per axis
  std::size_t sites() const noexcept;
};
ParabolicBox parabolic_box(const Lattice& lat, double r);
ParabolicBox lattice_box(const Lattice& lat, int half_width_space, int half_width_time);
double box_average(const ScalarField& u, const SiteCoord& center, const ParabolicBox& box);
double box_average(const ScalarField& u, const SiteCoord& center, double r);

}  // namespace parahom
