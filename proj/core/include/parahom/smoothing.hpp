/// @file smoothing.hpp
/// @brief Mollifiers K_eps (space) and S_eps (space-time) and the boundary cutoff.
///
/// Spatial kernel: bump (1 - |z|^2)^4 of radius 1/4 centred at distance 1/4 from the
/// origin along the diagonal, so its support stays inside the ball of radius 1/2.
/// Temporal kernel: the same bump profile on (0, 1/4), acting on past values only.
/// The off-centre placement gives the kernels a non-zero first moment.
#pragma once

#include <utility>
#include <vector>

#include "parahom/lattice.hpp"

namespace parahom {

struct SpatialStencil {
  std::vector<SiteCoord> offsets;  // K f(x) = sum_o w_o f(x - o)
  std::vector<double> weights;     // sums to 1
};
struct TemporalStencil {
  std::vector<int> lags;  // S acts on f(t - lag * tau)
  std::vector<double> weights;
};

double spatial_bump(const double* y, int dim) noexcept;  // unnormalized profile on the unit scale
double temporal_bump(double s) noexcept;

SpatialStencil spatial_kernel(const Lattice& lat, double eps);
TemporalStencil temporal_kernel(const Lattice& lat, double eps);

enum class TimeExtension {
  periodic,  // fields periodic in time
  zero,      // fields vanish before level 0 (evolution data)
};

ScalarField smooth_K(const ScalarField& u, double eps);
ScalarField smooth_S(const ScalarField& u, double eps, TimeExtension ext = TimeExtension::periodic);

// quintic smoothstep: 0 for dist <= 2 eps, 1 for dist >= 4 eps
double cutoff_profile(double dist, double eps) noexcept;

}  // namespace parahom
