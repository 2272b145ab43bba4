/// @file fluxcor.hpp
/// @brief Skew-symmetric flux corrector sigma built from the flux field q.
///
/// Indices run over all d+1 space-time axes (axis d is time). With
/// P_i = lap_st^{-1} q_ij and b_ki = D^f_k P_i, sigma_kij = b_ki - b_ik.
#pragma once

#include <vector>

#include "parahom/corrector.hpp"

namespace parahom {

class FluxCorrector {
 public:
  FluxCorrector() = default;
  FluxCorrector(int dim, std::vector<std::vector<ScalarField>> upper);

  int dim() const noexcept { return dim_; }
  const Lattice& lattice() const;
  // sigma_{k i j}, k and i in 0..d; exact antisymmetry by construction
  ScalarField component(int k, int i, int j) const;
  // stored entry for k < i together with the sign that maps it to (k, i)
  const ScalarField& stored(int k, int i, int j, double& sign) const;

 private:
  int dim_ = 0;
  std::vector<std::vector<ScalarField>> upper_;  // [j][pair(k<i)]
};

int sigma_pair_index(int dim, int k, int i);  // k < i, pairs ordered lexicographically

FluxCorrector solve_sigma(const FluxField& q);

struct IdentityReport {
  double poisson = 0.0;     // lap_st sigma_kij = D^f_k q_ij - D^f_i q_kj
  double divergence = 0.0;  // sum_k D^b_k sigma_kij = q_ij  (i <= d spatial)
  double time_row = 0.0;    // sum_i D^b_i sigma_(d+1)ij = mean(phi_j) - phi_j
  double flux_divergence = 0.0;  // ||sum_i D^b_i q_ij + dt_b q_(d+1)j|| / sum of the term norms
  double skew = 0.0;        // max |sigma_kij + sigma_ikj|
};
// With the coefficient field, the flux-divergence scale also includes |div_b(M e_j)|, which
// keeps the ratio meaningful when q vanishes identically (laminates).
IdentityReport verify_identities(const FluxCorrector& sigma, const FluxField& q, const CorrectorSet& phi,
                                 const CoefficientField* a = nullptr);

struct GrowthRow {
  double radius = 0.0;
  double rms_increment = 0.0;
  int offsets = 0;
};
// RMS over offsets z at parabolic distance r (+-r e_i in space, +-r^2 in time) and over i of
// avg_{Q_1(z)} sigma_(d+1)ij - avg_{Q_1(0)} sigma_(d+1)ij.
std::vector<GrowthRow> growth_profile(const FluxCorrector& sigma, int j, const std::vector<double>& radii,
                                      double box_radius = 1.0);

}  // namespace parahom
