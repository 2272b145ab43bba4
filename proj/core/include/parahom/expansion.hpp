/// @file expansion.hpp
/// @brief Two-scale expansion error w_eps and the residual of its evolution equation.
///
/// With test functions g_j = S K (Psi D_j u_0) and micro fields tiled onto the macro grid,
///   w = u_eps - u_0 - eps (phi_j - alpha_j) g_j - eps^2 S_{-l}sigma~_{l,t,j} D^b_l g_j,
/// where sigma~_{l,t,j} = sigma_{l,t,j} - pi_{i l j} y_i and y is the unreduced micro position.
/// Shifts on the micro fields follow the discrete product rules, so the only mismatch
/// between (dt_b - div_b M grad_f) w and div_b f - eps sum_l pi_llj dt_b g_j is the
/// non-symmetric part of the mixed second differences, which is first order in the
/// micro spacing.
#pragma once

#include <vector>

#include "parahom/fluxcor.hpp"
#include "parahom/macro.hpp"

namespace parahom {

struct ShiftConstants {
  std::vector<double> alpha;  // alpha_j = mean(phi_j)
  std::vector<Tensor2> pi;    // pi[j](k, l) = box average over Q_{2/eps} of D^f_k sigma_{l,t,j}
  // spatial mean of sigma_{i l j} at each micro level: beta[j][i * d + l][level]
  std::vector<std::vector<std::vector<double>>> beta;
};
ShiftConstants shift_constants(const CorrectorSet& c, const FluxCorrector& sigma, double eps);

// g_j = S_eps K_eps (Psi D^f_j u_0), zero extension before t = 0
std::vector<ScalarField> test_functions(const ScalarField& u0, const CylinderProblem& p);

struct TwoScaleInputs {
  const CylinderProblem& problem;
  const CoefficientField& a;  // micro coefficients
  const CorrectorSet& correctors;
  const FluxCorrector& sigma;
  const Tensor2& abar;
  const ScalarField& u_eps;
  const ScalarField& u_0;
};

struct ExpansionReport {
  double eps = 0.0;
  double err_l2 = 0.0;     // ||u_eps - u_0||
  double w_l2 = 0.0;
  double grad_w_l2 = 0.0;
  double residual = 0.0;   // relative, H^-1 in space per level
  double residual_l2 = 0.0;  // relative, plain L2
  bool degenerate = false;   // cutoff never reaches 1: 4 eps >= box/2
  std::uint64_t seed = 0;
};

struct Expansion {
  ScalarField w;
  std::vector<ScalarField> test;  // g_j
  ShiftConstants shifts;
  ExpansionReport report;
};

Expansion expansion(const TwoScaleInputs& in);

struct ResidualReport {
  double absolute = 0.0;      // H^-1 norm of the mismatch
  double rhs = 0.0;           // H^-1 norm of div_b f - eps pi dt_b g
  double relative = 0.0;      // absolute / rhs, or absolute when rhs = 0
  double absolute_l2 = 0.0;
  double relative_l2 = 0.0;
};
// include_sigma_terms = false keeps only the two leading flux terms (sensitivity check)
ResidualReport residual_check(const TwoScaleInputs& in, const Expansion& e, bool include_sigma_terms = true);

// sqrt(sum over levels >= 1 of tau h^d <r, psi>) with psi = (shift - Laplacian)^{-1} r per level,
// shift 0 with Dirichlet nodes on the box, 1 on the torus
double h_minus1_norm(const ScalarField& r, const CylinderProblem& p);

}  // namespace parahom
