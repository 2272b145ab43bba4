/// @file macro.hpp
/// @brief Macroscopic evolution problems: u_eps with oscillating coefficients and u_0 with abar.
///
/// Micro quantities (a, phi, sigma) live on a periodic micro torus measured in units
/// of the correlation length. The macro grid has spacing eps * h_micro and step
/// eps^2 * tau_micro, so macro node i sits on micro site i mod n_micro and macro level m
/// on micro time m mod n_t_micro.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "parahom/ensemble.hpp"
#include "parahom/solver.hpp"
#include "parahom/tensor.hpp"

namespace parahom {

enum class MacroGeometry {
  dirichlet_box,  // (0, R0)^d with u = 0 on the boundary; node 0 of each axis is the boundary
  torus,          // periodic (0, R0)^d
};

using SourceFunction = std::function<double(const std::array<double, kMaxDim>& x, double t)>;

struct CylinderProblem {
  MacroGeometry geometry = MacroGeometry::dirichlet_box;
  double box = 1.0;      // R0
  double horizon = 1.0;  // T
  double eps = 0.125;
  Lattice micro{};       // micro torus of a, phi, sigma
  SourceFunction source; // F(x, t); zero when empty
};

void validate(const CylinderProblem& p);
// n = R0 / (eps h_micro) nodes per axis, N + 1 levels (level 0 is t = 0)
Lattice macro_lattice(const CylinderProblem& p);
int macro_steps(const CylinderProblem& p);
// spatial macro site -> spatial micro site
std::vector<std::size_t> micro_site_map(const CylinderProblem& p);
int micro_time(const CylinderProblem& p, int level);
// a^eps on the macro slice at the given level
CoefficientField tile_slice(const CoefficientField& micro, const CylinderProblem& p, int level);
// micro field repeated over every macro node and level
ScalarField tile_field(const ScalarField& micro, const CylinderProblem& p);
CoefficientField tile_coefficients(const CoefficientField& micro, const CylinderProblem& p);
// true for nodes on the Dirichlet boundary (never on the torus)
std::vector<char> boundary_mask(const CylinderProblem& p);

// F at every macro node and level
ScalarField source_field(const CylinderProblem& p);

struct MacroSolution {
  ScalarField u;  // macro lattice, level 0 = initial data 0
  int total_iterations = 0;
  double worst_residual = 0.0;
};

// implicit Euler: (u^m - u^{m-1}) / tau - div_b(M^m grad_f u^m) = F^m
MacroSolution solve_eps(const CoefficientField& a_micro, const CylinderProblem& p, const SolverOptions& opts = {});
MacroSolution solve_hom(const Tensor2& abar, const CylinderProblem& p, const SolverOptions& opts = {});

// Psi_eps: cutoff in distance to the lateral boundary (Dirichlet only) times cutoff in sqrt(t)
ScalarField cutoff_field(const CylinderProblem& p);

// sqrt(sum over levels >= 1 and all nodes of tau h^d u^2)
double spacetime_l2(const ScalarField& u);

}  // namespace parahom
