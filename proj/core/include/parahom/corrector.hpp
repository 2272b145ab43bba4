/// @file corrector.hpp
/// @brief Space-time periodic cell problem, effective tensor and the flux field q.
///
/// For each direction j the corrector solves
///   beta phi + dt_b phi - div_b(M (grad_f phi + e_j)) = 0   on the space-time torus,
/// with zero mean when beta = 0.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parahom/diffusion.hpp"
#include "parahom/ensemble.hpp"
#include "parahom/solver.hpp"
#include "parahom/tensor.hpp"

namespace parahom {

enum class CellMethod {
  space_time,     // BiCGStab on the whole space-time torus, Fourier preconditioned
  time_marching,  // implicit Euler over the period, iterated to the periodic fixed point
};

struct CellOptions {
  SolverOptions solver{};
  CellMethod method = CellMethod::space_time;
  int max_periods = 400;
};

struct CorrectorSet {
  double beta = 0.0;
  std::vector<ScalarField> phi;       // phi[j], j = 0..d-1
  std::vector<VectorField> grad_phi;  // grad_f phi[j]
  std::vector<SolveReport> reports;   // space-time residual of each direction
  bool converged() const noexcept;
};

CorrectorSet solve_cell(const CoefficientField& a, double beta = 0.0, const CellOptions& opts = {});

// beta phi_j + dt_b phi_j - div_b(M (grad_f phi_j + e_j))
ScalarField corrector_residual(const CoefficientField& a, const CorrectorSet& c, int j);

// abar_ij = mean of [M (grad_f phi_j + e_j)]_i
Tensor2 effective(const CoefficientField& a, const CorrectorSet& c);

// q[j][i] for i < d: abar_ij - [M (grad_f phi_j + e_j)]_i ; q[j][d] = phi_j - mean(phi_j)
struct FluxField {
  int dim = 0;
  std::vector<VectorField> q;
};
FluxField flux(const CoefficientField& a, const CorrectorSet& c, const Tensor2& abar);
// sum_i D^b_i q_ij + dt_b q_(d+1)j ; equals the corrector residual when beta = 0
ScalarField flux_divergence(const FluxField& q, int j);

struct BetaSweepRow {
  double beta = 0.0;
  Tensor2 abar;
  double grad_norm = 0.0;  // rms of grad phi over sites and directions
  double phi_norm = 0.0;   // rms of phi
  SolveReport report;      // worst direction
};
std::vector<BetaSweepRow> beta_sweep(const CoefficientField& a, std::span<const double> betas,
                                     const CellOptions& opts = {});

// Monte Carlo estimate of abar from independent torus samples.
struct RveEstimate {
  Tensor2 mean;
  Tensor2 stderr_of_mean;
  std::vector<Tensor2> samples;
  // isotropic summary: mean of the diagonal and its standard error
  double scalar = 0.0;
  double scalar_stderr = 0.0;
};
RveEstimate rve_effective(const EnsembleSpec& spec, const Lattice& lat, int n_samples, std::uint64_t seed,
                          const CellOptions& opts = {}, int workers = 1);

}  // namespace parahom
