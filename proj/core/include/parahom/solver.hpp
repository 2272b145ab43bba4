/// @file solver.hpp
/// @brief Krylov solvers and FFT based inverses of constant-coefficient operators.
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "parahom/lattice.hpp"
#include "parahom/tensor.hpp"

namespace parahom {

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;  // ||b - A x|| / ||b||  (absolute when b = 0)
  bool converged = false;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report) : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct LinearOperator {
  std::function<void(const ScalarField& in, ScalarField& out)> apply;
  bool symmetric = false;
  // kernel is spanned by constants: rhs must have zero mean, solutions are projected to zero mean
  bool constant_nullspace = false;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 0;      // 0: 10 * sqrt(#unknowns)
  double abs_tol = 0.0;  // stop also once ||r|| <= abs_tol
};

struct SolveResult {
  ScalarField x;
  SolveReport report;
};

// Preconditioners are applied as M^{-1}; pass nullptr for none.
SolveResult cg(const LinearOperator& A, const ScalarField& b, const SolverOptions& opts = {},
               const LinearOperator* precond = nullptr, const ScalarField* x0 = nullptr);
SolveResult bicgstab(const LinearOperator& A, const ScalarField& b, const SolverOptions& opts = {},
                     const LinearOperator* precond = nullptr, const ScalarField* x0 = nullptr);

// Throws CompatibilityError unless |mean(b)| <= 1e-12 ||b||_2.
void require_zero_mean(const ScalarField& b, const char* what);

// Solves lap_st u = rhs on the space-time torus; the zero mode of u is set to 0.
ScalarField spectral_poisson(const ScalarField& rhs);

enum class Boundary { periodic, dirichlet };

// Exact inverse of shift + time_weight * dt_b - div_b(A grad_f) for constant A.
// space_time: periodic in all d+1 axes. slice: one time slice, no time term.
// On a Dirichlet slice node 0 of every axis is boundary; only the diagonal of A is used
// (exact for diagonal A) and boundary values pass through unchanged.
class ConstantInverse {
 public:
  static ConstantInverse space_time(const Lattice& lat, double shift, const Tensor2& A);
  static ConstantInverse slice(const Lattice& slice, double shift, const Tensor2& A, Boundary boundary);
  ~ConstantInverse();
  ConstantInverse(ConstantInverse&&) noexcept;
  ConstantInverse& operator=(ConstantInverse&&) noexcept;

  void apply(const ScalarField& in, ScalarField& out) const;
  // shares the buffers; callers must not use the operator from two threads at once
  LinearOperator as_operator() const;
  bool exact() const noexcept;

 struct Impl;

 private:
  explicit ConstantInverse(std::shared_ptr<Impl> impl);
  std::shared_ptr<Impl> impl_;
};

// (beta + dt_b - a0 Delta_h)^{-1} on the space-time torus.
LinearOperator parabolic_preconditioner(const Lattice& lat, double beta, double a0);

}  // namespace parahom
