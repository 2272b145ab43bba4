/// @file diffusion.hpp
/// @brief Discrete flux a(grad_f u + e_j) with coefficients averaged onto edges.
///
/// Row i of the coefficient matrix used for the flux through the edge (z, z+e_i)
/// is the average of a(z) and a(z+e_i). With forward gradients and backward
/// divergences this keeps -div_b(M grad_f .) symmetric for isotropic a.
#pragma once

#include <vector>

#include "parahom/ensemble.hpp"
#include "parahom/lattice.hpp"

namespace parahom {

class FaceCoefficients {
 public:
  FaceCoefficients() = default;
  explicit FaceCoefficients(const CoefficientField& a);

  const Lattice& lattice() const noexcept { return lat_; }
  bool isotropic() const noexcept { return isotropic_; }
  int dim() const noexcept { return lat_.dim; }
  // isotropic fields store only i == k
  std::span<const double> face(int i, int k) const;
  // mean of trace / d, used to build constant-coefficient preconditioners
  double mean_scalar() const noexcept;

 private:
  Lattice lat_{};
  bool isotropic_ = true;
  std::vector<std::vector<double>> m_;
};

// F_i = sum_k M_ik (g_k + delta_{k,unit}); unit < 0 means no unit vector.
void face_flux(const FaceCoefficients& M, const VectorField& g, int unit, VectorField& F);
VectorField face_flux(const FaceCoefficients& M, const VectorField& g, int unit = -1);

// u -> -div_b(M grad_f u); keeps scratch buffers, one instance per thread.
class DivergenceForm {
 public:
  explicit DivergenceForm(FaceCoefficients M);
  const FaceCoefficients& coefficients() const noexcept { return M_; }
  void apply(const ScalarField& u, ScalarField& out) const;

 private:
  FaceCoefficients M_;
  mutable std::vector<std::vector<double>> scratch_;
};

// div_b(M e_j)
ScalarField unit_source(const FaceCoefficients& M, int j);

}  // namespace parahom
