/// @file ensemble.hpp
/// @brief Coefficient fields a(x,t) and the ensembles that generate them.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parahom/lattice.hpp"
#include "parahom/tensor.hpp"

namespace parahom {

enum class EnsembleKind { constant, laminate_space, laminate_time, checkerboard, gaussian };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::constant;
  double mu = 0.5;                    // ellipticity: values lie in [mu, 1/mu]
  double corr_length = 1.0;           // spatial cell size / correlation length; time scale is its square
  std::vector<double> phases{0.5, 2.0};  // two-phase values (laminates, checkerboard)
  double value = 1.0;                 // constant ensemble
  bool isotropic = true;              // gaussian only: false gives a random symmetric matrix (d <= 2)
  bool random = true;                 // checkerboard: i.i.d. phases, else alternating
  bool random_offset = false;         // checkerboard: random continuous shift of the cell grid
  bool time_dependent = true;         // checkerboard / gaussian
  int periods = 1;                    // laminates: number of two-layer periods across the torus
};

// Throws ConfigError on out-of-range parameters.
void validate(const EnsembleSpec& spec);
// Additional checks against a lattice (cell tiling, layer sizes).
void validate(const EnsembleSpec& spec, const Lattice& lat);

class CoefficientField {
 public:
  CoefficientField() = default;
  CoefficientField(const Lattice& lat, bool isotropic);

  const Lattice& lattice() const noexcept { return lat_; }
  bool isotropic() const noexcept { return isotropic_; }
  int dim() const noexcept { return lat_.dim; }

  // isotropic: the scalar a(z)
  std::span<double> scalar() noexcept { return data_; }
  std::span<const double> scalar() const noexcept { return data_; }
  // full: entry (i,k) for all sites; isotropic fields accept only i == k
  std::span<double> entry(int i, int k);
  std::span<const double> entry(int i, int k) const;
  double value(std::size_t site, int i, int k) const noexcept;
  Tensor2 at(std::size_t site) const noexcept;

 private:
  Lattice lat_{};
  bool isotropic_ = true;
  std::vector<double> data_;
};

// Deterministic in (spec, lattice, seed, sample_index).
CoefficientField sample(const EnsembleSpec& spec, const Lattice& lat, std::uint64_t seed,
                        std::uint64_t sample_index = 0);

struct EllipticityReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};
EllipticityReport ellipticity_report(const CoefficientField& a);

// time slice m on a.lattice().slice()
CoefficientField extract_slice(const CoefficientField& a, int m);

// result(z) = a(z + offset)
CoefficientField shift(const CoefficientField& a, const SiteCoord& offset);

// Unit-variance stationary Gaussian field with squared-exponential covariance
// (spatial length corr_length, temporal length corr_length^2), keyed by wave vector.
ScalarField gaussian_field(const Lattice& lat, double corr_length, bool time_dependent, std::uint64_t seed,
                           std::uint64_t sample_index, std::uint64_t stream);

}  // namespace parahom
