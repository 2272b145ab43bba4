/// @file stats.hpp
/// @brief Monte Carlo estimators: growth weight, bootstrap bands, minimal radius,
/// corrector fluctuation moments and the homogenization commutator.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "parahom/fluxcor.hpp"
#include "parahom/rate.hpp"

namespace parahom {

// sqrt(2 + r) for d = 2, sqrt(ln(2 + r)) for d = 3, 1 for d > 3; d = 1 uses the d = 2 branch
double mu_d(double r, int d);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct Band {
  double estimate = 0.0;
  double lo = 0.0;         // 2.5% bootstrap quantile
  double hi = 0.0;         // 97.5% bootstrap quantile
  double half_width = 0.0;  // (hi - lo) / 2
  double stddev = 0.0;      // spread of the bootstrap replicates
};
using Statistic = std::function<double(std::span<const double>)>;
Band bootstrap(std::span<const double> samples, const Statistic& stat, std::uint64_t seed, int resamples = 200);
double sample_mean(std::span<const double> x);
double sample_stddev(std::span<const double> x);  // n - 1 denominator

struct MomentEstimate {
  std::string label;
  int p = 1;
  int n_samples = 0;
  double estimate = 0.0;    // <X^p>^{1/p}
  double half_width = 0.0;  // bootstrap
};
MomentEstimate moment(const std::string& label, std::span<const double> values, int p, std::uint64_t seed);

// ---- minimal radius ----
struct MinimalRadiusSample {
  double theta = 0.1;
  double chi = 1.0;
  bool censored = false;
  std::vector<double> radii;
  std::vector<double> first;   // (1/R) (avg |(phi-bar, sigma-bar, grad sigma~_t)|^2)^{1/2}
  std::vector<double> second;  // (1/R^2) (avg |sigma~_t|^2)^{1/2}
};
// dyadic 1, 2, 4, ... up to a quarter of the torus side (lattice units times h)
std::vector<double> dyadic_radii(const Lattice& lat);
MinimalRadiusSample minimal_radius(const CorrectorSet& c, const FluxCorrector& sigma, double theta,
                                   const std::vector<double>& radii, const SiteCoord& center = {});
// chi from tabulated functionals: smallest grid radius from which every larger one passes
void resolve_chi(MinimalRadiusSample& s);

// ---- per-sample pipeline ----
struct SampleFields {
  CoefficientField a;
  CorrectorSet correctors;
  Tensor2 abar;
  FluxField q;
  FluxCorrector sigma;
};
SampleFields solve_sample(const EnsembleSpec& spec, const Lattice& lat, std::uint64_t seed, std::uint64_t index,
                          const CellOptions& opts = {});

struct FluctOptions {
  std::vector<int> p_list{1};
  int max_p = 4;
  double theta = 0.1;
  std::uint64_t seed = 1;
  int workers = 1;
  CellOptions cell{};
};

struct StationarityCheck {
  std::string label;
  double mean_origin = 0.0, half_width_origin = 0.0;
  double mean_shifted = 0.0, half_width_shifted = 0.0;
  bool agree = false;  // |difference| <= 3 max(half widths)
};
StationarityCheck compare_means(const std::string& label, std::span<const double> a, std::span<const double> b,
                                std::uint64_t seed);

struct FluctSample {
  double grad_energy = 0.0;          // avg_{Q_1(0)} |(grad phi_j, grad sigma_kij)|^2
  double grad_energy_shifted = 0.0;  // same at the shifted origin
  double increment = 0.0;            // |avg_{Q_1(z)} (phi, sigma) - avg_{Q_1(0)} (phi, sigma)|^2
  double growth = 0.0;               // |increment of sigma_(d+1)|^2 at distance r_growth
  MinimalRadiusSample chi;
  MinimalRadiusSample chi_shifted;
};

struct FluctResult {
  std::vector<FluctSample> samples;
  std::vector<MomentEstimate> estimates;
  std::vector<StationarityCheck> stationarity;
  double increment_distance = 0.0;
  double growth_distance = 0.0;
  double censored_fraction = 0.0;
  int failures = 0;
};
FluctResult fluct_suite(const EnsembleSpec& spec, const Lattice& lat, int n_samples, const FluctOptions& o);
SiteCoord shifted_origin(const Lattice& lat);  // (n/2, ..., n_t/2)

// ---- homogenization commutator ----
// sum over levels >= 1 of tau h^d h_test . (M - abar)(D u_eps - D u_0 - sum_j (micro grad phi_j) g_j)
double commutator(const VectorField& h_test, const CylinderProblem& p, const CoefficientField& a,
                  const CorrectorSet& c, const Tensor2& abar, const ScalarField& u_eps, const ScalarField& u_0);
using TestFlux = std::function<std::array<double, kMaxDim>(const std::array<double, kMaxDim>& x, double t)>;
VectorField sample_test_flux(const TestFlux& h, const Lattice& mac);

struct CommutatorRow {
  double eps = 0.0;
  int samples = 0;
  double mean = 0.0;
  double sd = 0.0;
  double rescaled_sd = 0.0;  // sd * eps^{-(d+2)/2}
  double rescaled_half_width = 0.0;
};
struct CommutatorResult {
  Tensor2 abar_ref;
  std::vector<CommutatorRow> rows;
  std::vector<std::vector<double>> values;  // [eps][sample]
  int failures = 0;
};
CommutatorResult variance_scaling(const TwoScaleSetup& s, const std::vector<double>& eps_list, int n_samples,
                                  const TestFlux& h, std::optional<Tensor2> abar = std::nullopt);

}  // namespace parahom
