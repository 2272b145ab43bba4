#include "parahom/diffusion.hpp"

#include <algorithm>

namespace parahom {

FaceCoefficients::FaceCoefficients(const CoefficientField& a) : lat_(a.lattice()), isotropic_(a.isotropic()) {
  const int d = lat_.dim;
  const std::size_t n = lat_.sites();
  const int comps = isotropic_ ? d : d * d;
  m_.assign(static_cast<std::size_t>(comps), std::vector<double>(n));
  std::vector<double> shifted(n);
  for (int c = 0; c < comps; ++c) {
    const int i = isotropic_ ? c : c / d;  // averaging direction
    const int k = isotropic_ ? c : c % d;
    auto src = isotropic_ ? a.scalar() : a.entry(i, k);
    kernels::shift_axis(src.data(), shifted.data(), axis_layout(lat_, i, n), 1);
    auto& dst = m_[static_cast<std::size_t>(c)];
    for (std::size_t s = 0; s < n; ++s) dst[s] = 0.5 * (src[s] + shifted[s]);
  }
}

std::span<const double> FaceCoefficients::face(int i, int k) const {
  if (isotropic_) {
    if (i != k) throw CompatibilityError("isotropic face coefficients have no off-diagonal entries");
    return m_[static_cast<std::size_t>(i)];
  }
  return m_[static_cast<std::size_t>(i * lat_.dim + k)];
}

double FaceCoefficients::mean_scalar() const noexcept {
  double total = 0.0;
  const int d = lat_.dim;
  for (int i = 0; i < d; ++i) {
    auto f = isotropic_ ? m_[static_cast<std::size_t>(i)] : m_[static_cast<std::size_t>(i * d + i)];
    double part = 0.0;
    for (double x : f) part += x;
    total += part / static_cast<double>(f.size());
  }
  return total / d;
}

void face_flux(const FaceCoefficients& M, const VectorField& g, int unit, VectorField& F) {
  const int d = M.dim();
  const std::size_t n = M.lattice().sites();
  if (static_cast<int>(g.size()) != d) throw CompatibilityError("face_flux: gradient has wrong dimension");
  for (const auto& gk : g) require_same_lattice(M.lattice(), gk.lattice(), "face_flux");
  F.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    if (!(F[i].lattice() == M.lattice())) F[i] = ScalarField(M.lattice());
    double* out = F[i].data();
    if (M.isotropic()) {
      auto c = M.face(i, i);
      const double* gi = g[i].data();
      const double add = (unit == i) ? 1.0 : 0.0;
      for (std::size_t s = 0; s < n; ++s) out[s] = c[s] * (gi[s] + add);
    } else {
      std::fill(out, out + n, 0.0);
      for (int k = 0; k < d; ++k) {
        auto c = M.face(i, k);
        const double* gk = g[k].data();
        const double add = (unit == k) ? 1.0 : 0.0;
        for (std::size_t s = 0; s < n; ++s) out[s] += c[s] * (gk[s] + add);
      }
    }
  }
}

VectorField face_flux(const FaceCoefficients& M, const VectorField& g, int unit) {
  VectorField F;
  face_flux(M, g, unit, F);
  return F;
}

DivergenceForm::DivergenceForm(FaceCoefficients M) : M_(std::move(M)) {
  const int d = M_.dim();
  scratch_.assign(static_cast<std::size_t>(d + 1), std::vector<double>(M_.lattice().sites()));
}

void DivergenceForm::apply(const ScalarField& u, ScalarField& out) const {
  const Lattice& lat = M_.lattice();
  require_same_lattice(lat, u.lattice(), "DivergenceForm");
  const int d = lat.dim;
  const std::size_t n = lat.sites();
  const double inv = 1.0 / lat.h;
  std::fill(out.values().begin(), out.values().end(), 0.0);
  if (M_.isotropic()) {
    auto& tmp = scratch_[0];
    for (int i = 0; i < d; ++i) {
      const AxisLayout ax = axis_layout(lat, i, n);
      kernels::forward_difference(u.data(), tmp.data(), ax, inv);
      auto c = M_.face(i, i);
      for (std::size_t s = 0; s < n; ++s) tmp[s] *= c[s];
      kernels::add_backward_difference(tmp.data(), out.data(), ax, -inv);
    }
    return;
  }
  for (int k = 0; k < d; ++k) kernels::forward_difference(u.data(), scratch_[k].data(), axis_layout(lat, k, n), inv);
  auto& F = scratch_[static_cast<std::size_t>(d)];
  for (int i = 0; i < d; ++i) {
    std::fill(F.begin(), F.end(), 0.0);
    for (int k = 0; k < d; ++k) {
      auto c = M_.face(i, k);
      const auto& g = scratch_[k];
      for (std::size_t s = 0; s < n; ++s) F[s] += c[s] * g[s];
    }
    kernels::add_backward_difference(F.data(), out.data(), axis_layout(lat, i, n), -inv);
  }
}

ScalarField unit_source(const FaceCoefficients& M, int j) {
  const Lattice& lat = M.lattice();
  ScalarField out(lat);
  const std::size_t n = lat.sites();
  for (int i = 0; i < lat.dim; ++i) {
    if (M.isotropic() && i != j) continue;
    auto c = M.face(i, j);
    kernels::add_backward_difference(c.data(), out.data(), axis_layout(lat, i, n), 1.0 / lat.h);
  }
  return out;
}

}  // namespace parahom
