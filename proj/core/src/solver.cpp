#include "parahom/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "parahom/fourier.hpp"

namespace parahom {

namespace {

int default_max_iter(const SolverOptions& opts, std::size_t n) {
  if (opts.max_iter > 0) return opts.max_iter;
  return std::max(10, static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n)))));
}

double nrm(const ScalarField& u) { return norm2(u); }

void project_mean_zero(ScalarField& x) {
  const double m = mean(x);
  if (m != 0.0)
    for (double& v : x.values()) v -= m;
}

// r = b - A x
void residual(const LinearOperator& A, const ScalarField& b, const ScalarField& x, ScalarField& r, ScalarField& tmp) {
  A.apply(x, tmp);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - tmp[i];
}

void apply_precond(const LinearOperator* M, const ScalarField& in, ScalarField& out) {
  if (M)
    M->apply(in, out);
  else
    std::copy(in.values().begin(), in.values().end(), out.values().begin());
}

struct Setup {
  ScalarField x;
  double bnorm = 0.0;
  double target = 0.0;
  int max_iter = 0;
};

Setup setup(const LinearOperator& A, const ScalarField& b, const SolverOptions& opts, const ScalarField* x0) {
  if (!A.apply) throw CompatibilityError("solver: operator without apply");
  if (A.constant_nullspace) require_zero_mean(b, "solver rhs");
  Setup s;
  if (x0) {
    require_same_lattice(b.lattice(), x0->lattice(), "solver initial guess");
    s.x = *x0;
  } else {
    s.x = ScalarField(b.lattice());
  }
  s.bnorm = nrm(b);
  s.target = std::max(opts.tol * s.bnorm, opts.abs_tol);
  s.max_iter = default_max_iter(opts, b.size());
  return s;
}

SolveReport finish(const LinearOperator& A, const ScalarField& b, ScalarField& x, double bnorm, int iters,
                   double target) {
  if (A.constant_nullspace) project_mean_zero(x);
  ScalarField r(b.lattice()), tmp(b.lattice());
  residual(A, b, x, r, tmp);
  const double rn = nrm(r);
  SolveReport rep;
  rep.iterations = iters;
  rep.relative_residual = bnorm > 0.0 ? rn / bnorm : rn;
  // small slack for the recomputed residual versus the recursive one
  rep.converged = rn <= 1.5 * target || rn == 0.0;
  return rep;
}

}  // namespace

void require_zero_mean(const ScalarField& b, const char* what) {
  const double m = mean(b);
  if (std::abs(m) > 1e-12 * norm2(b))
    throw CompatibilityError(std::string(what) + ": right-hand side has nonzero mean " + std::to_string(m));
}

SolveResult cg(const LinearOperator& A, const ScalarField& b, const SolverOptions& opts,
               const LinearOperator* precond, const ScalarField* x0) {
  Setup s = setup(A, b, opts, x0);
  const Lattice& lat = b.lattice();
  ScalarField& x = s.x;
  if (s.bnorm == 0.0 && !x0) return {x, SolveReport{0, 0.0, true}};

  ScalarField r(lat), z(lat), p(lat), Ap(lat);
  residual(A, b, x, r, Ap);
  double rn = nrm(r);
  int it = 0;
  if (rn > s.target) {
    apply_precond(precond, r, z);
    p = z;
    double rz = dot(r, z);
    for (it = 1; it <= s.max_iter; ++it) {
      A.apply(p, Ap);
      const double pAp = dot(p, Ap);
      if (pAp == 0.0 || !std::isfinite(pAp)) break;
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      rn = nrm(r);
      if (rn <= s.target) break;
      apply_precond(precond, r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    it = std::min(it, s.max_iter);
  }
  SolveReport rep = finish(A, b, x, s.bnorm, it, s.target);
  if (!rep.converged) throw SolverError("cg did not converge", rep);
  return {std::move(x), rep};
}

SolveResult bicgstab(const LinearOperator& A, const ScalarField& b, const SolverOptions& opts,
                     const LinearOperator* precond, const ScalarField* x0) {
  Setup s = setup(A, b, opts, x0);
  const Lattice& lat = b.lattice();
  ScalarField& x = s.x;
  if (s.bnorm == 0.0 && !x0) return {x, SolveReport{0, 0.0, true}};

  ScalarField r(lat), rhat(lat), p(lat), v(lat), phat(lat), sv(lat), shat(lat), t(lat);
  int total = 0;
  // restarts recover from breakdown and from drift of the recursive residual
  for (int restart = 0; restart < 4 && total < s.max_iter; ++restart) {
    residual(A, b, x, r, t);
    double rn = nrm(r);
    if (rn <= s.target) break;
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    p.fill(0.0);
    v.fill(0.0);
    bool done = false;
    while (total < s.max_iter) {
      ++total;
      const double rho_new = dot(rhat, r);
      if (rho_new == 0.0 || !std::isfinite(rho_new)) break;
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      apply_precond(precond, p, phat);
      A.apply(phat, v);
      const double rv = dot(rhat, v);
      if (rv == 0.0 || !std::isfinite(rv)) break;
      alpha = rho / rv;
      for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = r[i] - alpha * v[i];
      if (nrm(sv) <= s.target) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * phat[i];
        done = true;
        break;
      }
      apply_precond(precond, sv, shat);
      A.apply(shat, t);
      const double tt = dot(t, t);
      if (tt == 0.0 || !std::isfinite(tt)) break;
      omega = dot(t, sv) / tt;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += alpha * phat[i] + omega * shat[i];
        r[i] = sv[i] - omega * t[i];
      }
      rn = nrm(r);
      if (rn <= s.target) {
        done = true;
        break;
      }
      if (omega == 0.0) break;
    }
    if (done) {
      residual(A, b, x, r, t);
      if (nrm(r) <= 1.5 * s.target) break;
    }
  }
  SolveReport rep = finish(A, b, x, s.bnorm, total, s.target);
  if (!rep.converged) throw SolverError("bicgstab did not converge", rep);
  return {std::move(x), rep};
}

ScalarField spectral_poisson(const ScalarField& rhs) {
  require_zero_mean(rhs, "spectral_poisson");
  const Lattice& lat = rhs.lattice();
  RealFourier fft(fourier_dims(lat, true));
  std::copy(rhs.values().begin(), rhs.values().end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  for_each_mode(lat, true, [&](std::size_t idx, const std::array<double, kMaxDim + 1>& th) {
    double sym = 0.0;
    for (int k = 0; k <= lat.dim; ++k) {
      const double s = std::sin(0.5 * th[k]) / lat.spacing(k);
      sym -= 4.0 * s * s;
    }
    spec[idx] = (sym == 0.0) ? std::complex<double>(0.0) : spec[idx] / sym;
  });
  fft.inverse();
  ScalarField u(lat);
  std::copy(fft.real().begin(), fft.real().end(), u.values().begin());
  return u;
}

struct ConstantInverse::Impl {
  Lattice lat;
  Boundary boundary = Boundary::periodic;
  bool exact = true;
  std::vector<std::complex<double>> inv_symbol;  // periodic
  std::vector<double> inv_real;                  // dirichlet
  std::unique_ptr<RealFourier> fft;
  std::unique_ptr<DirichletSine> dst;
  std::vector<std::size_t> interior;  // lattice index of each DST entry
};

namespace {

// Symbol of -div_b(A grad_f) at angles theta (spatial axes only).
std::complex<double> elliptic_symbol(const Lattice& lat, const Tensor2& A, const std::array<double, kMaxDim + 1>& th) {
  std::complex<double> s = 0.0;
  const std::complex<double> I(0.0, 1.0);
  for (int i = 0; i < lat.dim; ++i) {
    const std::complex<double> db = (1.0 - std::exp(-I * th[i])) / lat.h;
    for (int k = 0; k < lat.dim; ++k) {
      if (A(i, k) == 0.0) continue;
      const std::complex<double> df = (std::exp(I * th[k]) - 1.0) / lat.h;
      s -= A(i, k) * db * df;
    }
  }
  return s;
}

}  // namespace

ConstantInverse::ConstantInverse(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
ConstantInverse::~ConstantInverse() = default;
ConstantInverse::ConstantInverse(ConstantInverse&&) noexcept = default;
ConstantInverse& ConstantInverse::operator=(ConstantInverse&&) noexcept = default;

ConstantInverse ConstantInverse::space_time(const Lattice& lat, double shift, const Tensor2& A) {
  auto impl = std::make_shared<Impl>();
  impl->lat = lat;
  impl->fft = std::make_unique<RealFourier>(fourier_dims(lat, true));
  impl->inv_symbol.resize(impl->fft->spectrum().size());
  const std::complex<double> I(0.0, 1.0);
  for_each_mode(lat, true, [&](std::size_t idx, const std::array<double, kMaxDim + 1>& th) {
    const std::complex<double> sym =
        shift + (1.0 - std::exp(-I * th[lat.dim])) / lat.tau + elliptic_symbol(lat, A, th);
    impl->inv_symbol[idx] = std::abs(sym) == 0.0 ? 0.0 : 1.0 / sym;
  });
  return ConstantInverse(std::move(impl));
}

ConstantInverse ConstantInverse::slice(const Lattice& slice, double shift, const Tensor2& A, Boundary boundary) {
  auto impl = std::make_shared<Impl>();
  impl->lat = slice;
  impl->boundary = boundary;
  if (slice.n_t != 1) throw CompatibilityError("ConstantInverse::slice: lattice must have n_t = 1");
  if (boundary == Boundary::periodic) {
    impl->fft = std::make_unique<RealFourier>(fourier_dims(slice, false));
    impl->inv_symbol.resize(impl->fft->spectrum().size());
    for_each_mode(slice, false, [&](std::size_t idx, const std::array<double, kMaxDim + 1>& th) {
      const std::complex<double> sym = shift + elliptic_symbol(slice, A, th);
      impl->inv_symbol[idx] = std::abs(sym) == 0.0 ? 0.0 : 1.0 / sym;
    });
    return ConstantInverse(std::move(impl));
  }
  impl->exact = A.is_diagonal();
  impl->dst = std::make_unique<DirichletSine>(slice);
  const int m = slice.n - 1;
  const std::size_t count = impl->dst->data().size();
  impl->inv_real.resize(count);
  impl->interior.resize(count);
  std::array<int, kMaxDim> k{};
  for (std::size_t idx = 0; idx < count; ++idx) {
    double sym = shift;
    SiteCoord c{};
    for (int i = 0; i < slice.dim; ++i) {
      const double s = std::sin(0.5 * std::numbers::pi * (k[i] + 1) / slice.n) / slice.h;
      sym += A(i, i) * 4.0 * s * s;
      c[i] = k[i] + 1;
    }
    impl->inv_real[idx] = 1.0 / sym;
    impl->interior[idx] = site_index(slice, c);
    for (int i = 0; i < slice.dim; ++i) {
      if (++k[i] < m) break;
      k[i] = 0;
    }
  }
  return ConstantInverse(std::move(impl));
}

namespace {
void apply_inverse(ConstantInverse::Impl& im, const ScalarField& in, ScalarField& out);
}

void ConstantInverse::apply(const ScalarField& in, ScalarField& out) const { apply_inverse(*impl_, in, out); }

namespace {
void apply_inverse(ConstantInverse::Impl& im, const ScalarField& in, ScalarField& out) {
  if (im.boundary == Boundary::periodic) {
    auto real = im.fft->real();
    std::copy(in.values().begin(), in.values().end(), real.begin());
    im.fft->forward();
    auto spec = im.fft->spectrum();
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= im.inv_symbol[i];
    im.fft->inverse();
    std::copy(real.begin(), real.end(), out.values().begin());
    return;
  }
  auto buf = im.dst->data();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = in[im.interior[i]];
  im.dst->forward();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= im.inv_real[i];
  im.dst->inverse();
  // boundary nodes pass through
  std::copy(in.values().begin(), in.values().end(), out.values().begin());
  for (std::size_t i = 0; i < buf.size(); ++i) out[im.interior[i]] = buf[i];
}
}  // namespace

LinearOperator ConstantInverse::as_operator() const {
  LinearOperator op;
  op.apply = [impl = impl_](const ScalarField& in, ScalarField& out) { apply_inverse(*impl, in, out); };
  op.symmetric = true;
  return op;
}

bool ConstantInverse::exact() const noexcept { return impl_->exact; }

LinearOperator parabolic_preconditioner(const Lattice& lat, double beta, double a0) {
  if (!(a0 > 0.0)) throw ConfigError("parabolic_preconditioner: a0 must be positive");
  if (beta < 0.0) throw ConfigError("parabolic_preconditioner: beta must be non-negative");
  LinearOperator op = ConstantInverse::space_time(lat, beta, Tensor2::scalar(lat.dim, a0)).as_operator();
  op.symmetric = false;
  return op;
}

}  // namespace parahom
