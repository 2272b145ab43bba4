#include "parahom/fourier.hpp"

#include <fftw3.h>

#include <mutex>
#include <numeric>

namespace parahom {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t product(const std::vector<int>& d) {
  return std::accumulate(d.begin(), d.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace

struct RealFourier::Impl {
  std::vector<int> dims;
  std::size_t n_real = 0;
  std::size_t n_spec = 0;
  std::unique_ptr<double, FftwFree> real;
  std::unique_ptr<fftw_complex, FftwFree> spec;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

RealFourier::RealFourier(std::vector<int> dims) : impl_(std::make_unique<Impl>()) {
  if (dims.empty()) throw ConfigError("RealFourier: empty dims");
  impl_->dims = std::move(dims);
  impl_->n_real = product(impl_->dims);
  std::vector<int> half = impl_->dims;
  half.back() = half.back() / 2 + 1;
  impl_->n_spec = product(half);
  impl_->real.reset(fftw_alloc_real(impl_->n_real));
  impl_->spec.reset(fftw_alloc_complex(impl_->n_spec));
  const int rank = static_cast<int>(impl_->dims.size());
  std::lock_guard lock(planner_mutex());
  impl_->fwd = fftw_plan_dft_r2c(rank, impl_->dims.data(), impl_->real.get(), impl_->spec.get(), FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r(rank, impl_->dims.data(), impl_->spec.get(), impl_->real.get(), FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("RealFourier: FFTW planning failed");
}

RealFourier::~RealFourier() = default;
RealFourier::RealFourier(RealFourier&&) noexcept = default;
RealFourier& RealFourier::operator=(RealFourier&&) noexcept = default;

std::span<double> RealFourier::real() noexcept { return {impl_->real.get(), impl_->n_real}; }

std::span<std::complex<double>> RealFourier::spectrum() noexcept {
  return {reinterpret_cast<std::complex<double>*>(impl_->spec.get()), impl_->n_spec};
}

void RealFourier::forward() { fftw_execute(impl_->fwd); }

void RealFourier::inverse() {
  fftw_execute(impl_->bwd);
  const double s = 1.0 / static_cast<double>(impl_->n_real);
  double* r = impl_->real.get();
  for (std::size_t i = 0; i < impl_->n_real; ++i) r[i] *= s;
}

const std::vector<int>& RealFourier::dims() const noexcept { return impl_->dims; }

struct ComplexFourier::Impl {
  std::size_t n = 0;
  std::unique_ptr<fftw_complex, FftwFree> buf;
  fftw_plan bwd = nullptr;
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (bwd) fftw_destroy_plan(bwd);
  }
};

ComplexFourier::ComplexFourier(std::vector<int> dims) : impl_(std::make_unique<Impl>()) {
  impl_->n = product(dims);
  impl_->buf.reset(fftw_alloc_complex(impl_->n));
  std::lock_guard lock(planner_mutex());
  impl_->bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), impl_->buf.get(), impl_->buf.get(),
                             FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!impl_->bwd) throw std::runtime_error("ComplexFourier: FFTW planning failed");
}

ComplexFourier::~ComplexFourier() = default;

std::span<std::complex<double>> ComplexFourier::data() noexcept {
  return {reinterpret_cast<std::complex<double>*>(impl_->buf.get()), impl_->n};
}

void ComplexFourier::backward() { fftw_execute(impl_->bwd); }

struct DirichletSine::Impl {
  std::vector<int> dims;
  std::size_t n = 0;
  double norm = 1.0;
  std::unique_ptr<double, FftwFree> buf;
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
  }
};

DirichletSine::DirichletSine(const Lattice& slice) : impl_(std::make_unique<Impl>()) {
  if (slice.n < 3) throw ConfigError("DirichletSine: need at least one interior node per axis");
  impl_->dims.assign(static_cast<std::size_t>(slice.dim), slice.n - 1);
  impl_->n = product(impl_->dims);
  impl_->norm = 1.0;
  for (int i = 0; i < slice.dim; ++i) impl_->norm /= 2.0 * slice.n;
  impl_->buf.reset(fftw_alloc_real(impl_->n));
  std::vector<fftw_r2r_kind> kinds(impl_->dims.size(), FFTW_RODFT00);
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_r2r(slice.dim, impl_->dims.data(), impl_->buf.get(), impl_->buf.get(), kinds.data(),
                              FFTW_ESTIMATE);
  if (!impl_->plan) throw std::runtime_error("DirichletSine: FFTW planning failed");
}

DirichletSine::~DirichletSine() = default;

std::span<double> DirichletSine::data() noexcept { return {impl_->buf.get(), impl_->n}; }

void DirichletSine::forward() { fftw_execute(impl_->plan); }

void DirichletSine::inverse() {
  fftw_execute(impl_->plan);
  double* b = impl_->buf.get();
  for (std::size_t i = 0; i < impl_->n; ++i) b[i] *= impl_->norm;
}

std::vector<int> fourier_dims(const Lattice& lat, bool include_time) {
  std::vector<int> dims;
  if (include_time) dims.push_back(lat.n_t);
  for (int i = lat.dim - 1; i >= 0; --i) dims.push_back(lat.n);
  return dims;
}

}  // namespace parahom
