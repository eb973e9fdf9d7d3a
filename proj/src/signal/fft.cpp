#include "texm/signal/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "texm/error.h"

namespace texm {
namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealFft::RealFft(std::size_t n) : impl_(std::make_unique<Impl>()), n_(n) {
  require(n > 0, ErrorCode::kInvalidInput, "fft size must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->in = fftw_alloc_real(n);
  impl_->out = fftw_alloc_complex(n / 2 + 1);
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in, impl_->out,
                                     FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  require(in.size() == n_ && out.size() == n_ / 2 + 1, ErrorCode::kShapeMismatch,
          "real fft buffer size mismatch");
  std::copy(in.begin(), in.end(), impl_->in);
  fftw_execute(impl_->plan);
  std::memcpy(static_cast<void*>(out.data()), impl_->out, sizeof(fftw_complex) * out.size());
}

struct ComplexFft::Impl {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

ComplexFft::ComplexFft(std::size_t n, bool inverse)
    : impl_(std::make_unique<Impl>()), n_(n) {
  require(n > 0, ErrorCode::kInvalidInput, "fft size must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->in = fftw_alloc_complex(n);
  impl_->out = fftw_alloc_complex(n);
  impl_->plan = fftw_plan_dft_1d(static_cast<int>(n), impl_->in, impl_->out,
                                 inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() = default;
ComplexFft::ComplexFft(ComplexFft&&) noexcept = default;
ComplexFft& ComplexFft::operator=(ComplexFft&&) noexcept = default;

void ComplexFft::run(std::span<const Complex> in, std::span<Complex> out) {
  require(in.size() == n_ && out.size() == n_, ErrorCode::kShapeMismatch,
          "complex fft buffer size mismatch");
  std::memcpy(impl_->in, in.data(), sizeof(fftw_complex) * n_);
  fftw_execute(impl_->plan);
  std::memcpy(static_cast<void*>(out.data()), impl_->out, sizeof(fftw_complex) * n_);
}

std::vector<Complex> fft(std::span<const Complex> in) {
  std::vector<Complex> out(in.size());
  ComplexFft(in.size(), false).run(in, out);
  return out;
}

std::vector<Complex> ifft(std::span<const Complex> in) {
  std::vector<Complex> out(in.size());
  ComplexFft(in.size(), true).run(in, out);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace texm
