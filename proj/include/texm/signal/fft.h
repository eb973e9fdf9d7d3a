#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace texm {

using Complex = std::complex<double>;

// Thin RAII wrappers over FFTW plans. Plans are built with FFTW_ESTIMATE so
// the same size always yields the same plan (and bit-identical output).
// Each object owns its buffers; use one object per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  // Writes n/2 + 1 bins.
  void forward(std::span<const double> in, std::span<Complex> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_;
};

class ComplexFft {
 public:
  ComplexFft(std::size_t n, bool inverse);
  ~ComplexFft();
  ComplexFft(ComplexFft&&) noexcept;
  ComplexFft& operator=(ComplexFft&&) noexcept;

  std::size_t size() const { return n_; }
  // Unnormalized transform, as FFTW defines it.
  void run(std::span<const Complex> in, std::span<Complex> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_;
};

std::vector<Complex> fft(std::span<const Complex> in);
// Normalized by 1/n.
std::vector<Complex> ifft(std::span<const Complex> in);

}  // namespace texm
