#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace vibld {

/// In-place complex FFT workspace owning FFTW plans for one length.
/// Plan creation is serialized internally; executing distinct buffers from
/// different threads is safe. Transforms are unnormalized.
class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n);
  ~FftBuffer();
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  std::size_t size() const { return n_; }
  std::complex<double>& operator[](std::size_t k) { return data_[k]; }
  const std::complex<double>& operator[](std::size_t k) const { return data_[k]; }
  std::span<std::complex<double>> values() { return {data_, n_}; }
  std::span<const std::complex<double>> values() const { return {data_, n_}; }

  void forward();
  void backward();

 private:
  std::size_t n_;
  std::complex<double>* data_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace vibld
