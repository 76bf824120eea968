#include "vibld/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace vibld {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftBuffer::FftBuffer(std::size_t n) : n_(n) {
  auto* raw = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (raw == nullptr) throw std::bad_alloc();
  data_ = reinterpret_cast<std::complex<double>*>(raw);
  std::lock_guard lock(planner_mutex());
  // ESTIMATE planning is deterministic, so repeated runs are bit-identical.
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (std::size_t k = 0; k < n; ++k) data_[k] = 0.0;
}

FftBuffer::~FftBuffer() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  }
  fftw_free(data_);
}

void FftBuffer::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }
void FftBuffer::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

}  // namespace vibld
