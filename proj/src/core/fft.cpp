#include "core/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "core/error.hpp"

namespace qac {

namespace {
// FFTW's planner mutates global state; serialize plan create/destroy.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  if (n < 1) throw invalid_argument_error("fft size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  // Dummy buffer used only at planning time; FFTW_ESTIMATE never reads it.
  fftw_complex* dummy = fftw_alloc_complex(static_cast<size_t>(n));
  if (!dummy) throw internal_error("fftw allocation failed");
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_forward_ = fftw_plan_dft_1d(n, dummy, dummy, FFTW_FORWARD, flags);
  plan_backward_ = fftw_plan_dft_1d(n, dummy, dummy, FFTW_BACKWARD, flags);
  fftw_free(dummy);
  if (!plan_forward_ || !plan_backward_) throw internal_error("fftw planning failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
}

void Fft::forward(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_forward_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Fft::backward(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_backward_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace qac
