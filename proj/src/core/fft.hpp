#pragma once

#include <complex>
#include <vector>

namespace qac {

// Thin RAII wrapper over FFTW complex transforms.
//
// Conventions: forward() computes X_k = sum_j x_j e^{-2pi i jk/N};
// backward() is the unnormalized inverse (e^{+2pi i jk/N}, no 1/N).
//
// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so the chosen
// algorithm depends only on the transform size, never on measured timings
// or buffer addresses. That keeps results bit-identical across runs,
// processes, and worker counts. Plan creation is serialized internally
// (the FFTW planner is not thread-safe); execution is thread-safe as long
// as each thread uses its own buffers.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return n_; }

  // In-place or out-of-place; `in` and `out` may alias.
  void forward(const std::complex<double>* in, std::complex<double>* out) const;
  void backward(const std::complex<double>* in, std::complex<double>* out) const;

  void forward(std::vector<std::complex<double>>& buf) const { forward(buf.data(), buf.data()); }
  void backward(std::vector<std::complex<double>>& buf) const { backward(buf.data(), buf.data()); }

 private:
  int n_;
  void* plan_forward_ = nullptr;
  void* plan_backward_ = nullptr;
};

}  // namespace qac
