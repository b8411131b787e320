#include "qpmfs/fourier.hpp"

#include <mutex>
#include <vector>

#include <fftw3.h>

namespace qpmfs {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Dft::Dft(int q) : q_(q) {
  if (q < 1) throw InputError("Dft: size must be positive");
  std::vector<cplx> a(q), b(q);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_1d(q, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(q, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Dft::~Dft() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

Dft::Dft(Dft&& o) noexcept : q_(o.q_), forward_(o.forward_), backward_(o.backward_) {
  o.forward_ = o.backward_ = nullptr;
}

Dft& Dft::operator=(Dft&& o) noexcept {
  std::swap(q_, o.q_);
  std::swap(forward_, o.forward_);
  std::swap(backward_, o.backward_);
  return *this;
}

void Dft::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Dft::backward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Dft::samples_to_modes(const cplx* samples, cplx* modes, int P) const {
  std::vector<cplx> spec(q_);
  forward(samples, spec.data());
  const double inv = 1.0 / q_;
  for (int c = 0; c < P; ++c) modes[c] = spec[fft_bin(column_mode(c, P), q_)] * inv;
}

void Dft::modes_to_strengths(const cplx* modes, int P, cplx* strengths) const {
  std::vector<cplx> spec(q_, 0.0);
  for (int c = 0; c < P; ++c) spec[fft_bin(column_mode(c, P), q_)] += modes[c];
  backward(spec.data(), strengths);
  const double inv = 1.0 / q_;
  for (int l = 0; l < q_; ++l) strengths[l] *= inv;
}

}  // namespace qpmfs
