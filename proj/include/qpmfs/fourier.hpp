#pragma once

#include <memory>

#include "qpmfs/types.hpp"

namespace qpmfs {

/// Column of a P-mode array holding azimuthal mode n, n in (-P/2, P/2].
constexpr int mode_column(int n, int P) { return n + P / 2 - 1; }
/// Mode number stored in column c of a P-mode array.
constexpr int column_mode(int c, int P) { return c - P / 2 + 1; }
/// DFT bin of mode n for a length-q transform.
constexpr int fft_bin(int n, int q) { return ((n % q) + q) % q; }

/// Unnormalized length-q DFT (FFTW). forward: sum_l x_l e^{-2 pi i l k/q},
/// backward: sum_l x_l e^{+2 pi i l k/q}. Plans are created once; execution
/// is thread safe and works on any (unaligned) buffers.
class Dft {
 public:
  explicit Dft(int q);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;
  Dft(Dft&&) noexcept;
  Dft& operator=(Dft&&) noexcept;

  int size() const { return q_; }
  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;

  /// Ring samples f(2 pi l/q), l = 0..q-1, to mode coefficients
  /// (1/q) sum_l f_l e^{-i n phi_l} for the P modes n in (-P/2, P/2].
  void samples_to_modes(const cplx* samples, cplx* modes, int P) const;
  /// Mode coefficients c_n to point strengths (1/q) sum_n c_n e^{i n phi_l}.
  void modes_to_strengths(const cplx* modes, int P, cplx* strengths) const;

 private:
  int q_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace qpmfs
