#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>

namespace xmloc {

// FFTW planning is not thread-safe; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter<double>>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter<fftw_complex>>;

inline RealBuffer make_real_buffer(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
inline ComplexBuffer make_complex_buffer(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

/// Forward/inverse 2D real FFT plans for an n x n transform.
///
/// Plans are built once per size with FFTW_ESTIMATE, which keeps the chosen
/// algorithm (and therefore every output bit) independent of timing.
/// Buffers passed to forward/inverse must come from make_*_buffer.
class Fft2d {
 public:
  static const Fft2d& get(int n) {
    static std::map<int, std::unique_ptr<Fft2d>> cache;
    std::lock_guard lock(fftw_planner_mutex());
    auto& slot = cache[n];
    if (!slot) slot.reset(new Fft2d(n));
    return *slot;
  }

  int n() const { return n_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t complex_size() const { return static_cast<std::size_t>(n_) * (n_ / 2 + 1); }

  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(fwd_, in, out); }
  // Unnormalized: the result is scaled by n * n.
  void inverse(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(inv_, in, out); }

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

 private:
  explicit Fft2d(int n) : n_(n) {
    RealBuffer r = make_real_buffer(real_size());
    ComplexBuffer c = make_complex_buffer(complex_size());
    fwd_ = fftw_plan_dft_r2c_2d(n, n, r.get(), c.get(), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(n, n, c.get(), r.get(), FFTW_ESTIMATE);
  }

  int n_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

inline int next_pow2(int v) {
  int n = 1;
  while (n < v) n <<= 1;
  return n;
}

}  // namespace xmloc
