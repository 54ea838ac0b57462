#pragma once

#include <memory>
#include <span>

#include "bmhd/grid.hpp"

namespace bmhd {

/// Unnormalized 3-D complex DFT on an n^3 grid, backed by FFTW.
///
/// Plans are built with FFTW_ESTIMATE so the plan (and therefore every
/// rounding decision) depends only on n and the thread count, not on timing
/// measurements. Execution copies through an aligned internal buffer.
class FftEngine {
 public:
  explicit FftEngine(int n);
  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  int n() const { return n_; }

  /// out[k] = scale * sum_j in[j] exp(-2 pi i j.k / n)
  void forward(std::span<const complex> in, std::span<complex> out, double scale) const;
  /// out[j] = scale * sum_k in[k] exp(+2 pi i j.k / n)
  void backward(std::span<const complex> in, std::span<complex> out, double scale) const;

  /// In-place transforms of the internal buffer, for callers that fill and
  /// drain it themselves.
  std::span<complex> buffer() const;
  void execute_forward() const;
  void execute_backward() const;

  /// Engine for size n owned by the calling thread.
  static const FftEngine& for_size(int n);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

/// Sets the FFTW thread count used by plans created afterwards; existing
/// cached engines on the calling thread are dropped. Results are bit-identical
/// for a fixed thread count.
void set_fft_threads(int threads);
int fft_threads();

/// Keeps freed field-sized blocks in the heap instead of returning them to
/// the OS, so the per-stage temporaries do not page-fault on every reuse.
/// Call once at program start.
void retain_large_allocations();

}  // namespace bmhd
