#include "bmhd/fft.hpp"

#include <fftw3.h>
#include <malloc.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace bmhd {
namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::atomic<int> g_threads{1};
std::atomic<int> g_generation{0};

struct EngineCache {
  int generation = -1;
  std::map<int, std::unique_ptr<FftEngine>> engines;
};

EngineCache& thread_cache() {
  thread_local EngineCache cache;
  return cache;
}

}  // namespace

struct FftEngine::Impl {
  fftw_complex* buffer = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t size = 0;
};

FftEngine::FftEngine(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  impl_->size = static_cast<std::size_t>(n) * n * n;
  std::lock_guard lock(planner_mutex());
  static bool threads_ready = [] { return fftw_init_threads() != 0; }();
  if (threads_ready) fftw_plan_with_nthreads(g_threads.load());
  impl_->buffer = fftw_alloc_complex(impl_->size);
  if (impl_->buffer == nullptr) throw std::bad_alloc();
  impl_->fwd = fftw_plan_dft_3d(n, n, n, impl_->buffer, impl_->buffer,
                                FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_3d(n, n, n, impl_->buffer, impl_->buffer,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  if (impl_->fwd == nullptr || impl_->bwd == nullptr) {
    throw std::runtime_error("FFTW planning failed");
  }
}

FftEngine::~FftEngine() {
  std::lock_guard lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
  if (impl_->buffer) fftw_free(impl_->buffer);
}

namespace {

void run(fftw_plan plan, fftw_complex* buffer, std::size_t size,
         std::span<const complex> in, std::span<complex> out, double scale) {
  if (in.size() != size || out.size() != size) {
    throw std::invalid_argument("FFT input size mismatch");
  }
  std::memcpy(buffer, in.data(), size * sizeof(fftw_complex));
  fftw_execute(plan);
  const auto* src = reinterpret_cast<const complex*>(buffer);
  if (scale == 1.0) {
    std::copy(src, src + size, out.begin());
  } else {
    for (std::size_t i = 0; i < size; ++i) out[i] = src[i] * scale;
  }
}

}  // namespace

void FftEngine::forward(std::span<const complex> in, std::span<complex> out,
                        double scale) const {
  run(impl_->fwd, impl_->buffer, impl_->size, in, out, scale);
}

void FftEngine::backward(std::span<const complex> in, std::span<complex> out,
                         double scale) const {
  run(impl_->bwd, impl_->buffer, impl_->size, in, out, scale);
}

std::span<complex> FftEngine::buffer() const {
  return {reinterpret_cast<complex*>(impl_->buffer), impl_->size};
}

void FftEngine::execute_forward() const { fftw_execute(impl_->fwd); }
void FftEngine::execute_backward() const { fftw_execute(impl_->bwd); }

const FftEngine& FftEngine::for_size(int n) {
  auto& cache = thread_cache();
  const int gen = g_generation.load();
  if (cache.generation != gen) {
    cache.engines.clear();
    cache.generation = gen;
  }
  auto& slot = cache.engines[n];
  if (!slot) slot = std::make_unique<FftEngine>(n);
  return *slot;
}

void set_fft_threads(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  g_threads.store(threads);
  g_generation.fetch_add(1);
}

int fft_threads() { return g_threads.load(); }

void retain_large_allocations() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

}  // namespace bmhd
