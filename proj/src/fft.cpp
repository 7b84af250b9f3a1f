#include "dcl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "dcl/error.hpp"

namespace dcl {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan get_plan(const std::vector<int>& shape, int sign) {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto key = std::make_pair(shape, sign);
  if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  auto* tmp = static_cast<fftw_complex*>(fftw_malloc(total * sizeof(fftw_complex)));
  if (!tmp) throw std::bad_alloc();
  fftw_plan plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), tmp, tmp, sign,
                                 FFTW_ESTIMATE);
  fftw_free(tmp);
  if (!plan) throw BudgetError("FFT plan creation failed");
  c.plans.emplace(std::move(key), plan);
  return plan;
}

}  // namespace

void* fft_aligned_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (!p) throw std::bad_alloc();
  return p;
}

void fft_aligned_free(void* p) noexcept { fftw_free(p); }

void fft_inplace(AlignedBuffer& data, std::span<const int> shape, FftDirection dir) {
  std::size_t total = 1;
  for (int s : shape) {
    if (s < 1) throw DomainError("fft: non-positive extent");
    total *= static_cast<std::size_t>(s);
  }
  if (total != data.size()) throw DomainError("fft: buffer size does not match the shape");
  const fftw_plan plan = get_plan(std::vector<int>(shape.begin(), shape.end()),
                                  dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace dcl
