#pragma once

// Thin FFTW wrapper: in-place complex transforms of fixed shape on aligned
// buffers. Plans are created once per (shape, direction) with FFTW_ESTIMATE,
// so repeated transforms are bit-reproducible.

#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "dcl/numeric.hpp"

namespace dcl {

void* fft_aligned_alloc(std::size_t bytes);
void fft_aligned_free(void* p) noexcept;

template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t count) {
    return static_cast<T*>(fft_aligned_alloc(count * sizeof(T)));
  }
  void deallocate(T* p, std::size_t) noexcept { fft_aligned_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using AlignedBuffer = std::vector<cplx, FftwAllocator<cplx>>;

/// Forward: out[k] = sum_x in[x] e(-k.x/N). Backward: e(+k.x/N), unnormalized.
enum class FftDirection { Forward, Backward };

/// Transforms data (row-major, first axis slowest) in place.
void fft_inplace(AlignedBuffer& data, std::span<const int> shape, FftDirection dir);

/// Smallest power of two >= v (v >= 1).
std::size_t next_pow2(std::size_t v);

}  // namespace dcl
