#ifndef CAUSALRT_MATRIX_HPP
#define CAUSALRT_MATRIX_HPP

#include <cstdint>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <vector>

namespace causalrt {

// 64-byte aligned storage for every buffer that SIMD kernels touch. Vector
// kernels peel loops based on the runtime alignment of the data pointer, so
// letting malloc pick the address makes repeated identical computations
// round differently. Pinning the alignment keeps results bit-reproducible.
template <class T>
struct AlignedAlloc {
  using value_type = T;
  AlignedAlloc() = default;
  template <class U>
  AlignedAlloc(const AlignedAlloc<U>&) {}
  T* allocate(std::size_t n) {
    const std::size_t bytes = ((n * sizeof(T) + 63) / 64 + 1) * 64;
    void* p = std::aligned_alloc(64, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }
  template <class U>
  bool operator==(const AlignedAlloc<U>&) const {
    return true;
  }
  template <class U>
  bool operator!=(const AlignedAlloc<U>&) const {
    return false;
  }
};

using AlignedVector = std::vector<double, AlignedAlloc<double>>;

// Dense row-major float64 matrix. The one numeric carrier used across the
// library; anything heavier (GEMM, solves) happens through Eigen maps over
// the raw buffer inside the .cpp files.
struct RealMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  AlignedVector v;

  RealMatrix() = default;
  RealMatrix(std::int64_t r, std::int64_t c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r * c), fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("RealMatrix: negative shape");
  }

  double& operator()(std::int64_t r, std::int64_t c) { return v[static_cast<std::size_t>(r * cols + c)]; }
  double operator()(std::int64_t r, std::int64_t c) const { return v[static_cast<std::size_t>(r * cols + c)]; }

  double* row_ptr(std::int64_t r) { return v.data() + r * cols; }
  const double* row_ptr(std::int64_t r) const { return v.data() + r * cols; }

  bool empty() const { return rows == 0 || cols == 0; }

  std::vector<double> column(std::int64_t c) const {
    std::vector<double> out(static_cast<std::size_t>(rows));
    for (std::int64_t r = 0; r < rows; ++r) out[static_cast<std::size_t>(r)] = (*this)(r, c);
    return out;
  }

  void set_column(std::int64_t c, const std::vector<double>& col) {
    if (static_cast<std::int64_t>(col.size()) != rows)
      throw std::invalid_argument("RealMatrix::set_column: length mismatch");
    for (std::int64_t r = 0; r < rows; ++r) (*this)(r, c) = col[static_cast<std::size_t>(r)];
  }
};

}  // namespace causalrt

#endif  // CAUSALRT_MATRIX_HPP
