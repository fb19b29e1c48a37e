#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "mebface/errors.hpp"

namespace mebface {

/// Cache-line aligned storage. Eigen picks its vectorized code path from the
/// buffer address, so fixed alignment keeps results independent of where the
/// allocator happens to place a buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using Vector = std::vector<double, AlignedAllocator<double>>;

/// Stack of `maps` equally sized 2D feature maps, each stored row-major,
/// maps contiguous one after another.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t maps, std::size_t rows, std::size_t cols, double fill = 0.0)
      : maps_(maps), rows_(rows), cols_(cols), data_(maps * rows * cols, fill) {
    if (maps == 0 || rows == 0 || cols == 0) {
      throw ShapeError("Tensor3 dimensions must be positive");
    }
  }

  std::size_t maps() const noexcept { return maps_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t map_size() const noexcept { return rows_ * cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t map, std::size_t row, std::size_t col) const noexcept {
    return (map * rows_ + row) * cols_ + col;
  }

  double& operator()(std::size_t map, std::size_t row, std::size_t col) noexcept {
    return data_[index(map, row, col)];
  }
  double operator()(std::size_t map, std::size_t row, std::size_t col) const noexcept {
    return data_[index(map, row, col)];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::span<double> map(std::size_t m) noexcept { return values().subspan(m * map_size(), map_size()); }
  std::span<const double> map(std::size_t m) const noexcept {
    return values().subspan(m * map_size(), map_size());
  }

  bool same_shape(const Tensor3& other) const noexcept {
    return maps_ == other.maps_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape_string() const {
    return std::to_string(maps_) + "x" + std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t maps_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

}  // namespace mebface
