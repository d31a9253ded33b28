#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mscs/latgrid.hpp"

namespace mscs {

/// Dense row-major h x w grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(LatentDims dims, T fill = T{})
      : dims_(dims), data_(static_cast<std::size_t>(dims.positions()), fill) {}

  [[nodiscard]] const LatentDims& dims() const { return dims_; }
  [[nodiscard]] int height() const { return dims_.height; }
  [[nodiscard]] int width() const { return dims_.width; }

  T& operator()(int y, int x) { return data_[static_cast<std::size_t>(y) * dims_.width + x]; }
  const T& operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * dims_.width + x]; }

  [[nodiscard]] std::span<T> values() { return data_; }
  [[nodiscard]] std::span<const T> values() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  LatentDims dims_;
  std::vector<T> data_;
};

}  // namespace mscs
