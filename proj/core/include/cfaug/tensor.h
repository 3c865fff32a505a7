/*
 * Copyright 2026 The cfaug Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFAUG_TENSOR_H_
#define CFAUG_TENSOR_H_

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cfaug/image.h"

namespace cfaug::nn {

// Dense row-major array. Shapes are small vectors of extents; a scalar has
// shape {1}.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0))
      : shape_(std::move(shape)), values_(Count(shape_), fill) {}
  Tensor(std::vector<int> shape, std::vector<T> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != Count(shape_)) {
      throw InvalidArgument("tensor value count does not match shape");
    }
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(int axis) const { return shape_.at(axis); }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  T& operator[](std::size_t i) { return values_[i]; }
  T operator[](std::size_t i) const { return values_[i]; }

  // Same values under a new shape with equal element count.
  Tensor Reshaped(std::vector<int> shape) const {
    return Tensor(std::move(shape), values_);
  }

  template <typename U>
  Tensor<U> Cast() const {
    return Tensor<U>(shape_, std::vector<U>(values_.begin(), values_.end()));
  }

  static std::size_t Count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<T> values_;
};

std::string ShapeString(const std::vector<int>& shape);

}  // namespace cfaug::nn

#endif  // CFAUG_TENSOR_H_
