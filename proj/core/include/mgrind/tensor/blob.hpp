// Copyright 2026 The mgrind Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgrind/tensor/shape.hpp"

namespace mgrind {

enum class Plane { data, diff };

/// Process-wide count of plane storage allocations. Tests use it to check
/// lazy materialization and that forward/backward never allocate.
class BlobStats {
 public:
  static std::size_t allocations();
  static void note_allocation();
};

/// A 4-D array holding a data plane and a same-sized diff (gradient) plane.
///
/// Planes are materialized lazily: nothing is allocated until a plane is
/// written or its contents are demanded as a span. Scalar reads through
/// data_at()/diff_at() on an unmaterialized plane return zero without
/// allocating. Storage capacity is retained across shrinking reshapes.
///
/// A Blob is single-writer; a materialized plane may be read concurrently.
template <typename Dtype>
class Blob {
 public:
  using value_type = Dtype;

  Blob() = default;
  explicit Blob(const Shape4& shape);
  Blob(int num, int channels, int height, int width)
      : Blob(Shape4{num, channels, height, width}) {}

  Blob(const Blob& other);
  Blob& operator=(const Blob& other);
  Blob(Blob&&) noexcept = default;
  Blob& operator=(Blob&&) noexcept = default;

  const Shape4& shape() const { return shape_; }
  std::size_t count() const { return count_; }
  int num() const { return shape_.num; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }

  /// Replaces the shape. Storage grows only past the current capacity; flat
  /// contents survive when the count is unchanged.
  void reshape(const Shape4& shape);
  void reshape_like(const Blob& other) { reshape(other.shape()); }

  std::size_t offset(int n, int c = 0, int h = 0, int w = 0) const {
    return flat_index(shape_, n, c, h, w);
  }

  bool materialized(Plane plane) const {
    return plane == Plane::data ? data_live_ : diff_live_;
  }
  std::size_t capacity(Plane plane) const;

  std::span<const Dtype> data() const { return plane(Plane::data); }
  std::span<const Dtype> diff() const { return plane(Plane::diff); }
  std::span<Dtype> mutable_data() { return mutable_plane(Plane::data); }
  std::span<Dtype> mutable_diff() { return mutable_plane(Plane::diff); }

  std::span<const Dtype> plane(Plane plane) const;
  std::span<Dtype> mutable_plane(Plane plane);

  Dtype data_at(int n, int c, int h, int w) const;
  Dtype diff_at(int n, int c, int h, int w) const;

  void zero(Plane plane);
  void zero_data() { zero(Plane::data); }
  void zero_diff() { zero(Plane::diff); }

  /// Copies the other blob's data (and optionally diff) plane, reshaping
  /// this blob to match.
  void copy_from(const Blob& other, bool copy_diff = false);

 private:
  std::vector<Dtype>& storage(Plane plane) const {
    return plane == Plane::data ? data_ : diff_;
  }
  void materialize(Plane plane) const;

  Shape4 shape_{};
  std::size_t count_ = 0;
  mutable std::vector<Dtype> data_;
  mutable std::vector<Dtype> diff_;
  mutable bool data_live_ = false;
  mutable bool diff_live_ = false;
};

/// y_plane <- alpha * x_plane + beta * y_plane, elementwise, in index order.
/// Throws ShapeError when the counts differ.
template <typename Dtype>
void blob_axpby(Dtype alpha, const Blob<Dtype>& x, Dtype beta, Blob<Dtype>& y,
                Plane plane);

extern template class Blob<float>;
extern template class Blob<double>;

}  // namespace mgrind
