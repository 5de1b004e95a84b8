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

#include "mgrind/tensor/blob.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>

#include "mgrind/error.hpp"

namespace mgrind {

namespace {
std::atomic<std::size_t> g_allocations{0};

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw AllocationError("blob element count overflows size_t");
  }
  return a * b;
}
}  // namespace

std::size_t BlobStats::allocations() { return g_allocations.load(); }
void BlobStats::note_allocation() { g_allocations.fetch_add(1); }

std::size_t Shape4::count() const {
  if (num < 0 || channels < 0 || height < 0 || width < 0) {
    throw AllocationError("negative blob axis in shape " + to_string());
  }
  std::size_t total = checked_mul(static_cast<std::size_t>(num),
                                  static_cast<std::size_t>(channels));
  total = checked_mul(total, static_cast<std::size_t>(height));
  total = checked_mul(total, static_cast<std::size_t>(width));
  // Elements are also addressed as ptrdiff_t by the kernels.
  if (total > static_cast<std::size_t>(std::numeric_limits<std::ptrdiff_t>::max()) /
                  sizeof(double)) {
    throw AllocationError("blob element count exceeds addressable memory");
  }
  return total;
}

std::size_t Shape4::item_count() const {
  Shape4 one = *this;
  one.num = 1;
  return one.count();
}

std::string Shape4::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Shape4& shape) {
  return os << "(" << shape.num << "," << shape.channels << "," << shape.height
            << "," << shape.width << ")";
}

Coord4 unflatten(const Shape4& s, std::size_t index) {
  Coord4 c;
  c.w = static_cast<int>(index % s.width);
  index /= s.width;
  c.h = static_cast<int>(index % s.height);
  index /= s.height;
  c.c = static_cast<int>(index % s.channels);
  c.n = static_cast<int>(index / s.channels);
  return c;
}

template <typename Dtype>
Blob<Dtype>::Blob(const Shape4& shape) : shape_(shape), count_(shape.count()) {}

template <typename Dtype>
Blob<Dtype>::Blob(const Blob& other)
    : shape_(other.shape_), count_(other.count_) {
  for (Plane p : {Plane::data, Plane::diff}) {
    if (other.materialized(p)) {
      auto src = other.plane(p);
      storage(p).assign(src.begin(), src.end());
      BlobStats::note_allocation();
      (p == Plane::data ? data_live_ : diff_live_) = true;
    }
  }
}

template <typename Dtype>
Blob<Dtype>& Blob<Dtype>::operator=(const Blob& other) {
  if (this != &other) {
    Blob copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename Dtype>
void Blob<Dtype>::reshape(const Shape4& shape) {
  const std::size_t count = shape.count();
  shape_ = shape;
  count_ = count;
  for (Plane p : {Plane::data, Plane::diff}) {
    if (!materialized(p)) continue;
    auto& v = storage(p);
    if (count > v.capacity()) BlobStats::note_allocation();
    v.resize(count);
  }
}

template <typename Dtype>
std::size_t Blob<Dtype>::capacity(Plane plane) const {
  return storage(plane).capacity();
}

template <typename Dtype>
void Blob<Dtype>::materialize(Plane plane) const {
  bool& live = plane == Plane::data ? data_live_ : diff_live_;
  if (live) return;
  auto& v = storage(plane);
  if (count_ > v.capacity()) BlobStats::note_allocation();
  v.assign(count_, Dtype(0));
  live = true;
}

template <typename Dtype>
std::span<const Dtype> Blob<Dtype>::plane(Plane plane) const {
  materialize(plane);
  const auto& v = storage(plane);
  return {v.data(), count_};
}

template <typename Dtype>
std::span<Dtype> Blob<Dtype>::mutable_plane(Plane plane) {
  materialize(plane);
  auto& v = storage(plane);
  return {v.data(), count_};
}

template <typename Dtype>
Dtype Blob<Dtype>::data_at(int n, int c, int h, int w) const {
  return data_live_ ? data_[offset(n, c, h, w)] : Dtype(0);
}

template <typename Dtype>
Dtype Blob<Dtype>::diff_at(int n, int c, int h, int w) const {
  return diff_live_ ? diff_[offset(n, c, h, w)] : Dtype(0);
}

template <typename Dtype>
void Blob<Dtype>::zero(Plane plane) {
  auto span = mutable_plane(plane);
  std::fill(span.begin(), span.end(), Dtype(0));
}

template <typename Dtype>
void Blob<Dtype>::copy_from(const Blob& other, bool copy_diff) {
  if (shape_ != other.shape_) reshape(other.shape_);
  auto src = other.data();
  std::copy(src.begin(), src.end(), mutable_data().begin());
  if (copy_diff) {
    auto dsrc = other.diff();
    std::copy(dsrc.begin(), dsrc.end(), mutable_diff().begin());
  }
}

template <typename Dtype>
void blob_axpby(Dtype alpha, const Blob<Dtype>& x, Dtype beta, Blob<Dtype>& y,
                Plane plane) {
  if (x.count() != y.count()) {
    throw ShapeError("blob_axpby: count mismatch " + x.shape().to_string() +
                     " vs " + y.shape().to_string());
  }
  auto xs = x.plane(plane);
  auto ys = y.mutable_plane(plane);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    ys[i] = alpha * xs[i] + beta * ys[i];
  }
}

template class Blob<float>;
template class Blob<double>;
template void blob_axpby<float>(float, const Blob<float>&, float, Blob<float>&,
                                Plane);
template void blob_axpby<double>(double, const Blob<double>&, double,
                                 Blob<double>&, Plane);

}  // namespace mgrind
