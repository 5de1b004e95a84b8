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

#include <Eigen/Core>

#include "mgrind/error.hpp"
#include "mgrind/tensor/backend.hpp"

namespace mgrind {

namespace {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMajor<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMajor<T>>;
template <typename T>
using ConstVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using MutVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

void check_size(std::size_t have, std::size_t need, const char* what) {
  if (have < need) {
    throw ShapeError(std::string("backend: operand ") + what + " too small");
  }
}

template <typename T>
void eigen_gemm(Transpose ta, Transpose tb, int m, int n, int k, T alpha,
                std::span<const T> a, std::span<const T> b, T beta,
                std::span<T> c) {
  const std::size_t mk = static_cast<std::size_t>(m) * k;
  const std::size_t kn = static_cast<std::size_t>(k) * n;
  const std::size_t mn = static_cast<std::size_t>(m) * n;
  check_size(a.size(), mk, "A");
  check_size(b.size(), kn, "B");
  check_size(c.size(), mn, "C");
  MutMap<T> cm(c.data(), m, n);
  if (k == 0) {
    if (beta == T(0)) {
      cm.setZero();
    } else {
      cm *= beta;
    }
    return;
  }
  // Stored shapes: A is (m x k) or (k x m) when transposed; same for B.
  ConstMap<T> am(a.data(), ta == Transpose::no ? m : k, ta == Transpose::no ? k : m);
  ConstMap<T> bm(b.data(), tb == Transpose::no ? k : n, tb == Transpose::no ? n : k);
  auto apply = [&](const auto& lhs, const auto& rhs) {
    if (beta == T(0)) {
      cm.noalias() = alpha * (lhs * rhs);
    } else {
      if (beta != T(1)) cm *= beta;
      cm.noalias() += alpha * (lhs * rhs);
    }
  };
  if (ta == Transpose::no && tb == Transpose::no) {
    apply(am, bm);
  } else if (ta == Transpose::no) {
    apply(am, bm.transpose());
  } else if (tb == Transpose::no) {
    apply(am.transpose(), bm);
  } else {
    apply(am.transpose(), bm.transpose());
  }
}

template <typename T>
void eigen_gemv(Transpose ta, int m, int n, T alpha, std::span<const T> a,
                std::span<const T> x, T beta, std::span<T> y) {
  const int out = ta == Transpose::no ? m : n;
  const int in = ta == Transpose::no ? n : m;
  check_size(a.size(), static_cast<std::size_t>(m) * n, "A");
  check_size(x.size(), static_cast<std::size_t>(in), "x");
  check_size(y.size(), static_cast<std::size_t>(out), "y");
  ConstMap<T> am(a.data(), m, n);
  ConstVec<T> xv(x.data(), in);
  MutVec<T> yv(y.data(), out);
  if (beta == T(0)) {
    yv.setZero();
  } else if (beta != T(1)) {
    yv *= beta;
  }
  if (ta == Transpose::no) {
    yv.noalias() += alpha * (am * xv);
  } else {
    yv.noalias() += alpha * (am.transpose() * xv);
  }
}

class CpuBackend final : public Backend {
 public:
  std::string_view name() const override { return "cpu"; }

  void gemm(Transpose ta, Transpose tb, int m, int n, int k, float alpha,
            std::span<const float> a, std::span<const float> b, float beta,
            std::span<float> c) const override {
    eigen_gemm<float>(ta, tb, m, n, k, alpha, a, b, beta, c);
  }
  void gemm(Transpose ta, Transpose tb, int m, int n, int k, double alpha,
            std::span<const double> a, std::span<const double> b, double beta,
            std::span<double> c) const override {
    eigen_gemm<double>(ta, tb, m, n, k, alpha, a, b, beta, c);
  }
  void gemv(Transpose ta, int m, int n, float alpha, std::span<const float> a,
            std::span<const float> x, float beta,
            std::span<float> y) const override {
    eigen_gemv<float>(ta, m, n, alpha, a, x, beta, y);
  }
  void gemv(Transpose ta, int m, int n, double alpha,
            std::span<const double> a, std::span<const double> x, double beta,
            std::span<double> y) const override {
    eigen_gemv<double>(ta, m, n, alpha, a, x, beta, y);
  }
};

}  // namespace

const Backend& cpu_backend() {
  static const CpuBackend backend;
  return backend;
}

const Backend& backend_by_name(std::string_view name) {
  if (name == "cpu") return cpu_backend();
  throw ConfigError("unknown execution backend '" + std::string(name) + "'");
}

std::vector<std::string> backend_names() { return {"cpu"}; }

}  // namespace mgrind
