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

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mgrind {

enum class Transpose { no, yes };

/// Kernel set that layers route their dense linear algebra through. The CPU
/// set is the only one shipped; a second implementation must pass the same
/// layer test suite unchanged.
///
/// Matrices are row-major. gemm computes
///   C(m x n) = alpha * op(A) * op(B) + beta * C
/// where op(A) is m x k and op(B) is k x n. C is not read when beta == 0.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string_view name() const = 0;

  virtual void gemm(Transpose ta, Transpose tb, int m, int n, int k,
                    float alpha, std::span<const float> a,
                    std::span<const float> b, float beta,
                    std::span<float> c) const = 0;
  virtual void gemm(Transpose ta, Transpose tb, int m, int n, int k,
                    double alpha, std::span<const double> a,
                    std::span<const double> b, double beta,
                    std::span<double> c) const = 0;

  /// y(m or n) = alpha * op(A) * x + beta * y, A is m x n.
  virtual void gemv(Transpose ta, int m, int n, float alpha,
                    std::span<const float> a, std::span<const float> x,
                    float beta, std::span<float> y) const = 0;
  virtual void gemv(Transpose ta, int m, int n, double alpha,
                    std::span<const double> a, std::span<const double> x,
                    double beta, std::span<double> y) const = 0;
};

/// Portable CPU kernels (Eigen-backed matrix products).
const Backend& cpu_backend();

/// Looks up a registered backend; throws ConfigError for unknown names.
const Backend& backend_by_name(std::string_view name);
std::vector<std::string> backend_names();

}  // namespace mgrind
