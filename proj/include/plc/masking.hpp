// Copyright 2026 The PLC Authors. All Rights Reserved.
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

// Variance-aware masks over residual latent slices.
//
// A quality q in [0, 100] keeps the residual elements whose predicted sigma
// reaches the (100 - q)-th percentile of the slice's sigmas. The masks depend
// on sigma and q only, so encoder and decoder derive identical masks and
// nothing but q has to be transmitted.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plc/error.hpp"
#include "plc/tensor.hpp"

namespace plc {

// A quality level. Stored as f32 because that is what the container carries;
// every derived threshold is computed from the f32 value.
class Quality {
 public:
  constexpr Quality() = default;
  explicit Quality(double q) : value_(static_cast<float>(q)) {
    if (!(value_ >= 0.0f && value_ <= 100.0f)) {
      throw QualityError("quality " + std::to_string(q) +
                         " outside [0, 100]");
    }
  }

  float value() const { return value_; }
  friend auto operator<=>(const Quality&, const Quality&) = default;

 private:
  float value_ = 0.0f;
};

struct Mask {
  Shape shape;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major like Tensor

  Mask() = default;
  explicit Mask(Shape s, std::uint8_t fill = 0)
      : shape(s), bits(s.size(), fill) {}

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
  }
  friend bool operator==(const Mask&, const Mask&) = default;
};

// Linear-interpolation percentile with inclusive endpoints: p = 0 gives the
// minimum, p = 100 the maximum.
inline double percentile(std::span<const float> values, double p) {
  if (values.empty()) throw Error("percentile of an empty sequence");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw Error("percentile rank " + std::to_string(p) + " outside [0, 100]");
  }
  std::vector<float> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  const double a = sorted[lo];
  const double b = sorted[lo + 1];
  return a + frac * (b - a);
}

// Keeps elements with sigma >= the (100 - q)-th percentile. Ties with the
// threshold are kept, so q = 0 keeps the maximal-sigma elements and q = 100
// keeps everything.
inline Mask sigma_mask(const Tensor& sigma, Quality q) {
  Mask m(sigma.shape());
  if (sigma.empty()) return m;
  const double threshold =
      percentile(sigma.data(), 100.0 - static_cast<double>(q.value()));
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    m.bits[i] = static_cast<double>(sigma[i]) >= threshold ? 1 : 0;
  }
  return m;
}

// Elements gained between two masks of the same monotone family.
inline Mask mask_difference(const Mask& upper, const Mask& lower) {
  if (upper.shape != lower.shape) {
    throw ShapeError("mask difference: shapes " + to_string(upper.shape) +
                     " and " + to_string(lower.shape) + " differ");
  }
  Mask d(upper.shape);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (lower.bits[i] > upper.bits[i]) {
      throw Error("mask difference is not binary: lower mask is not a subset");
    }
    d.bits[i] = static_cast<std::uint8_t>(upper.bits[i] - lower.bits[i]);
  }
  return d;
}

inline Mask delta_mask(const Tensor& sigma, Quality from, Quality to) {
  if (!(to > from)) {
    throw QualityError("delta_mask requires q* > q~, got q~=" +
                       std::to_string(from.value()) +
                       " q*=" + std::to_string(to.value()));
  }
  return mask_difference(sigma_mask(sigma, to), sigma_mask(sigma, from));
}

// round() on float is round-half-away-from-zero.
inline std::int32_t round_symbol(float v) {
  return static_cast<std::int32_t>(std::round(v));
}

struct QuantizedResidual {
  std::vector<std::int32_t> symbols;  // zero where masked
  Tensor values;                      // symbols + mean
};

// symbols = round(r - mean) * mask, values = symbols + mean. Masked positions
// therefore carry exactly the mean.
inline QuantizedResidual quantize_residual(const Tensor& residual,
                                           const Tensor& mean,
                                           const Mask& mask) {
  if (residual.shape() != mean.shape() || residual.shape() != mask.shape) {
    throw ShapeError("quantize_residual: residual " +
                     to_string(residual.shape()) + ", mean " +
                     to_string(mean.shape()) + ", mask " +
                     to_string(mask.shape));
  }
  QuantizedResidual out{std::vector<std::int32_t>(residual.size(), 0),
                        Tensor(residual.shape())};
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const std::uint8_t m = mask.bits[i];
    if (m > 1) {
      throw Error("quantize_residual: mask value " + std::to_string(m) +
                  " at index " + std::to_string(i) + " is not binary");
    }
    const std::int32_t s = m ? round_symbol(residual[i] - mean[i]) : 0;
    out.symbols[i] = s;
    out.values[i] = static_cast<float>(s) + mean[i];
  }
  return out;
}

}  // namespace plc
