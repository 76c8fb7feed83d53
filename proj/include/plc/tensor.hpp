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

// Dense (channels, height, width) float tensors and the handful of layers the
// toy networks need. Everything here is pure and deterministic: convolution
// sums are accumulated in double in a fixed (in_channel, ky, kx) order and
// rounded to float once per output element.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plc/error.hpp"

namespace plc {

struct Shape {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return c * h * w; }
  std::size_t plane() const { return h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.c) + ", " + std::to_string(s.h) + ", " +
         std::to_string(s.w) + ")";
}

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f)
      : shape_(shape), data_(shape.size(), fill) {}
  Tensor(Shape shape, std::vector<float> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t channels() const { return shape_.c; }
  std::size_t height() const { return shape_.h; }
  std::size_t width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.h + y) * shape_.w + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.h + y) * shape_.w + x];
  }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(data_).subspan(c * shape_.plane(),
                                                 shape_.plane());
  }

  bool all_finite() const {
    for (float v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Bitwise equality, distinguishing -0.0f from 0.0f.
inline bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) !=
        std::bit_cast<std::uint32_t>(b[i])) {
      return false;
    }
  }
  return true;
}

struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;  // odd
  std::size_t stride = 1;
  std::size_t padding = 0;
  // Extra rows/columns appended to a transposed convolution's output, the
  // usual way to make a stride-2 transposed conv exactly double its input.
  std::size_t output_padding = 0;
  bool transposed = false;

  Shape output_shape(const Shape& in) const {
    auto dim = [&](std::size_t n, const char* name) -> std::size_t {
      if (transposed) {
        if (n == 0) throw ShapeError(std::string("empty input ") + name);
        const std::size_t full = (n - 1) * stride + kernel + output_padding;
        if (full < 2 * padding) {
          throw ShapeError(std::string("transposed conv output ") + name +
                           " would be negative");
        }
        return full - 2 * padding;
      }
      if (n + 2 * padding < kernel) {
        throw ShapeError(std::string("conv input ") + name + " " +
                         std::to_string(n) + " smaller than kernel");
      }
      return (n + 2 * padding - kernel) / stride + 1;
    };
    return {out_channels, dim(in.h, "height"), dim(in.w, "width")};
  }
};

namespace detail {

inline void validate_conv(const Tensor& input, const ConvSpec& spec,
                          const Tensor& kernel_weights,
                          std::span<const float> bias) {
  if (spec.kernel % 2 == 0 || spec.kernel == 0) {
    throw ShapeError("conv kernel size must be odd, got " +
                     std::to_string(spec.kernel));
  }
  if (spec.stride == 0) throw ShapeError("conv stride must be >= 1");
  if (input.channels() != spec.in_channels) {
    throw ShapeError("conv in_channels: input has " +
                     std::to_string(input.channels()) + ", spec expects " +
                     std::to_string(spec.in_channels));
  }
  // Weights are stored as a tensor of shape (out, in, k*k).
  const Shape want{spec.out_channels, spec.in_channels,
                   spec.kernel * spec.kernel};
  if (kernel_weights.shape() != want) {
    throw ShapeError("conv kernel_weights: got " +
                     to_string(kernel_weights.shape()) + ", expected (out=" +
                     std::to_string(spec.out_channels) +
                     ", in=" + std::to_string(spec.in_channels) +
                     ", k*k=" + std::to_string(spec.kernel * spec.kernel) + ")");
  }
  if (bias.size() != spec.out_channels) {
    throw ShapeError("conv bias: got " + std::to_string(bias.size()) +
                     " values for out_channels " +
                     std::to_string(spec.out_channels));
  }
}

}  // namespace detail

// Plain or transposed 2-D convolution. kernel_weights has shape
// (out, in, k*k), row-major over (ky, kx) in the last axis. The transposed
// variant is evaluated in gather form so every output element is a single
// ordered sum, same as the plain variant.
inline Tensor conv2d(const Tensor& input, const ConvSpec& spec,
                     const Tensor& kernel_weights,
                     std::span<const float> bias) {
  detail::validate_conv(input, spec, kernel_weights, bias);
  const Shape in = input.shape();
  const Shape out_shape = spec.output_shape(in);
  Tensor out(out_shape);

  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(spec.kernel);
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(spec.stride);
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(spec.padding);
  const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(in.h);
  const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(in.w);
  const std::ptrdiff_t ow = static_cast<std::ptrdiff_t>(out_shape.w);

  std::vector<double> acc(out_shape.w);
  const std::span<const float> src = input.data();
  const std::span<const float> wts = kernel_weights.data();

  for (std::size_t o = 0; o < out_shape.c; ++o) {
    for (std::size_t oy = 0; oy < out_shape.h; ++oy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t ic = 0; ic < in.c; ++ic) {
        const float* plane = src.data() + ic * in.plane();
        const float* wrow =
            wts.data() + (o * in.c + ic) * spec.kernel * spec.kernel;
        for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
          std::ptrdiff_t iy;
          if (spec.transposed) {
            const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(oy) + p - ky;
            if (t < 0 || t % s != 0) continue;
            iy = t / s;
          } else {
            iy = static_cast<std::ptrdiff_t>(oy) * s - p + ky;
          }
          if (iy < 0 || iy >= ih) continue;
          const float* row = plane + iy * iw;
          for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
            const double wv = wrow[ky * k + kx];
            if (spec.transposed) {
              // Outputs with ox + p - kx = ix * s, ix in [0, iw).
              std::ptrdiff_t ox = kx - p;
              std::ptrdiff_t ix = 0;
              if (ox < 0) {
                const std::ptrdiff_t skip = (-ox + s - 1) / s;
                ox += skip * s;
                ix = skip;
              }
              for (; ox < ow && ix < iw; ox += s, ++ix) {
                acc[ox] += wv * row[ix];
              }
            } else {
              for (std::ptrdiff_t ox = 0; ox < ow; ++ox) {
                const std::ptrdiff_t ix = ox * s - p + kx;
                if (ix < 0 || ix >= iw) continue;
                acc[ox] += wv * row[ix];
              }
            }
          }
        }
      }
      const double b = bias[o];
      for (std::size_t ox = 0; ox < out_shape.w; ++ox) {
        out.at(o, oy, ox) = static_cast<float>(acc[ox] + b);
      }
    }
  }
  return out;
}

inline Tensor leaky_relu(Tensor t, float slope = 0.01f) {
  for (float& v : t.data()) {
    if (v < 0.0f) v *= slope;
  }
  return t;
}

inline Tensor channel_concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("channel_concat of zero tensors");
  std::size_t h = 0, w = 0, c = 0;
  bool have_dims = false;
  for (const Tensor& p : parts) {
    if (p.channels() == 0) continue;
    if (!have_dims) {
      h = p.height();
      w = p.width();
      have_dims = true;
    } else if (p.height() != h || p.width() != w) {
      throw ShapeError("channel_concat: spatial dims " + to_string(p.shape()) +
                       " differ from (" + std::to_string(h) + ", " +
                       std::to_string(w) + ")");
    }
    c += p.channels();
  }
  std::vector<float> data;
  data.reserve(c * h * w);
  for (const Tensor& p : parts) {
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  return Tensor({c, h, w}, std::move(data));
}

inline Tensor channel_concat(std::initializer_list<Tensor> parts) {
  return channel_concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

// Channels [begin, begin + count).
inline Tensor channel_range(const Tensor& t, std::size_t begin,
                            std::size_t count) {
  if (begin + count > t.channels()) {
    throw ShapeError("channel_range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") exceeds " +
                     std::to_string(t.channels()) + " channels");
  }
  const auto first = t.data().begin() + static_cast<std::ptrdiff_t>(
                                             begin * t.shape().plane());
  const auto last =
      first + static_cast<std::ptrdiff_t>(count * t.shape().plane());
  return Tensor({count, t.height(), t.width()}, std::vector<float>(first, last));
}

inline std::vector<Tensor> channel_split(const Tensor& t, std::size_t slices) {
  if (slices == 0 || t.channels() % slices != 0) {
    throw ShapeError("channel_split: " + std::to_string(t.channels()) +
                     " channels not divisible into " + std::to_string(slices) +
                     " slices");
  }
  const std::size_t per = t.channels() / slices;
  std::vector<Tensor> out;
  out.reserve(slices);
  for (std::size_t i = 0; i < slices; ++i) {
    out.push_back(channel_range(t, i * per, per));
  }
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()) + " differ");
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Tensor subtract(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("subtract: shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()) + " differ");
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

// 64-bit FNV-1a over raw bytes; used for golden checksums and file trailers.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t checksum(const Tensor& t) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (float v : t.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    const std::uint8_t le[4] = {
        static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
        static_cast<std::uint8_t>(bits >> 16),
        static_cast<std::uint8_t>(bits >> 24)};
    hash = fnv1a64(le, hash);
  }
  return hash;
}

}  // namespace plc
