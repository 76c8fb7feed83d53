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

// 8-bit binary PPM (P6) images as (3, h, w) tensors in [0, 1], plus edge
// padding and cropping.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plc/bytes.hpp"
#include "plc/error.hpp"
#include "plc/tensor.hpp"

namespace plc {

namespace detail {

class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(std::span<const std::uint8_t> d) : d_(d) {}

  void skip_space_and_comments() {
    while (pos_ < d_.size()) {
      if (std::isspace(d_[pos_])) {
        ++pos_;
      } else if (d_[pos_] == '#') {
        while (pos_ < d_.size() && d_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos_ < d_.size() && std::isdigit(d_[pos_])) {
      v = v * 10 + (d_[pos_++] - '0');
      if (++digits > 9) throw FormatError("PPM header number too large");
    }
    if (digits == 0) throw FormatError("PPM header: expected a number");
    return v;
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> d_;
};

}  // namespace detail

inline Tensor decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError("not a binary PPM (P6) image");
  }
  detail::PpmHeaderReader r(bytes);
  r.pos_ = 2;
  const std::size_t w = r.number();
  const std::size_t h = r.number();
  const std::size_t maxval = r.number();
  if (w == 0 || h == 0) throw FormatError("PPM has zero width or height");
  if (maxval != 255) {
    throw FormatError("only 8-bit PPM (maxval 255) is supported, got " +
                      std::to_string(maxval));
  }
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) {
    throw FormatError("PPM header not terminated by whitespace");
  }
  ++r.pos_;
  if (bytes.size() - r.pos_ < 3 * w * h) {
    throw FormatError("PPM pixel data truncated");
  }
  Tensor t({3, h, w});
  const std::uint8_t* px = bytes.data() + r.pos_;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        t.at(c, y, x) = static_cast<float>(px[(y * w + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return t;
}

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline std::vector<std::uint8_t> encode_ppm(const Tensor& image) {
  if (image.channels() != 3) {
    throw ShapeError("PPM output needs 3 channels, got " +
                     std::to_string(image.channels()));
  }
  const std::string header = "P6\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back(to_byte(image.at(c, y, x)));
    }
  }
  return out;
}

inline Tensor read_image(const std::string& path) {
  return decode_ppm(read_file(path));
}

inline void write_image(const Tensor& image, const std::string& path) {
  write_file(path, encode_ppm(image));
}

// Quantizes to 8 bits and back, as a PPM round trip would.
inline Tensor quantize_8bit(const Tensor& image) {
  Tensor out = image;
  for (float& v : out.data()) v = static_cast<float>(to_byte(v)) / 255.0f;
  return out;
}

inline std::size_t round_up(std::size_t n, std::size_t multiple) {
  return (n + multiple - 1) / multiple * multiple;
}

// Replicates the last row/column out to (h, w).
inline Tensor pad_edge(const Tensor& t, std::size_t h, std::size_t w) {
  if (h < t.height() || w < t.width() || t.height() == 0 || t.width() == 0) {
    throw ShapeError("pad_edge: cannot pad " + to_string(t.shape()) + " to " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  Tensor out({t.channels(), h, w});
  for (std::size_t c = 0; c < t.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t sy = std::min(y, t.height() - 1);
      for (std::size_t x = 0; x < w; ++x) {
        out.at(c, y, x) = t.at(c, sy, std::min(x, t.width() - 1));
      }
    }
  }
  return out;
}

inline Tensor crop(const Tensor& t, std::size_t h, std::size_t w) {
  if (h > t.height() || w > t.width()) {
    throw ShapeError("crop: " + std::to_string(h) + "x" + std::to_string(w) +
                     " exceeds " + to_string(t.shape()));
  }
  Tensor out({t.channels(), h, w});
  for (std::size_t c = 0; c < t.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) out.at(c, y, x) = t.at(c, y, x);
    }
  }
  return out;
}

}  // namespace plc
