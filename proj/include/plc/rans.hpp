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

// Byte-oriented rANS coder for zero-mean discretized Gaussians.
//
// Each symbol is coded against one row of a CdfTable, selected by a scale
// level index. Rows cover the integers [-tail, tail] plus one escape bin;
// an escaped value is followed by its zigzag code as two raw 16-bit chunks.
//
// State is 32 bits with the lower bound kRansL = 2^23 and byte-wise
// renormalization. The encoder consumes symbols in reverse and the final
// state is written first, so the decoder reads the stream front to back and
// returns symbols in their original order.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "plc/error.hpp"

namespace plc {

struct ScaleTable {
  std::vector<double> levels;  // strictly increasing, levels[0] > 0
  unsigned precision = 16;

  // 64 levels log-spaced over [0.11, 256], 16-bit CDFs.
  static ScaleTable standard() {
    constexpr std::size_t kLevels = 64;
    constexpr double kMin = 0.11;
    constexpr double kMax = 256.0;
    ScaleTable t;
    t.levels.resize(kLevels);
    const double lmin = std::log(kMin);
    const double step = (std::log(kMax) - lmin) / (kLevels - 1);
    for (std::size_t i = 0; i < kLevels; ++i) {
      t.levels[i] = std::exp(lmin + step * static_cast<double>(i));
    }
    t.levels.front() = kMin;
    t.levels.back() = kMax;
    return t;
  }

  void validate() const {
    if (levels.empty()) throw Error("scale table has no levels");
    if (!(levels.front() > 0.0)) throw Error("scale table minimum must be > 0");
    for (std::size_t i = 1; i < levels.size(); ++i) {
      if (!(levels[i] > levels[i - 1])) {
        throw Error("scale table levels must be strictly increasing");
      }
    }
    if (precision < 2 || precision > 16) {
      throw Error("scale table precision must be in [2, 16], got " +
                  std::to_string(precision));
    }
  }
};

// Smallest level >= sigma, clamped to the last level. NaN maps to the last
// level as well so a broken sigma can never index out of range.
inline std::uint32_t quantize_scale(double sigma, const ScaleTable& table) {
  const auto it =
      std::lower_bound(table.levels.begin(), table.levels.end(), sigma);
  if (it == table.levels.end() || std::isnan(sigma)) {
    return static_cast<std::uint32_t>(table.levels.size() - 1);
  }
  return static_cast<std::uint32_t>(it - table.levels.begin());
}

class CdfTable {
 public:
  CdfTable() = default;

  std::uint32_t precision() const { return precision_; }
  std::int32_t tail() const { return tail_; }
  std::size_t num_levels() const { return num_levels_; }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t escape_bin() const { return num_bins_ - 1; }

  // Cumulative frequencies of one level, num_bins + 1 entries.
  std::span<const std::uint32_t> cdf(std::size_t level) const {
    return std::span<const std::uint32_t>(cdf_).subspan(
        level * (num_bins_ + 1), num_bins_ + 1);
  }
  std::uint32_t freq(std::size_t level, std::size_t bin) const {
    const auto row = cdf(level);
    return row[bin + 1] - row[bin];
  }

  // Bin of a symbol: value + tail inside the tail range, else the escape bin.
  std::size_t bin_of(std::int32_t value) const {
    if (value < -tail_ || value > tail_) return escape_bin();
    return static_cast<std::size_t>(value + tail_);
  }

  // Ideal code length of one symbol under this table, escape payload included.
  double bits(std::int32_t value, std::size_t level) const {
    const std::size_t bin = bin_of(value);
    double b = static_cast<double>(precision_) -
               std::log2(static_cast<double>(freq(level, bin)));
    if (bin == escape_bin()) b += 32.0;
    return b;
  }

  void check_level(std::size_t level) const {
    if (level >= num_levels_) {
      throw Error("scale level index " + std::to_string(level) +
                  " out of range (" + std::to_string(num_levels_) +
                  " levels)");
    }
  }

 private:
  friend CdfTable build_tables(const ScaleTable&);

  std::uint32_t precision_ = 0;
  std::int32_t tail_ = 0;
  std::size_t num_levels_ = 0;
  std::size_t num_bins_ = 0;
  std::vector<std::uint32_t> cdf_;
};

inline constexpr std::int32_t kMaxTail = 255;

inline CdfTable build_tables(const ScaleTable& scale_table) {
  scale_table.validate();
  const double sigma_max = scale_table.levels.back();
  const auto tail = static_cast<std::int32_t>(
      std::min<double>(kMaxTail, std::ceil(6.0 * sigma_max)));
  const std::size_t bins = 2 * static_cast<std::size_t>(tail) + 2;
  const std::uint32_t total = 1u << scale_table.precision;
  if (static_cast<std::uint64_t>(total) < 4 * static_cast<std::uint64_t>(bins)) {
    throw Error("CDF precision " + std::to_string(scale_table.precision) +
                " bits too small for " + std::to_string(bins) + " bins");
  }

  CdfTable t;
  t.precision_ = scale_table.precision;
  t.tail_ = tail;
  t.num_levels_ = scale_table.levels.size();
  t.num_bins_ = bins;
  t.cdf_.reserve(t.num_levels_ * (bins + 1));

  std::vector<double> prob(bins);
  std::vector<std::uint32_t> freq(bins);
  for (double sigma : scale_table.levels) {
    // P(|X| >= v) style upper tails via erfc keep small masses accurate.
    auto upper = [&](double v) {
      return 0.5 * std::erfc(v / (sigma * std::numbers::sqrt2));
    };
    for (std::int32_t s = -tail; s <= tail; ++s) {
      const double a = std::abs(s) - 0.5;
      const double p = (s == 0) ? 1.0 - 2.0 * upper(0.5)
                                : upper(a) - upper(a + 1.0);
      prob[static_cast<std::size_t>(s + tail)] = p;
    }
    prob[bins - 1] = 2.0 * upper(tail + 0.5);

    double mass = 0.0;
    for (double p : prob) mass += p;
    const double avail = static_cast<double>(total - bins);
    std::uint32_t used = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      freq[k] = 1 + static_cast<std::uint32_t>(std::floor(prob[k] / mass * avail));
      used += freq[k];
    }
    // Rounding remainder goes to the mode (symbol 0).
    freq[static_cast<std::size_t>(tail)] += total - used;

    std::uint32_t acc = 0;
    t.cdf_.push_back(0);
    for (std::size_t k = 0; k < bins; ++k) {
      acc += freq[k];
      t.cdf_.push_back(acc);
    }
  }
  return t;
}

// Tables for ScaleTable::standard(), built once.
inline const ScaleTable& standard_scale_table() {
  static const ScaleTable table = ScaleTable::standard();
  return table;
}

inline const CdfTable& standard_cdf_table() {
  static const CdfTable table = build_tables(standard_scale_table());
  return table;
}

inline constexpr std::uint32_t kRansL = 1u << 23;

inline std::uint32_t zigzag(std::int32_t v) {
  return (static_cast<std::uint32_t>(v) << 1) ^
         static_cast<std::uint32_t>(v >> 31);
}

inline std::int32_t unzigzag(std::uint32_t u) {
  return static_cast<std::int32_t>((u >> 1) ^ (~(u & 1) + 1));
}

class RansEncoder {
 public:
  explicit RansEncoder(const CdfTable& tables) : tables_(&tables) {}

  void put(std::int32_t value, std::size_t level) {
    tables_->check_level(level);
    const std::size_t bin = tables_->bin_of(value);
    const auto row = tables_->cdf(level);
    ops_.push_back({row[bin], row[bin + 1] - row[bin], tables_->precision()});
    if (bin == tables_->escape_bin()) {
      const std::uint32_t z = zigzag(value);
      ops_.push_back({z & 0xffffu, 1, 16});
      ops_.push_back({z >> 16, 1, 16});
    }
  }

  std::size_t size() const { return ops_.size(); }

  std::vector<std::uint8_t> finish() const {
    std::vector<std::uint8_t> out;
    out.reserve(ops_.size() / 2 + 8);
    std::uint32_t x = kRansL;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      const std::uint64_t x_max =
          (static_cast<std::uint64_t>(kRansL >> it->scale_bits) << 8) *
          it->freq;
      while (x >= x_max) {
        out.push_back(static_cast<std::uint8_t>(x & 0xff));
        x >>= 8;
      }
      x = ((x / it->freq) << it->scale_bits) + (x % it->freq) + it->start;
    }
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct Op {
    std::uint32_t start;
    std::uint32_t freq;
    std::uint32_t scale_bits;
  };
  const CdfTable* tables_;
  std::vector<Op> ops_;
};

// Pulls symbols one at a time, so callers may choose each symbol's level
// from previously decoded values.
class RansDecoder {
 public:
  RansDecoder(std::span<const std::uint8_t> bytes, const CdfTable& tables)
      : bytes_(bytes), tables_(&tables) {
    if (bytes_.size() < 4) {
      throw CorruptStreamError("rANS stream shorter than its 4-byte state");
    }
    for (int i = 0; i < 4; ++i) x_ = (x_ << 8) | bytes_[pos_++];
    if (x_ < kRansL) throw CorruptStreamError("rANS initial state out of range");
  }

  std::int32_t get(std::size_t level) {
    tables_->check_level(level);
    const std::uint32_t prec = tables_->precision();
    const auto row = tables_->cdf(level);
    const std::uint32_t slot = x_ & ((1u << prec) - 1);
    const auto it = std::upper_bound(row.begin() + 1, row.end(), slot);
    const auto bin = static_cast<std::size_t>(it - row.begin()) - 1;
    advance(row[bin], row[bin + 1] - row[bin], prec, slot);
    if (bin != tables_->escape_bin()) {
      return static_cast<std::int32_t>(bin) - tables_->tail();
    }
    const std::uint32_t lo = raw16();
    const std::uint32_t hi = raw16();
    const std::int32_t value = unzigzag(lo | (hi << 16));
    if (value >= -tables_->tail() && value <= tables_->tail()) {
      throw CorruptStreamError("escaped rANS value lies inside the tail range");
    }
    return value;
  }

  // Throws unless every byte was consumed and the state is back to its
  // initial value.
  void finish() const {
    if (pos_ != bytes_.size()) {
      throw CorruptStreamError("rANS stream has " +
                               std::to_string(bytes_.size() - pos_) +
                               " trailing bytes");
    }
    if (x_ != kRansL) throw CorruptStreamError("rANS final state mismatch");
  }

 private:
  std::uint32_t raw16() {
    const std::uint32_t slot = x_ & 0xffffu;
    advance(slot, 1, 16, slot);
    return slot;
  }

  void advance(std::uint32_t start, std::uint32_t freq, std::uint32_t bits,
               std::uint32_t slot) {
    x_ = freq * (x_ >> bits) + slot - start;
    while (x_ < kRansL) {
      if (pos_ >= bytes_.size()) {
        throw CorruptStreamError("rANS stream truncated");
      }
      x_ = (x_ << 8) | bytes_[pos_++];
    }
  }

  std::span<const std::uint8_t> bytes_;
  const CdfTable* tables_;
  std::size_t pos_ = 0;
  std::uint32_t x_ = 0;
};

inline std::vector<std::uint8_t> encode_symbols(
    std::span<const std::int32_t> symbols,
    std::span<const std::uint32_t> level_indices, const CdfTable& tables) {
  if (symbols.size() != level_indices.size()) {
    throw ShapeError("encode_symbols: " + std::to_string(symbols.size()) +
                     " symbols but " + std::to_string(level_indices.size()) +
                     " level indices");
  }
  RansEncoder enc(tables);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    enc.put(symbols[i], level_indices[i]);
  }
  return enc.finish();
}

inline std::vector<std::int32_t> decode_symbols(
    std::span<const std::uint8_t> stream,
    std::span<const std::uint32_t> level_indices, const CdfTable& tables) {
  RansDecoder dec(stream, tables);
  std::vector<std::int32_t> out;
  out.reserve(level_indices.size());
  for (std::uint32_t level : level_indices) out.push_back(dec.get(level));
  dec.finish();
  return out;
}

}  // namespace plc
