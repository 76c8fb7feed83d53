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


#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "plc/error.hpp"
#include "plc/random.hpp"
#include "plc/rans.hpp"

namespace plc {
namespace {

std::vector<std::int32_t> gaussian_symbols(std::size_t n, double sigma,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int32_t> s(n);
  for (auto& v : s) v = static_cast<std::int32_t>(std::round(rng.normal() * sigma));
  return s;
}

// Cross-entropy straight from the CDF rows, independent of CdfTable::bits.
double table_cross_entropy_bits(const std::vector<std::int32_t>& syms,
                                const std::vector<std::uint32_t>& levels,
                                const CdfTable& t) {
  double bits = 0.0;
  const double total = std::ldexp(1.0, static_cast<int>(t.precision()));
  for (std::size_t i = 0; i < syms.size(); ++i) {
    const auto row = t.cdf(levels[i]);
    const std::int32_t v = syms[i];
    const bool escape = v < -t.tail() || v > t.tail();
    const std::size_t bin =
        escape ? row.size() - 2 : static_cast<std::size_t>(v + t.tail());
    bits -= std::log2((row[bin + 1] - row[bin]) / total);
    if (escape) bits += 32.0;
  }
  return bits;
}

TEST(ScaleTable, StandardLayout) {
  const ScaleTable& s = standard_scale_table();
  ASSERT_EQ(s.levels.size(), 64u);
  EXPECT_EQ(s.levels.front(), 0.11);
  EXPECT_EQ(s.levels.back(), 256.0);
  EXPECT_EQ(s.precision, 16u);
  EXPECT_NO_THROW(s.validate());
}

TEST(ScaleTable, ValidateRejectsBadTables) {
  EXPECT_THROW((ScaleTable{{}, 16}.validate()), Error);
  EXPECT_THROW((ScaleTable{{0.0, 1.0}, 16}.validate()), Error);
  EXPECT_THROW((ScaleTable{{1.0, 1.0}, 16}.validate()), Error);
  EXPECT_THROW((ScaleTable{{1.0, 2.0}, 17}.validate()), Error);
}

TEST(BuildTables, PrecisionTooSmallForTail) {
  EXPECT_THROW(build_tables(ScaleTable{{0.5, 100.0}, 8}), Error);
}

TEST(BuildTables, RowsSumToPrecision) {
  const CdfTable& t = standard_cdf_table();
  EXPECT_EQ(t.tail(), 255);
  EXPECT_EQ(t.num_bins(), 512u);
  for (std::size_t l = 0; l < t.num_levels(); ++l) {
    const auto row = t.cdf(l);
    EXPECT_EQ(row.front(), 0u);
    EXPECT_EQ(row.back(), 1u << 16) << "level " << l;
    for (std::size_t b = 0; b < t.num_bins(); ++b) EXPECT_GE(t.freq(l, b), 1u);
  }
}

TEST(BuildTables, ZeroIsModeAtMinimumSigma) {
  const CdfTable& t = standard_cdf_table();
  const std::size_t zero = t.bin_of(0);
  for (std::size_t b = 0; b < t.num_bins(); ++b) {
    if (b != zero) {
      EXPECT_GT(t.freq(0, zero), t.freq(0, b));
    }
  }
}

TEST(BuildTables, UnitSigmaZeroProbability) {
  const CdfTable& t = standard_cdf_table();
  const std::uint32_t level = quantize_scale(1.0, standard_scale_table());
  const double sigma = standard_scale_table().levels[level];
  const double p0 = t.freq(level, t.bin_of(0)) / 65536.0;
  // Exact Gaussian mass of [-0.5, 0.5] at the table's sigma; the table only
  // loses 1/65536-sized rounding plus the floor-1 reservation.
  EXPECT_NEAR(p0, std::erf(0.5 / (sigma * std::numbers::sqrt2)), 5e-3);
  // The level nearest 1 differs from 1 by under one level step.
  EXPECT_NEAR(p0, 0.3829, 0.01);
}

TEST(QuantizeScale, Cases) {
  const ScaleTable t{{1.0, 2.0, 4.0}, 16};
  EXPECT_EQ(quantize_scale(0.01, t), 0u);
  EXPECT_EQ(quantize_scale(1.0, t), 0u);
  EXPECT_EQ(quantize_scale(2.0, t), 1u);
  EXPECT_EQ(quantize_scale(1.5, t), 1u);
  EXPECT_EQ(quantize_scale(3.9, t), 2u);
  EXPECT_EQ(quantize_scale(1e9, t), 2u);
  EXPECT_EQ(quantize_scale(std::nan(""), t), 2u);
}

TEST(Zigzag, RoundTrip) {
  for (std::int32_t v : {0, 1, -1, 255, -256, 1 << 20, -(1 << 30)}) {
    EXPECT_EQ(unzigzag(zigzag(v)), v);
  }
  EXPECT_EQ(zigzag(0), 0u);
  EXPECT_EQ(zigzag(-1), 1u);
  EXPECT_EQ(zigzag(1), 2u);
}

TEST(Rans, EmptyStreamIsFinalStateOnly) {
  const auto bytes = encode_symbols({}, {}, standard_cdf_table());
  EXPECT_EQ(bytes.size(), 4u);
  EXPECT_TRUE(decode_symbols(bytes, {}, standard_cdf_table()).empty());
}

TEST(Rans, SingleZeroAtMinimumLevel) {
  const std::vector<std::int32_t> s{0};
  const std::vector<std::uint32_t> l{0};
  const auto bytes = encode_symbols(s, l, standard_cdf_table());
  EXPECT_EQ(decode_symbols(bytes, l, standard_cdf_table()), s);
}

TEST(Rans, RoundTripMixedLevels) {
  const CdfTable& t = standard_cdf_table();
  Rng rng(17);
  std::vector<std::int32_t> syms(100000);
  std::vector<std::uint32_t> levels(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    levels[i] = static_cast<std::uint32_t>(rng.next() % t.num_levels());
    const double sigma = standard_scale_table().levels[levels[i]];
    syms[i] = static_cast<std::int32_t>(std::round(rng.normal() * sigma));
  }
  const auto bytes = encode_symbols(syms, levels, t);
  EXPECT_EQ(decode_symbols(bytes, levels, t), syms);
}

TEST(Rans, EscapesRoundTrip) {
  const CdfTable& t = standard_cdf_table();
  const std::vector<std::int32_t> syms{256, -256, 1000000, -2000000000, 0, 255,
                                       -255, 2147483647};
  const std::vector<std::uint32_t> levels(syms.size(), 0);
  const auto bytes = encode_symbols(syms, levels, t);
  EXPECT_EQ(decode_symbols(bytes, levels, t), syms);
}

TEST(Rans, RateMatchesTableCrossEntropy) {
  const CdfTable& t = standard_cdf_table();
  const std::uint32_t level = quantize_scale(1.0, standard_scale_table());
  const auto syms = gaussian_symbols(100000, 1.0, 3);
  const std::vector<std::uint32_t> levels(syms.size(), level);
  const double ideal_bytes = table_cross_entropy_bits(syms, levels, t) / 8.0;
  const double real = static_cast<double>(encode_symbols(syms, levels, t).size());
  EXPECT_LE(std::abs(real - ideal_bytes), 0.02 * ideal_bytes + 16.0)
      << "realized " << real << " ideal " << ideal_bytes;
}

TEST(Rans, WrongLevelsCanMisdecode) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(1000, 4.0, 4);
  const std::vector<std::uint32_t> right(syms.size(), 40);
  const std::vector<std::uint32_t> wrong(syms.size(), 10);
  const auto bytes = encode_symbols(syms, right, t);
  bool mismatch = false;
  try {
    mismatch = decode_symbols(bytes, wrong, t) != syms;
  } catch (const CorruptStreamError&) {
    mismatch = true;
  }
  EXPECT_TRUE(mismatch);
}

TEST(Rans, TruncatedStreamThrows) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(5000, 3.0, 5);
  const std::vector<std::uint32_t> levels(syms.size(), 30);
  auto bytes = encode_symbols(syms, levels, t);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_symbols(bytes, levels, t), CorruptStreamError);
  EXPECT_THROW(decode_symbols(std::vector<std::uint8_t>{1, 2}, levels, t),
               CorruptStreamError);
}

TEST(Rans, TrailingBytesThrow) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(100, 3.0, 6);
  const std::vector<std::uint32_t> levels(syms.size(), 30);
  auto bytes = encode_symbols(syms, levels, t);
  bytes.push_back(0);
  EXPECT_THROW(decode_symbols(bytes, levels, t), CorruptStreamError);
}

TEST(Rans, CorruptedStreamNeverSilentlyPasses) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(2000, 2.0, 7);
  const std::vector<std::uint32_t> levels(syms.size(), 25);
  const auto clean = encode_symbols(syms, levels, t);
  int detected = 0;
  for (std::size_t k = 0; k < 32; ++k) {
    auto bytes = clean;
    bytes[(k * 61) % bytes.size()] ^= static_cast<std::uint8_t>(1u << (k % 8));
    try {
      if (decode_symbols(bytes, levels, t) != syms) ++detected;
    } catch (const CorruptStreamError&) {
      ++detected;
    }
  }
  EXPECT_EQ(detected, 32);
}

TEST(Rans, TooFewSymbolsLeaveStateUnfinished) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(500, 2.0, 8);
  const std::vector<std::uint32_t> levels(syms.size(), 25);
  const auto bytes = encode_symbols(syms, levels, t);
  const std::vector<std::uint32_t> fewer(levels.begin(), levels.end() - 10);
  EXPECT_THROW(decode_symbols(bytes, fewer, t), CorruptStreamError);
}

TEST(Rans, LevelOutOfRangeThrows) {
  RansEncoder enc(standard_cdf_table());
  EXPECT_THROW(enc.put(0, 64), Error);
}

TEST(Rans, EncodeRejectsLengthMismatch) {
  const std::vector<std::int32_t> s{1, 2};
  const std::vector<std::uint32_t> l{0};
  EXPECT_THROW(encode_symbols(s, l, standard_cdf_table()), ShapeError);
}

// Splitting one sequence into k independently coded streams costs at most
// the k - 1 extra state flushes.
TEST(Rans, SplitStreamOverheadIsBounded) {
  const CdfTable& t = standard_cdf_table();
  const auto syms = gaussian_symbols(40000, 2.0, 9);
  const std::vector<std::uint32_t> levels(syms.size(), 28);
  const std::size_t whole = encode_symbols(syms, levels, t).size();
  std::size_t parts = 0;
  const std::size_t k = 4;
  const std::size_t per = syms.size() / k;
  for (std::size_t p = 0; p < k; ++p) {
    const std::span<const std::int32_t> s(syms.data() + p * per, per);
    const std::span<const std::uint32_t> l(levels.data() + p * per, per);
    parts += encode_symbols(s, l, t).size();
  }
  EXPECT_LE(parts, whole + 4 * (k - 1) + k);
  EXPECT_GE(parts + k, whole);
}

}  // namespace
}  // namespace plc
