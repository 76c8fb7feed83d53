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

#include <vector>

#include "plc/error.hpp"
#include "plc/masking.hpp"
#include "plc/random.hpp"

namespace plc {
namespace {

Tensor row(std::vector<float> v) {
  const std::size_t n = v.size();
  return Tensor({1, 1, n}, std::move(v));
}

std::vector<std::uint8_t> bits(const Mask& m) { return m.bits; }

using Bits = std::vector<std::uint8_t>;

TEST(Quality, Range) {
  EXPECT_NO_THROW(Quality(0));
  EXPECT_NO_THROW(Quality(100));
  EXPECT_THROW(Quality(-0.1), QualityError);
  EXPECT_THROW(Quality(100.5), QualityError);
  EXPECT_LT(Quality(7.5), Quality(20));
}

TEST(Percentile, Examples) {
  const std::vector<float> v{4, 2, 1, 3};
  EXPECT_EQ(percentile(v, 0), 1.0);
  EXPECT_EQ(percentile(v, 100), 4.0);
  EXPECT_EQ(percentile(v, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 25), 1.75);
}

TEST(Percentile, Errors) {
  EXPECT_THROW(percentile(std::vector<float>{}, 50), Error);
  EXPECT_THROW(percentile(std::vector<float>{1}, 101), Error);
}

TEST(SigmaMask, Examples) {
  const Tensor s = row({1, 2, 3, 4});
  EXPECT_EQ(bits(sigma_mask(s, Quality(100))), (Bits{1, 1, 1, 1}));
  EXPECT_EQ(bits(sigma_mask(s, Quality(50))), (Bits{0, 0, 1, 1}));
  EXPECT_EQ(bits(sigma_mask(s, Quality(0))), (Bits{0, 0, 0, 1}));
}

TEST(SigmaMask, UnorderedInput) {
  const Tensor s = row({3, 1, 4, 2});
  EXPECT_EQ(bits(sigma_mask(s, Quality(50))), (Bits{1, 0, 1, 0}));
}

TEST(DeltaMask, Examples) {
  const Tensor s = row({1, 2, 3, 4});
  EXPECT_EQ(bits(delta_mask(s, Quality(50), Quality(100))), (Bits{1, 1, 0, 0}));
  EXPECT_EQ(bits(delta_mask(s, Quality(0), Quality(100))), (Bits{1, 1, 1, 0}));
}

TEST(DeltaMask, RejectsNonIncreasing) {
  const Tensor s = row({1, 2});
  EXPECT_THROW(delta_mask(s, Quality(50), Quality(50)), QualityError);
  EXPECT_THROW(delta_mask(s, Quality(60), Quality(50)), QualityError);
}

TEST(MaskDifference, RejectsNonSubset) {
  Mask a(Shape{1, 1, 2}), b(Shape{1, 1, 2});
  b.bits = {1, 0};
  EXPECT_THROW(mask_difference(a, b), Error);
}

TEST(QuantizeResidual, Examples) {
  const Tensor r = row({2.7f, -1.3f, 0.5f});
  const Tensor mu = row({1.2f, 0.4f, 0.0f});
  Mask none(r.shape());
  const auto a = quantize_residual(r, mu, none);
  EXPECT_EQ(a.symbols, (std::vector<std::int32_t>{0, 0, 0}));
  EXPECT_TRUE(bit_equal(a.values, mu));

  Mask all(r.shape(), 1);
  const auto b = quantize_residual(r, mu, all);
  EXPECT_EQ(b.symbols[0], 2);
  EXPECT_FLOAT_EQ(b.values[0], 3.2f);
  EXPECT_EQ(b.symbols[1], -2);  // round(-1.7)

  const auto c = quantize_residual(r, Tensor(r.shape()), all);
  EXPECT_EQ(c.symbols, (std::vector<std::int32_t>{3, -1, 1}));  // half away
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.values[i], static_cast<float>(c.symbols[i]));
  }
}

TEST(QuantizeResidual, Errors) {
  const Tensor r = row({1, 2});
  Mask m(r.shape());
  m.bits[1] = 2;
  EXPECT_THROW(quantize_residual(r, r, m), Error);
  EXPECT_THROW(quantize_residual(r, row({1, 2, 3}), Mask(r.shape())), ShapeError);
}

TEST(QuantizeResidual, Idempotent) {
  Rng rng(1);
  Tensor r({2, 4, 4}), mu({2, 4, 4});
  for (float& v : r.data()) v = static_cast<float>(rng.normal() * 3.0);
  for (float& v : mu.data()) v = static_cast<float>(rng.uniform(-1, 1));
  Mask m(r.shape());
  for (auto& b : m.bits) b = rng.next() % 2;
  const auto once = quantize_residual(r, mu, m);
  const auto twice = quantize_residual(once.values, mu, m);
  EXPECT_EQ(once.symbols, twice.symbols);
}

class MaskProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(MaskProperties, FamilyLaws) {
  Rng rng(GetParam());
  const std::size_t n = 1 + rng.next() % 300;
  Tensor s({1, 1, n});
  // Ties are common in practice (clamped sigmas), so draw from a coarse grid
  // half of the time.
  const bool coarse = rng.next() % 2 == 0;
  for (float& v : s.data()) {
    v = coarse ? static_cast<float>(1 + rng.next() % 5)
               : static_cast<float>(std::exp(rng.uniform(-3, 5)));
  }
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(10.0 * k);
  std::vector<Mask> masks;
  for (double q : grid) masks.push_back(sigma_mask(s, Quality(q)));

  EXPECT_EQ(masks.back().count(), n);
  EXPECT_GE(masks.front().count(), 1u);
  for (std::size_t k = 1; k < masks.size(); ++k) {
    EXPECT_GE(masks[k].count(), masks[k - 1].count());
    for (std::size_t e = 0; e < n; ++e) {
      EXPECT_LE(masks[k - 1][e], masks[k][e]);
    }
  }
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const Mask d = delta_mask(s, Quality(grid[a]), Quality(grid[b]));
      for (std::size_t e = 0; e < n; ++e) {
        // Complementary support: the delta plus the lower mask is the upper.
        EXPECT_EQ(d[e] + masks[a][e], masks[b][e]);
      }
      for (std::size_t c = b + 1; c < grid.size(); ++c) {
        const Mask ab = delta_mask(s, Quality(grid[a]), Quality(grid[b]));
        const Mask bc = delta_mask(s, Quality(grid[b]), Quality(grid[c]));
        const Mask ac = delta_mask(s, Quality(grid[a]), Quality(grid[c]));
        for (std::size_t e = 0; e < n; ++e) {
          EXPECT_EQ(ab[e] + bc[e], ac[e]);
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(RandomSigmas, MaskProperties,
                         ::testing::Range<std::uint64_t>(0, 40));

}  // namespace
}  // namespace plc
