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
#include <vector>

#include "plc/plc.hpp"
#include "test_util.hpp"

namespace plc {
namespace {

using testing::latents_of;
using testing::random_image;
using testing::seed0_weights;

struct Fixture {
  testing::Latents lat = latents_of(random_image(64, 64, 77), seed0_weights());
  BaseResult base = run_base(lat.y_base, lat.hyper, seed0_weights());
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

TopResult top_at(double q, const RemPlan& plan) {
  return run_top(fx().lat.y_top, fx().base, fx().lat.hyper, Quality(q),
                 seed0_weights(), plan);
}

TopResult top_at(double q) {
  return top_at(q, RemPlan::from_arch(seed0_weights().arch()));
}

TEST(Base, ZeroWeightsZeroLatentGiveZeroSymbols) {
  ModelWeights w = seed0_weights();
  for (const Blob& b : seed0_weights().blobs()) {
    if (b.name != kZPriorBlob) testing::zero_blobs(w, b.name);
  }
  const Tensor y({32, 4, 4});
  const HyperParams h = hyper_synthesis(Tensor({8, 1, 1}), w);
  const PceemTrace t = run_pceem(y, y, h, Quality(100), w, RemPlan::from_arch(w.arch()));
  for (const auto& s : t.base.symbols) {
    for (auto v : s) EXPECT_EQ(v, 0);
  }
  ASSERT_TRUE(t.top.has_value());
  for (const auto& s : t.top->symbols) {
    for (auto v : s) EXPECT_EQ(v, 0);
  }
}

TEST(Base, ReconstructionWithinHalfPlusLrp) {
  const auto slices = channel_split(fx().lat.y_base, 4);
  const auto hat = channel_split(fx().base.y_hat, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t e = 0; e < hat[i].size(); ++e) {
      EXPECT_LE(std::abs(hat[i][e] - slices[i][e]), 1.0f + 1e-4f);
    }
  }
}

TEST(Top, RequiresPositiveQuality) {
  EXPECT_THROW(top_at(0), QualityError);
}

TEST(Top, FullQualityCodesEverything) {
  const TopResult r = top_at(100);
  for (const Mask& m : r.masks) EXPECT_EQ(m.count(), m.size());
}

TEST(Top, ParamsIndependentOfQuality) {
  const TopResult a = top_at(0.5), b = top_at(10), c = top_at(100);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(bit_equal(a.params[i].mu, b.params[i].mu));
    EXPECT_TRUE(bit_equal(a.params[i].mu, c.params[i].mu));
    EXPECT_TRUE(bit_equal(a.params[i].sigma, b.params[i].sigma));
    EXPECT_TRUE(bit_equal(a.params[i].sigma, c.params[i].sigma));
  }
}

TEST(Top, MaskedElementsCarryTheMean) {
  const ModelWeights& w = seed0_weights();
  const TopResult r = top_at(10);
  const auto base = channel_split(fx().base.y_hat, 4);
  const auto yq = channel_split(r.y_hat, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Mask& m = r.masks[i];
    ASSERT_GT(m.count(), 0u);
    ASSERT_LT(m.count(), m.size());
    Tensor pre(m.shape);
    for (std::size_t e = 0; e < m.size(); ++e) {
      pre[e] = m[e] ? static_cast<float>(r.symbols[i][e]) + r.coding_params[i].mu[e]
                    : r.params[i].mu[e];
    }
    const Tensor corr = lrp(i, Stream::kTop, fx().lat.hyper.mu_top, pre, w);
    const Tensor expect = add(base[i], add(pre, corr));
    EXPECT_TRUE(bit_equal(yq[i], expect)) << "slice " << i;
  }
}

TEST(Top, RemRefinesOnlyAboveFirstCheckpoint) {
  const TopResult r = top_at(100);
  const float first = seed0_weights().arch().checkpoints.front();
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Mask low = sigma_mask(r.params[i].sigma, Quality(first));
    for (std::size_t e = 0; e < low.size(); ++e) {
      const bool same = r.coding_params[i].mu[e] == r.params[i].mu[e] &&
                        r.coding_params[i].sigma[e] == r.params[i].sigma[e];
      if (low[e]) {
        EXPECT_TRUE(same);
      } else if (!same) {
        ++changed;
      }
    }
  }
  EXPECT_GT(changed, 0u);
}

TEST(Top, NoRemPlanEqualsZeroRemWeights) {
  ModelWeights w = seed0_weights();
  testing::zero_blobs(w, "rem.");
  const auto& l = fx().lat;
  const BaseResult base = run_base(l.y_base, l.hyper, w);
  const TopResult a = run_top(l.y_top, base, l.hyper, Quality(60), w,
                              RemPlan::from_arch(w.arch()));
  const TopResult b = run_top(l.y_top, base, l.hyper, Quality(60), w,
                              RemPlan::none());
  EXPECT_TRUE(bit_equal(a.y_hat, b.y_hat));
  EXPECT_EQ(a.symbols, b.symbols);
}

TEST(TopSliceCoder, StepwiseEqualsDirect) {
  const ModelWeights& w = seed0_weights();
  const auto& l = fx().lat;
  const auto params = top_params(fx().base.y_hat, l.hyper, w);
  const RemPlan plan = RemPlan::from_arch(w.arch());
  const auto residual = channel_split(subtract(l.y_top, fx().base.y_hat), 4);
  auto direct = make_top_coders(w, plan, fx().base.y_hat, fx().base, params, l.hyper);
  auto steps = make_top_coders(w, plan, fx().base.y_hat, fx().base, params, l.hyper);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<std::int32_t> s;
    std::vector<std::uint32_t> lv;
    direct[i].advance_encode(100, residual[i], s, lv);
    std::size_t total = 0;
    for (float q : {0.5f, 3.0f, 7.5f, 20.0f, 55.0f, 100.0f}) {
      std::vector<std::int32_t> s2;
      std::vector<std::uint32_t> lv2;
      steps[i].advance_encode(q, residual[i], s2, lv2);
      total += s2.size();
    }
    EXPECT_EQ(total, s.size());
    EXPECT_TRUE(bit_equal(direct[i].y_hat(), steps[i].y_hat()));
    EXPECT_TRUE(bit_equal(direct[i].effective_mu(), steps[i].effective_mu()));
  }
  std::vector<std::int32_t> s;
  std::vector<std::uint32_t> lv;
  EXPECT_THROW(steps[0].advance_encode(50, residual[0], s, lv), QualityError);
}

TEST(TopSliceCoder, DecodeMatchesEncode) {
  const ModelWeights& w = seed0_weights();
  const auto& l = fx().lat;
  const auto params = top_params(fx().base.y_hat, l.hyper, w);
  const RemPlan plan = RemPlan::from_arch(w.arch());
  const auto residual = channel_split(subtract(l.y_top, fx().base.y_hat), 4);
  auto enc = make_top_coders(w, plan, fx().base.y_hat, fx().base, params, l.hyper);
  auto dec = make_top_coders(w, plan, fx().base.y_hat, fx().base, params, l.hyper);
  for (float q : {7.5f, 30.0f}) {
    std::vector<std::int32_t> s;
    std::vector<std::uint32_t> lv;
    enc[2].advance_encode(q, residual[2], s, lv);
    const auto bytes = encode_symbols(s, lv, standard_cdf_table());
    RansDecoder d(bytes, standard_cdf_table());
    dec[2].advance_decode(q, d);
    d.finish();
    EXPECT_TRUE(bit_equal(enc[2].y_hat(), dec[2].y_hat()));
  }
}

TEST(EntropyEstimate, EmptyMaskIsZero) {
  const Tensor sigma({1, 4, 4}, 1.0f);
  const std::vector<std::int32_t> syms(16, 3);
  EXPECT_EQ(entropy_estimate(syms, sigma, Mask(sigma.shape())), 0.0);
}

TEST(EntropyEstimate, ZerosAtMinimumSigma) {
  const Tensor sigma({1, 4, 4}, 0.01f);
  const std::vector<std::int32_t> syms(16, 0);
  Mask m(sigma.shape());
  for (std::size_t e = 0; e < 16; e += 3) m.bits[e] = 1;
  const CdfTable& t = standard_cdf_table();
  const auto row = t.cdf(0);
  const double p0 = (row[t.tail() + 1] - row[t.tail()]) / 65536.0;
  EXPECT_NEAR(entropy_estimate(syms, sigma, m),
              static_cast<double>(m.count()) * -std::log2(p0), 1e-12);
}

TEST(EntropyEstimate, TracksRealizedLength) {
  Rng rng(5);
  Tensor sigma({1, 100, 100});
  std::vector<std::int32_t> syms(sigma.size());
  for (std::size_t e = 0; e < sigma.size(); ++e) {
    sigma[e] = static_cast<float>(std::exp(rng.uniform(-2, 3)));
    syms[e] = static_cast<std::int32_t>(std::round(rng.normal() * sigma[e]));
  }
  const Mask m = sigma_mask(sigma, Quality(70));
  std::vector<std::int32_t> coded;
  std::vector<std::uint32_t> levels;
  for (std::size_t e = 0; e < m.size(); ++e) {
    if (!m[e]) continue;
    coded.push_back(syms[e]);
    levels.push_back(quantize_scale(sigma[e], standard_scale_table()));
  }
  const double est = entropy_estimate(syms, sigma, m);
  const double real =
      8.0 * static_cast<double>(encode_symbols(coded, levels, standard_cdf_table()).size());
  EXPECT_LE(std::abs(real - est), 0.02 * est + 128.0);
}

TEST(EntropyEstimate, ShapeMismatch) {
  const Tensor sigma({1, 2, 2}, 1.0f);
  const std::vector<std::int32_t> syms(3, 0);
  EXPECT_THROW(entropy_estimate(syms, sigma, Mask(sigma.shape())), ShapeError);
}

}  // namespace
}  // namespace plc
