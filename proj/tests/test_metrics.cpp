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
#include <limits>
#include <vector>

#include "plc/metrics.hpp"

namespace plc {
namespace {

// Smooth, concave RD curve with slightly uneven spacing.
RDCurve reference_curve() {
  RDCurve c;
  for (double bpp : {0.1, 0.23, 0.41, 0.8, 1.3, 2.1}) {
    c.push_back({bpp, 0.0, 24.0 + 6.5 * std::log2(bpp) - 0.3 * std::log2(bpp) * std::log2(bpp)});
  }
  return c;
}

TEST(Mse, BasicsAndPsnr) {
  const Tensor a({1, 1, 4}, std::vector<float>{0, 0, 0, 0});
  const Tensor b({1, 1, 4}, std::vector<float>{0.1f, -0.1f, 0.1f, -0.1f});
  EXPECT_NEAR(mse(a, b), 0.01, 1e-9);
  EXPECT_NEAR(psnr_from_mse(0.01), 20.0, 1e-12);
  EXPECT_EQ(psnr_from_mse(0.0), std::numeric_limits<double>::infinity());
  EXPECT_THROW(mse(a, Tensor({1, 1, 3})), ShapeError);
}

TEST(Akima, ReproducesLinesAndIntegratesExactly) {
  const AkimaSpline s({0, 1, 2.5, 4, 7}, {1, 3, 6, 9, 15});
  EXPECT_NEAR(s(1.7), 1 + 2 * 1.7, 1e-12);
  EXPECT_NEAR(s.integrate(0, 7), 7 + 49, 1e-9);
  EXPECT_NEAR(s.integrate(0.5, 3), (3 + 9) - (0.5 + 0.25), 1e-9);
  EXPECT_THROW(s.integrate(-1, 2), Error);
  EXPECT_THROW(AkimaSpline({0, 0, 1}, {1, 2, 3}), Error);
}

TEST(Akima, InterpolatesKnots) {
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  const std::vector<double> y{0, 1, 0, 2, 2, 5};
  const AkimaSpline s(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(s(x[i]), y[i], 1e-12);
}

TEST(Bd, IdentityIsExactlyZero) {
  const BDResult r = bd_metrics(reference_curve(), reference_curve());
  EXPECT_EQ(r.bd_rate, 0.0);
  EXPECT_EQ(r.bd_psnr, 0.0);
}

TEST(Bd, DoubledRateIsPlusHundredPercent) {
  RDCurve test = reference_curve();
  for (RDPoint& p : test) p.bpp *= 2.0;
  EXPECT_NEAR(bd_metrics(reference_curve(), test).bd_rate, 100.0, 1e-9);
}

TEST(Bd, PlusOneDecibel) {
  RDCurve test = reference_curve();
  for (RDPoint& p : test) p.psnr += 1.0;
  const BDResult r = bd_metrics(reference_curve(), test);
  EXPECT_NEAR(r.bd_psnr, 1.0, 1e-9);
  EXPECT_LT(r.bd_rate, 0.0);
}

TEST(Bd, Antisymmetric) {
  const RDCurve a = reference_curve();
  RDCurve b;
  for (const RDPoint& p : a) b.push_back({p.bpp * 1.3, 0.0, p.psnr + 0.4 * std::sin(p.bpp)});
  EXPECT_NEAR(bd_metrics(a, b).bd_psnr, -bd_metrics(b, a).bd_psnr, 1e-6);
}

TEST(Bd, Errors) {
  RDCurve few = reference_curve();
  few.resize(3);
  EXPECT_THROW(bd_metrics(few, reference_curve()), Error);
  RDCurve unsorted = reference_curve();
  std::swap(unsorted[1], unsorted[2]);
  EXPECT_THROW(bd_metrics(unsorted, reference_curve()), Error);
  RDCurve far = reference_curve();
  for (RDPoint& p : far) {
    p.bpp *= 1000.0;
    p.psnr += 100.0;
  }
  EXPECT_THROW(bd_metrics(reference_curve(), far), Error);
}

}  // namespace
}  // namespace plc
