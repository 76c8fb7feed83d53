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

// Distortion metrics and Bjontegaard deltas between rate-distortion curves.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "plc/error.hpp"
#include "plc/tensor.hpp"

namespace plc {

inline double mse(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mse: shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()) + " differ");
  }
  if (a.empty()) throw ShapeError("mse of empty tensors");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

// Peak value 1. Infinite for identical images.
inline double psnr_from_mse(double m) {
  if (m <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

struct RDPoint {
  double bpp = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
};

using RDCurve = std::vector<RDPoint>;

struct BDResult {
  double bd_rate = 0.0;  // percent
  double bd_psnr = 0.0;  // dB
};

// Akima piecewise-cubic interpolant through (x_i, y_i), x strictly
// increasing, with an exact integral over any sub-interval of its range.
class AkimaSpline {
 public:
  AkimaSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
      throw Error("Akima spline needs at least two (x, y) pairs");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) {
        throw Error("Akima spline abscissae must be strictly increasing");
      }
    }
    // Secant slopes padded with two extrapolated slopes on each side.
    std::vector<double> m(n + 3);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      m[i + 2] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    if (n == 2) {
      m[1] = m[0] = m[3] = m[4] = m[2];
    } else {
      m[1] = 2.0 * m[2] - m[3];
      m[0] = 2.0 * m[1] - m[2];
      m[n + 1] = 2.0 * m[n] - m[n - 1];
      m[n + 2] = 2.0 * m[n + 1] - m[n];
    }
    t_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Point i sits between slopes m[i+1] (left) and m[i+2] (right).
      const double w1 = std::abs(m[i + 3] - m[i + 2]);
      const double w2 = std::abs(m[i + 1] - m[i]);
      t_[i] = (w1 + w2 == 0.0) ? 0.5 * (m[i + 1] + m[i + 2])
                               : (w1 * m[i + 1] + w2 * m[i + 2]) / (w1 + w2);
    }
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  double integrate(double a, double b) const {
    if (a > b) return -integrate(b, a);
    if (a < lo() || b > hi()) throw Error("integration bounds outside the spline");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double s0 = std::max(a, x_[i]);
      const double s1 = std::min(b, x_[i + 1]);
      if (s1 <= s0) continue;
      total += antiderivative(i, s1 - x_[i]) - antiderivative(i, s0 - x_[i]);
    }
    return total;
  }

  double operator()(double x) const {
    std::size_t i = 0;
    while (i + 2 < x_.size() && x > x_[i + 1]) ++i;
    const double d = x - x_[i];
    const auto [c2, c3] = coeffs(i);
    return y_[i] + t_[i] * d + c2 * d * d + c3 * d * d * d;
  }

 private:
  std::pair<double, double> coeffs(std::size_t i) const {
    const double h = x_[i + 1] - x_[i];
    const double m = (y_[i + 1] - y_[i]) / h;
    return {(3.0 * m - 2.0 * t_[i] - t_[i + 1]) / h,
            (t_[i] + t_[i + 1] - 2.0 * m) / (h * h)};
  }

  double antiderivative(std::size_t i, double d) const {
    const auto [c2, c3] = coeffs(i);
    const double d2 = d * d;
    return y_[i] * d + t_[i] * d2 / 2.0 + c2 * d2 * d / 3.0 + c3 * d2 * d2 / 4.0;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> t_;
};

namespace detail {

inline void check_curve(const RDCurve& c, const char* which) {
  if (c.size() < 4) {
    throw Error(std::string(which) + " RD curve needs at least 4 points, has " +
                std::to_string(c.size()));
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i].bpp > 0.0) || !std::isfinite(c[i].psnr)) {
      throw Error(std::string(which) + " RD curve has a non-positive rate or "
                                       "non-finite PSNR");
    }
    if (i > 0 && !(c[i].bpp > c[i - 1].bpp)) {
      throw Error(std::string(which) + " RD curve rates must be strictly increasing");
    }
  }
}

// Mean vertical gap test - reference over the overlap of the two abscissa
// ranges.
inline double mean_gap(std::vector<double> xr, std::vector<double> yr,
                       std::vector<double> xt, std::vector<double> yt,
                       const char* what) {
  auto sort_pairs = [](std::vector<double>& x, std::vector<double>& y) {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs, ys;
    for (auto i : idx) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    x = std::move(xs);
    y = std::move(ys);
  };
  sort_pairs(xr, yr);
  sort_pairs(xt, yt);
  const AkimaSpline ref(std::move(xr), std::move(yr));
  const AkimaSpline test(std::move(xt), std::move(yt));
  const double lo = std::max(ref.lo(), test.lo());
  const double hi = std::min(ref.hi(), test.hi());
  if (!(hi > lo)) {
    throw Error(std::string("RD curves do not overlap in ") + what);
  }
  return (test.integrate(lo, hi) - ref.integrate(lo, hi)) / (hi - lo);
}

}  // namespace detail

// BD-rate: mean log2-rate gap over the shared PSNR range, as a percentage.
// BD-PSNR: mean PSNR gap over the shared log2-rate range. Positive bd_rate
// means the test curve needs more bits.
inline BDResult bd_metrics(const RDCurve& reference, const RDCurve& test) {
  detail::check_curve(reference, "reference");
  detail::check_curve(test, "test");
  auto column = [](const RDCurve& c, bool log_rate) {
    std::vector<double> v;
    for (const RDPoint& p : c) v.push_back(log_rate ? std::log2(p.bpp) : p.psnr);
    return v;
  };
  BDResult r;
  const double rate_gap =
      detail::mean_gap(column(reference, false), column(reference, true),
                       column(test, false), column(test, true), "PSNR");
  r.bd_rate = (std::exp2(rate_gap) - 1.0) * 100.0;
  r.bd_psnr =
      detail::mean_gap(column(reference, true), column(reference, false),
                       column(test, true), column(test, false), "rate");
  return r;
}

}  // namespace plc
