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

// Progressive channel-wise entropy estimation.
//
// Base stream: slices are processed in order; slice i gets (mu, sigma) from
// psi_base over the hyper output and the already reconstructed slices < i,
// is quantized around mu and corrected by lrp.
//
// Top stream: the residual r_i = y_i^t - y_hat_i^b is coded against
// (mu_i^t, sigma_i^t) from psi_top. Those parameters never depend on the
// target quality. A quality q codes the residual elements selected by
// sigma_mask(sigma_i^t, q); the others carry mu_i^t.
//
// Checkpoints c_1 < ... < c_K split (0, 100] into subranges
// (0, c_1], (c_1, c_2], ..., (c_K, 100]. Elements whose mask entry quality
// falls in (c_j, c_j+1] are coded with parameters refined by REM_i^{c_j},
// which is evaluated on the slice reconstruction at exactly quality c_j. An
// element's coding parameters therefore depend only on the element, never on
// how the decoder got there, which is what makes stepwise and direct
// decoding agree bit for bit.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plc/error.hpp"
#include "plc/masking.hpp"
#include "plc/rans.hpp"
#include "plc/tensor.hpp"
#include "plc/transforms.hpp"
#include "plc/weights.hpp"

namespace plc {

struct SliceParams {
  std::size_t index = 0;
  Stream stream = Stream::kBase;
  Tensor mu;
  Tensor sigma;
};

// Checkpoint qualities whose REMs are applied, ascending.
struct RemPlan {
  std::vector<float> checkpoints;

  static RemPlan none() { return {}; }
  static RemPlan from_arch(const ArchConfig& arch) {
    return {arch.checkpoints};
  }
};

// Masks of the monotone family with the convention that "nothing coded yet"
// (quality 0 on the top stream) is the empty mask.
inline Mask coded_mask(const Tensor& sigma, float q) {
  if (q <= 0.0f) return Mask(sigma.shape());
  return sigma_mask(sigma, Quality(q));
}

struct BaseResult {
  Tensor y_hat;
  std::vector<SliceParams> params;
  std::vector<std::vector<std::int32_t>> symbols;
};

// Shared by encoder and decoder: symbols_for(i, params) yields slice i's
// symbols, either by quantizing the latent or by reading a stream.
inline BaseResult base_pipeline(
    const HyperParams& hyper, const ModelWeights& w,
    const std::function<std::vector<std::int32_t>(std::size_t,
                                                  const EntropyParams&)>&
        symbols_for) {
  const ArchConfig& a = w.arch();
  BaseResult out;
  std::vector<Tensor> done;
  for (std::size_t i = 0; i < a.slices; ++i) {
    const Tensor prev = done.empty() ? Tensor() : channel_concat(done);
    EntropyParams p = psi_base(i, hyper.mu_base, hyper.sigma_base, prev, w);
    std::vector<std::int32_t> syms = symbols_for(i, p);
    if (syms.size() != p.mu.size()) {
      throw ShapeError("base slice " + std::to_string(i) + ": " +
                       std::to_string(syms.size()) + " symbols for " +
                       std::to_string(p.mu.size()) + " elements");
    }
    Tensor q(p.mu.shape());
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = static_cast<float>(syms[k]) + p.mu[k];
    }
    const Tensor corr = lrp(i, Stream::kBase, hyper.mu_base, q, w);
    done.push_back(add(q, corr));
    out.params.push_back({i, Stream::kBase, std::move(p.mu), std::move(p.sigma)});
    out.symbols.push_back(std::move(syms));
  }
  out.y_hat = channel_concat(done);
  return out;
}

inline BaseResult run_base(const Tensor& y_base, const HyperParams& hyper,
                           const ModelWeights& w) {
  if (y_base.shape() != hyper.mu_base.shape()) {
    throw ShapeError("run_base: latent " + to_string(y_base.shape()) +
                     " vs hyper output " + to_string(hyper.mu_base.shape()));
  }
  const auto slices = channel_split(y_base, w.arch().slices);
  return base_pipeline(hyper, w, [&](std::size_t i, const EntropyParams& p) {
    std::vector<std::int32_t> s(p.mu.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = round_symbol(slices[i][k] - p.mu[k]);
    }
    return s;
  });
}

// Quality-independent top parameters for every slice.
inline std::vector<SliceParams> top_params(const Tensor& y_hat_base,
                                           const HyperParams& hyper,
                                           const ModelWeights& w) {
  const ArchConfig& a = w.arch();
  const auto base_slices = channel_split(y_hat_base, a.slices);
  std::vector<SliceParams> out;
  std::vector<Tensor> mus, sigmas;
  for (std::size_t i = 0; i < a.slices; ++i) {
    const Tensor prev_mu = mus.empty() ? Tensor() : channel_concat(mus);
    const Tensor prev_sigma = sigmas.empty() ? Tensor() : channel_concat(sigmas);
    EntropyParams p = psi_top(i, base_slices[i], hyper.mu_top, hyper.sigma_top,
                              prev_mu, prev_sigma, w);
    mus.push_back(p.mu);
    sigmas.push_back(p.sigma);
    out.push_back({i, Stream::kTop, std::move(p.mu), std::move(p.sigma)});
  }
  return out;
}

// Progressive state of one top slice. Starts with nothing coded (every
// element at mu) and advances monotonically through qualities.
class TopSliceCoder {
 public:
  TopSliceCoder(std::size_t index, const ModelWeights& w, RemPlan plan,
                Tensor y_hat_base, SliceParams base, SliceParams top,
                Tensor lrp_context)
      : index_(index),
        weights_(&w),
        plan_(std::move(plan)),
        y_hat_base_(std::move(y_hat_base)),
        base_{std::move(base.mu), std::move(base.sigma)},
        top_{std::move(top.mu), std::move(top.sigma)},
        lrp_context_(std::move(lrp_context)),
        residual_hat_(top_.mu),
        mu_eff_(top_.mu),
        sigma_eff_(top_.sigma),
        coded_(top_.mu.shape()),
        refined_(plan_.checkpoints.size(), false) {
    for (std::size_t j = 0; j < plan_.checkpoints.size(); ++j) {
      if (!(plan_.checkpoints[j] > 0.0f && plan_.checkpoints[j] < 100.0f) ||
          (j > 0 && !(plan_.checkpoints[j] > plan_.checkpoints[j - 1]))) {
        throw Error("REM plan checkpoints must be increasing within (0, 100)");
      }
    }
  }

  float current() const { return current_; }
  const Mask& coded() const { return coded_; }
  const Tensor& residual_hat() const { return residual_hat_; }
  const Tensor& mu() const { return top_.mu; }
  const Tensor& sigma() const { return top_.sigma; }
  // Parameters used to code each element (REM-refined where applicable).
  const Tensor& effective_mu() const { return mu_eff_; }
  const Tensor& effective_sigma() const { return sigma_eff_; }

  // Residual with the LRP correction applied.
  Tensor corrected_residual() const {
    return add(residual_hat_,
               lrp(index_, Stream::kTop, lrp_context_, residual_hat_, *weights_));
  }

  // y_hat_i^q = y_hat_i^b + corrected residual.
  Tensor y_hat() const { return add(y_hat_base_, corrected_residual()); }

  // Encoder: codes the elements gained from current() to `to`, appending
  // their symbols and scale levels in coding order.
  void advance_encode(float to, const Tensor& residual,
                      std::vector<std::int32_t>& symbols,
                      std::vector<std::uint32_t>& levels) {
    if (residual.shape() != top_.mu.shape()) {
      throw ShapeError("residual " + to_string(residual.shape()) +
                       " vs slice " + to_string(top_.mu.shape()));
    }
    advance(to, [&](std::size_t k, std::uint32_t level) {
      const std::int32_t s = round_symbol(residual[k] - mu_eff_[k]);
      symbols.push_back(s);
      levels.push_back(level);
      return s;
    });
  }

  // Decoder: same traversal, symbols pulled from the stream.
  void advance_decode(float to, RansDecoder& dec) {
    advance(to, [&](std::size_t, std::uint32_t level) { return dec.get(level); });
  }

 private:
  // Boundaries 0 = c_0 < c_1 < ... < c_K < c_{K+1} = 100.
  float boundary(std::size_t k) const {
    if (k == 0) return 0.0f;
    if (k > plan_.checkpoints.size()) return 100.0f;
    return plan_.checkpoints[k - 1];
  }

  template <class SymbolFn>
  void advance(float to, SymbolFn&& symbol_for) {
    if (!(to > current_) || to > 100.0f) {
      throw QualityError("top slice cannot advance from q=" +
                         std::to_string(current_) +
                         " to q=" + std::to_string(to));
    }
    const std::size_t subranges = plan_.checkpoints.size() + 1;
    for (std::size_t k = 0; k < subranges; ++k) {
      const float lo = std::max(current_, boundary(k));
      const float hi = std::min(to, boundary(k + 1));
      if (!(hi > lo)) continue;
      if (k > 0) refine(k - 1);
      const Mask gained = mask_difference(coded_mask(top_.sigma, hi),
                                          coded_mask(top_.sigma, lo));
      const ScaleTable& scales = standard_scale_table();
      for (std::size_t e = 0; e < gained.size(); ++e) {
        if (!gained[e]) continue;
        const std::uint32_t level = quantize_scale(sigma_eff_[e], scales);
        const std::int32_t s = symbol_for(e, level);
        residual_hat_[e] = static_cast<float>(s) + mu_eff_[e];
      }
      coded_ = coded_mask(top_.sigma, hi);
      current_ = hi;
    }
  }

  // Applies REM_i^{c_j} to the elements entering in (c_j, c_{j+1}]. Runs the
  // first time the state passes c_j, when exactly the elements up to c_j are
  // coded.
  void refine(std::size_t j) {
    if (refined_[j]) return;
    const float cj = plan_.checkpoints[j];
    if (current_ != cj) {
      throw Error("internal: REM " + std::to_string(cj) +
                  " evaluated at q=" + std::to_string(current_));
    }
    const EntropyParams r =
        rem(index_, Quality(cj), y_hat(), base_, top_, *weights_);
    const Mask region = mask_difference(coded_mask(top_.sigma, boundary(j + 2)),
                                        coded_mask(top_.sigma, cj));
    for (std::size_t e = 0; e < region.size(); ++e) {
      if (!region[e]) continue;
      mu_eff_[e] = r.mu[e];
      sigma_eff_[e] = r.sigma[e];
    }
    refined_[j] = true;
  }

  std::size_t index_;
  const ModelWeights* weights_;
  RemPlan plan_;
  Tensor y_hat_base_;
  EntropyParams base_;
  EntropyParams top_;
  Tensor lrp_context_;
  Tensor residual_hat_;
  Tensor mu_eff_;
  Tensor sigma_eff_;
  Mask coded_;
  float current_ = 0.0f;
  std::vector<bool> refined_;
};

inline std::vector<TopSliceCoder> make_top_coders(
    const ModelWeights& w, const RemPlan& plan, const Tensor& y_hat_base,
    const BaseResult& base, const std::vector<SliceParams>& top,
    const HyperParams& hyper) {
  const auto base_slices = channel_split(y_hat_base, w.arch().slices);
  std::vector<TopSliceCoder> coders;
  for (std::size_t i = 0; i < w.arch().slices; ++i) {
    coders.emplace_back(i, w, plan, base_slices[i], base.params[i], top[i],
                        hyper.mu_top);
  }
  return coders;
}

struct TopResult {
  Tensor y_hat;
  std::vector<SliceParams> params;        // psi_top output, quality independent
  std::vector<SliceParams> coding_params;  // after REM refinement
  std::vector<Mask> masks;
  // Per slice, full slice length: round(r - mu_eff) on the mask, 0 elsewhere.
  std::vector<std::vector<std::int32_t>> symbols;
  std::vector<Tensor> residual_hat;  // after LRP
};

inline TopResult run_top(const Tensor& y_top, const BaseResult& base,
                         const HyperParams& hyper, Quality q,
                         const ModelWeights& w, const RemPlan& plan) {
  if (q.value() <= 0.0f) {
    throw QualityError("run_top requires q > 0; q = 0 is the base layer");
  }
  const ArchConfig& a = w.arch();
  if (y_top.shape() != base.y_hat.shape()) {
    throw ShapeError("run_top: top latent " + to_string(y_top.shape()) +
                     " vs base " + to_string(base.y_hat.shape()));
  }
  TopResult out;
  out.params = top_params(base.y_hat, hyper, w);
  auto coders = make_top_coders(w, plan, base.y_hat, base, out.params, hyper);
  const auto y_slices = channel_split(y_top, a.slices);
  const auto b_slices = channel_split(base.y_hat, a.slices);
  std::vector<Tensor> y_hat_slices;
  for (std::size_t i = 0; i < a.slices; ++i) {
    const Tensor residual = subtract(y_slices[i], b_slices[i]);
    std::vector<std::int32_t> coded_syms;
    std::vector<std::uint32_t> levels;
    coders[i].advance_encode(q.value(), residual, coded_syms, levels);

    const Mask& m = coders[i].coded();
    std::vector<std::int32_t> full(m.size(), 0);
    for (std::size_t e = 0; e < m.size(); ++e) {
      if (m[e]) {
        full[e] = round_symbol(residual[e] - coders[i].effective_mu()[e]);
      }
    }
    out.coding_params.push_back({i, Stream::kTop, coders[i].effective_mu(),
                                 coders[i].effective_sigma()});
    out.masks.push_back(m);
    out.symbols.push_back(std::move(full));
    Tensor corrected = coders[i].corrected_residual();
    y_hat_slices.push_back(add(b_slices[i], corrected));
    out.residual_hat.push_back(std::move(corrected));
  }
  out.y_hat = channel_concat(y_hat_slices);
  return out;
}

struct PceemTrace {
  BaseResult base;
  std::optional<TopResult> top;  // absent at q = 0
  Tensor y_hat;                  // final latent at the requested quality
};

inline PceemTrace run_pceem(const Tensor& y_base, const Tensor& y_top,
                            const HyperParams& hyper, Quality q,
                            const ModelWeights& w, const RemPlan& plan) {
  PceemTrace t;
  t.base = run_base(y_base, hyper, w);
  if (q.value() > 0.0f) {
    t.top = run_top(y_top, t.base, hyper, q, w, plan);
    t.y_hat = t.top->y_hat;
  } else {
    t.y_hat = t.base.y_hat;
  }
  return t;
}

// Ideal code length of the unmasked symbols under the coder's quantized
// tables.
inline double entropy_estimate(std::span<const std::int32_t> symbols,
                               const Tensor& sigma, const Mask& mask) {
  if (symbols.size() != sigma.size() || mask.size() != sigma.size()) {
    throw ShapeError("entropy_estimate: " + std::to_string(symbols.size()) +
                     " symbols, " + std::to_string(sigma.size()) +
                     " sigmas, " + std::to_string(mask.size()) + " mask bits");
  }
  const CdfTable& tables = standard_cdf_table();
  const ScaleTable& scales = standard_scale_table();
  double bits = 0.0;
  for (std::size_t e = 0; e < symbols.size(); ++e) {
    if (!mask[e]) continue;
    bits += tables.bits(symbols[e], quantize_scale(sigma[e], scales));
  }
  return bits;
}

}  // namespace plc
