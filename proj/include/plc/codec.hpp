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

// End-to-end progressive encode and decode.
//
// The encoder writes the hyper-latent, the base layer and one delta segment
// per consecutive pair of target qualities (0 -> q_1 -> q_2 -> ...). Segment
// (q_a, q_b] of slice i holds the residual symbols of the elements that enter
// the mask between q_a and q_b; masks are recomputed by the decoder from
// sigma, so only the boundaries are stored.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plc/container.hpp"
#include "plc/error.hpp"
#include "plc/image_io.hpp"
#include "plc/masking.hpp"
#include "plc/pceem.hpp"
#include "plc/rans.hpp"
#include "plc/tensor.hpp"
#include "plc/transforms.hpp"
#include "plc/weights.hpp"

namespace plc {

namespace detail {

inline void check_targets(std::span<const Quality> targets) {
  if (targets.empty()) throw QualityError("no target qualities given");
  float prev = 0.0f;
  for (Quality q : targets) {
    if (!(q.value() > prev)) {
      throw QualityError(
          "target qualities must be strictly increasing and > 0; got " +
          std::to_string(q.value()) + " after " + std::to_string(prev));
    }
    prev = q.value();
  }
}

inline void check_image(const Tensor& x) {
  if (x.channels() != 3 || x.height() == 0 || x.width() == 0) {
    throw ShapeError("expected a non-empty RGB image, got " + to_string(x.shape()));
  }
  for (float v : x.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error("image values must lie in [0, 1]");
    }
  }
}

inline std::vector<std::uint32_t> z_levels(const Shape& z_shape,
                                           const ZPrior& prior) {
  std::vector<std::uint32_t> levels;
  levels.reserve(z_shape.size());
  for (std::size_t c = 0; c < z_shape.c; ++c) {
    const std::uint32_t l = quantize_scale(prior.sigma[c], standard_scale_table());
    levels.insert(levels.end(), z_shape.plane(), l);
  }
  return levels;
}

inline Tensor z_from_symbols(const Shape& z_shape, const ZPrior& prior,
                             std::span<const std::int32_t> symbols) {
  Tensor z(z_shape);
  for (std::size_t c = 0; c < z_shape.c; ++c) {
    for (std::size_t k = 0; k < z_shape.plane(); ++k) {
      const std::size_t e = c * z_shape.plane() + k;
      z[e] = static_cast<float>(symbols[e]) + prior.mu[c];
    }
  }
  return z;
}

inline Shape latent_shape(const ArchConfig& a, std::size_t padded_h,
                          std::size_t padded_w) {
  return {a.latent_channels, padded_h / ArchConfig::kDownsample,
          padded_w / ArchConfig::kDownsample};
}

inline Shape z_shape(const ArchConfig& a, std::size_t padded_h,
                     std::size_t padded_w) {
  const std::size_t f = ArchConfig::kDownsample * 4;
  return {a.hyper_channels, padded_h / f, padded_w / f};
}

}  // namespace detail

inline BitstreamContainer encode_image(const Tensor& image,
                                       std::span<const Quality> q_targets,
                                       const ModelWeights& w) {
  detail::check_targets(q_targets);
  detail::check_image(image);
  const ArchConfig& a = w.arch();
  const CdfTable& tables = standard_cdf_table();

  const std::size_t ph = round_up(image.height(), ArchConfig::kPadMultiple);
  const std::size_t pw = round_up(image.width(), ArchConfig::kPadMultiple);
  const Tensor x = pad_edge(image, ph, pw);

  const Tensor y_base = analysis(x, Stream::kBase, w);
  const Tensor y_top = analysis(x, Stream::kTop, w);

  BitstreamContainer c;
  ContainerHeader& h = c.header;
  h.width = static_cast<std::uint32_t>(image.width());
  h.height = static_cast<std::uint32_t>(image.height());
  h.padded_width = static_cast<std::uint32_t>(pw);
  h.padded_height = static_cast<std::uint32_t>(ph);
  h.arch_fingerprint = a.fingerprint();
  h.weights_checksum = w.checksum();
  h.base_present = 1;

  // Hyper-latent, shared by every quality.
  const ZPrior prior = z_prior(w);
  const Tensor z = hyper_analysis(y_base, y_top, w);
  std::vector<std::int32_t> z_syms(z.size());
  for (std::size_t ch = 0; ch < z.channels(); ++ch) {
    for (std::size_t k = 0; k < z.shape().plane(); ++k) {
      const std::size_t e = ch * z.shape().plane() + k;
      z_syms[e] = round_symbol(z[e] - prior.mu[ch]);
    }
  }
  const auto z_bytes =
      encode_symbols(z_syms, detail::z_levels(z.shape(), prior), tables);
  h.z_bytes = static_cast<std::uint32_t>(z_bytes.size());
  c.payload.insert(c.payload.end(), z_bytes.begin(), z_bytes.end());

  const Tensor z_hat = detail::z_from_symbols(z.shape(), prior, z_syms);
  const HyperParams hyper = hyper_synthesis(z_hat, w);

  // Base layer.
  const BaseResult base = run_base(y_base, hyper, w);
  for (std::size_t i = 0; i < a.slices; ++i) {
    std::vector<std::uint32_t> levels;
    levels.reserve(base.params[i].sigma.size());
    for (float s : base.params[i].sigma.data()) {
      levels.push_back(quantize_scale(s, standard_scale_table()));
    }
    const auto bytes = encode_symbols(base.symbols[i], levels, tables);
    h.base_bytes.push_back(static_cast<std::uint32_t>(bytes.size()));
    c.payload.insert(c.payload.end(), bytes.begin(), bytes.end());
  }

  // Top residual, one segment per consecutive pair of targets.
  const auto params = top_params(base.y_hat, hyper, w);
  auto coders = make_top_coders(w, RemPlan::from_arch(a), base.y_hat, base,
                                params, hyper);
  const auto y_slices = channel_split(y_top, a.slices);
  const auto b_slices = channel_split(base.y_hat, a.slices);
  std::vector<Tensor> residuals;
  for (std::size_t i = 0; i < a.slices; ++i) {
    residuals.push_back(subtract(y_slices[i], b_slices[i]));
  }
  float prev = 0.0f;
  for (Quality q : q_targets) {
    Segment seg{prev, q.value(), static_cast<std::uint32_t>(c.payload.size()), {}};
    for (std::size_t i = 0; i < a.slices; ++i) {
      std::vector<std::int32_t> syms;
      std::vector<std::uint32_t> levels;
      coders[i].advance_encode(q.value(), residuals[i], syms, levels);
      const auto bytes = encode_symbols(syms, levels, tables);
      seg.slice_bytes.push_back(static_cast<std::uint32_t>(bytes.size()));
      c.payload.insert(c.payload.end(), bytes.begin(), bytes.end());
    }
    h.segments.push_back(std::move(seg));
    prev = q.value();
  }
  c.validate();
  return c;
}

inline BitstreamContainer encode_image(const Tensor& image,
                                       std::initializer_list<double> q_targets,
                                       const ModelWeights& w) {
  std::vector<Quality> qs;
  for (double q : q_targets) qs.emplace_back(q);
  return encode_image(image, qs, w);
}

// Decodes a container one boundary at a time. Each advance only reads the
// new segments and adds their symbols to the residuals already in memory.
class ProgressiveDecoder {
 public:
  ProgressiveDecoder(BitstreamContainer container, const ModelWeights& w)
      : c_(std::move(container)), w_(&w) {
    const ArchConfig& a = w.arch();
    const ContainerHeader& h = c_.header;
    c_.validate();
    if (h.arch_fingerprint != a.fingerprint()) {
      throw ChecksumError("container was encoded for a different architecture");
    }
    if (h.weights_checksum != w.checksum()) {
      throw ChecksumError("container was encoded with different weights");
    }
    if (c_.slices() != a.slices) {
      throw FormatError("container has " + std::to_string(c_.slices()) +
                        " slices, architecture has " + std::to_string(a.slices));
    }
    if (h.padded_width % ArchConfig::kPadMultiple != 0 ||
        h.padded_height % ArchConfig::kPadMultiple != 0) {
      throw FormatError("padded dimensions are not multiples of 64");
    }
    const CdfTable& tables = standard_cdf_table();

    const ZPrior prior = z_prior(w);
    const Shape zs = detail::z_shape(a, h.padded_height, h.padded_width);
    const auto z_syms =
        decode_symbols(c_.z_stream(), detail::z_levels(zs, prior), tables);
    hyper_ = hyper_synthesis(detail::z_from_symbols(zs, prior, z_syms), w);

    base_ = base_pipeline(hyper_, w, [&](std::size_t i, const EntropyParams& p) {
      RansDecoder dec(c_.base_stream(i), tables);
      std::vector<std::int32_t> s;
      s.reserve(p.sigma.size());
      for (float sigma : p.sigma.data()) {
        s.push_back(dec.get(quantize_scale(sigma, standard_scale_table())));
      }
      dec.finish();
      return s;
    });
    const auto params = top_params(base_.y_hat, hyper_, w);
    coders_ = make_top_coders(w, RemPlan::from_arch(a), base_.y_hat, base_,
                              params, hyper_);
  }

  const BitstreamContainer& container() const { return c_; }
  float quality() const { return quality_; }

  void advance_to(Quality q) {
    c_.check_boundary(q.value());
    if (q.value() < quality_) {
      throw QualityError("decoder is already at q=" + std::to_string(quality_) +
                         "; cannot go back to q=" + std::to_string(q.value()));
    }
    const CdfTable& tables = standard_cdf_table();
    for (std::size_t k = 0; k < c_.header.segments.size(); ++k) {
      const Segment& s = c_.header.segments[k];
      if (s.q_from < quality_ || s.q_to > q.value()) continue;
      for (std::size_t i = 0; i < coders_.size(); ++i) {
        RansDecoder dec(c_.segment_stream(k, i), tables);
        coders_[i].advance_decode(s.q_to, dec);
        dec.finish();
      }
      quality_ = s.q_to;
    }
  }

  Tensor latent() const {
    if (quality_ == 0.0f) return base_.y_hat;
    std::vector<Tensor> slices;
    for (const auto& coder : coders_) slices.push_back(coder.y_hat());
    return channel_concat(slices);
  }

  // Base decoder at q = 0, top decoder otherwise; cropped to the original
  // size.
  Tensor image() const {
    const Stream which = quality_ == 0.0f ? Stream::kBase : Stream::kTop;
    return crop(synthesis(latent(), which, *w_), c_.header.height,
                c_.header.width);
  }

  const std::vector<TopSliceCoder>& top_slices() const { return coders_; }

 private:
  BitstreamContainer c_;
  const ModelWeights* w_;
  HyperParams hyper_;
  BaseResult base_;
  std::vector<TopSliceCoder> coders_;
  float quality_ = 0.0f;
};

inline Tensor decode_latent(const BitstreamContainer& c, Quality q,
                            const ModelWeights& w) {
  c.check_boundary(q.value());
  ProgressiveDecoder d(c, w);
  d.advance_to(q);
  return d.latent();
}

inline Tensor decode_image(const BitstreamContainer& c, Quality q,
                           const ModelWeights& w) {
  c.check_boundary(q.value());
  ProgressiveDecoder d(c, w);
  d.advance_to(q);
  return d.image();
}

}  // namespace plc
