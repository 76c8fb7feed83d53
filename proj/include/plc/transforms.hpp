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

// Small convolutional networks of the two-level codec:
//
//   analysis / synthesis   g_a, g_s for the base and top streams
//   hyper_analysis         h_a over the concatenated base and top latents
//   hyper_synthesis        h_s producing (d_mu, d_sigma) for both streams
//   psi_base, psi_top      per-slice entropy parameter networks
//   lrp                    per-slice latent residual prediction
//   rem                    per-slice, per-checkpoint rate enhancement
//
// Every network is a stack of convolutions separated by leaky ReLUs. Blob
// names are "<layer>.weight" (out, in, k*k) and "<layer>.bias" (out).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "plc/error.hpp"
#include "plc/masking.hpp"
#include "plc/random.hpp"
#include "plc/tensor.hpp"
#include "plc/weights.hpp"

namespace plc {

enum class Stream { kBase, kTop };

inline const char* stream_name(Stream s) {
  return s == Stream::kBase ? "base" : "top";
}

struct LayerDef {
  std::string name;
  ConvSpec spec;
  double init_gain = 1.0;
  double init_bias = 0.0;
};

namespace detail {

inline ConvSpec down(std::size_t in, std::size_t out, std::size_t k) {
  return {in, out, k, 2, k / 2, 0, false};
}
inline ConvSpec up(std::size_t in, std::size_t out, std::size_t k) {
  return {in, out, k, 2, k / 2, 1, true};
}
inline ConvSpec same(std::size_t in, std::size_t out) {
  return {in, out, 3, 1, 1, 0, false};
}

// "%g" keeps checkpoint names short and stable ("rem.2.q7.5.0").
inline std::string quality_tag(float q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%g", static_cast<double>(q));
  return buf;
}

// Scale of the base/top latents relative to unit-variance activations.
inline constexpr double kLatentGain = 4.0;

}  // namespace detail

inline std::string psi_prefix(Stream s, std::size_t slice) {
  return std::string("psi.") + stream_name(s) + "." + std::to_string(slice);
}
inline std::string lrp_prefix(Stream s, std::size_t slice) {
  return std::string("lrp.") + stream_name(s) + "." + std::to_string(slice);
}
inline std::string rem_prefix(std::size_t slice, float checkpoint) {
  return "rem." + std::to_string(slice) + "." +
         detail::quality_tag(checkpoint);
}

// Layers of every network in file order. Gains and biases are only used by
// generate_seed_weights.
inline std::vector<LayerDef> layer_catalog(const ArchConfig& a) {
  using detail::down;
  using detail::same;
  using detail::up;
  const std::size_t C = a.latent_channels;
  const std::size_t Z = a.hyper_channels;
  const std::size_t N = a.transform_channels;
  const std::size_t H = a.entropy_hidden;
  const std::size_t cs = a.slice_channels();
  const double relu_gain = std::sqrt(2.0);
  const double latent = detail::kLatentGain;

  std::vector<LayerDef> layers;
  for (Stream s : {Stream::kBase, Stream::kTop}) {
    const std::string p = std::string("g_a.") + stream_name(s) + ".";
    layers.push_back({p + "0", down(3, N, 5), relu_gain, 0.0});
    layers.push_back({p + "1", down(N, N, 5), relu_gain, 0.0});
    layers.push_back({p + "2", down(N, N, 5), relu_gain, 0.0});
    layers.push_back({p + "3", down(N, C, 5), latent, 0.0});
  }
  for (Stream s : {Stream::kBase, Stream::kTop}) {
    const std::string p = std::string("g_s.") + stream_name(s) + ".";
    layers.push_back({p + "0", up(C, N, 5), relu_gain / latent, 0.0});
    layers.push_back({p + "1", up(N, N, 5), relu_gain, 0.0});
    layers.push_back({p + "2", up(N, N, 5), relu_gain, 0.0});
    layers.push_back({p + "3", up(N, 3, 5), 0.25, 0.5});
  }
  layers.push_back({"h_a.0", down(2 * C, N, 3), relu_gain / latent, 0.0});
  layers.push_back({"h_a.1", down(N, Z, 3), 1.0, 0.0});
  layers.push_back({"h_s.0", up(Z, N, 3), relu_gain, 0.0});
  layers.push_back({"h_s.1", up(N, 4 * C, 3), 1.0, 0.0});
  for (std::size_t i = 0; i < a.slices; ++i) {
    const std::string p = psi_prefix(Stream::kBase, i) + ".";
    layers.push_back({p + "0", same(2 * C + i * cs, H), relu_gain, 0.0});
    layers.push_back({p + "1", same(H, 2 * cs), 1.0, 0.0});
  }
  for (std::size_t i = 0; i < a.slices; ++i) {
    const std::string p = psi_prefix(Stream::kTop, i) + ".";
    layers.push_back({p + "0", same(cs + 2 * C + 2 * i * cs, H), relu_gain, 0.0});
    layers.push_back({p + "1", same(H, 2 * cs), 1.0, 0.0});
  }
  for (Stream s : {Stream::kBase, Stream::kTop}) {
    for (std::size_t i = 0; i < a.slices; ++i) {
      const std::string p = lrp_prefix(s, i) + ".";
      layers.push_back({p + "0", same(C + cs, H), relu_gain, 0.0});
      layers.push_back({p + "1", same(H, cs), 0.1, 0.0});
    }
  }
  for (std::size_t i = 0; i < a.slices; ++i) {
    for (float q : a.checkpoints) {
      const std::string p = rem_prefix(i, q) + ".";
      layers.push_back({p + "0", same(5 * cs, H), relu_gain, 0.0});
      layers.push_back({p + "1", same(H, 2 * cs), 0.1, 0.0});
    }
  }
  return layers;
}

inline constexpr const char* kZPriorBlob = "z_prior";

// Deterministic scaled-uniform initialization. Values derive from raw
// mt19937_64 output only, so identical (arch, seed) give identical bytes.
inline ModelWeights generate_seed_weights(const ArchConfig& arch,
                                          std::uint64_t seed) {
  ModelWeights w(arch);
  Rng rng(seed);
  for (const LayerDef& l : layer_catalog(arch)) {
    const ConvSpec& s = l.spec;
    const std::size_t taps = s.kernel * s.kernel;
    double fan_in = static_cast<double>(s.in_channels * taps);
    if (s.transposed) fan_in /= static_cast<double>(s.stride * s.stride);
    const double bound = l.init_gain * std::sqrt(3.0 / fan_in);

    Blob wt{l.name + ".weight",
            {static_cast<std::uint32_t>(s.out_channels),
             static_cast<std::uint32_t>(s.in_channels),
             static_cast<std::uint32_t>(taps)},
            {}};
    wt.values.resize(s.out_channels * s.in_channels * taps);
    for (float& v : wt.values) v = static_cast<float>(rng.uniform(-bound, bound));

    Blob b{l.name + ".bias", {static_cast<std::uint32_t>(s.out_channels)}, {}};
    b.values.resize(s.out_channels);
    for (float& v : b.values) {
      v = static_cast<float>(l.init_bias + rng.uniform(-0.05, 0.05));
    }
    w.add(std::move(wt));
    w.add(std::move(b));
  }
  // Per-channel Gaussian prior of the hyper-latent: row 0 means, row 1 sigmas.
  Blob prior{kZPriorBlob, {2, arch.hyper_channels}, {}};
  prior.values.resize(2 * arch.hyper_channels);
  for (std::uint32_t c = 0; c < arch.hyper_channels; ++c) {
    prior.values[c] = static_cast<float>(rng.uniform(-0.5, 0.5));
    prior.values[arch.hyper_channels + c] =
        static_cast<float>(rng.uniform(2.0, 6.0));
  }
  w.add(std::move(prior));
  return w;
}

namespace detail {

inline Tensor conv_layer(const ModelWeights& w, const std::string& name,
                         const ConvSpec& spec, const Tensor& x) {
  const Tensor bias = w.tensor(name + ".bias");
  return conv2d(x, spec, w.tensor(name + ".weight"), bias.data());
}

// Runs "<prefix>.0", "<prefix>.1", ... with leaky ReLU between layers and no
// activation after the last one.
inline Tensor run_stack(const ModelWeights& w, const std::string& prefix,
                        std::span<const ConvSpec> specs, Tensor x) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    x = conv_layer(w, prefix + "." + std::to_string(i), specs[i], x);
    if (i + 1 < specs.size()) x = leaky_relu(std::move(x));
  }
  return x;
}

inline std::vector<ConvSpec> specs_with_prefix(const ArchConfig& a,
                                               const std::string& prefix) {
  std::vector<ConvSpec> out;
  for (const LayerDef& l : layer_catalog(a)) {
    if (l.name.size() > prefix.size() &&
        l.name.compare(0, prefix.size(), prefix) == 0 &&
        l.name[prefix.size()] == '.' &&
        l.name.find('.', prefix.size() + 1) == std::string::npos) {
      out.push_back(l.spec);
    }
  }
  if (out.empty()) throw Error("no layers named " + prefix + ".*");
  return out;
}

inline float softplus(float v) {
  // log1p(exp(v)) without overflow for large v.
  return v > 20.0f ? v : std::log1p(std::exp(v));
}

inline constexpr float kSigmaFloor = 1e-6f;

}  // namespace detail

struct EntropyParams {
  Tensor mu;
  Tensor sigma;  // strictly positive
};

struct HyperParams {
  Tensor mu_base;
  Tensor sigma_base;
  Tensor mu_top;
  Tensor sigma_top;
};

struct ZPrior {
  std::vector<float> mu;
  std::vector<float> sigma;
};

inline ZPrior z_prior(const ModelWeights& w) {
  const Blob& b = w.get(kZPriorBlob);
  const std::size_t Z = w.arch().hyper_channels;
  if (b.values.size() != 2 * Z) throw ShapeError("z_prior blob has wrong size");
  ZPrior p{{b.values.begin(), b.values.begin() + static_cast<std::ptrdiff_t>(Z)},
           {b.values.begin() + static_cast<std::ptrdiff_t>(Z), b.values.end()}};
  for (float s : p.sigma) {
    if (!(s > 0.0f)) throw Error("z_prior sigma must be positive");
  }
  return p;
}

inline Tensor analysis(const Tensor& x, Stream which, const ModelWeights& w) {
  const std::size_t f = ArchConfig::kDownsample;
  if (x.channels() != 3) {
    throw ShapeError("analysis: image must have 3 channels, got " +
                     std::to_string(x.channels()));
  }
  if (x.height() % f != 0 || x.width() % f != 0 || x.height() == 0 ||
      x.width() == 0) {
    throw ShapeError("analysis: image dims " + std::to_string(x.height()) +
                     "x" + std::to_string(x.width()) +
                     " not divisible by 16");
  }
  const std::string prefix = std::string("g_a.") + stream_name(which);
  return detail::run_stack(w, prefix, detail::specs_with_prefix(w.arch(), prefix), x);
}

// Output is clamped to [0, 1].
inline Tensor synthesis(const Tensor& y_hat, Stream which,
                        const ModelWeights& w) {
  if (y_hat.channels() != w.arch().latent_channels) {
    throw ShapeError("synthesis: latent has " +
                     std::to_string(y_hat.channels()) + " channels, arch " +
                     std::to_string(w.arch().latent_channels));
  }
  const std::string prefix = std::string("g_s.") + stream_name(which);
  Tensor x = detail::run_stack(w, prefix,
                               detail::specs_with_prefix(w.arch(), prefix), y_hat);
  for (float& v : x.data()) v = std::clamp(v, 0.0f, 1.0f);
  return x;
}

inline Tensor hyper_analysis(const Tensor& y_base, const Tensor& y_top,
                             const ModelWeights& w) {
  if (y_base.shape() != y_top.shape()) {
    throw ShapeError("hyper_analysis: base latent " +
                     to_string(y_base.shape()) + " vs top latent " +
                     to_string(y_top.shape()));
  }
  if (y_base.height() % 4 != 0 || y_base.width() % 4 != 0) {
    throw ShapeError("hyper_analysis: latent dims must be multiples of 4, got " +
                     to_string(y_base.shape()));
  }
  return detail::run_stack(w, "h_a", detail::specs_with_prefix(w.arch(), "h_a"),
                           channel_concat({y_base, y_top}));
}

inline HyperParams hyper_synthesis(const Tensor& z_hat, const ModelWeights& w) {
  if (z_hat.channels() != w.arch().hyper_channels) {
    throw ShapeError("hyper_synthesis: z has " +
                     std::to_string(z_hat.channels()) + " channels, arch " +
                     std::to_string(w.arch().hyper_channels));
  }
  const Tensor out = detail::run_stack(
      w, "h_s", detail::specs_with_prefix(w.arch(), "h_s"), z_hat);
  auto parts = channel_split(out, 4);
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2]),
          std::move(parts[3])};
}

namespace detail {

// Splits a (2*cs)-channel head into mean and softplus-mapped sigma.
inline EntropyParams params_head(const Tensor& out) {
  auto halves = channel_split(out, 2);
  Tensor sigma = std::move(halves[1]);
  for (float& v : sigma.data()) v = softplus(v) + kSigmaFloor;
  return {std::move(halves[0]), std::move(sigma)};
}

inline void check_slice(const ArchConfig& a, std::size_t i) {
  if (i >= a.slices) {
    throw ShapeError("slice index " + std::to_string(i) + " >= " +
                     std::to_string(a.slices) + " slices");
  }
}

}  // namespace detail

// prev_y_hat holds the i already reconstructed base slices (empty at i = 0).
inline EntropyParams psi_base(std::size_t i, const Tensor& d_mu,
                              const Tensor& d_sigma, const Tensor& prev_y_hat,
                              const ModelWeights& w) {
  detail::check_slice(w.arch(), i);
  const std::string prefix = psi_prefix(Stream::kBase, i);
  const Tensor in = channel_concat({d_mu, d_sigma, prev_y_hat});
  return detail::params_head(detail::run_stack(
      w, prefix, detail::specs_with_prefix(w.arch(), prefix), in));
}

// Consumes the previous slices' entropy parameters, never previously decoded
// top slices, so the parameters do not depend on the target quality.
inline EntropyParams psi_top(std::size_t i, const Tensor& y_hat_base_slice,
                             const Tensor& d_mu, const Tensor& d_sigma,
                             const Tensor& prev_mu, const Tensor& prev_sigma,
                             const ModelWeights& w) {
  detail::check_slice(w.arch(), i);
  const std::string prefix = psi_prefix(Stream::kTop, i);
  const Tensor in =
      channel_concat({y_hat_base_slice, d_mu, prev_mu, d_sigma, prev_sigma});
  return detail::params_head(detail::run_stack(
      w, prefix, detail::specs_with_prefix(w.arch(), prefix), in));
}

// Correction in (-0.5, 0.5) to be added to a dequantized slice.
inline Tensor lrp(std::size_t i, Stream which, const Tensor& context,
                  const Tensor& quantized, const ModelWeights& w) {
  detail::check_slice(w.arch(), i);
  const std::string prefix = lrp_prefix(which, i);
  Tensor out = detail::run_stack(w, prefix,
                                 detail::specs_with_prefix(w.arch(), prefix),
                                 channel_concat({context, quantized}));
  // tanh rounds to 1 in float for large inputs; keep the bound strict.
  const float bound = std::nextafter(0.5f, 0.0f);
  for (float& v : out.data()) v = std::clamp(0.5f * std::tanh(v), -bound, bound);
  return out;
}

// Refined (mu, sigma) for slice i from the checkpoint reconstruction. Outputs
// are offsets: mu + d_mu and sigma * exp(d_log_sigma), so all-zero weights
// return the top parameters unchanged. The caller keeps the refinement only
// on the delta-mask support.
inline EntropyParams rem(std::size_t i, Quality checkpoint,
                         const Tensor& y_hat_checkpoint,
                         const EntropyParams& base, const EntropyParams& top,
                         const ModelWeights& w) {
  detail::check_slice(w.arch(), i);
  const std::string prefix = rem_prefix(i, checkpoint.value());
  if (!w.contains(prefix + ".0.weight")) {
    throw Error("missing REM weights for slice " + std::to_string(i) +
                " checkpoint " + std::to_string(checkpoint.value()));
  }
  const Tensor in = channel_concat(
      {y_hat_checkpoint, base.mu, base.sigma, top.mu, top.sigma});
  const Tensor out = detail::run_stack(
      w, prefix, detail::specs_with_prefix(w.arch(), prefix), in);
  auto halves = channel_split(out, 2);
  EntropyParams refined{top.mu, top.sigma};
  for (std::size_t k = 0; k < refined.mu.size(); ++k) {
    refined.mu[k] = top.mu[k] + halves[0][k];
    const float scale = std::exp(std::clamp(halves[1][k], -20.0f, 20.0f));
    refined.sigma[k] = std::max(top.sigma[k] * scale, detail::kSigmaFloor);
  }
  return refined;
}

}  // namespace plc
