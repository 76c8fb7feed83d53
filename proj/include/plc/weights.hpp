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

// Architecture hyperparameters and the .plcw weights file.
//
// File layout, all fields little-endian:
//
//   "PLCW"  u16 version
//   arch:   u32 latent_channels, u32 hyper_channels, u32 slices,
//           u32 transform_channels, u32 entropy_hidden,
//           u32 n_checkpoints, f32 checkpoint[n_checkpoints]
//   u32 blob_count
//   blob:   u16 name_len, name bytes, u8 rank, u32 dims[rank],
//           f32 values[product(dims)]
//   u64 FNV-1a 64 of every preceding byte

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plc/bytes.hpp"
#include "plc/error.hpp"
#include "plc/tensor.hpp"

namespace plc {

inline constexpr std::uint16_t kWeightsVersion = 1;

struct ArchConfig {
  std::uint32_t latent_channels = 32;
  std::uint32_t hyper_channels = 8;
  std::uint32_t slices = 4;
  std::uint32_t transform_channels = 32;  // width of g_a / g_s / h_a / h_s
  std::uint32_t entropy_hidden = 16;      // width of psi / lrp / rem
  std::vector<float> checkpoints{0.5f, 7.5f, 20.0f};

  static constexpr std::size_t kDownsample = 16;
  // g_a downsamples by 16 and h_a by another 4.
  static constexpr std::size_t kPadMultiple = 64;

  std::size_t slice_channels() const { return latent_channels / slices; }

  void validate() const {
    if (latent_channels == 0 || hyper_channels == 0 || slices == 0 ||
        transform_channels == 0 || entropy_hidden == 0) {
      throw Error("architecture has a zero-sized dimension");
    }
    if (latent_channels % slices != 0) {
      throw Error("latent_channels " + std::to_string(latent_channels) +
                  " not divisible by slices " + std::to_string(slices));
    }
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      const float q = checkpoints[i];
      if (!(q > 0.0f && q < 100.0f)) {
        throw Error("checkpoint quality " + std::to_string(q) +
                    " not in (0, 100)");
      }
      if (i > 0 && !(q > checkpoints[i - 1])) {
        throw Error("checkpoint qualities must be strictly increasing");
      }
    }
  }

  void write(ByteWriter& out) const {
    out.u32(latent_channels);
    out.u32(hyper_channels);
    out.u32(slices);
    out.u32(transform_channels);
    out.u32(entropy_hidden);
    out.u32(static_cast<std::uint32_t>(checkpoints.size()));
    for (float q : checkpoints) out.f32(q);
  }

  static ArchConfig read(ByteReader& in) {
    ArchConfig a;
    a.latent_channels = in.u32();
    a.hyper_channels = in.u32();
    a.slices = in.u32();
    a.transform_channels = in.u32();
    a.entropy_hidden = in.u32();
    const std::uint32_t n = in.u32();
    if (n > 64) throw FormatError("implausible checkpoint count " + std::to_string(n));
    a.checkpoints.resize(n);
    for (float& q : a.checkpoints) q = in.f32();
    return a;
  }

  std::uint64_t fingerprint() const {
    ByteWriter w;
    write(w);
    return fnv1a64(w.buffer());
  }

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

struct Blob {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  friend bool operator==(const Blob&, const Blob&) = default;
};

class ModelWeights {
 public:
  ModelWeights() = default;
  explicit ModelWeights(ArchConfig arch) : arch_(std::move(arch)) {
    arch_.validate();
  }

  const ArchConfig& arch() const { return arch_; }
  const std::vector<Blob>& blobs() const { return blobs_; }

  void add(Blob blob) {
    if (index_.contains(blob.name)) {
      throw Error("duplicate weights blob " + blob.name);
    }
    std::size_t n = 1;
    for (auto d : blob.dims) n *= d;
    if (n != blob.values.size()) {
      throw ShapeError("blob " + blob.name + " dims do not match " +
                       std::to_string(blob.values.size()) + " values");
    }
    index_[blob.name] = blobs_.size();
    blobs_.push_back(std::move(blob));
  }

  bool contains(const std::string& name) const {
    return index_.contains(name);
  }

  const Blob& get(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error("missing weights blob " + name);
    return blobs_[it->second];
  }
  Blob& get_mutable(const std::string& name) {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error("missing weights blob " + name);
    return blobs_[it->second];
  }

  // Blob viewed as a rank-3 tensor; rank-1 blobs become (n, 1, 1), rank-2
  // (a, b, 1), rank-3 as is.
  Tensor tensor(const std::string& name) const {
    const Blob& b = get(name);
    Shape s{1, 1, 1};
    if (b.dims.size() == 1) {
      s = {b.dims[0], 1, 1};
    } else if (b.dims.size() == 2) {
      s = {b.dims[0], b.dims[1], 1};
    } else if (b.dims.size() == 3) {
      s = {b.dims[0], b.dims[1], b.dims[2]};
    } else {
      throw ShapeError("blob " + name + " has unsupported rank " +
                       std::to_string(b.dims.size()));
    }
    return Tensor(s, b.values);
  }

  // Serialized bytes without the trailing checksum.
  std::vector<std::uint8_t> serialize_body() const {
    ByteWriter out;
    out.tag("PLCW");
    out.u16(kWeightsVersion);
    arch_.write(out);
    out.u32(static_cast<std::uint32_t>(blobs_.size()));
    for (const Blob& b : blobs_) {
      out.u16(static_cast<std::uint16_t>(b.name.size()));
      out.tag(b.name);
      out.u8(static_cast<std::uint8_t>(b.dims.size()));
      for (auto d : b.dims) out.u32(d);
      for (float v : b.values) out.f32(v);
    }
    return out.take();
  }

  std::uint64_t checksum() const { return fnv1a64(serialize_body()); }

  std::vector<std::uint8_t> serialize() const {
    auto body = serialize_body();
    const std::uint64_t sum = fnv1a64(body);
    ByteWriter tail;
    tail.u64(sum);
    body.insert(body.end(), tail.buffer().begin(), tail.buffer().end());
    return body;
  }

  static ModelWeights parse(std::span<const std::uint8_t> bytes) {
    ByteReader magic(bytes, "weights file");
    if (!magic.tag("PLCW")) throw FormatError("not a PLCW weights file");
    if (bytes.size() < 6) throw ChecksumError("weights file truncated");
    const std::uint16_t version = magic.u16();
    if (version != kWeightsVersion) {
      throw VersionError("weights version " + std::to_string(version) +
                         " unsupported (expected " +
                         std::to_string(kWeightsVersion) + ")");
    }
    if (bytes.size() < 6 + 8) throw ChecksumError("weights file truncated");
    const auto body = bytes.first(bytes.size() - 8);
    ByteReader trailer(bytes.last(8), "weights checksum");
    if (trailer.u64() != fnv1a64(body)) {
      throw ChecksumError("weights checksum mismatch");
    }

    ByteReader in(body, "weights file");
    in.tag("PLCW");
    in.u16();
    ModelWeights w(ArchConfig::read(in));
    const std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      Blob b;
      const std::uint16_t len = in.u16();
      const auto name = in.bytes(len);
      b.name.assign(name.begin(), name.end());
      const std::uint8_t rank = in.u8();
      std::size_t n = 1;
      for (std::uint8_t r = 0; r < rank; ++r) {
        b.dims.push_back(in.u32());
        n *= b.dims.back();
      }
      if (n * 4 > in.remaining()) {
        throw FormatError("blob " + b.name + " larger than the file");
      }
      b.values.resize(n);
      for (float& v : b.values) v = in.f32();
      w.add(std::move(b));
    }
    if (in.remaining() != 0) {
      throw FormatError("trailing bytes after the last weights blob");
    }
    return w;
  }

  friend bool operator==(const ModelWeights& a, const ModelWeights& b) {
    return a.arch_ == b.arch_ && a.blobs_ == b.blobs_;
  }

 private:
  ArchConfig arch_;
  std::vector<Blob> blobs_;
  std::map<std::string, std::size_t> index_;
};

inline void save_weights(const ModelWeights& w, const std::string& path) {
  write_file(path, w.serialize());
}

inline ModelWeights load_weights(const std::string& path) {
  return ModelWeights::parse(read_file(path));
}

}  // namespace plc
