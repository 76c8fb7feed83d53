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

// .plc progressive container. Little-endian throughout.
//
//   "PLC1"  u16 version
//   u32 width, u32 height            original image size
//   u32 padded_width, u32 padded_height
//   u64 arch fingerprint, u64 weights checksum
//   u32 z_bytes
//   u8  base_present
//   u16 slices
//   u32 base_bytes[slices]
//   u16 segment_count
//   segment: f32 q_from, f32 q_to, u32 offset, u32 bytes[slices]
//   payload: z stream | base slice streams | segment 0 slice streams | ...
//
// Segment offsets are relative to the payload start. Intervals are
// contiguous, start at 0 and increase strictly; segment k carries the top
// residual symbols gained between q_from and q_to. Dropping trailing
// segments leaves a valid container whose payload is a byte prefix of the
// original.
//
// .plcd holds one detached segment for append:
//
//   "PLCD"  u16 version  f32 q_from  f32 q_to  u16 slices
//   u32 bytes[slices]  then the slice streams

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "plc/bytes.hpp"
#include "plc/error.hpp"
#include "plc/masking.hpp"

namespace plc {

inline constexpr std::uint16_t kContainerVersion = 1;

struct Segment {
  float q_from = 0.0f;
  float q_to = 0.0f;
  std::uint32_t offset = 0;
  std::vector<std::uint32_t> slice_bytes;

  std::size_t total_bytes() const {
    std::size_t n = 0;
    for (auto b : slice_bytes) n += b;
    return n;
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ContainerHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t padded_width = 0;
  std::uint32_t padded_height = 0;
  std::uint64_t arch_fingerprint = 0;
  std::uint64_t weights_checksum = 0;
  std::uint32_t z_bytes = 0;
  std::uint8_t base_present = 1;
  std::vector<std::uint32_t> base_bytes;
  std::vector<Segment> segments;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

struct DeltaSegment {
  float q_from = 0.0f;
  float q_to = 0.0f;
  std::vector<std::vector<std::uint8_t>> slices;

  std::vector<std::uint8_t> serialize() const {
    ByteWriter out;
    out.tag("PLCD");
    out.u16(kContainerVersion);
    out.f32(q_from);
    out.f32(q_to);
    out.u16(static_cast<std::uint16_t>(slices.size()));
    for (const auto& s : slices) out.u32(static_cast<std::uint32_t>(s.size()));
    for (const auto& s : slices) out.bytes(s);
    return out.take();
  }

  static DeltaSegment parse(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, "segment file");
    if (!in.tag("PLCD")) throw FormatError("not a PLCD segment file");
    const std::uint16_t version = in.u16();
    if (version != kContainerVersion) {
      throw VersionError("segment version " + std::to_string(version) +
                         " unsupported");
    }
    DeltaSegment d;
    d.q_from = in.f32();
    d.q_to = in.f32();
    const std::uint16_t n = in.u16();
    std::vector<std::uint32_t> lens(n);
    for (auto& l : lens) l = in.u32();
    for (auto l : lens) {
      const auto b = in.bytes(l);
      d.slices.emplace_back(b.begin(), b.end());
    }
    if (in.remaining() != 0) throw FormatError("trailing bytes in segment file");
    return d;
  }

  friend bool operator==(const DeltaSegment&, const DeltaSegment&) = default;
};

class BitstreamContainer {
 public:
  ContainerHeader header;
  std::vector<std::uint8_t> payload;

  std::size_t slices() const { return header.base_bytes.size(); }

  // Qualities this container decodes at: 0 and every segment's q_to.
  std::vector<float> boundaries() const {
    std::vector<float> b{0.0f};
    for (const Segment& s : header.segments) b.push_back(s.q_to);
    return b;
  }

  float max_quality() const {
    return header.segments.empty() ? 0.0f : header.segments.back().q_to;
  }

  std::size_t base_end() const {
    std::size_t n = header.z_bytes;
    for (auto b : header.base_bytes) n += b;
    return n;
  }

  std::span<const std::uint8_t> z_stream() const {
    return std::span<const std::uint8_t>(payload).first(header.z_bytes);
  }

  std::span<const std::uint8_t> base_stream(std::size_t slice) const {
    std::size_t off = header.z_bytes;
    for (std::size_t i = 0; i < slice; ++i) off += header.base_bytes[i];
    return std::span<const std::uint8_t>(payload).subspan(
        off, header.base_bytes[slice]);
  }

  std::span<const std::uint8_t> segment_stream(std::size_t seg,
                                               std::size_t slice) const {
    const Segment& s = header.segments[seg];
    std::size_t off = s.offset;
    for (std::size_t i = 0; i < slice; ++i) off += s.slice_bytes[i];
    return std::span<const std::uint8_t>(payload).subspan(off,
                                                          s.slice_bytes[slice]);
  }

  // Index of the segment ending at q, or throws listing the boundaries.
  std::size_t segment_ending_at(float q) const {
    for (std::size_t k = 0; k < header.segments.size(); ++k) {
      if (header.segments[k].q_to == q) return k;
    }
    throw QualityError("q=" + std::to_string(q) +
                       " is not a boundary of this container; available: " +
                       boundary_list());
  }

  void check_boundary(float q) const {
    if (q == 0.0f) return;
    segment_ending_at(q);
  }

  std::string boundary_list() const {
    std::string s;
    char buf[32];
    for (float b : boundaries()) {
      std::snprintf(buf, sizeof buf, "%g", static_cast<double>(b));
      if (!s.empty()) s += ",";
      s += buf;
    }
    return s;
  }

  void validate() const {
    if (header.base_present != 1) {
      throw FormatError("container without a base layer is not supported");
    }
    if (header.base_bytes.empty()) throw FormatError("container has zero slices");
    if (header.width == 0 || header.height == 0 ||
        header.padded_width < header.width ||
        header.padded_height < header.height) {
      throw FormatError("container image dimensions are inconsistent");
    }
    std::size_t expected = base_end();
    float prev = 0.0f;
    for (const Segment& s : header.segments) {
      if (s.q_from != prev) {
        throw FormatError("segment intervals are not contiguous from 0");
      }
      if (!(s.q_to > s.q_from) || s.q_to > 100.0f) {
        throw FormatError("segment interval is empty or exceeds 100");
      }
      if (s.slice_bytes.size() != slices()) {
        throw FormatError("segment slice count differs from the base layer");
      }
      if (s.offset != expected) {
        throw FormatError("segment offset " + std::to_string(s.offset) +
                          " does not follow the previous segment at " +
                          std::to_string(expected));
      }
      expected += s.total_bytes();
      prev = s.q_to;
    }
    if (expected != payload.size()) {
      throw FormatError("payload is " + std::to_string(payload.size()) +
                        " bytes but the header accounts for " +
                        std::to_string(expected));
    }
  }

  std::vector<std::uint8_t> serialize() const {
    validate();
    ByteWriter out;
    out.tag("PLC1");
    out.u16(kContainerVersion);
    out.u32(header.width);
    out.u32(header.height);
    out.u32(header.padded_width);
    out.u32(header.padded_height);
    out.u64(header.arch_fingerprint);
    out.u64(header.weights_checksum);
    out.u32(header.z_bytes);
    out.u8(header.base_present);
    out.u16(static_cast<std::uint16_t>(header.base_bytes.size()));
    for (auto b : header.base_bytes) out.u32(b);
    out.u16(static_cast<std::uint16_t>(header.segments.size()));
    for (const Segment& s : header.segments) {
      out.f32(s.q_from);
      out.f32(s.q_to);
      out.u32(s.offset);
      for (auto b : s.slice_bytes) out.u32(b);
    }
    out.bytes(payload);
    return out.take();
  }

  static BitstreamContainer parse(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, "container");
    if (!in.tag("PLC1")) throw FormatError("not a PLC1 container");
    const std::uint16_t version = in.u16();
    if (version != kContainerVersion) {
      throw VersionError("container version " + std::to_string(version) +
                         " unsupported");
    }
    BitstreamContainer c;
    ContainerHeader& h = c.header;
    h.width = in.u32();
    h.height = in.u32();
    h.padded_width = in.u32();
    h.padded_height = in.u32();
    h.arch_fingerprint = in.u64();
    h.weights_checksum = in.u64();
    h.z_bytes = in.u32();
    h.base_present = in.u8();
    const std::uint16_t slices = in.u16();
    h.base_bytes.resize(slices);
    for (auto& b : h.base_bytes) b = in.u32();
    const std::uint16_t nseg = in.u16();
    for (std::uint16_t k = 0; k < nseg; ++k) {
      Segment s;
      s.q_from = in.f32();
      s.q_to = in.f32();
      s.offset = in.u32();
      s.slice_bytes.resize(slices);
      for (auto& b : s.slice_bytes) b = in.u32();
      h.segments.push_back(std::move(s));
    }
    const auto rest = in.bytes(in.remaining());
    c.payload.assign(rest.begin(), rest.end());
    c.validate();
    return c;
  }

  std::size_t serialized_size() const {
    return 4 + 2 + 4 * 4 + 8 + 8 + 4 + 1 + 2 + 4 * slices() + 2 +
           header.segments.size() * (4 + 4 + 4 + 4 * slices()) + payload.size();
  }

  friend bool operator==(const BitstreamContainer&,
                         const BitstreamContainer&) = default;
};

// Keeps the segments up to quality q; q must be 0 or a boundary.
inline BitstreamContainer extract_substream(const BitstreamContainer& c,
                                            Quality q) {
  c.check_boundary(q.value());
  BitstreamContainer out;
  out.header = c.header;
  std::size_t keep = 0;
  while (keep < c.header.segments.size() &&
         c.header.segments[keep].q_to <= q.value()) {
    ++keep;
  }
  out.header.segments.resize(keep);
  const std::size_t end = keep == 0 ? c.base_end()
                                    : c.header.segments[keep - 1].offset +
                                          c.header.segments[keep - 1].total_bytes();
  out.payload.assign(c.payload.begin(),
                     c.payload.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

// The segments extract_substream(c, q) drops, in order.
inline std::vector<DeltaSegment> dropped_segments(const BitstreamContainer& c,
                                                  Quality q) {
  c.check_boundary(q.value());
  std::vector<DeltaSegment> out;
  for (std::size_t k = 0; k < c.header.segments.size(); ++k) {
    const Segment& s = c.header.segments[k];
    if (s.q_to <= q.value()) continue;
    DeltaSegment d{s.q_from, s.q_to, {}};
    for (std::size_t i = 0; i < c.slices(); ++i) {
      const auto b = c.segment_stream(k, i);
      d.slices.emplace_back(b.begin(), b.end());
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline BitstreamContainer append_delta(const BitstreamContainer& c,
                                       const DeltaSegment& d) {
  if (d.q_from != c.max_quality()) {
    throw QualityError("segment starts at q=" + std::to_string(d.q_from) +
                       " but the container ends at q=" +
                       std::to_string(c.max_quality()));
  }
  if (!(d.q_to > d.q_from) || d.q_to > 100.0f) {
    throw QualityError("segment interval (" + std::to_string(d.q_from) + ", " +
                       std::to_string(d.q_to) + "] is invalid");
  }
  if (d.slices.size() != c.slices()) {
    throw FormatError("segment has " + std::to_string(d.slices.size()) +
                      " slices, container has " + std::to_string(c.slices()));
  }
  BitstreamContainer out = c;
  Segment s{d.q_from, d.q_to, static_cast<std::uint32_t>(c.payload.size()), {}};
  for (const auto& bytes : d.slices) {
    s.slice_bytes.push_back(static_cast<std::uint32_t>(bytes.size()));
    out.payload.insert(out.payload.end(), bytes.begin(), bytes.end());
  }
  out.header.segments.push_back(std::move(s));
  return out;
}

}  // namespace plc
