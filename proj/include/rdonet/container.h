// Copyright 2026 The rdonet Authors. All Rights Reserved.
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

#ifndef RDONET_CONTAINER_H_
#define RDONET_CONTAINER_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rdonet/feature_map.h"
#include "rdonet/latent.h"

namespace rdonet {

// Bitstream layout (all integers little-endian):
//
//   "RDON" | version u8 = 1 | width u32 | height u32 | support index u8 |
//   t byte u8 | distortion mode u8
//   mask: one bit per 32x32 cell of the padded image, raster order,
//         HIGH = 1, most significant bit first, zero-padded to a byte
//   4 x (length u32 | bytes) in decode order:
//         hyper-2, latent-2, hyper-1, latent-1

inline constexpr uint8_t kStreamVersion = 1;
inline constexpr size_t kHeaderBytes = 16;
inline constexpr uint32_t kMaxSegmentBytes = 1u << 30;
inline constexpr uint32_t kMaxImageSide = 1u << 16;
inline constexpr int kPadMultiple = 64;
inline constexpr int kMaskCell = 32;

enum class DistortionMode : uint8_t { kMse = 0, kCombined = 1 };

enum SegmentId { kHyper2 = 0, kLatent2 = 1, kHyper1 = 2, kLatent1 = 3 };
inline constexpr int kNumSegments = 4;
using Segments = std::array<std::vector<uint8_t>, kNumSegments>;

struct StreamHeader {
  uint32_t width = 0;
  uint32_t height = 0;
  RateOperatingPoint op;
  DistortionMode distortion = DistortionMode::kMse;

  bool operator==(const StreamHeader&) const = default;
};

struct Stream {
  StreamHeader header;
  MaskGrid mask;
  Segments segments;

  bool operator==(const Stream&) const = default;
};

struct Dims {
  int width = 0;
  int height = 0;
  bool operator==(const Dims&) const = default;
};

// Rounds both sides up to a multiple of 64.
Dims PaddedDims(int width, int height);
// Mask grid for an image of the given original size.
MaskGrid MaskGridFor(int width, int height, bool high = true);

// Mirror padding at the bottom and right edges (x[n + i] = x[n - 2 - i],
// repeated periodically for pads longer than the image).
FeatureMap ReflectPad(const FeatureMap& image, int height, int width);

std::vector<uint8_t> WriteStream(const Stream& stream);
// Rejects bad magic, unknown versions, invalid header fields, truncation
// (tagged with the 1-based segment), oversized segments and trailing bytes.
Stream ReadStream(std::span<const uint8_t> bytes);

size_t MaskBytes(const MaskGrid& mask);

}  // namespace rdonet

#endif  // RDONET_CONTAINER_H_
