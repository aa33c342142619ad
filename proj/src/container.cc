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

#include "rdonet/container.h"

#include <cstring>
#include <string>

#include "rdonet/status.h"

namespace rdonet {
namespace {

constexpr char kMagic[4] = {'R', 'D', 'O', 'N'};

void PutU32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

int Mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  return i < n ? i : period - i;
}

}  // namespace

Dims PaddedDims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  auto up = [](int n) { return (n + kPadMultiple - 1) / kPadMultiple * kPadMultiple; };
  return {up(width), up(height)};
}

MaskGrid MaskGridFor(int width, int height, bool high) {
  const Dims p = PaddedDims(width, height);
  return MaskGrid(p.height / kMaskCell, p.width / kMaskCell, high);
}

FeatureMap ReflectPad(const FeatureMap& image, int height, int width) {
  if (height < image.height() || width < image.width()) {
    throw Error(ErrorCode::kShape, "padding cannot shrink an image");
  }
  FeatureMap out(image.channels(), height, width);
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      const float* src = image.row(c, Mirror(y, image.height()));
      float* dst = out.row(c, y);
      for (int x = 0; x < width; ++x) dst[x] = src[Mirror(x, image.width())];
    }
  }
  return out;
}

size_t MaskBytes(const MaskGrid& mask) { return (mask.cells() + 7) / 8; }

std::vector<uint8_t> WriteStream(const Stream& s) {
  const StreamHeader& h = s.header;
  if (h.width == 0 || h.height == 0 || h.width > kMaxImageSide ||
      h.height > kMaxImageSide || !h.op.Valid()) {
    throw Error(ErrorCode::kBadHeader, "header fields out of range");
  }
  const MaskGrid expect = MaskGridFor(h.width, h.height);
  if (s.mask.rows() != expect.rows() || s.mask.cols() != expect.cols()) {
    throw Error(ErrorCode::kStructure, "mask grid does not match image size");
  }
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  out.push_back(kStreamVersion);
  PutU32(&out, h.width);
  PutU32(&out, h.height);
  out.push_back(static_cast<uint8_t>(h.op.index));
  out.push_back(h.op.t_code);
  out.push_back(static_cast<uint8_t>(h.distortion));

  std::vector<uint8_t> bits(MaskBytes(s.mask), 0);
  for (int i = 0; i < s.mask.cells(); ++i) {
    if (s.mask.high(i / s.mask.cols(), i % s.mask.cols())) {
      bits[i / 8] |= 0x80 >> (i % 8);
    }
  }
  out.insert(out.end(), bits.begin(), bits.end());

  for (const auto& seg : s.segments) {
    if (seg.size() > kMaxSegmentBytes) {
      throw Error(ErrorCode::kSegmentOverflow, "segment exceeds 1 GiB");
    }
    PutU32(&out, static_cast<uint32_t>(seg.size()));
    out.insert(out.end(), seg.begin(), seg.end());
  }
  return out;
}

Stream ReadStream(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an RDON stream");
  }
  if (bytes.size() < 5) throw Error(ErrorCode::kTruncated, "truncated header");
  if (bytes[4] != kStreamVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported stream version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "truncated header");
  }
  Stream s;
  StreamHeader& h = s.header;
  h.width = GetU32(&bytes[5]);
  h.height = GetU32(&bytes[9]);
  h.op.index = bytes[13];
  h.op.t_code = bytes[14];
  const uint8_t mode = bytes[15];
  if (h.width == 0 || h.height == 0 || h.width > kMaxImageSide ||
      h.height > kMaxImageSide) {
    throw Error(ErrorCode::kBadHeader, "invalid image dimensions");
  }
  if (!h.op.Valid()) throw Error(ErrorCode::kBadHeader, "invalid operating point");
  if (mode > 1) throw Error(ErrorCode::kBadHeader, "invalid distortion mode");
  h.distortion = static_cast<DistortionMode>(mode);

  size_t pos = kHeaderBytes;
  s.mask = MaskGridFor(h.width, h.height, false);
  const size_t mask_bytes = MaskBytes(s.mask);
  if (bytes.size() - pos < mask_bytes) {
    throw Error(ErrorCode::kTruncated, "truncated mask");
  }
  for (int i = 0; i < s.mask.cells(); ++i) {
    if (bytes[pos + i / 8] & (0x80 >> (i % 8))) {
      s.mask.set_high(i / s.mask.cols(), i % s.mask.cols(), true);
    }
  }
  for (size_t i = s.mask.cells(); i < mask_bytes * 8; ++i) {
    if (bytes[pos + i / 8] & (0x80 >> (i % 8))) {
      throw Error(ErrorCode::kBadHeader, "nonzero mask padding bits");
    }
  }
  pos += mask_bytes;

  for (int i = 0; i < kNumSegments; ++i) {
    if (bytes.size() - pos < 4) {
      throw Error(ErrorCode::kTruncated,
                  "truncated length of segment " + std::to_string(i + 1), i + 1);
    }
    const uint32_t len = GetU32(&bytes[pos]);
    pos += 4;
    if (len > kMaxSegmentBytes) {
      throw Error(ErrorCode::kSegmentOverflow,
                  "segment " + std::to_string(i + 1) + " declares " +
                      std::to_string(len) + " bytes",
                  i + 1);
    }
    if (bytes.size() - pos < len) {
      throw Error(ErrorCode::kTruncated,
                  "segment " + std::to_string(i + 1) + " is truncated", i + 1);
    }
    s.segments[i].assign(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
  }
  if (pos != bytes.size()) {
    throw Error(ErrorCode::kTrailingData,
                std::to_string(bytes.size() - pos) + " bytes after last segment");
  }
  return s;
}

}  // namespace rdonet
