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

#ifndef RDONET_LATENT_H_
#define RDONET_LATENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdonet/feature_map.h"

namespace rdonet {

// Per 32x32 image block: coded in the high (1/16) or low (1/32) latent space.
class MaskGrid {
 public:
  MaskGrid() = default;
  MaskGrid(int rows, int cols, bool high = true);

  static MaskGrid AllHigh(int rows, int cols) { return MaskGrid(rows, cols, true); }
  static MaskGrid AllLow(int rows, int cols) { return MaskGrid(rows, cols, false); }
  // Cell i (raster order) is HIGH iff bit i of `bits` is set.
  static MaskGrid FromBits(int rows, int cols, uint64_t bits);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cells() const { return rows_ * cols_; }
  bool high(int r, int c) const { return cells_[r * cols_ + c] != 0; }
  void set_high(int r, int c, bool high) { cells_[r * cols_ + c] = high; }
  int CountHigh() const;

  bool operator==(const MaskGrid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<uint8_t> cells_;
};

// Transmission mask at one latent resolution; true = position is coded.
struct LatentMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> coded;

  static LatentMask All(int height, int width, bool coded);
  bool at(int y, int x) const { return coded[y * width + x] != 0; }
  int CountCoded() const;
  bool operator==(const LatentMask&) const = default;
};

struct LatentMasks {
  LatentMask high;  // 1/16 grid, 2x2 positions per mask cell
  LatentMask low;   // 1/32 grid, one position per mask cell
};

// A HIGH cell codes its 2x2 high-latent positions and masks its low
// position; a LOW cell the converse.
LatentMasks DeriveLatentMasks(const MaskGrid& mask, int high_height,
                              int high_width, int low_height, int low_width);

inline constexpr int kNumSupportPoints = 6;
inline constexpr std::array<double, kNumSupportPoints> kSupportLambdas = {
    0.000625, 0.0025, 0.01, 0.02, 0.04, 0.08};

enum LatentSpace { kHighLatent = 0, kLowLatent = 1 };

struct GainVectors {
  std::vector<float> encoder;
  std::vector<float> decoder;
};

struct GainTable {
  int channels = 0;
  // points[i][space]
  std::array<std::array<GainVectors, 2>, kNumSupportPoints> points;

  void Validate() const;
};

// Reference ladder: every channel of both latent spaces uses
// base * 100^(i/5) at support point i (two decades), encoder = decoder.
inline constexpr double kReferenceGainBase = 0.5;
GainTable ReferenceGainTable(int channels, double base = kReferenceGainBase);

GainTable ReadGainTable(const std::filesystem::path& path);
void WriteGainTable(const GainTable& table, const std::filesystem::path& path);

// Support index plus interpolation coefficient t = t_code / 255.
struct RateOperatingPoint {
  int index = 0;
  uint8_t t_code = 0;

  double t() const { return t_code / 255.0; }
  bool Valid() const {
    return index >= 0 && index < kNumSupportPoints &&
           (index < kNumSupportPoints - 1 || t_code == 0);
  }
  bool operator==(const RateOperatingPoint&) const = default;
};

// Geometric position of lambda between support points, t rounded to 8 bits.
RateOperatingPoint OperatingPointForLambda(double lambda);
// Parses "i:t" with t in [0,1], e.g. "2:0.5".
RateOperatingPoint ParseOperatingPoint(const std::string& text);

// g = g_i^(1-t) * g_{i+1}^t per channel; endpoints are returned exactly.
GainVectors InterpolateGain(const GainTable& table, RateOperatingPoint op,
                            LatentSpace space);

struct QuantizedLatent {
  Shape shape;
  std::vector<int16_t> symbols;  // same layout as FeatureMap
  LatentMask mask;
  int saturated = 0;  // values clamped into the alphabet

  int16_t at(int c, int y, int x) const {
    return symbols[(static_cast<size_t>(c) * shape.height + y) * shape.width + x];
  }
  bool operator==(const QuantizedLatent& o) const {
    return shape == o.shape && symbols == o.symbols && mask == o.mask;
  }
};

inline constexpr int kMinSymbol = -128;
inline constexpr int kMaxSymbol = 127;

// symbol = clamp(round_half_away(value * gain[c]), -128, 127); 0 if masked.
QuantizedLatent Quantize(const FeatureMap& latent, std::span<const float> gain,
                         const LatentMask& mask);
// value = symbol / gain[c]; masked positions are exactly 0.
FeatureMap Dequantize(const QuantizedLatent& q,
                      std::span<const float> decoder_gain);

}  // namespace rdonet

#endif  // RDONET_LATENT_H_
