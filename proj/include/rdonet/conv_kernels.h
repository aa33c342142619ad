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

#ifndef RDONET_CONV_KERNELS_H_
#define RDONET_CONV_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "rdonet/feature_map.h"

namespace rdonet {

// Dense 2-D convolution with zero padding floor(k/2). Every output element is
// accumulated as bias, then + w * x over (in channel, ky, kx) in row-major
// order, skipping taps that fall outside the input or are causally masked.
// All evaluation paths share that order, so their results are bit-identical.
struct ConvWeights {
  int in = 0;
  int out = 0;
  int kernel = 1;
  int stride = 1;
  bool masked = false;
  std::vector<float> weight;    // [out][in][k][k]
  std::vector<float> weight_t;  // [in][k][k][out]
  std::vector<float> bias;      // [out]

  ConvWeights() = default;
  ConvWeights(int in, int out, int kernel, int stride, bool masked,
              std::vector<float> weight, std::vector<float> bias);

  int pad() const { return kernel / 2; }
  // Causal mask: rows above the centre, and the centre row left of centre.
  bool TapActive(int ky, int kx) const {
    if (!masked) return true;
    const int c = kernel / 2;
    return ky < c || (ky == c && kx < c);
  }
  int OutSize(int n) const { return (n + 2 * pad() - kernel) / stride + 1; }
  uint64_t MacsPerOutput() const {
    return static_cast<uint64_t>(kernel) * kernel * in * out;
  }
};

enum class ConvPath {
  kAuto,
  kSpatial,  // vectorised over output columns
  kChannel,  // vectorised over output channels
};

FeatureMap Conv2d(const ConvWeights& w, const FeatureMap& in,
                  ConvPath path = ConvPath::kAuto);

// Single output position (all output channels) of Conv2d.
void Conv2dAt(const ConvWeights& w, const FeatureMap& in, int oy, int ox,
              std::span<float> out);

// Depth-to-space: out[c][y*r+i][x*r+j] = in[c*r*r + i*r + j][y][x].
FeatureMap PixelShuffle(const FeatureMap& in, int r);

}  // namespace rdonet

#endif  // RDONET_CONV_KERNELS_H_
