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

#ifndef RDONET_RDO_H_
#define RDONET_RDO_H_

#include <cstdint>
#include <vector>

#include "rdonet/codec.h"
#include "rdonet/container.h"
#include "rdonet/feature_map.h"
#include "rdonet/latent.h"

namespace rdonet {

inline constexpr double kDefaultVarianceThreshold = 0.002;

// Zero-pass mask: each 32x32 block of the padded image whose population
// variance over all pixels of all channels is <= threshold is LOW.
MaskGrid VarianceMask(const FeatureMap& image,
                      double threshold = kDefaultVarianceThreshold);

// Population variance of the 32x32 block (row, col) over all channels, as
// compared by VarianceMask.
float BlockVariance(const FeatureMap& padded, int row, int col);

// Fraction of HIGH cells.
double Alpha(const MaskGrid& mask);

struct RdLoss {
  double distortion = 0.0;
  double rate = 0.0;  // bits per pixel
  double lambda = 0.0;
  double loss = 0.0;  // distortion + lambda * rate
};

RdLoss MakeRdLoss(double distortion, double rate, double lambda);

// 5 * MSE, or MSE + 0.1 * (1 - MS-SSIM).
double WeightedDistortion(const FeatureMap& original,
                          const FeatureMap& decoded, DistortionMode mode);

struct MaskTrial {
  MaskGrid mask;
  RdLoss loss;
  size_t bytes = 0;  // complete stream size
};

// Encodes `image` with `mask` and scores it with actual stream bytes.
// `y` may carry a precomputed analysis transform of the image.
MaskTrial EvaluateMask(const Codec& codec, const FeatureMap& image,
                       const MaskGrid& mask, double lambda,
                       RateOperatingPoint op, DistortionMode mode,
                       const FeatureMap* y = nullptr);

struct MaskSearchResult {
  MaskTrial best;
  int encodes = 0;
  std::vector<MaskTrial> trials;  // in enumeration order
};

inline constexpr int kMaxSearchCells = 16;

// Full encode of every mask; minimum loss wins, ties go to more LOW cells
// and then to the lexicographically smaller raster sequence (LOW < HIGH).
// Grids with more than kMaxSearchCells cells are refused.
MaskSearchResult ExhaustiveMaskSearch(const Codec& codec,
                                      const FeatureMap& image, double lambda,
                                      RateOperatingPoint op,
                                      DistortionMode mode);

}  // namespace rdonet

#endif  // RDONET_RDO_H_
