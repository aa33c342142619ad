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

#include "rdonet/rdo.h"

#include <cmath>
#include <string>

#include "rdonet/analysis.h"
#include "rdonet/status.h"

namespace rdonet {
namespace {

FeatureMap PadForMask(const FeatureMap& image) {
  const Dims p = PaddedDims(image.width(), image.height());
  if (p.width == image.width() && p.height == image.height()) return image;
  return ReflectPad(image, p.height, p.width);
}

// True if a should be preferred over b at equal loss.
bool Preferred(const MaskGrid& a, const MaskGrid& b) {
  if (a.CountHigh() != b.CountHigh()) return a.CountHigh() < b.CountHigh();
  for (int i = 0; i < a.cells(); ++i) {
    const bool ha = a.high(i / a.cols(), i % a.cols());
    const bool hb = b.high(i / b.cols(), i % b.cols());
    if (ha != hb) return !ha;
  }
  return false;
}

}  // namespace

float BlockVariance(const FeatureMap& padded, int row, int col) {
  double sum = 0.0;
  for (int c = 0; c < padded.channels(); ++c) {
    for (int y = 0; y < kMaskCell; ++y) {
      const float* p = padded.row(c, row * kMaskCell + y) + col * kMaskCell;
      for (int x = 0; x < kMaskCell; ++x) sum += p[x];
    }
  }
  const double n = static_cast<double>(padded.channels()) * kMaskCell * kMaskCell;
  const double mean = sum / n;
  double sq = 0.0;
  for (int c = 0; c < padded.channels(); ++c) {
    for (int y = 0; y < kMaskCell; ++y) {
      const float* p = padded.row(c, row * kMaskCell + y) + col * kMaskCell;
      for (int x = 0; x < kMaskCell; ++x) {
        const double d = p[x] - mean;
        sq += d * d;
      }
    }
  }
  return static_cast<float>(sq / n);
}

MaskGrid VarianceMask(const FeatureMap& image, double threshold) {
  const FeatureMap padded = PadForMask(image);
  MaskGrid mask(padded.height() / kMaskCell, padded.width() / kMaskCell, true);
  const float limit = static_cast<float>(threshold);
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      mask.set_high(r, c, !(BlockVariance(padded, r, c) <= limit));
    }
  }
  return mask;
}

double Alpha(const MaskGrid& mask) {
  if (mask.cells() == 0) throw Error(ErrorCode::kStructure, "empty mask grid");
  return static_cast<double>(mask.CountHigh()) / mask.cells();
}

RdLoss MakeRdLoss(double distortion, double rate, double lambda) {
  if (!(distortion >= 0.0) || !(rate >= 0.0) || !(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "loss components must be non-negative");
  }
  return {distortion, rate, lambda, distortion + lambda * rate};
}

double WeightedDistortion(const FeatureMap& original, const FeatureMap& decoded,
                          DistortionMode mode) {
  const double mse = Mse(original, decoded);
  if (mode == DistortionMode::kMse) return 5.0 * mse;
  return mse + 0.1 * (1.0 - MsSsim(original, decoded));
}

MaskTrial EvaluateMask(const Codec& codec, const FeatureMap& image,
                       const MaskGrid& mask, double lambda,
                       RateOperatingPoint op, DistortionMode mode,
                       const FeatureMap* y) {
  FeatureMap analyzed;
  if (y == nullptr) {
    analyzed = AnalyzeImage(codec, image);
    y = &analyzed;
  }
  LatentCode code = EncodeLatents(codec, *y, mask, op);
  const FeatureMap x_hat =
      Crop(Synthesize(codec, code.synthesis_input), image.height(), image.width());
  Stream stream;
  stream.header = {static_cast<uint32_t>(image.width()),
                   static_cast<uint32_t>(image.height()), op, mode};
  stream.mask =
      codec.baseline() ? MaskGrid::AllHigh(mask.rows(), mask.cols()) : mask;
  stream.segments = std::move(code.segments);
  MaskTrial t;
  t.mask = mask;
  t.bytes = WriteStream(stream).size();
  const double bpp =
      8.0 * t.bytes / (static_cast<double>(image.width()) * image.height());
  t.loss = MakeRdLoss(WeightedDistortion(image, x_hat, mode), bpp, lambda);
  return t;
}

MaskSearchResult ExhaustiveMaskSearch(const Codec& codec,
                                      const FeatureMap& image, double lambda,
                                      RateOperatingPoint op,
                                      DistortionMode mode) {
  const MaskGrid shape = MaskGridFor(image.width(), image.height());
  if (shape.cells() > kMaxSearchCells) {
    throw Error(ErrorCode::kRefused,
                "exhaustive search over " + std::to_string(shape.cells()) +
                    " cells refused (limit " + std::to_string(kMaxSearchCells) +
                    ")");
  }
  const FeatureMap y = AnalyzeImage(codec, image);
  MaskSearchResult result;
  const uint64_t count = uint64_t{1} << shape.cells();
  for (uint64_t bits = 0; bits < count; ++bits) {
    MaskTrial t = EvaluateMask(
        codec, image, MaskGrid::FromBits(shape.rows(), shape.cols(), bits),
        lambda, op, mode, &y);
    ++result.encodes;
    if (result.trials.empty() || t.loss.loss < result.best.loss.loss ||
        (t.loss.loss == result.best.loss.loss && Preferred(t.mask, result.best.mask))) {
      result.best = t;
    }
    result.trials.push_back(std::move(t));
  }
  return result;
}

}  // namespace rdonet
