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

#ifndef RDONET_ANALYSIS_H_
#define RDONET_ANALYSIS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rdonet/arch_config.h"
#include "rdonet/codec.h"
#include "rdonet/feature_map.h"

namespace rdonet {

// ---- Quality metrics on [0, 1] images of equal shape ----

double Mse(const FeatureMap& a, const FeatureMap& b);
// 10 log10(1 / MSE); +infinity for identical images.
double Psnr(const FeatureMap& a, const FeatureMap& b);

// Five-scale MS-SSIM: 11-tap Gaussian window (sigma 1.5), valid filtering,
// K1 = 0.01, K2 = 0.03, scale weights 0.0448/0.2856/0.3001/0.2363/0.1333,
// 2x2 average pooling between scales (odd sides zero-padded), computed per
// channel and averaged. Both sides must be at least 176 pixels.
inline constexpr int kMsSsimMinSide = 176;
double MsSsim(const FeatureMap& a, const FeatureMap& b);
// -10 log10(1 - v); +infinity for v = 1.
double MsSsimDb(double v);

// ---- Bjontegaard deltas ----

struct RdPoint {
  double rate = 0.0;     // bits per pixel
  double quality = 0.0;  // dB
};
using RdCurve = std::vector<RdPoint>;

// Average rate difference in percent at equal quality (negative: `test` is
// cheaper). Cubic least-squares fit of ln(rate) over quality, integrated
// over the common quality range.
double BdRate(const RdCurve& anchor, const RdCurve& test);
// Average quality difference in dB at equal rate.
double BdQuality(const RdCurve& anchor, const RdCurve& test);

RdCurve ReadRdCurve(const std::string& path);  // CSV: rate,quality

// ---- Complexity ----

struct ComplexityReport {
  double alpha = 0.0;
  double mac_per_pixel = 0.0;
  double ae_per_pixel = 0.0;
  double ctx_per_pixel = 0.0;        // main-latent context evaluations
  double ctx_hyper_per_pixel = 0.0;  // hyper-latent context evaluations
  bool measured = false;
};

// MACs per pixel of a complete encode (analysis, every latent space unit
// and synthesis) on a padded height x width image. Probability models are
// charged per coded position: a fraction alpha of the high-latent grid and
// 1 - alpha of the low-latent grid; everything else is counted full frame.
double CountMacs(const ArchConfig& arch, int height, int width, double alpha);

// Affine complexity model for a padded height x width image.
ComplexityReport AnalyticComplexity(const ArchConfig& arch, int height,
                                    int width, double alpha);

// Per-pixel counters of an instrumented run over a padded image.
ComplexityReport MeasuredComplexity(const RunStats& stats, int height,
                                    int width, double alpha);

// CSV with a header row and one row per report.
std::string ComplexityCsv(const std::vector<ComplexityReport>& rows);

}  // namespace rdonet

#endif  // RDONET_ANALYSIS_H_
