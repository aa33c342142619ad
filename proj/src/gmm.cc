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

#include "rdonet/gmm.h"

#include <algorithm>
#include <cmath>

#include "rdonet/status.h"

namespace rdonet {
namespace {

double Softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// Complementary error function, Numerical Recipes `erfcc`.
double Erfcc(double x) {
  const double z = std::fabs(x);
  const double t = 1.0 / (1.0 + 0.5 * z);
  const double ans =
      t * std::exp(-z * z - 1.26551223 +
                   t * (1.00002368 +
                   t * (0.37409196 +
                   t * (0.09678418 +
                   t * (-0.18628806 +
                   t * (0.27886807 +
                   t * (-1.13520398 +
                   t * (1.48851587 +
                   t * (-0.82215223 + t * 0.17087277)))))))));
  return x >= 0.0 ? ans : 2.0 - ans;
}

}  // namespace

GmmParams GmmFromHead(std::span<const float> head, int channels, int c,
                      float gain) {
  GmmParams p;
  double max_logit = head[c];
  for (int k = 1; k < kMixtures; ++k) {
    max_logit = std::max<double>(max_logit, head[k * channels + c]);
  }
  double sum = 0.0;
  for (int k = 0; k < kMixtures; ++k) {
    p.weight[k] = std::exp(head[k * channels + c] - max_logit);
    sum += p.weight[k];
  }
  for (int k = 0; k < kMixtures; ++k) {
    p.weight[k] /= sum;
    p.mean[k] = static_cast<double>(head[(3 + k) * channels + c]) * gain;
    p.scale[k] = std::max(Softplus(head[(6 + k) * channels + c]) * gain,
                          static_cast<double>(kScaleFloor));
  }
  return p;
}

double GaussianCdf(double x) { return 0.5 * Erfcc(-x * M_SQRT1_2); }

int CdfTable::Find(uint32_t value) const {
  // Largest s with cum[s] <= value.
  auto it = std::upper_bound(cum.begin(), cum.end(), value);
  return static_cast<int>(it - cum.begin()) - 1;
}

double CdfTable::Bits(int index) const {
  return kFreqBits - std::log2(static_cast<double>(freq(index)));
}

CdfTable Discretize(const GmmParams& params) {
  // Mixture CDF at the 255 interior interval boundaries -127.5 .. 126.5.
  std::array<double, kAlphabetSize + 1> edge;
  edge[0] = 0.0;
  edge[kAlphabetSize] = 1.0;
  double total_weight = 0.0;
  for (int k = 0; k < kMixtures; ++k) total_weight += params.weight[k];
  for (int b = 1; b < kAlphabetSize; ++b) {
    const double x = SymbolValue(b) - 0.5;
    double cdf = 0.0;
    for (int k = 0; k < kMixtures; ++k) {
      cdf += params.weight[k] *
             GaussianCdf((x - params.mean[k]) / params.scale[k]);
    }
    edge[b] = std::clamp(cdf / total_weight, 0.0, 1.0);
  }

  constexpr uint32_t kSpread = kFreqTotal - kAlphabetSize;
  std::array<uint32_t, kAlphabetSize> freq;
  uint32_t used = 0;
  int mps = 0;
  double mps_mass = -1.0;
  for (int s = 0; s < kAlphabetSize; ++s) {
    const double mass = std::max(edge[s + 1] - edge[s], 0.0);
    const uint32_t f = static_cast<uint32_t>(std::floor(mass * kSpread));
    freq[s] = 1 + f;
    used += f;
    if (mass > mps_mass) {
      mps_mass = mass;
      mps = s;
    }
  }
  if (used > kSpread) {
    throw Error(ErrorCode::kInternal, "discretized mass exceeds table total");
  }
  freq[mps] += kSpread - used;

  CdfTable table;
  for (int s = 0; s < kAlphabetSize; ++s) table.cum[s + 1] = table.cum[s] + freq[s];
  return table;
}

}  // namespace rdonet
