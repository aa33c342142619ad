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

#ifndef RDONET_GMM_H_
#define RDONET_GMM_H_

#include <array>
#include <cstdint>
#include <span>

namespace rdonet {

inline constexpr int kMixtures = 3;
inline constexpr int kAlphabetSize = 256;  // symbols -128..127
inline constexpr int kFreqBits = 16;
inline constexpr uint32_t kFreqTotal = 1u << kFreqBits;
inline constexpr float kScaleFloor = 1e-3f;

// Three-component Gaussian mixture for one symbol, in the symbol domain.
struct GmmParams {
  std::array<double, kMixtures> weight{};
  std::array<double, kMixtures> mean{};
  std::array<double, kMixtures> scale{};
};

// Maps raw head output for channel `c` to mixture parameters. `head` holds
// 9*channels values: weight logits at [k*C + c], means at [(3+k)*C + c] and
// scale pre-activations at [(6+k)*C + c]. Weights are a softmax, scales a
// softplus; means and scales are then multiplied by `gain` (the value to
// symbol scale) and scales floored at kScaleFloor.
GmmParams GmmFromHead(std::span<const float> head, int channels, int c,
                      float gain);

// Standard normal CDF through the Numerical Recipes erfc approximation
// (fractional error below 1.2e-7 everywhere).
double GaussianCdf(double x);

// 16-bit cumulative frequency table over the 256-symbol alphabet.
struct CdfTable {
  std::array<uint32_t, kAlphabetSize + 1> cum{};  // cum[0] = 0, cum[256] = 2^16

  uint32_t freq(int index) const { return cum[index + 1] - cum[index]; }
  // Index s with cum[s] <= value < cum[s + 1].
  int Find(uint32_t value) const;
  // -log2 of the coded probability of alphabet index s.
  double Bits(int index) const;
};

// Interval masses p(v) = sum_k w_k [Phi((v+.5-mu)/s) - Phi((v-.5-mu)/s)],
// with tails folded into -128 and 127, quantized as
// freq = 1 + floor(p * (2^16 - 256)); the remainder goes to the most
// probable symbol (lowest index on ties).
CdfTable Discretize(const GmmParams& params);

// Symbol value <-> table index.
inline int SymbolIndex(int v) { return v + 128; }
inline int SymbolValue(int index) { return index - 128; }

}  // namespace rdonet

#endif  // RDONET_GMM_H_
