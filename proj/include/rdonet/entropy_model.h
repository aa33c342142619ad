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

#ifndef RDONET_ENTROPY_MODEL_H_
#define RDONET_ENTROPY_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "rdonet/feature_map.h"
#include "rdonet/gmm.h"
#include "rdonet/latent.h"
#include "rdonet/network.h"

namespace rdonet {

struct CallCounters {
  uint64_t ae_calls = 0;         // coded symbols
  uint64_t ctx_calls_main = 0;   // context evaluations on main latents
  uint64_t ctx_calls_hyper = 0;  // context evaluations on hyper latents

  CallCounters& operator+=(const CallCounters& o) {
    ae_calls += o.ae_calls;
    ctx_calls_main += o.ctx_calls_main;
    ctx_calls_hyper += o.ctx_calls_hyper;
    return *this;
  }
  bool operator==(const CallCounters&) const = default;
};

// Probability model of one coded segment. Symbols at a position are
// predicted by head(concat(context(ŷ), hyper_features)) where `context` is a
// single causal conv over the dequantized latent decoded so far; without
// hyper features the head sees the context output alone.
struct SegmentModel {
  const Network* context = nullptr;
  const Network* head = nullptr;
  const FeatureMap* hyper_features = nullptr;
  std::span<const float> decoder_gain;  // empty: unit gain
  bool main = true;                     // counted as main or hyper context call
};

// Raw head output (9*C values) at (y, x), reading `decoded` only at causal
// positions.
std::vector<float> HeadOutputAt(const SegmentModel& model,
                                const FeatureMap& decoded, int y, int x,
                                uint64_t* macs = nullptr);

GmmParams GmmParamsAt(const SegmentModel& model, const FeatureMap& decoded,
                      int y, int x, int channel, uint64_t* macs = nullptr);

struct CodedSegment {
  std::vector<uint8_t> bytes;
  double estimated_bits = 0.0;  // sum of -log2 p over coded symbols
};

// Raster scan over coded positions, all channels of a position in order.
// Masked positions are skipped and read as 0 by later context windows.
CodedSegment EncodeSegment(const QuantizedLatent& q, const SegmentModel& model,
                           CallCounters* counters, uint64_t* macs = nullptr);

QuantizedLatent DecodeSegment(std::span<const uint8_t> bytes, Shape shape,
                              const LatentMask& mask, const SegmentModel& model,
                              int segment, CallCounters* counters,
                              uint64_t* macs = nullptr);

// Dequantized value of a symbol, identical to Dequantize().
inline float DequantizeValue(int16_t symbol, std::span<const float> gain,
                             int c) {
  return gain.empty() ? static_cast<float>(symbol)
                      : static_cast<float>(symbol) / gain[c];
}

}  // namespace rdonet

#endif  // RDONET_ENTROPY_MODEL_H_
