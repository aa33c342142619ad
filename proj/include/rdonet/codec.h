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

#ifndef RDONET_CODEC_H_
#define RDONET_CODEC_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "rdonet/container.h"
#include "rdonet/entropy_model.h"
#include "rdonet/feature_map.h"
#include "rdonet/latent.h"
#include "rdonet/network.h"

namespace rdonet {

struct RunStats {
  CallCounters counters;
  uint64_t macs = 0;
  std::array<double, kNumSegments> estimated_bits{};
  int saturated = 0;  // symbols clamped into the alphabet
};

// A loaded model plus its gain table.
class Codec {
 public:
  // `graph` must outlive the codec.
  Codec(const NetworkGraph& graph, GainTable gains);

  const NetworkGraph& graph() const { return graph_; }
  const GainTable& gains() const { return gains_; }
  bool baseline() const { return graph_.model() == ModelKind::kBaseline; }
  const Network& net(const std::string& name) const { return graph_.net(name); }

 private:
  const NetworkGraph& graph_;
  GainTable gains_;
};

// Latent grids for a padded image.
struct LatentShapes {
  Shape high;        // C x H/16 x W/16
  Shape low;         // C x H/32 x W/32
  Shape hyper_high;  // ceil(high / 8)
  Shape hyper_low;   // ceil(low / 8)
};
LatentShapes ShapesFor(const Codec& codec, int padded_height, int padded_width);

// Symbols in segment order: hyper-2, latent-2, hyper-1, latent-1.
using SegmentSymbols = std::array<QuantizedLatent, kNumSegments>;

struct LatentCode {
  Segments segments;
  SegmentSymbols symbols;
  FeatureMap synthesis_input;  // what f_s receives
  RunStats stats;
};

// Everything after the analysis transform: `y` is f_a of the padded image.
// Baseline models ignore `mask` and code every position.
LatentCode EncodeLatents(const Codec& codec, const FeatureMap& y,
                         const MaskGrid& mask, RateOperatingPoint op);

// Inverse of EncodeLatents; `high` is the shape of y.
LatentCode DecodeLatents(const Codec& codec, const Segments& segments,
                         Shape high, const MaskGrid& mask,
                         RateOperatingPoint op);

// f_s followed by clamping to [0, 1].
FeatureMap Synthesize(const Codec& codec, const FeatureMap& synthesis_input,
                      uint64_t* macs = nullptr);

struct EncodedImage {
  Stream stream;
  SegmentSymbols symbols;
  FeatureMap reconstruction;  // original size
  RunStats stats;
};

// `image` is 3 x H x W in [0, 1]; `mask` must match MaskGridFor(W, H).
EncodedImage EncodeImage(const Codec& codec, const FeatureMap& image,
                         const MaskGrid& mask, RateOperatingPoint op,
                         DistortionMode mode = DistortionMode::kMse);

// Pads and runs f_a, counting MACs into `macs` when given.
FeatureMap AnalyzeImage(const Codec& codec, const FeatureMap& image,
                        uint64_t* macs = nullptr);

struct DecodedImage {
  FeatureMap image;  // original size
  SegmentSymbols symbols;
  RunStats stats;
};
DecodedImage DecodeImage(const Codec& codec, const Stream& stream);

}  // namespace rdonet

#endif  // RDONET_CODEC_H_
