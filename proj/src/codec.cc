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

#include "rdonet/codec.h"

#include <algorithm>
#include <string>

#include "rdonet/status.h"

namespace rdonet {
namespace {

int CeilDiv(int a, int b) { return (a + b - 1) / b; }

struct UnitNets {
  const Network& ha;
  const Network& hs;
  const Network& hctx;
  const Network& hhead;
  const Network& ctx;
  const Network& head;
};

UnitNets NetsOf(const Codec& codec, const std::string& unit) {
  return {codec.net(unit + ".ha"),   codec.net(unit + ".hs"),
          codec.net(unit + ".hctx"), codec.net(unit + ".hhead"),
          codec.net(unit + ".ctx"),  codec.net(unit + ".head")};
}

SegmentModel HyperModel(const UnitNets& n) {
  SegmentModel m;
  m.context = &n.hctx;
  m.head = &n.hhead;
  m.main = false;
  return m;
}

SegmentModel MainModel(const UnitNets& n, const FeatureMap& psi,
                       const std::vector<float>& decoder_gain) {
  SegmentModel m;
  m.context = &n.ctx;
  m.head = &n.head;
  m.hyper_features = &psi;
  m.decoder_gain = decoder_gain;
  return m;
}

FeatureMap HyperFeatures(const UnitNets& n, const FeatureMap& z_hat,
                         const FeatureMap* cond, Shape latent, uint64_t* macs) {
  FeatureMap psi = n.hs.Forward(z_hat, cond, macs);
  if (psi.height() == latent.height && psi.width() == latent.width) return psi;
  return Crop(psi, latent.height, latent.width);
}

// Hyper segment then main segment of one latent space unit; returns ŷ.
FeatureMap EncodeUnit(const UnitNets& n, const FeatureMap& latent,
                      const FeatureMap* cond, const LatentMask& mask,
                      const GainVectors& gain, int hyper_seg, LatentCode* code) {
  RunStats& st = code->stats;
  const FeatureMap z = n.ha.Forward(latent, cond, &st.macs);
  const std::vector<float> unit(z.channels(), 1.0f);
  QuantizedLatent zq = Quantize(z, unit, LatentMask::All(z.height(), z.width(), true));
  st.saturated += zq.saturated;
  CodedSegment hs = EncodeSegment(zq, HyperModel(n), &st.counters, &st.macs);
  const FeatureMap psi =
      HyperFeatures(n, Dequantize(zq, unit), cond, latent.shape(), &st.macs);

  QuantizedLatent q = Quantize(latent, gain.encoder, mask);
  st.saturated += q.saturated;
  CodedSegment ms = EncodeSegment(q, MainModel(n, psi, gain.decoder),
                                  &st.counters, &st.macs);
  FeatureMap y_hat = Dequantize(q, gain.decoder);

  code->segments[hyper_seg] = std::move(hs.bytes);
  code->segments[hyper_seg + 1] = std::move(ms.bytes);
  st.estimated_bits[hyper_seg] = hs.estimated_bits;
  st.estimated_bits[hyper_seg + 1] = ms.estimated_bits;
  code->symbols[hyper_seg] = std::move(zq);
  code->symbols[hyper_seg + 1] = std::move(q);
  return y_hat;
}

FeatureMap DecodeUnit(const UnitNets& n, const Segments& segments,
                      Shape latent, Shape hyper, const FeatureMap* cond,
                      const LatentMask& mask, const GainVectors& gain,
                      int hyper_seg, LatentCode* code) {
  RunStats& st = code->stats;
  QuantizedLatent zq = DecodeSegment(
      segments[hyper_seg], hyper, LatentMask::All(hyper.height, hyper.width, true),
      HyperModel(n), hyper_seg + 1, &st.counters, &st.macs);
  const std::vector<float> unit(hyper.channels, 1.0f);
  const FeatureMap psi =
      HyperFeatures(n, Dequantize(zq, unit), cond, latent, &st.macs);
  QuantizedLatent q = DecodeSegment(segments[hyper_seg + 1], latent, mask,
                                    MainModel(n, psi, gain.decoder),
                                    hyper_seg + 2, &st.counters, &st.macs);
  FeatureMap y_hat = Dequantize(q, gain.decoder);
  code->symbols[hyper_seg] = std::move(zq);
  code->symbols[hyper_seg + 1] = std::move(q);
  return y_hat;
}

void CheckMask(const MaskGrid& mask, Shape high) {
  if (mask.rows() * 2 != high.height || mask.cols() * 2 != high.width) {
    throw Error(ErrorCode::kStructure,
                "mask grid " + std::to_string(mask.rows()) + "x" +
                    std::to_string(mask.cols()) + " does not match latent " +
                    std::to_string(high.height) + "x" + std::to_string(high.width));
  }
}

}  // namespace

Codec::Codec(const NetworkGraph& graph, GainTable gains)
    : graph_(graph), gains_(std::move(gains)) {
  gains_.Validate();
  if (gains_.channels != graph_.latent_channels()) {
    throw Error(ErrorCode::kConfig,
                "gain table has " + std::to_string(gains_.channels) +
                    " channels, latent has " +
                    std::to_string(graph_.latent_channels()));
  }
}

LatentShapes ShapesFor(const Codec& codec, int padded_height, int padded_width) {
  const int c = codec.graph().latent_channels();
  const int ch = codec.graph().hyper_channels();
  LatentShapes s;
  s.high = {c, padded_height / 16, padded_width / 16};
  s.low = {c, padded_height / 32, padded_width / 32};
  s.hyper_high = {ch, CeilDiv(s.high.height, 8), CeilDiv(s.high.width, 8)};
  s.hyper_low = {ch, CeilDiv(s.low.height, 8), CeilDiv(s.low.width, 8)};
  return s;
}

LatentCode EncodeLatents(const Codec& codec, const FeatureMap& y,
                         const MaskGrid& mask, RateOperatingPoint op) {
  LatentCode code;
  const UnitNets ls1 = NetsOf(codec, "ls1");
  const GainVectors g1 = InterpolateGain(codec.gains(), op, kHighLatent);
  if (codec.baseline()) {
    const LatentMask all = LatentMask::All(y.height(), y.width(), true);
    code.synthesis_input = EncodeUnit(ls1, y, nullptr, all, g1, kHyper1, &code);
    return code;
  }
  CheckMask(mask, y.shape());
  const LatentMasks masks = DeriveLatentMasks(mask, y.height(), y.width(),
                                              y.height() / 2, y.width() / 2);
  uint64_t* macs = &code.stats.macs;
  const UnitNets ls2 = NetsOf(codec, "ls2");
  const GainVectors g2 = InterpolateGain(codec.gains(), op, kLowLatent);

  const FeatureMap y2 = codec.net("ls2.down").Forward(y, nullptr, macs);
  const FeatureMap y2_hat =
      EncodeUnit(ls2, y2, nullptr, masks.low, g2, kHyper2, &code);
  const FeatureMap u = codec.net("ls2.up").Forward(y2_hat, nullptr, macs);
  const FeatureMap fused = codec.net("ls1.fuse").Forward(y, &u, macs);
  const FeatureMap y1_hat =
      EncodeUnit(ls1, fused, &u, masks.high, g1, kHyper1, &code);
  code.synthesis_input = codec.net("ls1.combine").Forward(y1_hat, &u, macs);
  return code;
}

LatentCode DecodeLatents(const Codec& codec, const Segments& segments,
                         Shape high, const MaskGrid& mask,
                         RateOperatingPoint op) {
  LatentCode code;
  code.segments = segments;
  const LatentShapes shapes = ShapesFor(codec, high.height * 16, high.width * 16);
  const UnitNets ls1 = NetsOf(codec, "ls1");
  const GainVectors g1 = InterpolateGain(codec.gains(), op, kHighLatent);
  if (codec.baseline()) {
    for (int i : {kHyper2, kLatent2}) {
      if (!segments[i].empty()) {
        throw Error(ErrorCode::kCorrupt, "baseline stream has a low-latent segment",
                    i + 1);
      }
    }
    const LatentMask all = LatentMask::All(high.height, high.width, true);
    code.synthesis_input = DecodeUnit(ls1, segments, shapes.high, shapes.hyper_high,
                                      nullptr, all, g1, kHyper1, &code);
    return code;
  }
  CheckMask(mask, high);
  const LatentMasks masks = DeriveLatentMasks(mask, high.height, high.width,
                                              high.height / 2, high.width / 2);
  uint64_t* macs = &code.stats.macs;
  const UnitNets ls2 = NetsOf(codec, "ls2");
  const GainVectors g2 = InterpolateGain(codec.gains(), op, kLowLatent);

  const FeatureMap y2_hat = DecodeUnit(ls2, segments, shapes.low, shapes.hyper_low,
                                       nullptr, masks.low, g2, kHyper2, &code);
  const FeatureMap u = codec.net("ls2.up").Forward(y2_hat, nullptr, macs);
  const FeatureMap y1_hat = DecodeUnit(ls1, segments, shapes.high,
                                       shapes.hyper_high, &u, masks.high, g1,
                                       kHyper1, &code);
  code.synthesis_input = codec.net("ls1.combine").Forward(y1_hat, &u, macs);
  return code;
}

FeatureMap Synthesize(const Codec& codec, const FeatureMap& synthesis_input,
                      uint64_t* macs) {
  FeatureMap x = codec.net("fs").Forward(synthesis_input, nullptr, macs);
  for (float& v : x.values()) v = std::clamp(v, 0.0f, 1.0f);
  return x;
}

FeatureMap AnalyzeImage(const Codec& codec, const FeatureMap& image,
                        uint64_t* macs) {
  if (image.channels() != 3) {
    throw Error(ErrorCode::kShape, "images must have 3 channels");
  }
  const Dims p = PaddedDims(image.width(), image.height());
  const FeatureMap padded = (p.width == image.width() && p.height == image.height())
                                ? image
                                : ReflectPad(image, p.height, p.width);
  return codec.net("fa").Forward(padded, nullptr, macs);
}

EncodedImage EncodeImage(const Codec& codec, const FeatureMap& image,
                         const MaskGrid& mask, RateOperatingPoint op,
                         DistortionMode mode) {
  if (!op.Valid()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid rate operating point");
  }
  const MaskGrid expect = MaskGridFor(image.width(), image.height());
  if (mask.rows() != expect.rows() || mask.cols() != expect.cols()) {
    throw Error(ErrorCode::kStructure, "mask grid does not match image size");
  }
  uint64_t macs = 0;
  const FeatureMap y = AnalyzeImage(codec, image, &macs);
  LatentCode code = EncodeLatents(codec, y, mask, op);
  code.stats.macs += macs;
  FeatureMap x_hat = Synthesize(codec, code.synthesis_input, &code.stats.macs);

  EncodedImage out;
  out.stream.header = {static_cast<uint32_t>(image.width()),
                       static_cast<uint32_t>(image.height()), op, mode};
  out.stream.mask = codec.baseline() ? MaskGrid::AllHigh(mask.rows(), mask.cols())
                                     : mask;
  out.stream.segments = std::move(code.segments);
  out.symbols = std::move(code.symbols);
  out.reconstruction = Crop(x_hat, image.height(), image.width());
  out.stats = code.stats;
  return out;
}

DecodedImage DecodeImage(const Codec& codec, const Stream& stream) {
  const StreamHeader& h = stream.header;
  const Dims p = PaddedDims(h.width, h.height);
  if (codec.baseline() &&
      stream.mask.CountHigh() != stream.mask.cells()) {
    throw Error(ErrorCode::kCorrupt, "baseline streams carry an all-HIGH mask");
  }
  const LatentShapes shapes = ShapesFor(codec, p.height, p.width);
  LatentCode code =
      DecodeLatents(codec, stream.segments, shapes.high, stream.mask, h.op);
  FeatureMap x_hat = Synthesize(codec, code.synthesis_input, &code.stats.macs);
  DecodedImage out;
  out.image = Crop(x_hat, h.height, h.width);
  out.symbols = std::move(code.symbols);
  out.stats = code.stats;
  return out;
}

}  // namespace rdonet
