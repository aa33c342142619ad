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

#include "rdonet/entropy_model.h"

#include <algorithm>

#include "rdonet/range_coder.h"
#include "rdonet/status.h"

namespace rdonet {
namespace {

float GainOf(const SegmentModel& model, int c) {
  return model.decoder_gain.empty() ? 1.0f : model.decoder_gain[c];
}

void CheckModel(const SegmentModel& model, Shape shape) {
  if (model.context == nullptr || model.head == nullptr) {
    throw Error(ErrorCode::kInternal, "segment model is incomplete");
  }
  if (!model.decoder_gain.empty() &&
      model.decoder_gain.size() != static_cast<size_t>(shape.channels)) {
    throw Error(ErrorCode::kShape, "gain vector does not match latent channels");
  }
  const FeatureMap* h = model.hyper_features;
  if (h != nullptr && (h->height() != shape.height || h->width() != shape.width)) {
    throw Error(ErrorCode::kShape, "hyper features do not match latent grid");
  }
}

}  // namespace

std::vector<float> HeadOutputAt(const SegmentModel& model,
                                const FeatureMap& decoded, int y, int x,
                                uint64_t* macs) {
  const ConvWeights& ctx = model.context->single_conv();
  const int hyper = model.hyper_features ? model.hyper_features->channels() : 0;
  FeatureMap feature(ctx.out + hyper, 1, 1);
  Conv2dAt(ctx, decoded, y, x, feature.values().subspan(0, ctx.out));
  if (macs) *macs += ctx.MacsPerOutput();
  for (int c = 0; c < hyper; ++c) {
    feature.at(ctx.out + c, 0, 0) = model.hyper_features->at(c, y, x);
  }
  FeatureMap out = model.head->Forward(feature, nullptr, macs);
  return {out.values().begin(), out.values().end()};
}

GmmParams GmmParamsAt(const SegmentModel& model, const FeatureMap& decoded,
                      int y, int x, int channel, uint64_t* macs) {
  std::vector<float> head = HeadOutputAt(model, decoded, y, x, macs);
  return GmmFromHead(head, decoded.channels(), channel, GainOf(model, channel));
}

CodedSegment EncodeSegment(const QuantizedLatent& q, const SegmentModel& model,
                           CallCounters* counters, uint64_t* macs) {
  CheckModel(model, q.shape);
  const int channels = q.shape.channels;
  // The context only ever reads causal positions, so the complete
  // dequantized latent gives the same features the decoder sees.
  FeatureMap decoded(q.shape);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < q.shape.height; ++y) {
      for (int x = 0; x < q.shape.width; ++x) {
        decoded.at(c, y, x) = DequantizeValue(q.at(c, y, x), model.decoder_gain, c);
      }
    }
  }
  RangeEncoder enc;
  CodedSegment seg;
  for (int y = 0; y < q.shape.height; ++y) {
    for (int x = 0; x < q.shape.width; ++x) {
      if (!q.mask.at(y, x)) continue;
      std::vector<float> head = HeadOutputAt(model, decoded, y, x, macs);
      for (int c = 0; c < channels; ++c) {
        const int v = q.at(c, y, x);
        if (v < kMinSymbol || v > kMaxSymbol) {
          throw Error(ErrorCode::kInternal, "symbol outside the alphabet");
        }
        const CdfTable table =
            Discretize(GmmFromHead(head, channels, c, GainOf(model, c)));
        enc.Encode(table, SymbolIndex(v));
        seg.estimated_bits += table.Bits(SymbolIndex(v));
      }
      if (counters) {
        counters->ae_calls += channels;
        (model.main ? counters->ctx_calls_main : counters->ctx_calls_hyper) += 1;
      }
    }
  }
  seg.bytes = enc.Finish();
  return seg;
}

QuantizedLatent DecodeSegment(std::span<const uint8_t> bytes, Shape shape,
                              const LatentMask& mask, const SegmentModel& model,
                              int segment, CallCounters* counters,
                              uint64_t* macs) {
  CheckModel(model, shape);
  if (mask.height != shape.height || mask.width != shape.width) {
    throw Error(ErrorCode::kShape, "mask resolution does not match latent");
  }
  QuantizedLatent q;
  q.shape = shape;
  q.mask = mask;
  q.symbols.assign(shape.size(), 0);
  FeatureMap decoded(shape);
  RangeDecoder dec(bytes, segment);
  const int channels = shape.channels;
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      if (!mask.at(y, x)) continue;
      std::vector<float> head = HeadOutputAt(model, decoded, y, x, macs);
      for (int c = 0; c < channels; ++c) {
        const CdfTable table =
            Discretize(GmmFromHead(head, channels, c, GainOf(model, c)));
        const int16_t v = static_cast<int16_t>(SymbolValue(dec.Decode(table)));
        q.symbols[(static_cast<size_t>(c) * shape.height + y) * shape.width + x] = v;
        decoded.at(c, y, x) = DequantizeValue(v, model.decoder_gain, c);
      }
      if (counters) {
        counters->ae_calls += channels;
        (model.main ? counters->ctx_calls_main : counters->ctx_calls_hyper) += 1;
      }
    }
  }
  dec.Finish();
  return q;
}

}  // namespace rdonet
