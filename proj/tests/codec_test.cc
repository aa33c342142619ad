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

#include <random>

#include "gtest/gtest.h"
#include "rdonet/codec.h"
#include "rdonet/container.h"
#include "rdonet/status.h"
#include "test_util.h"

namespace rdonet {
namespace {

using testing::Model;

class CodecTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    net_ = testing::TinyModel().release();
    base_ = testing::TinyBaseline().release();
  }
  static void TearDownTestSuite() {
    delete net_;
    delete base_;
  }

  static DecodedImage RoundTrip(const Codec& codec, const EncodedImage& enc) {
    const std::vector<uint8_t> bytes = WriteStream(enc.stream);
    return DecodeImage(codec, ReadStream(bytes));
  }

  static Model* net_;
  static Model* base_;
};

Model* CodecTest::net_ = nullptr;
Model* CodecTest::base_ = nullptr;

TEST_F(CodecTest, RandomMasksRoundTripExactly) {
  std::mt19937 rng(20);
  for (int trial = 0; trial < 6; ++trial) {
    const int h = 40 + rng() % 100, w = 40 + rng() % 100;
    const FeatureMap img = trial % 2 ? testing::NoiseImage(rng, h, w)
                                     : testing::SmoothImage(h, w, trial);
    const MaskGrid grid = MaskGridFor(w, h);
    const MaskGrid mask = testing::RandomMask(rng, grid.rows(), grid.cols());
    const RateOperatingPoint op{static_cast<int>(rng() % 6),
                                static_cast<uint8_t>(rng() % 256)};
    if (!op.Valid()) continue;
    const EncodedImage enc = EncodeImage(net_->codec, img, mask, op);
    const DecodedImage dec = RoundTrip(net_->codec, enc);
    EXPECT_EQ(dec.image, enc.reconstruction);
    EXPECT_EQ(dec.symbols, enc.symbols);
    EXPECT_EQ(dec.stats.counters, enc.stats.counters);
    EXPECT_EQ(dec.image.shape(), (Shape{3, h, w}));
    for (float v : dec.image.values()) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST_F(CodecTest, MaskedPositionsCarryNoSymbols) {
  std::mt19937 rng(21);
  const FeatureMap img = testing::NoiseImage(rng, 128, 128);
  const MaskGrid mask = testing::RandomMask(rng, 4, 4);
  const EncodedImage enc = EncodeImage(net_->codec, img, mask, {3, 0});
  const QuantizedLatent& q1 = enc.symbols[kLatent1];
  const QuantizedLatent& q2 = enc.symbols[kLatent2];
  ASSERT_EQ(q1.shape, (Shape{8, 8, 8}));
  ASSERT_EQ(q2.shape, (Shape{8, 4, 4}));
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const bool high = mask.high(r, c);
      EXPECT_EQ(q2.mask.at(r, c), !high);
      for (int k = 0; k < 8; ++k) {
        if (high) EXPECT_EQ(q2.at(k, r, c), 0);
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            EXPECT_EQ(q1.mask.at(2 * r + dy, 2 * c + dx), high);
            if (!high) EXPECT_EQ(q1.at(k, 2 * r + dy, 2 * c + dx), 0);
          }
        }
      }
    }
  }
}

TEST_F(CodecTest, UniformMasksLeaveOneLatentSegmentEmpty) {
  std::mt19937 rng(22);
  const FeatureMap img = testing::NoiseImage(rng, 128, 128);
  const EncodedImage low =
      EncodeImage(net_->codec, img, MaskGrid::AllLow(4, 4), {2, 0});
  EXPECT_TRUE(low.stream.segments[kLatent1].empty());
  EXPECT_FALSE(low.stream.segments[kLatent2].empty());
  const EncodedImage high =
      EncodeImage(net_->codec, img, MaskGrid::AllHigh(4, 4), {2, 0});
  EXPECT_TRUE(high.stream.segments[kLatent2].empty());
  EXPECT_FALSE(high.stream.segments[kLatent1].empty());
  // Hyper segments are always present.
  for (const auto* e : {&low, &high}) {
    EXPECT_FALSE(e->stream.segments[kHyper1].empty());
    EXPECT_FALSE(e->stream.segments[kHyper2].empty());
  }
  EXPECT_EQ(RoundTrip(net_->codec, low).image, low.reconstruction);
  EXPECT_EQ(RoundTrip(net_->codec, high).image, high.reconstruction);
}

TEST_F(CodecTest, DamagedSegmentErrorsNameTheSegment) {
  std::mt19937 rng(23);
  const FeatureMap img = testing::NoiseImage(rng, 128, 128);
  const EncodedImage enc =
      EncodeImage(net_->codec, img, testing::RandomMask(rng, 4, 4), {1, 0});
  for (int seg = 0; seg < kNumSegments; ++seg) {
    if (enc.stream.segments[seg].empty()) continue;
    for (int variant = 0; variant < 2; ++variant) {
      Stream s = enc.stream;
      if (variant == 0) {
        s.segments[seg].pop_back();
      } else {
        s.segments[seg].push_back(0x5a);
      }
      // Also damage a later segment; the earliest one must be reported.
      if (seg + 1 < kNumSegments) s.segments[seg + 1].push_back(0);
      try {
        DecodeImage(net_->codec, s);
        ADD_FAILURE() << "segment " << seg + 1;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kCorrupt);
        EXPECT_EQ(e.segment(), seg + 1);
      }
    }
  }
}

TEST_F(CodecTest, RateFallsAsSupportIndexDecreases) {
  const FeatureMap img = testing::SmoothImage(128, 128);
  size_t prev = 0;
  for (int i = 0; i < kNumSupportPoints; ++i) {
    const EncodedImage enc =
        EncodeImage(net_->codec, img, MaskGrid::AllHigh(4, 4), {i, 0});
    const size_t bytes = WriteStream(enc.stream).size();
    EXPECT_GE(bytes, prev) << i;
    prev = bytes;
  }
}

TEST_F(CodecTest, InterpolationEndpointsMatchNeighbours) {
  std::mt19937 rng(24);
  const FeatureMap img = testing::NoiseImage(rng, 64, 128);
  const MaskGrid mask = testing::RandomMask(rng, 2, 4);
  for (int i = 1; i < kNumSupportPoints; ++i) {
    const EncodedImage a = EncodeImage(net_->codec, img, mask, {i, 0});
    const EncodedImage b = EncodeImage(net_->codec, img, mask, {i - 1, 255});
    EXPECT_EQ(a.stream.segments, b.stream.segments);
    EXPECT_EQ(a.reconstruction, b.reconstruction);
  }
}

TEST_F(CodecTest, AllHighDiffersFromBaselineByLowHyperprior) {
  std::mt19937 rng(25);
  const FeatureMap img = testing::NoiseImage(rng, 128, 192);
  const EncodedImage rdo =
      EncodeImage(net_->codec, img, MaskGrid::AllHigh(4, 6), {2, 0});
  const EncodedImage base =
      EncodeImage(base_->codec, img, MaskGrid::AllHigh(4, 6), {2, 0});
  const LatentShapes s = ShapesFor(net_->codec, 128, 192);
  const uint64_t hyper2 =
      static_cast<uint64_t>(s.hyper_low.height) * s.hyper_low.width;
  EXPECT_EQ(rdo.stats.counters.ae_calls - base.stats.counters.ae_calls,
            8 * hyper2);
  EXPECT_EQ(rdo.stats.counters.ctx_calls_hyper - base.stats.counters.ctx_calls_hyper,
            hyper2);
  EXPECT_EQ(rdo.stats.counters.ctx_calls_main, base.stats.counters.ctx_calls_main);
  EXPECT_EQ(base.stats.counters.ctx_calls_main, 8u * 12u);
}

TEST_F(CodecTest, BaselineRoundTripAndMaskCheck) {
  std::mt19937 rng(26);
  const FeatureMap img = testing::NoiseImage(rng, 77, 130);
  const MaskGrid all = MaskGridFor(130, 77);
  const EncodedImage enc = EncodeImage(base_->codec, img, all, {4, 100});
  EXPECT_TRUE(enc.stream.segments[kHyper2].empty());
  EXPECT_TRUE(enc.stream.segments[kLatent2].empty());
  EXPECT_EQ(enc.stream.mask, all);
  const DecodedImage dec = RoundTrip(base_->codec, enc);
  EXPECT_EQ(dec.image, enc.reconstruction);
  Stream s = enc.stream;
  s.mask.set_high(0, 0, false);
  try {
    DecodeImage(base_->codec, s);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorrupt);
  }
}

TEST_F(CodecTest, OddDimensionsAreCropped) {
  std::mt19937 rng(27);
  for (auto [h, w] : {std::pair{1, 1}, {45, 70}, {65, 63}}) {
    const FeatureMap img = testing::NoiseImage(rng, h, w);
    const MaskGrid grid = MaskGridFor(w, h);
    const EncodedImage enc = EncodeImage(
        net_->codec, img, testing::RandomMask(rng, grid.rows(), grid.cols()), {0, 0});
    EXPECT_EQ(enc.reconstruction.shape(), (Shape{3, h, w}));
    EXPECT_EQ(enc.stream.header.width, static_cast<uint32_t>(w));
    EXPECT_EQ(enc.stream.header.height, static_cast<uint32_t>(h));
    EXPECT_EQ(RoundTrip(net_->codec, enc).image, enc.reconstruction);
  }
}

TEST_F(CodecTest, LatentLevelRoundTrip) {
  std::mt19937 rng(28);
  const FeatureMap y = testing::RandomMap(rng, 8, 6, 10, 4.0f);
  const MaskGrid mask = testing::RandomMask(rng, 3, 5);
  const LatentCode enc = EncodeLatents(net_->codec, y, mask, {5, 0});
  const LatentCode dec =
      DecodeLatents(net_->codec, enc.segments, y.shape(), mask, {5, 0});
  EXPECT_EQ(dec.symbols, enc.symbols);
  EXPECT_EQ(dec.synthesis_input, enc.synthesis_input);
  EXPECT_THROW(EncodeLatents(net_->codec, y, MaskGrid::AllHigh(3, 4), {5, 0}), Error);
}

TEST_F(CodecTest, EstimatedBitsTrackPayload) {
  std::mt19937 rng(29);
  const FeatureMap img = testing::NoiseImage(rng, 128, 128);
  const EncodedImage enc =
      EncodeImage(net_->codec, img, testing::RandomMask(rng, 4, 4), {4, 0});
  for (int s = 0; s < kNumSegments; ++s) {
    const double actual = 8.0 * enc.stream.segments[s].size();
    EXPECT_LE(std::fabs(actual - enc.stats.estimated_bits[s]),
              0.01 * actual + 40.0) << s;
  }
}

TEST_F(CodecTest, GainTableMustMatchChannels) {
  EXPECT_THROW(Codec(net_->graph, ReferenceGainTable(9, 0.5)), Error);
}

}  // namespace
}  // namespace rdonet
