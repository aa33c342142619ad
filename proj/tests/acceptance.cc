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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rdonet/analysis.h"
#include "rdonet/codec.h"
#include "rdonet/container.h"
#include "rdonet/rdo.h"
#include "rdonet/status.h"
#include "test_util.h"

namespace rdonet {
namespace {

using testing::Model;

struct Check {
  bool ok = true;
  std::string detail;

  void Expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

constexpr int kSide = 512;
constexpr double kPixels = double{kSide} * kSide;

struct EndpointRuns {
  RunStats baseline_enc, baseline_dec;
  RunStats low_enc, low_dec;    // RDONet, alpha = 0
  RunStats high_enc, high_dec;  // RDONet, alpha = 1
};

// Both 192-channel models share fa.*; y is computed once.
const EndpointRuns& Endpoints(const Model& net, const Model& base) {
  static const EndpointRuns runs = [&] {
    for (const auto& [name, t] : net.store.tensors()) {
      if (name.rfind("fa.", 0) == 0 && !(base.store.Get(name).values == t.values)) {
        throw Error(ErrorCode::kInternal, "analysis weights differ: " + name);
      }
    }
    const FeatureMap y = AnalyzeImage(net.codec, testing::SmoothImage(kSide, kSide));
    const int cells = kSide / kMaskCell;
    const RateOperatingPoint op{2, 0};
    EndpointRuns r;
    auto run = [&](const Codec& codec, const MaskGrid& mask, RunStats* enc,
                   RunStats* dec) {
      const LatentCode e = EncodeLatents(codec, y, mask, op);
      const LatentCode d = DecodeLatents(codec, e.segments, y.shape(), mask, op);
      if (!(d.symbols == e.symbols)) {
        throw Error(ErrorCode::kInternal, "endpoint round trip mismatch");
      }
      *enc = e.stats;
      *dec = d.stats;
    };
    run(base.codec, MaskGrid::AllHigh(cells, cells), &r.baseline_enc, &r.baseline_dec);
    run(net.codec, MaskGrid::AllLow(cells, cells), &r.low_enc, &r.low_dec);
    run(net.codec, MaskGrid::AllHigh(cells, cells), &r.high_enc, &r.high_dec);
    return r;
  }();
  return runs;
}

Check AeEndpoints(const Model& net, const Model& base) {
  const EndpointRuns& r = Endpoints(net, base);
  Check c;
  struct Row {
    const char* name;
    const RunStats* enc;
    const RunStats* dec;
    long table;  // expected value x 1e4
  };
  for (const Row& row : {Row{"baseline", &r.baseline_enc, &r.baseline_dec, 7617},
                         Row{"alpha=0", &r.low_enc, &r.low_dec, 2021},
                         Row{"alpha=1", &r.high_enc, &r.high_dec, 7646}}) {
    const double ae = row.dec->counters.ae_calls / kPixels;
    c.Expect(row.enc->counters.ae_calls == row.dec->counters.ae_calls,
             std::string(row.name) + " encoder/decoder AE counts differ");
    c.Expect(std::lround(ae * 1e4) == row.table,
             std::string(row.name) + " AE/px " + Fmt("%.6f", ae) + " != " +
                 Fmt("%.4f", row.table / 1e4));
    c.detail += (c.detail.empty() ? "" : ", ");
    c.detail += std::string(row.name) + " " + Fmt("%.6f", ae);
  }
  return c;
}

Check CtxEndpoints(const Model& net, const Model& base) {
  const EndpointRuns& r = Endpoints(net, base);
  Check c;
  const uint64_t b = r.baseline_dec.counters.ctx_calls_main;
  const uint64_t lo = r.low_dec.counters.ctx_calls_main;
  const uint64_t hi = r.high_dec.counters.ctx_calls_main;
  // k/1024 per pixel exactly: calls * 1024 == k * pixels.
  c.Expect(b * 1024 == 4 * static_cast<uint64_t>(kPixels), "baseline CTX != 4/1024");
  c.Expect(hi * 1024 == 4 * static_cast<uint64_t>(kPixels), "alpha=1 CTX != 4/1024");
  c.Expect(lo * 1024 == 1 * static_cast<uint64_t>(kPixels), "alpha=0 CTX != 1/1024");
  c.detail += "baseline " + Fmt("%.0f", b * 1024 / kPixels) + "/1024, alpha=0 " +
              Fmt("%.0f", lo * 1024 / kPixels) + "/1024, alpha=1 " +
              Fmt("%.0f", hi * 1024 / kPixels) + "/1024";
  return c;
}

Check MacStructure(const Model& net, const Model& base) {
  Check c;
  const double b0 = CountMacs(base.arch, kSide, kSide, 0.0);
  const double b1 = CountMacs(base.arch, kSide, kSide, 1.0);
  const double m0 = CountMacs(net.arch, kSide, kSide, 0.0);
  const double m1 = CountMacs(net.arch, kSide, kSide, 1.0);
  c.Expect(b0 == b1, "baseline MACs depend on alpha");
  for (int k = 1; k < 10; ++k) {
    const double a = k / 10.0;
    const double m = CountMacs(net.arch, kSide, kSide, a);
    c.Expect(std::fabs(m - (m0 + a * (m1 - m0))) <= 1e-9 * m0,
             "MAC(" + Fmt("%.1f", a) + ") not affine");
  }
  const double o0 = 100.0 * (m0 / b0 - 1.0);
  const double o1 = 100.0 * (m1 / b0 - 1.0);
  c.Expect(o0 >= 0.5 && o0 <= 1.0, "alpha=0 overhead " + Fmt("%.3f%%", o0));
  c.Expect(o1 >= 2.5 && o1 <= 3.1, "alpha=1 overhead " + Fmt("%.3f%%", o1));
  c.detail += "overhead " + Fmt("%.3f%%", o0) + " / " + Fmt("%.3f%%", o1) +
              "; kMAC/px baseline " + Fmt("%.3f", b0 / 1000) + " (931.240), alpha=0 " +
              Fmt("%.3f", m0 / 1000) + " (937.794), alpha=1 " + Fmt("%.3f", m1 / 1000) +
              " (957.125)";
  return c;
}

struct FuzzResult {
  int cases = 0;
  int failures = 0;
  int segments = 0;
  int estimate_misses = 0;
  double max_deviation = 0.0;  // bits
  double max_usage = 0.0;      // deviation / allowance
};

const FuzzResult& Fuzz(const Model& net, const Model& base) {
  static const FuzzResult result = [&] {
    FuzzResult r;
    std::mt19937 rng(2024);
    for (int i = 0; i < 1000; ++i) {
      const int h = 1 + rng() % 128, w = 1 + rng() % 128;
      FeatureMap img = (i % 3 == 0) ? testing::SmoothImage(h, w, i * 0.37f)
                                    : testing::NoiseImage(rng, h, w);
      if (i % 7 == 0) {
        for (float& v : img.values()) v = std::round(v * 4.0f) / 4.0f;
      }
      const MaskGrid shape = MaskGridFor(w, h);
      const MaskGrid mask = testing::RandomMask(rng, shape.rows(), shape.cols());
      RateOperatingPoint op{static_cast<int>(rng() % kNumSupportPoints),
                            static_cast<uint8_t>(rng() % 256)};
      if (op.index == kNumSupportPoints - 1) op.t_code = 0;
      const Model& m = (i % 10 == 9) ? base : net;
      const MaskGrid used =
          m.codec.baseline() ? MaskGrid::AllHigh(mask.rows(), mask.cols()) : mask;
      ++r.cases;
      try {
        const EncodedImage enc = EncodeImage(m.codec, img, used, op,
                                             static_cast<DistortionMode>(i & 1));
        const std::vector<uint8_t> bytes = WriteStream(enc.stream);
        const DecodedImage dec = DecodeImage(m.codec, ReadStream(bytes));
        if (!(dec.symbols == enc.symbols) || !(dec.image == enc.reconstruction) ||
            dec.image.shape() != img.shape()) {
          ++r.failures;
        }
        for (int s = 0; s < kNumSegments; ++s) {
          const double actual = 8.0 * enc.stream.segments[s].size();
          const double dev = std::fabs(enc.stats.estimated_bits[s] - actual);
          const double allowance = 0.01 * actual + 64.0;
          ++r.segments;
          if (dev > allowance) ++r.estimate_misses;
          r.max_deviation = std::max(r.max_deviation, dev);
          r.max_usage = std::max(r.max_usage, dev / allowance);
        }
      } catch (const Error& e) {
        std::fprintf(stderr, "fuzz case %d: %s\n", i, e.what());
        ++r.failures;
      }
    }
    return r;
  }();
  return result;
}

Check Losslessness(const Model& net, const Model& base) {
  const FuzzResult& r = Fuzz(net, base);
  Check c;
  c.Expect(r.cases == 1000, "ran " + std::to_string(r.cases) + " cases");
  c.Expect(r.failures == 0, std::to_string(r.failures) + " failures");
  c.detail += std::to_string(r.cases) + " cases, " + std::to_string(r.failures) +
              " failures";
  return c;
}

Check RateEstimate(const Model& net, const Model& base) {
  const FuzzResult& r = Fuzz(net, base);
  Check c;
  c.Expect(r.estimate_misses == 0,
           std::to_string(r.estimate_misses) + " segments outside 1% + 64 bits");
  c.detail += std::to_string(r.segments) + " segments, max deviation " +
              Fmt("%.1f bits", r.max_deviation) + ", max " +
              Fmt("%.0f%%", 100 * r.max_usage) + " of allowance";
  return c;
}

Check MsSsimDecibels() {
  Check c;
  const double a = MsSsimDb(0.9), b = MsSsimDb(0.99);
  c.Expect(std::fabs(a - 10.0) <= 1e-9, "msssim_db(0.9) = " + Fmt("%.12f", a));
  c.Expect(std::fabs(b - 20.0) <= 1e-9, "msssim_db(0.99) = " + Fmt("%.12f", b));
  c.detail += Fmt("%.9f", a) + " dB, " + Fmt("%.9f", b) + " dB";
  return c;
}

Check BdFixtures() {
  Check c;
  const RdCurve anchor = {{0.12, 29.5}, {0.25, 32.4}, {0.5, 35.2}, {0.9, 37.6},
                          {1.5, 39.8}};
  RdCurve doubled = anchor, better = anchor;
  for (auto& p : doubled) p.rate *= 2;
  for (auto& p : better) p.quality += 1.0;
  const double r0 = BdRate(anchor, anchor), q0 = BdQuality(anchor, anchor);
  const double r2 = BdRate(anchor, doubled), q1 = BdQuality(anchor, better);
  c.Expect(std::fabs(r0) < 1e-9 && std::fabs(q0) < 1e-9, "identical curves differ");
  c.Expect(std::fabs(r2 - 100.0) <= 0.1, "doubled rate gives " + Fmt("%.6f%%", r2));
  c.Expect(std::fabs(q1 - 1.0) <= 1e-6, "+1 dB gives " + Fmt("%.9f dB", q1));
  c.detail += Fmt("%.2e", r0) + "% / " + Fmt("%.2e", q0) + " dB, " +
              Fmt("%.6f%%", r2) + ", " + Fmt("%.9f dB", q1);
  return c;
}

// Finds a two-level 32x32 block whose variance, at the precision used for the
// threshold comparison, is exactly 0.002.
bool ExactThresholdBlock(FeatureMap* out) {
  const int n = 3 * 32 * 32;
  const float target = static_cast<float>(kDefaultVarianceThreshold);
  for (int k = n / 2; k > 0; --k) {
    const double p = static_cast<double>(k) / n;
    float v = static_cast<float>(std::sqrt(kDefaultVarianceThreshold / (p * (1 - p))));
    for (int step = 0; step < 64; ++step) {
      FeatureMap img(3, 64, 64, 0.25f);
      int placed = 0;
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 32; ++y) {
          for (int x = 0; x < 32; ++x) {
            if (placed < k) {
              img.at(c, y, x) = 0.25f + v;
              ++placed;
            }
          }
        }
      }
      // Long-double two-pass oracle.
      long double sum = 0, sq = 0;
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 32; ++y) {
          for (int x = 0; x < 32; ++x) sum += img.at(c, y, x);
        }
      }
      const long double mean = sum / n;
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 32; ++y) {
          for (int x = 0; x < 32; ++x) {
            const long double d = img.at(c, y, x) - mean;
            sq += d * d;
          }
        }
      }
      const float var = static_cast<float>(sq / n);
      if (var == target) {
        *out = img;
        return true;
      }
      v = std::nextafter(v, var < target ? 1.0f : 0.0f);
    }
  }
  return false;
}

Check MaskRule() {
  Check c;
  std::mt19937 rng(7);
  const double a_const = Alpha(VarianceMask(FeatureMap(3, 256, 256, 0.42f)));
  const double a_noise = Alpha(VarianceMask(testing::NoiseImage(rng, 256, 256)));
  c.Expect(a_const == 0.0, "constant image alpha " + Fmt("%.4f", a_const));
  c.Expect(a_noise == 1.0, "noise image alpha " + Fmt("%.4f", a_noise));
  FeatureMap block;
  if (!ExactThresholdBlock(&block)) {
    c.Expect(false, "no block with variance exactly 0.002 found");
  } else {
    const float v = BlockVariance(block, 0, 0);
    c.Expect(v == static_cast<float>(kDefaultVarianceThreshold),
             "block variance " + Fmt("%.10g", v));
    c.Expect(!VarianceMask(block).high(0, 0), "variance 0.002 block is HIGH");
    c.detail += "block variance " + Fmt("%.9g", v) + " -> LOW; ";
  }
  c.detail += "alpha constant " + Fmt("%.1f", a_const) + ", noise " + Fmt("%.1f", a_noise);
  return c;
}

Check OracleDominance(const Model& net) {
  Check c;
  std::mt19937 rng(99);
  int images = 0, encodes = 0, strict = 0;
  for (int i = 0; i < 20; ++i) {
    const int w = i < 10 ? 64 : 128;
    FeatureMap img = testing::SmoothImage(64, w, 0.5f * i);
    if (i % 4 == 1) img = testing::NoiseImage(rng, 64, w);
    if (i % 4 == 2) {
      // Textured right part, flat left part.
      const FeatureMap noise = testing::NoiseImage(rng, 64, w);
      for (int ch = 0; ch < 3; ++ch) {
        for (int y = 0; y < 64; ++y) {
          for (int x = 0; x < w; ++x) {
            img.at(ch, y, x) = x < w / 2 ? 0.3f : noise.at(ch, y, x);
          }
        }
      }
    }
    if (i % 4 == 3) {
      for (float& v : img.values()) v = 0.5f + 0.04f * (v - 0.5f);
    }
    const double lambda = 0.002 * (1 + i % 5);
    const RateOperatingPoint op{i % kNumSupportPoints == 5 ? 4 : i % kNumSupportPoints, 0};
    const DistortionMode mode = DistortionMode::kMse;
    const MaskSearchResult best = ExhaustiveMaskSearch(net.codec, img, lambda, op, mode);
    const MaskTrial zero =
        EvaluateMask(net.codec, img, VarianceMask(img), lambda, op, mode);
    ++images;
    encodes += best.encodes;
    c.Expect(best.best.loss.loss <= zero.loss.loss,
             "image " + std::to_string(i) + ": search " + Fmt("%.6g", best.best.loss.loss) +
                 " > variance " + Fmt("%.6g", zero.loss.loss));
    if (best.best.loss.loss < zero.loss.loss) ++strict;
  }
  c.detail += std::to_string(images) + " images, " + std::to_string(encodes) +
              " trial encodes, strictly better on " + std::to_string(strict);
  return c;
}

Check GainMonotonicity(const Model& net) {
  Check c;
  const int side = 256;
  const FeatureMap img = testing::SmoothImage(side, side, 1.0f);
  const FeatureMap y = AnalyzeImage(net.codec, img);
  const MaskGrid mask = VarianceMask(img);
  double prev = 0.0;
  std::string bpps;
  for (int i = 0; i < kNumSupportPoints; ++i) {
    const MaskTrial t = EvaluateMask(net.codec, img, mask, kSupportLambdas[i], {i, 0},
                                     DistortionMode::kMse, &y);
    c.Expect(t.loss.rate >= prev, "bpp falls from point " + std::to_string(i - 1) +
                                      " to " + std::to_string(i));
    prev = t.loss.rate;
    bpps += (i ? " " : "") + Fmt("%.4f", t.loss.rate);
  }
  c.detail += "bpp by lambda " + bpps;
  return c;
}

int Main() {
  using Clock = std::chrono::steady_clock;
  std::printf("loading models\n");
  std::fflush(stdout);
  const auto net192 = std::make_unique<Model>("rdonet-192.arch");
  const auto base192 = std::make_unique<Model>("baseline-192.arch");
  const auto tiny = testing::TinyModel();
  const auto tiny_base = testing::TinyBaseline();

  struct Criterion {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "AE/px endpoints", [&] { return AeEndpoints(*net192, *base192); }},
      {2, "CTX/px endpoints", [&] { return CtxEndpoints(*net192, *base192); }},
      {3, "MAC structure", [&] { return MacStructure(*net192, *base192); }},
      {4, "lossless round trip", [&] { return Losslessness(*tiny, *tiny_base); }},
      {5, "rate estimate fidelity", [&] { return RateEstimate(*tiny, *tiny_base); }},
      {6, "MS-SSIM dB", [&] { return MsSsimDecibels(); }},
      {7, "BD fixtures", [&] { return BdFixtures(); }},
      {8, "variance mask rule", [&] { return MaskRule(); }},
      {9, "oracle dominance", [&] { return OracleDominance(*tiny); }},
      {10, "gain monotonicity", [&] { return GainMonotonicity(*net192); }},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    const auto t0 = Clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", c.ok ? "PASS" : "FAIL", cr.id, cr.name,
                c.detail.c_str(), secs);
    std::fflush(stdout);
    if (!c.ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace rdonet

int main() { return rdonet::Main(); }
