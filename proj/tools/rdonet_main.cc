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

// rdonet command line: encode, decode, inspect, eval, complexity and the
// reference weight / gain generators.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdonet/analysis.h"
#include "rdonet/codec.h"
#include "rdonet/container.h"
#include "rdonet/image_io.h"
#include "rdonet/rdo.h"
#include "rdonet/status.h"
#include "rdonet/weights.h"

namespace rdonet {
namespace {

using nlohmann::ordered_json;

constexpr int kErrorExitBase = 10;

struct ModelFlags {
  std::string arch;
  std::string weights;
  std::string gains;
};

struct Model {
  ArchConfig arch;
  WeightStore store;
  std::unique_ptr<NetworkGraph> graph;
  std::unique_ptr<Codec> codec;
};

uint64_t SeedFromEnv() {
  const char* s = std::getenv("RDONET_SEED");
  if (s == nullptr || *s == '\0') return kDefaultWeightSeed;
  char* end = nullptr;
  const uint64_t v = std::strtoull(s, &end, 0);
  if (*end != '\0') {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("RDONET_SEED is not an integer: ") + s);
  }
  return v;
}

void RequireFile(const std::string& path, const char* what) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, std::string(what) + " not found: " + path);
  }
}

// Without --weights / --gains the reference store (seeded from RDONET_SEED)
// and the reference gain ladder are used.
Model LoadModel(const ModelFlags& f) {
  RequireFile(f.arch, "architecture");
  RequireFile(f.weights, "weights");
  RequireFile(f.gains, "gain table");
  Model m;
  m.arch = LoadArchFile(f.arch);
  m.store = f.weights.empty() ? ReferenceWeights(m.arch, SeedFromEnv())
                              : ReadWeights(f.weights);
  m.graph = std::make_unique<NetworkGraph>(LoadNetwork(m.arch, m.store));
  GainTable gains = f.gains.empty() ? ReferenceGainTable(m.arch.latent_channels())
                                    : ReadGainTable(f.gains);
  m.codec = std::make_unique<Codec>(*m.graph, std::move(gains));
  return m;
}

void AddModelFlags(CLI::App* app, ModelFlags* f) {
  app->add_option("--arch", f->arch, "Architecture config")->required();
  app->add_option("--weights", f->weights,
                  "Weight manifest (default: reference weights)");
  app->add_option("--gains", f->gains, "Gain table (default: reference ladder)");
}

std::vector<uint8_t> ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

void EmitReport(const ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    WriteText(path, j.dump(2) + "\n");
  }
}

// Infinite metric values are reported as the string "inf".
ordered_json Number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string Hex(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t ImageHash(const FeatureMap& image) {
  auto v = image.values();
  return Fnv1a64(std::string(reinterpret_cast<const char*>(v.data()),
                             v.size() * sizeof(float)));
}

std::string MaskString(const MaskGrid& mask) {
  std::string s;
  for (int r = 0; r < mask.rows(); ++r) {
    if (r) s += '/';
    for (int c = 0; c < mask.cols(); ++c) s += mask.high(r, c) ? 'H' : 'L';
  }
  return s;
}

ordered_json ComplexityJson(const ComplexityReport& r) {
  return {{"alpha", r.alpha},
          {"mac_per_pixel", r.mac_per_pixel},
          {"ae_per_pixel", r.ae_per_pixel},
          {"ctx_per_pixel", r.ctx_per_pixel},
          {"ctx_hyper_per_pixel", r.ctx_hyper_per_pixel}};
}

DistortionMode ParseDistortion(const std::string& s) {
  return s == "combined" ? DistortionMode::kCombined : DistortionMode::kMse;
}

const char* DistortionName(DistortionMode m) {
  return m == DistortionMode::kCombined ? "combined" : "mse";
}

// ---- encode ----

struct EncodeFlags {
  ModelFlags model;
  std::string input, out, report;
  std::optional<double> lambda;
  std::string op_point;
  double threshold = kDefaultVarianceThreshold;
  std::string distortion = "mse";
  std::string mask = "variance";
  std::string recon;
};

int RunEncode(const EncodeFlags& f) {
  RequireFile(f.input, "input image");
  Model m = LoadModel(f.model);
  const FeatureMap image = ReadImage(f.input);
  const DistortionMode mode = ParseDistortion(f.distortion);
  double lambda = kSupportLambdas[2];
  RateOperatingPoint op = OperatingPointForLambda(lambda);
  if (!f.op_point.empty()) {
    op = ParseOperatingPoint(f.op_point);
    const double lo = kSupportLambdas[op.index];
    const double hi = op.index + 1 < kNumSupportPoints ? kSupportLambdas[op.index + 1] : lo;
    lambda = lo * std::pow(hi / lo, op.t());
  } else if (f.lambda) {
    lambda = *f.lambda;
    op = OperatingPointForLambda(lambda);
  }

  MaskGrid mask = MaskGridFor(image.width(), image.height());
  int search_encodes = 0;
  if (m.codec->baseline() || f.mask == "high") {
    // all HIGH already
  } else if (f.mask == "low") {
    mask = MaskGrid::AllLow(mask.rows(), mask.cols());
  } else if (f.mask == "search") {
    MaskSearchResult r = ExhaustiveMaskSearch(*m.codec, image, lambda, op, mode);
    mask = r.best.mask;
    search_encodes = r.encodes;
  } else {
    mask = VarianceMask(image, f.threshold);
  }

  EncodedImage enc = EncodeImage(*m.codec, image, mask, op, mode);
  const std::vector<uint8_t> bytes = WriteStream(enc.stream);
  WriteBytes(f.out, bytes);
  if (!f.recon.empty()) WriteImage(enc.reconstruction, f.recon);

  const Dims p = PaddedDims(image.width(), image.height());
  const double pixels = static_cast<double>(image.width()) * image.height();
  const double alpha = m.codec->baseline() ? 1.0 : Alpha(mask);
  ordered_json segments = ordered_json::array();
  const char* names[] = {"hyper-2", "latent-2", "hyper-1", "latent-1"};
  double estimated = 0.0;
  for (int i = 0; i < kNumSegments; ++i) {
    segments.push_back({{"id", i + 1},
                        {"name", names[i]},
                        {"bytes", enc.stream.segments[i].size()},
                        {"estimated_bits", enc.stats.estimated_bits[i]}});
    estimated += enc.stats.estimated_bits[i];
  }
  ordered_json j;
  j["input"] = f.input;
  j["output"] = f.out;
  j["width"] = image.width();
  j["height"] = image.height();
  j["padded_width"] = p.width;
  j["padded_height"] = p.height;
  j["model"] = m.codec->baseline() ? "baseline" : "rdonet";
  j["lambda"] = lambda;
  j["op_point"] = {{"index", op.index}, {"t_code", op.t_code}, {"t", op.t()}};
  j["distortion"] = DistortionName(mode);
  j["mask_mode"] = m.codec->baseline() ? "high" : f.mask;
  j["threshold"] = f.threshold;
  j["mask"] = MaskString(enc.stream.mask);
  j["alpha"] = alpha;
  if (search_encodes) j["search_encodes"] = search_encodes;
  j["file_bytes"] = bytes.size();
  j["bpp"] = 8.0 * bytes.size() / pixels;
  j["payload_bits"] = 8.0 * (bytes.size() - kHeaderBytes - MaskBytes(enc.stream.mask) -
                             4 * kNumSegments);
  j["estimated_payload_bits"] = estimated;
  j["segments"] = segments;
  j["saturated_symbols"] = enc.stats.saturated;
  j["psnr_db"] = Number(Psnr(image, enc.reconstruction));
  const bool msssim_ok =
      image.height() >= kMsSsimMinSide && image.width() >= kMsSsimMinSide;
  j["weighted_distortion"] =
      mode == DistortionMode::kMse || msssim_ok
          ? ordered_json(WeightedDistortion(image, enc.reconstruction, mode))
          : ordered_json(nullptr);
  j["reconstruction_fnv1a64"] = Hex(ImageHash(enc.reconstruction));
  j["complexity"] = {
      {"measured", ComplexityJson(MeasuredComplexity(enc.stats, p.height, p.width, alpha))},
      {"analytic",
       ComplexityJson(AnalyticComplexity(m.arch, p.height, p.width, alpha))}};
  EmitReport(j, f.report);
  return 0;
}

// ---- decode ----

struct DecodeFlags {
  ModelFlags model;
  std::string input, out, report, verify;
};

int RunDecode(const DecodeFlags& f) {
  RequireFile(f.input, "bitstream");
  RequireFile(f.verify, "encode report");
  Model m = LoadModel(f.model);
  const Stream stream = ReadStream(ReadBytes(f.input));
  DecodedImage dec = DecodeImage(*m.codec, stream);
  const std::string hash = Hex(ImageHash(dec.image));
  if (!f.verify.empty()) {
    std::ifstream in(f.verify);
    const ordered_json expect = ordered_json::parse(in, nullptr, false);
    if (expect.is_discarded() || !expect.contains("reconstruction_fnv1a64")) {
      throw Error(ErrorCode::kInvalidArgument, f.verify + ": not an encode report");
    }
    if (expect["reconstruction_fnv1a64"].get<std::string>() != hash) {
      throw Error(ErrorCode::kCorrupt,
                  "reconstruction hash mismatch (wrong model or corrupt stream)");
    }
  }
  WriteImage(dec.image, f.out);
  const Dims p = PaddedDims(stream.header.width, stream.header.height);
  const double alpha = m.codec->baseline() ? 1.0 : Alpha(stream.mask);
  ordered_json j;
  j["input"] = f.input;
  j["output"] = f.out;
  j["width"] = stream.header.width;
  j["height"] = stream.header.height;
  j["alpha"] = alpha;
  j["reconstruction_fnv1a64"] = hash;
  j["complexity"] = ComplexityJson(MeasuredComplexity(dec.stats, p.height, p.width, alpha));
  if (!f.report.empty()) EmitReport(j, f.report);
  return 0;
}

// ---- inspect ----

int RunInspect(const std::string& input) {
  RequireFile(input, "bitstream");
  const std::vector<uint8_t> bytes = ReadBytes(input);
  const Stream s = ReadStream(bytes);
  const Dims p = PaddedDims(s.header.width, s.header.height);
  ordered_json segs = ordered_json::array();
  for (int i = 0; i < kNumSegments; ++i) segs.push_back(s.segments[i].size());
  ordered_json j;
  j["version"] = kStreamVersion;
  j["width"] = s.header.width;
  j["height"] = s.header.height;
  j["padded_width"] = p.width;
  j["padded_height"] = p.height;
  j["op_point"] = {{"index", s.header.op.index},
                   {"t_code", s.header.op.t_code},
                   {"t", s.header.op.t()}};
  j["distortion"] = DistortionName(s.header.distortion);
  j["mask_rows"] = s.mask.rows();
  j["mask_cols"] = s.mask.cols();
  j["mask"] = MaskString(s.mask);
  j["alpha"] = Alpha(s.mask);
  j["segment_bytes"] = segs;
  j["file_bytes"] = bytes.size();
  j["bpp"] = 8.0 * bytes.size() / (static_cast<double>(s.header.width) * s.header.height);
  EmitReport(j, "-");
  return 0;
}

// ---- eval ----

struct EvalFlags {
  std::string original, decoded, anchor, test, report, out;
};

int RunEval(const EvalFlags& f) {
  ordered_json j;
  std::ostringstream csv;
  csv.precision(10);
  if (!f.original.empty() || !f.decoded.empty()) {
    if (f.original.empty() || f.decoded.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--original and --decoded must be given together");
    }
    RequireFile(f.original, "image");
    RequireFile(f.decoded, "image");
    const FeatureMap a = ReadImage(f.original), b = ReadImage(f.decoded);
    const double psnr = Psnr(a, b);
    j["psnr_db"] = Number(psnr);
    csv << "psnr_db,ms_ssim,ms_ssim_db\n" << psnr << ',';
    if (a.height() >= kMsSsimMinSide && a.width() >= kMsSsimMinSide) {
      const double v = MsSsim(a, b);
      j["ms_ssim"] = v;
      j["ms_ssim_db"] = Number(MsSsimDb(v));
      csv << v << ',' << MsSsimDb(v) << '\n';
    } else {
      j["ms_ssim"] = nullptr;
      j["ms_ssim_db"] = nullptr;
      j["ms_ssim_note"] = "image smaller than 176 pixels per side";
      csv << ",\n";
    }
  }
  if (!f.anchor.empty() || !f.test.empty()) {
    if (f.anchor.empty() || f.test.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--anchor and --test must be given together");
    }
    RequireFile(f.anchor, "curve");
    RequireFile(f.test, "curve");
    const RdCurve a = ReadRdCurve(f.anchor), t = ReadRdCurve(f.test);
    j["bd_rate_percent"] = BdRate(a, t);
    j["bd_quality_db"] = BdQuality(a, t);
    csv << "curve,rate,quality\n";
    for (const RdPoint& p : a) csv << "anchor," << p.rate << ',' << p.quality << '\n';
    for (const RdPoint& p : t) csv << "test," << p.rate << ',' << p.quality << '\n';
  }
  if (j.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "give --original/--decoded and/or --anchor/--test");
  }
  if (!f.out.empty()) WriteText(f.out, csv.str());
  EmitReport(j, f.report);
  return 0;
}

// ---- complexity ----

struct ComplexityFlags {
  ModelFlags model;
  int width = 512, height = 512;
  double sweep = 0.1;
  std::string image, out;
  double threshold = kDefaultVarianceThreshold;
};

int RunComplexity(const ComplexityFlags& f) {
  std::vector<ComplexityReport> rows;
  std::optional<Model> m;
  ArchConfig arch;
  if (f.image.empty()) {
    RequireFile(f.model.arch, "architecture");
    arch = LoadArchFile(f.model.arch);
  } else {
    m = LoadModel(f.model);
    arch = m->arch;
  }
  if (!(f.sweep > 0.0 && f.sweep <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--sweep must be in (0, 1]");
  }
  const Dims p = PaddedDims(f.width, f.height);
  const int steps = static_cast<int>(std::lround(1.0 / f.sweep));
  for (int i = 0; i <= steps; ++i) {
    const double alpha = std::min(1.0, i * f.sweep);
    rows.push_back(AnalyticComplexity(arch, p.height, p.width, alpha));
  }
  if (m) {
    RequireFile(f.image, "image");
    const FeatureMap image = ReadImage(f.image);
    const MaskGrid mask = m->codec->baseline()
                              ? MaskGridFor(image.width(), image.height())
                              : VarianceMask(image, f.threshold);
    const double alpha = m->codec->baseline() ? 1.0 : Alpha(mask);
    EncodedImage enc = EncodeImage(*m->codec, image, mask, {2, 0});
    const Dims ip = PaddedDims(image.width(), image.height());
    rows.push_back(MeasuredComplexity(enc.stats, ip.height, ip.width, alpha));
  }
  const std::string csv = ComplexityCsv(rows);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    WriteText(f.out, csv);
  }
  return 0;
}

}  // namespace
}  // namespace rdonet

int main(int argc, char** argv) {
  using namespace rdonet;
  CLI::App app{"rdonet: two-level hierarchical latent image codec"};
  app.require_subcommand(1);

  EncodeFlags ef;
  CLI::App* enc = app.add_subcommand("encode", "Encode a PNG/PPM image");
  enc->add_option("input", ef.input, "Input image")->required();
  AddModelFlags(enc, &ef.model);
  auto* lam = enc->add_option("--lambda", ef.lambda, "Rate-distortion trade-off");
  enc->add_option("--op-point", ef.op_point, "Operating point i:t")->excludes(lam);
  enc->add_option("--threshold", ef.threshold, "Variance threshold (default 0.002)");
  enc->add_option("--distortion", ef.distortion, "Distortion mode")
      ->check(CLI::IsMember({"mse", "combined"}));
  enc->add_option("--mask", ef.mask, "Mask selection")
      ->check(CLI::IsMember({"variance", "high", "low", "search"}));
  enc->add_option("--out", ef.out, "Output bitstream")->required();
  enc->add_option("--report", ef.report, "JSON report path (default stdout)");
  enc->add_option("--recon", ef.recon, "Also write the encoder reconstruction");

  DecodeFlags df;
  CLI::App* dec = app.add_subcommand("decode", "Decode a bitstream");
  dec->add_option("input", df.input, "Bitstream")->required();
  AddModelFlags(dec, &df.model);
  dec->add_option("--out", df.out, "Output image (.png or .ppm)")->required();
  dec->add_option("--report", df.report, "JSON report path");
  dec->add_option("--verify", df.verify,
                  "Encode report whose reconstruction hash must match");

  std::string inspect_input;
  CLI::App* ins = app.add_subcommand("inspect", "Print header, mask and segments");
  ins->add_option("input", inspect_input, "Bitstream")->required();

  EvalFlags vf;
  CLI::App* ev = app.add_subcommand("eval", "Quality metrics and BD deltas");
  ev->add_option("--original", vf.original, "Reference image");
  ev->add_option("--decoded", vf.decoded, "Decoded image");
  ev->add_option("--anchor", vf.anchor, "Anchor RD curve CSV (rate,quality)");
  ev->add_option("--test", vf.test, "Test RD curve CSV");
  ev->add_option("--report", vf.report, "JSON report path (default stdout)");
  ev->add_option("--out", vf.out, "CSV output");

  ComplexityFlags cf;
  CLI::App* cx = app.add_subcommand("complexity", "MAC/AE/CTX per pixel versus alpha");
  cx->add_option("--arch", cf.model.arch, "Architecture config")->required();
  cx->add_option("--weights", cf.model.weights, "Weight manifest");
  cx->add_option("--gains", cf.model.gains, "Gain table");
  cx->add_option("--width", cf.width, "Image width (default 512)")->check(CLI::PositiveNumber);
  cx->add_option("--height", cf.height, "Image height (default 512)")->check(CLI::PositiveNumber);
  cx->add_option("--sweep", cf.sweep, "Alpha step (default 0.1)");
  cx->add_option("--image", cf.image, "Add the measured point for this image");
  cx->add_option("--threshold", cf.threshold, "Variance threshold");
  cx->add_option("--out", cf.out, "CSV output (default stdout)");

  std::string gw_arch, gw_out;
  CLI::App* gw = app.add_subcommand(
      "gen-weights", "Write reference weights (seed from RDONET_SEED)");
  gw->add_option("--arch", gw_arch, "Architecture config")->required();
  gw->add_option("--out", gw_out, "Manifest path")->required();

  std::string gg_arch, gg_out;
  double gg_base = kReferenceGainBase;
  CLI::App* gg = app.add_subcommand("gen-gains", "Write the reference gain table");
  gg->add_option("--arch", gg_arch, "Architecture config")->required();
  gg->add_option("--out", gg_out, "Gain table path")->required();
  gg->add_option("--base", gg_base, "Gain at the first support point");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enc) return RunEncode(ef);
    if (*dec) return RunDecode(df);
    if (*ins) return RunInspect(inspect_input);
    if (*ev) return RunEval(vf);
    if (*cx) return RunComplexity(cf);
    if (*gw) {
      RequireFile(gw_arch, "architecture");
      WriteWeights(ReferenceWeights(LoadArchFile(gw_arch), SeedFromEnv()), gw_out);
      return 0;
    }
    if (*gg) {
      RequireFile(gg_arch, "architecture");
      if (!(gg_base > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "--base must be positive");
      }
      WriteGainTable(ReferenceGainTable(LoadArchFile(gg_arch).latent_channels(), gg_base),
                     gg_out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error[" << ErrorCodeName(e.code()) << "]";
    if (e.segment() > 0) std::cerr << "[segment " << e.segment() << "]";
    std::cerr << ": " << e.what() << "\n";
    return kErrorExitBase + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return kErrorExitBase + static_cast<int>(ErrorCode::kInternal);
  }
  return 0;
}
