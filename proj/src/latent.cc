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

#include "rdonet/latent.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rdonet/status.h"

namespace rdonet {

MaskGrid::MaskGrid(int rows, int cols, bool high) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) {
    throw Error(ErrorCode::kStructure, "mask grid must be non-empty");
  }
  cells_.assign(static_cast<size_t>(rows) * cols, high ? 1 : 0);
}

MaskGrid MaskGrid::FromBits(int rows, int cols, uint64_t bits) {
  MaskGrid m(rows, cols, false);
  for (int i = 0; i < m.cells(); ++i) m.cells_[i] = (bits >> i) & 1;
  return m;
}

int MaskGrid::CountHigh() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), 1));
}

LatentMask LatentMask::All(int height, int width, bool coded) {
  return {height, width,
          std::vector<uint8_t>(static_cast<size_t>(height) * width, coded)};
}

int LatentMask::CountCoded() const {
  return static_cast<int>(std::count(coded.begin(), coded.end(), 1));
}

LatentMasks DeriveLatentMasks(const MaskGrid& mask, int high_height,
                              int high_width, int low_height, int low_width) {
  if (low_height != mask.rows() || low_width != mask.cols() ||
      high_height != 2 * low_height || high_width != 2 * low_width) {
    throw Error(ErrorCode::kStructure,
                "latent grids " + std::to_string(high_height) + "x" +
                    std::to_string(high_width) + " / " +
                    std::to_string(low_height) + "x" +
                    std::to_string(low_width) +
                    " do not match a " + std::to_string(mask.rows()) + "x" +
                    std::to_string(mask.cols()) + " mask");
  }
  LatentMasks out{LatentMask::All(high_height, high_width, false),
                  LatentMask::All(low_height, low_width, false)};
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (mask.high(r, c)) {
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            out.high.coded[(2 * r + dy) * high_width + 2 * c + dx] = 1;
          }
        }
      } else {
        out.low.coded[r * low_width + c] = 1;
      }
    }
  }
  return out;
}

void GainTable::Validate() const {
  if (channels <= 0) throw Error(ErrorCode::kConfig, "gain table has no channels");
  for (const auto& point : points) {
    for (const GainVectors& g : point) {
      if (g.encoder.size() != static_cast<size_t>(channels) ||
          g.decoder.size() != static_cast<size_t>(channels)) {
        throw Error(ErrorCode::kConfig, "gain vector does not cover all channels");
      }
      for (const auto* v : {&g.encoder, &g.decoder}) {
        for (float x : *v) {
          if (!(x > 0.0f) || !std::isfinite(x)) {
            throw Error(ErrorCode::kConfig, "gains must be positive and finite");
          }
        }
      }
    }
  }
}

GainTable ReferenceGainTable(int channels, double base) {
  GainTable table;
  table.channels = channels;
  for (int i = 0; i < kNumSupportPoints; ++i) {
    float g = static_cast<float>(base * std::pow(100.0, i / 5.0));
    for (auto& space : table.points[i]) {
      space.encoder.assign(channels, g);
      space.decoder.assign(channels, g);
    }
  }
  return table;
}

GainTable ReadGainTable(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open gain table " + path.string());
  std::string magic, key;
  int version = 0;
  GainTable table;
  f >> magic >> version >> key >> table.channels;
  if (magic != "rdonet-gains" || version != 1 || key != "channels" ||
      table.channels <= 0) {
    throw Error(ErrorCode::kConfig, path.string() + ": not an rdonet-gains v1 file");
  }
  std::vector<std::vector<bool>> seen(kNumSupportPoints, std::vector<bool>(4));
  std::string word;
  while (f >> word) {
    int point = -1;
    std::string space, side;
    f >> point >> space >> side;
    if (word != "point" || point < 0 || point >= kNumSupportPoints ||
        (space != "ls1" && space != "ls2") || (side != "enc" && side != "dec")) {
      throw Error(ErrorCode::kConfig, path.string() + ": malformed gain entry");
    }
    int s = space == "ls1" ? kHighLatent : kLowLatent;
    GainVectors& g = table.points[point][s];
    std::vector<float>& v = side == "enc" ? g.encoder : g.decoder;
    v.resize(table.channels);
    for (float& x : v) {
      if (!(f >> x)) {
        throw Error(ErrorCode::kConfig, path.string() + ": short gain vector");
      }
    }
    seen[point][s * 2 + (side == "dec")] = true;
  }
  for (const auto& p : seen) {
    for (bool b : p) {
      if (!b) throw Error(ErrorCode::kConfig, path.string() + ": incomplete gain table");
    }
  }
  table.Validate();
  return table;
}

void WriteGainTable(const GainTable& table, const std::filesystem::path& path) {
  std::ofstream f(path);
  f << "rdonet-gains 1\nchannels " << table.channels << "\n";
  f.precision(9);
  for (int i = 0; i < kNumSupportPoints; ++i) {
    for (int s = 0; s < 2; ++s) {
      for (int side = 0; side < 2; ++side) {
        const auto& v = side == 0 ? table.points[i][s].encoder
                                  : table.points[i][s].decoder;
        f << "point " << i << (s == 0 ? " ls1 " : " ls2 ")
          << (side == 0 ? "enc" : "dec");
        for (float x : v) f << ' ' << x;
        f << '\n';
      }
    }
  }
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

RateOperatingPoint OperatingPointForLambda(double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  }
  if (lambda <= kSupportLambdas.front()) return {0, 0};
  if (lambda >= kSupportLambdas.back()) return {kNumSupportPoints - 1, 0};
  int i = 0;
  while (lambda >= kSupportLambdas[i + 1]) ++i;
  double t = std::log(lambda / kSupportLambdas[i]) /
             std::log(kSupportLambdas[i + 1] / kSupportLambdas[i]);
  int code = static_cast<int>(std::lround(t * 255.0));
  if (code >= 255) return {i + 1, 0};
  return {i, static_cast<uint8_t>(code)};
}

RateOperatingPoint ParseOperatingPoint(const std::string& text) {
  auto colon = text.find(':');
  RateOperatingPoint op;
  try {
    op.index = std::stoi(text.substr(0, colon));
    double t = colon == std::string::npos ? 0.0 : std::stod(text.substr(colon + 1));
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("t");
    int code = static_cast<int>(std::lround(t * 255.0));
    if (code == 255 && op.index < kNumSupportPoints - 1) {
      ++op.index;
      code = 0;
    }
    op.t_code = static_cast<uint8_t>(code);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "bad operating point '" + text + "'");
  }
  if (!op.Valid()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid operating point '" + text + "'");
  }
  return op;
}

GainVectors InterpolateGain(const GainTable& table, RateOperatingPoint op,
                            LatentSpace space) {
  if (!op.Valid()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid rate operating point");
  }
  const GainVectors& lo = table.points[op.index][space];
  if (op.t_code == 0) return lo;
  const GainVectors& hi = table.points[op.index + 1][space];
  if (op.t_code == 255) return hi;
  const double t = op.t();
  auto blend = [t](const std::vector<float>& a, const std::vector<float>& b) {
    std::vector<float> g(a.size());
    for (size_t c = 0; c < a.size(); ++c) {
      g[c] = static_cast<float>(std::pow(static_cast<double>(a[c]), 1.0 - t) *
                                std::pow(static_cast<double>(b[c]), t));
    }
    return g;
  };
  return {blend(lo.encoder, hi.encoder), blend(lo.decoder, hi.decoder)};
}

QuantizedLatent Quantize(const FeatureMap& latent, std::span<const float> gain,
                         const LatentMask& mask) {
  if (gain.size() != static_cast<size_t>(latent.channels())) {
    throw Error(ErrorCode::kShape, "gain vector does not match latent channels");
  }
  if (mask.height != latent.height() || mask.width != latent.width()) {
    throw Error(ErrorCode::kShape, "mask resolution does not match latent");
  }
  QuantizedLatent q;
  q.shape = latent.shape();
  q.mask = mask;
  q.symbols.assign(latent.shape().size(), 0);
  size_t i = 0;
  for (int c = 0; c < latent.channels(); ++c) {
    for (int y = 0; y < latent.height(); ++y) {
      for (int x = 0; x < latent.width(); ++x, ++i) {
        if (!mask.at(y, x)) continue;
        float v = std::round(latent.at(c, y, x) * gain[c]);
        if (v < kMinSymbol || v > kMaxSymbol) {
          ++q.saturated;
          v = std::clamp(v, static_cast<float>(kMinSymbol),
                         static_cast<float>(kMaxSymbol));
        }
        q.symbols[i] = static_cast<int16_t>(v);
      }
    }
  }
  return q;
}

FeatureMap Dequantize(const QuantizedLatent& q,
                      std::span<const float> decoder_gain) {
  if (decoder_gain.size() != static_cast<size_t>(q.shape.channels)) {
    throw Error(ErrorCode::kShape, "gain vector does not match latent channels");
  }
  FeatureMap out(q.shape);
  size_t i = 0;
  for (int c = 0; c < q.shape.channels; ++c) {
    for (int y = 0; y < q.shape.height; ++y) {
      for (int x = 0; x < q.shape.width; ++x, ++i) {
        if (!q.mask.at(y, x)) continue;
        out.at(c, y, x) = static_cast<float>(q.symbols[i]) / decoder_gain[c];
      }
    }
  }
  return out;
}

}  // namespace rdonet
