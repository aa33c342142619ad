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

#include "rdonet/analysis.h"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rdonet/network.h"
#include "rdonet/status.h"

namespace rdonet {
namespace {

void CheckSameShape(const FeatureMap& a, const FeatureMap& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShape, "images differ in size");
  }
}

// ---- MS-SSIM ----

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001,
                                                 0.2363, 0.1333};

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

std::array<double, kWin> GaussWindow() {
  std::array<double, kWin> g;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += g[i];
  }
  for (double& x : g) x /= sum;
  return g;
}

// Separable valid filtering.
Plane Blur(const Plane& p) {
  static const std::array<double, kWin> g = GaussWindow();
  Plane t{p.h, p.w - kWin + 1, {}};
  t.v.resize(static_cast<size_t>(t.h) * t.w);
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += g[i] * p.at(y, x + i);
      t.v[static_cast<size_t>(y) * t.w + x] = s;
    }
  }
  Plane o{p.h - kWin + 1, t.w, {}};
  o.v.resize(static_cast<size_t>(o.h) * o.w);
  for (int y = 0; y < o.h; ++y) {
    for (int x = 0; x < o.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += g[i] * t.at(y + i, x);
      o.v[static_cast<size_t>(y) * o.w + x] = s;
    }
  }
  return o;
}

Plane Product(const Plane& a, const Plane& b) {
  Plane o{a.h, a.w, std::vector<double>(a.v.size())};
  for (size_t i = 0; i < a.v.size(); ++i) o.v[i] = a.v[i] * b.v[i];
  return o;
}

// 2x2 average pooling, padding each odd side by one zero on both ends and
// dividing by 4 regardless.
Plane Pool(const Plane& p) {
  const int py = p.h % 2, px = p.w % 2;
  Plane o{(p.h + 2 * py - 2) / 2 + 1, (p.w + 2 * px - 2) / 2 + 1, {}};
  o.v.assign(static_cast<size_t>(o.h) * o.w, 0.0);
  for (int y = 0; y < o.h; ++y) {
    for (int x = 0; x < o.w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int iy = 2 * y - py + dy, ix = 2 * x - px + dx;
          if (iy >= 0 && iy < p.h && ix >= 0 && ix < p.w) s += p.at(iy, ix);
        }
      }
      o.v[static_cast<size_t>(y) * o.w + x] = s / 4.0;
    }
  }
  return o;
}

// Mean SSIM and mean contrast-structure term at one scale.
std::pair<double, double> SsimCs(const Plane& a, const Plane& b) {
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  const Plane mu1 = Blur(a), mu2 = Blur(b);
  const Plane s11 = Blur(Product(a, a)), s22 = Blur(Product(b, b)),
              s12 = Blur(Product(a, b));
  double ssim = 0.0, cs = 0.0;
  for (size_t i = 0; i < mu1.v.size(); ++i) {
    const double m1 = mu1.v[i], m2 = mu2.v[i];
    const double v1 = s11.v[i] - m1 * m1, v2 = s22.v[i] - m2 * m2,
                 v12 = s12.v[i] - m1 * m2;
    const double c = (2.0 * v12 + kC2) / (v1 + v2 + kC2);
    cs += c;
    ssim += (2.0 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1) * c;
  }
  const double n = static_cast<double>(mu1.v.size());
  return {ssim / n, cs / n};
}

Plane ChannelPlane(const FeatureMap& f, int c) {
  Plane p{f.height(), f.width(), {}};
  auto src = f.plane(c);
  p.v.assign(src.begin(), src.end());
  return p;
}

// ---- Polynomial fits ----

// Least-squares cubic through (x, y); coefficients lowest degree first.
Eigen::Vector4d FitCubic(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd a(x.size(), 4);
  Eigen::VectorXd b(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k < 4; ++k) {
      a(i, k) = p;
      p *= x[i];
    }
    b(i) = y[i];
  }
  return a.colPivHouseholderQr().solve(b);
}

double IntegrateCubic(const Eigen::Vector4d& c, double lo, double hi) {
  auto prim = [&c](double x) {
    return c(0) * x + c(1) * x * x / 2 + c(2) * x * x * x / 3 +
           c(3) * x * x * x * x / 4;
  };
  return prim(hi) - prim(lo);
}

void CheckCurve(const RdCurve& curve, const char* which) {
  if (curve.size() < 4) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(which) + " curve needs at least 4 points");
  }
  for (size_t i = 0; i < curve.size(); ++i) {
    if (!(curve[i].rate > 0.0) || !std::isfinite(curve[i].quality)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(which) + " curve has a non-positive rate or "
                                       "non-finite quality");
    }
    if (i > 0 && !(curve[i].rate > curve[i - 1].rate)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(which) + " curve rates must strictly increase");
    }
  }
}

// Mean of fit(test) - fit(anchor) over the overlap of the abscissae.
double AverageGap(const std::vector<double>& xa, const std::vector<double>& ya,
                  const std::vector<double>& xt, const std::vector<double>& yt,
                  const char* axis) {
  const auto [amin, amax] = std::minmax_element(xa.begin(), xa.end());
  const auto [tmin, tmax] = std::minmax_element(xt.begin(), xt.end());
  const double lo = std::max(*amin, *tmin), hi = std::min(*amax, *tmax);
  if (!(hi > lo)) {
    std::ostringstream msg;
    msg << "curves do not overlap on the " << axis << " axis (anchor ["
        << *amin << ", " << *amax << "], test [" << *tmin << ", " << *tmax
        << "])";
    throw Error(ErrorCode::kInsufficientOverlap, msg.str());
  }
  const double ia = IntegrateCubic(FitCubic(xa, ya), lo, hi);
  const double it = IntegrateCubic(FitCubic(xt, yt), lo, hi);
  return (it - ia) / (hi - lo);
}

struct Columns {
  std::vector<double> log_rate, quality;
};

Columns Split(const RdCurve& c) {
  Columns out;
  for (const RdPoint& p : c) {
    out.log_rate.push_back(std::log(p.rate));
    out.quality.push_back(p.quality);
  }
  return out;
}

// Positions coded per latent grid.
struct Grid {
  Shape y, y2, hyper1, hyper2;
};

Grid GridFor(const ArchConfig& arch, int height, int width) {
  Grid g;
  g.y = NetOutputShape(arch.net("fa"), {3, height, width});
  const int ch = arch.hyper_channels();
  auto hyper = [ch](Shape s) {
    return Shape{ch, (s.height + 7) / 8, (s.width + 7) / 8};
  };
  g.hyper1 = hyper(g.y);
  if (arch.model == ModelKind::kRdoNet) {
    g.y2 = NetOutputShape(arch.net("ls2.down"), g.y);
    g.hyper2 = hyper(g.y2);
  }
  return g;
}

uint64_t Positions(Shape s) { return static_cast<uint64_t>(s.height) * s.width; }

// Context conv plus head at one position.
uint64_t ProbMacsPerPosition(const ArchConfig& arch, const std::string& unit,
                             bool hyper) {
  const NetSpec& ctx = arch.net(unit + (hyper ? ".hctx" : ".ctx"));
  const NetSpec& head = arch.net(unit + (hyper ? ".hhead" : ".head"));
  return NetMacs(ctx, {ctx.in, 1, 1}) + NetMacs(head, {head.in, 1, 1});
}

void CheckPadded(int height, int width) {
  if (height <= 0 || width <= 0 || height % kPadMultiple || width % kPadMultiple) {
    throw Error(ErrorCode::kInvalidArgument,
                "complexity dims must be positive multiples of 64");
  }
}

void CheckAlpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
}

}  // namespace

double Mse(const FeatureMap& a, const FeatureMap& b) {
  CheckSameShape(a, b);
  double sum = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va[i]) - vb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(va.size());
}

double Psnr(const FeatureMap& a, const FeatureMap& b) {
  const double mse = Mse(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double MsSsim(const FeatureMap& a, const FeatureMap& b) {
  CheckSameShape(a, b);
  if (a.height() < kMsSsimMinSide || a.width() < kMsSsimMinSide) {
    throw Error(ErrorCode::kImageTooSmall,
                "MS-SSIM needs at least " + std::to_string(kMsSsimMinSide) +
                    " pixels per side, got " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()));
  }
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    Plane pa = ChannelPlane(a, c), pb = ChannelPlane(b, c);
    double value = 1.0;
    for (size_t s = 0; s < kScaleWeights.size(); ++s) {
      const auto [ssim, cs] = SsimCs(pa, pb);
      const bool last = s + 1 == kScaleWeights.size();
      value *= std::pow(std::max(last ? ssim : cs, 0.0), kScaleWeights[s]);
      if (!last) {
        pa = Pool(pa);
        pb = Pool(pb);
      }
    }
    total += value;
  }
  return total / a.channels();
}

double MsSsimDb(double v) {
  if (v >= 1.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(1.0 - v);
}

double BdRate(const RdCurve& anchor, const RdCurve& test) {
  CheckCurve(anchor, "anchor");
  CheckCurve(test, "test");
  const Columns a = Split(anchor), t = Split(test);
  const double gap = AverageGap(a.quality, a.log_rate, t.quality, t.log_rate,
                                "quality");
  return (std::exp(gap) - 1.0) * 100.0;
}

double BdQuality(const RdCurve& anchor, const RdCurve& test) {
  CheckCurve(anchor, "anchor");
  CheckCurve(test, "test");
  const Columns a = Split(anchor), t = Split(test);
  return AverageGap(a.log_rate, a.quality, t.log_rate, t.quality, "rate");
}

RdCurve ReadRdCurve(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open curve " + path);
  RdCurve curve;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream in(line);
    RdPoint p;
    if (!(in >> p.rate >> p.quality)) {
      if (curve.empty() && n == 1) continue;  // header row
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(n) + ": expected rate,quality");
    }
    curve.push_back(p);
  }
  return curve;
}

double CountMacs(const ArchConfig& arch, int height, int width, double alpha) {
  CheckPadded(height, width);
  CheckAlpha(alpha);
  const Grid g = GridFor(arch, height, width);
  double macs = static_cast<double>(NetMacs(arch.net("fa"), {3, height, width}) +
                                    NetMacs(arch.net("fs"), g.y));
  auto unit = [&](const std::string& name, Shape latent, Shape hyper,
                  Shape cond, double coded_fraction) {
    macs += NetMacs(arch.net(name + ".ha"), latent, cond);
    macs += NetMacs(arch.net(name + ".hs"), hyper, cond);
    macs += static_cast<double>(Positions(hyper) *
                                ProbMacsPerPosition(arch, name, true));
    macs += coded_fraction * static_cast<double>(Positions(latent)) *
            ProbMacsPerPosition(arch, name, false);
  };
  if (arch.model == ModelKind::kBaseline) {
    unit("ls1", g.y, g.hyper1, {}, 1.0);
  } else {
    macs += NetMacs(arch.net("ls2.down"), g.y);
    unit("ls2", g.y2, g.hyper2, {}, 1.0 - alpha);
    macs += NetMacs(arch.net("ls2.up"), g.y2);
    macs += NetMacs(arch.net("ls1.fuse"), g.y, g.y);
    unit("ls1", g.y, g.hyper1, g.y, alpha);
    macs += NetMacs(arch.net("ls1.combine"), g.y, g.y);
  }
  return macs / (static_cast<double>(height) * width);
}

ComplexityReport AnalyticComplexity(const ArchConfig& arch, int height,
                                    int width, double alpha) {
  CheckPadded(height, width);
  CheckAlpha(alpha);
  const Grid g = GridFor(arch, height, width);
  const double pixels = static_cast<double>(height) * width;
  const double c = arch.latent_channels();
  const double ch = arch.hyper_channels();
  ComplexityReport r;
  r.alpha = alpha;
  r.mac_per_pixel = CountMacs(arch, height, width, alpha);
  double ae = 0.0, ctx = 0.0, ctx_hyper = 0.0;
  if (arch.model == ModelKind::kBaseline) {
    ctx = Positions(g.y);
    ae = c * ctx + ch * Positions(g.hyper1);
    ctx_hyper = Positions(g.hyper1);
  } else {
    ctx = alpha * Positions(g.y) + (1.0 - alpha) * Positions(g.y2);
    ae = c * ctx + ch * (Positions(g.hyper1) + Positions(g.hyper2));
    ctx_hyper = Positions(g.hyper1) + Positions(g.hyper2);
  }
  r.ae_per_pixel = ae / pixels;
  r.ctx_per_pixel = ctx / pixels;
  r.ctx_hyper_per_pixel = ctx_hyper / pixels;
  return r;
}

ComplexityReport MeasuredComplexity(const RunStats& stats, int height,
                                    int width, double alpha) {
  CheckPadded(height, width);
  const double pixels = static_cast<double>(height) * width;
  ComplexityReport r;
  r.alpha = alpha;
  r.measured = true;
  r.mac_per_pixel = static_cast<double>(stats.macs) / pixels;
  r.ae_per_pixel = static_cast<double>(stats.counters.ae_calls) / pixels;
  r.ctx_per_pixel = static_cast<double>(stats.counters.ctx_calls_main) / pixels;
  r.ctx_hyper_per_pixel =
      static_cast<double>(stats.counters.ctx_calls_hyper) / pixels;
  return r;
}

std::string ComplexityCsv(const std::vector<ComplexityReport>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "mode,alpha,mac_per_pixel,ae_per_pixel,ctx_per_pixel,"
         "ctx_hyper_per_pixel\n";
  for (const ComplexityReport& r : rows) {
    out << (r.measured ? "measured" : "analytic") << ',' << r.alpha << ','
        << r.mac_per_pixel << ',' << r.ae_per_pixel << ',' << r.ctx_per_pixel
        << ',' << r.ctx_hyper_per_pixel << '\n';
  }
  return out.str();
}

}  // namespace rdonet
