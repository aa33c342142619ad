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

#include "rdonet/conv_kernels.h"

#include <algorithm>
#include <string>

#include "rdonet/status.h"

namespace rdonet {
namespace {

// Output column range [x0, x1) for which ox*s + kx - p lies inside [0, w).
void ValidRange(int w, int out_w, int s, int kx, int p, int* x0, int* x1) {
  int lo = p - kx;  // need ox*s >= lo
  *x0 = lo <= 0 ? 0 : (lo + s - 1) / s;
  int hi = w - 1 + p - kx;  // need ox*s <= hi
  *x1 = hi < 0 ? 0 : std::min(out_w, hi / s + 1);
}

template <int kBlock>
void SpatialBlock(const ConvWeights& w, const FeatureMap& in, FeatureMap& out,
                  int co0, std::vector<float>& scratch) {
  const int k = w.kernel;
  const int s = w.stride;
  const int p = w.pad();
  const int out_h = out.height();
  const int out_w = out.width();
  scratch.resize(static_cast<size_t>(kBlock) * out_w);
  float* acc[kBlock];
  const float* wrow[kBlock];
  for (int b = 0; b < kBlock; ++b) acc[b] = scratch.data() + b * out_w;
  const size_t wstride = static_cast<size_t>(w.in) * k * k;

  for (int oy = 0; oy < out_h; ++oy) {
    for (int b = 0; b < kBlock; ++b) {
      std::fill_n(acc[b], out_w, w.bias[co0 + b]);
      wrow[b] = w.weight.data() + (co0 + b) * wstride;
    }
    for (int ci = 0; ci < w.in; ++ci) {
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * s + ky - p;
        if (iy < 0 || iy >= in.height()) continue;
        const float* src = in.row(ci, iy);
        for (int kx = 0; kx < k; ++kx) {
          if (!w.TapActive(ky, kx)) continue;
          int x0, x1;
          ValidRange(in.width(), out_w, s, kx, p, &x0, &x1);
          const size_t widx = (static_cast<size_t>(ci) * k + ky) * k + kx;
          float wv[kBlock];
          for (int b = 0; b < kBlock; ++b) wv[b] = wrow[b][widx];
          if (s == 1) {
            const float* sp = src + kx - p;
            for (int b = 0; b < kBlock; ++b) {
              float* a = acc[b];
              const float c = wv[b];
              for (int ox = x0; ox < x1; ++ox) a[ox] += c * sp[ox];
            }
          } else {
            for (int ox = x0; ox < x1; ++ox) {
              const float v = src[ox * s + kx - p];
              for (int b = 0; b < kBlock; ++b) acc[b][ox] += wv[b] * v;
            }
          }
        }
      }
    }
    for (int b = 0; b < kBlock; ++b) {
      std::copy_n(acc[b], out_w, out.row(co0 + b, oy));
    }
  }
}

void SpatialConv(const ConvWeights& w, const FeatureMap& in, FeatureMap& out) {
  std::vector<float> scratch;
  int co = 0;
  for (; co + 4 <= w.out; co += 4) SpatialBlock<4>(w, in, out, co, scratch);
  for (; co < w.out; ++co) SpatialBlock<1>(w, in, out, co, scratch);
}

void ChannelAt(const ConvWeights& w, const FeatureMap& in, int oy, int ox,
               float* acc) {
  const int k = w.kernel;
  const int s = w.stride;
  const int p = w.pad();
  std::copy(w.bias.begin(), w.bias.end(), acc);
  for (int ci = 0; ci < w.in; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      const int iy = oy * s + ky - p;
      if (iy < 0 || iy >= in.height()) continue;
      const float* src = in.row(ci, iy);
      for (int kx = 0; kx < k; ++kx) {
        if (!w.TapActive(ky, kx)) continue;
        const int ix = ox * s + kx - p;
        if (ix < 0 || ix >= in.width()) continue;
        const float v = src[ix];
        const float* wt =
            w.weight_t.data() +
            ((static_cast<size_t>(ci) * k + ky) * k + kx) * w.out;
        for (int co = 0; co < w.out; ++co) acc[co] += wt[co] * v;
      }
    }
  }
}

void ChannelConv(const ConvWeights& w, const FeatureMap& in, FeatureMap& out) {
  std::vector<float> acc(w.out);
  for (int oy = 0; oy < out.height(); ++oy) {
    for (int ox = 0; ox < out.width(); ++ox) {
      ChannelAt(w, in, oy, ox, acc.data());
      for (int co = 0; co < w.out; ++co) out.at(co, oy, ox) = acc[co];
    }
  }
}

}  // namespace

ConvWeights::ConvWeights(int in_ch, int out_ch, int k, int s, bool mask,
                         std::vector<float> w, std::vector<float> b)
    : in(in_ch),
      out(out_ch),
      kernel(k),
      stride(s),
      masked(mask),
      weight(std::move(w)),
      bias(std::move(b)) {
  const size_t taps = static_cast<size_t>(k) * k;
  if (weight.size() != static_cast<size_t>(in) * out * taps ||
      bias.size() != static_cast<size_t>(out)) {
    throw Error(ErrorCode::kShape, "conv weight size mismatch");
  }
  weight_t.resize(weight.size());
  for (int co = 0; co < out; ++co) {
    for (int ci = 0; ci < in; ++ci) {
      for (size_t t = 0; t < taps; ++t) {
        weight_t[(ci * taps + t) * out + co] = weight[(co * in + ci) * taps + t];
      }
    }
  }
}

FeatureMap Conv2d(const ConvWeights& w, const FeatureMap& in, ConvPath path) {
  if (in.channels() != w.in) {
    throw Error(ErrorCode::kShape, "conv expects " + std::to_string(w.in) +
                                       " input channels, got " +
                                       std::to_string(in.channels()));
  }
  FeatureMap out(w.out, w.OutSize(in.height()), w.OutSize(in.width()));
  if (path == ConvPath::kAuto) {
    path = out.width() >= 8 ? ConvPath::kSpatial : ConvPath::kChannel;
  }
  if (path == ConvPath::kSpatial) {
    SpatialConv(w, in, out);
  } else {
    ChannelConv(w, in, out);
  }
  return out;
}

void Conv2dAt(const ConvWeights& w, const FeatureMap& in, int oy, int ox,
              std::span<float> out) {
  if (in.channels() != w.in || out.size() != static_cast<size_t>(w.out)) {
    throw Error(ErrorCode::kShape, "conv-at shape mismatch");
  }
  ChannelAt(w, in, oy, ox, out.data());
}

FeatureMap PixelShuffle(const FeatureMap& in, int r) {
  const int r2 = r * r;
  if (in.channels() % r2 != 0) {
    throw Error(ErrorCode::kShape, "pixel shuffle channel count not divisible");
  }
  FeatureMap out(in.channels() / r2, in.height() * r, in.width() * r);
  for (int c = 0; c < out.channels(); ++c) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const int src_c = c * r2 + i * r + j;
        for (int y = 0; y < in.height(); ++y) {
          const float* src = in.row(src_c, y);
          float* dst = out.row(c, y * r + i);
          for (int x = 0; x < in.width(); ++x) dst[x * r + j] = src[x];
        }
      }
    }
  }
  return out;
}

}  // namespace rdonet
