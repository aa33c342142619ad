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

#include "rdonet/network.h"

#include <algorithm>
#include <cmath>

#include "rdonet/status.h"

namespace rdonet {
namespace {

ConvWeights BindConv(const WeightStore& store, const std::string& name, int in,
                     int out, int k, int stride, bool masked = false) {
  const Tensor& w = store.Get(name + ".w");
  const Tensor& b = store.Get(name + ".b");
  return ConvWeights(in, out, k, stride, masked, w.values, b.values);
}

FeatureMap CountedConv(const ConvWeights& w, const FeatureMap& in,
                       uint64_t* macs) {
  FeatureMap out = Conv2d(w, in);
  if (macs) *macs += w.MacsPerOutput() * out.plane_size();
  return out;
}

void ApplyActivation(Activation a, FeatureMap& m) {
  for (float& v : m.values()) {
    switch (a) {
      case Activation::kRelu:
        v = v > 0.0f ? v : 0.0f;
        break;
      case Activation::kLeakyRelu:
        v = v > 0.0f ? v : v * kLeakySlope;
        break;
      case Activation::kSigmoid:
        v = 1.0f / (1.0f + std::exp(-v));
        break;
    }
  }
}

void AddInPlace(FeatureMap& a, const FeatureMap& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShape, "residual add of mismatched shapes");
  }
  auto av = a.values();
  auto bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
}

class ConvLayer : public Layer {
 public:
  ConvLayer(const LayerSpec& s, const WeightStore& store)
      : conv_(BindConv(store, s.name, s.in, s.out, s.kernel, s.stride,
                       s.masked)) {}
  FeatureMap Forward(const FeatureMap& in, const FeatureMap*,
                     uint64_t* macs) const override {
    return CountedConv(conv_, in, macs);
  }
  const ConvWeights& conv() const { return conv_; }

 private:
  ConvWeights conv_;
};

class SubpelLayer : public Layer {
 public:
  SubpelLayer(const LayerSpec& s, const WeightStore& store)
      : conv_(BindConv(store, s.name, s.in, s.out * s.up * s.up, s.kernel, 1)),
        r_(s.up) {}
  FeatureMap Forward(const FeatureMap& in, const FeatureMap*,
                     uint64_t* macs) const override {
    return PixelShuffle(CountedConv(conv_, in, macs), r_);
  }

 private:
  ConvWeights conv_;
  int r_;
};

class ActivationLayer : public Layer {
 public:
  explicit ActivationLayer(Activation a) : a_(a) {}
  FeatureMap Forward(const FeatureMap& in, const FeatureMap*,
                     uint64_t*) const override {
    FeatureMap out = in;
    ApplyActivation(a_, out);
    return out;
  }

 private:
  Activation a_;
};

class ResidualLayer : public Layer {
 public:
  ResidualLayer(const LayerSpec& s, const WeightStore& store) : up_(s.up) {
    const int r2 = up_ * up_;
    if (up_ > 1) {
      c1_ = BindConv(store, s.name + ".c1", s.in, s.out * r2, 3, 1);
      skip_ = BindConv(store, s.name + ".skip", s.in, s.out * r2,
                       s.skip_kernel, 1);
      has_skip_ = true;
    } else {
      c1_ = BindConv(store, s.name + ".c1", s.in, s.out, 3, s.stride);
      if (s.in != s.out || s.stride != 1) {
        skip_ = BindConv(store, s.name + ".skip", s.in, s.out, s.skip_kernel,
                         s.stride);
        has_skip_ = true;
      }
    }
    c2_ = BindConv(store, s.name + ".c2", s.out, s.out, 3, 1);
  }

  FeatureMap Forward(const FeatureMap& in, const FeatureMap*,
                     uint64_t* macs) const override {
    FeatureMap h = CountedConv(c1_, in, macs);
    if (up_ > 1) h = PixelShuffle(h, up_);
    ApplyActivation(Activation::kLeakyRelu, h);
    h = CountedConv(c2_, h, macs);
    ApplyActivation(Activation::kLeakyRelu, h);
    if (!has_skip_) {
      AddInPlace(h, in);
    } else {
      FeatureMap skip = CountedConv(skip_, in, macs);
      if (up_ > 1) skip = PixelShuffle(skip, up_);
      AddInPlace(h, skip);
    }
    return h;
  }

 private:
  int up_;
  bool has_skip_ = false;
  ConvWeights c1_, c2_, skip_;
};

class AttentionLayer : public Layer {
 public:
  AttentionLayer(const LayerSpec& s, const WeightStore& store) {
    const int half = s.in / 2;
    for (int branch = 0; branch < 2; ++branch) {
      for (int u = 0; u < 3; ++u) {
        std::string unit =
            s.name + "." + (branch == 0 ? "a" : "b") + std::to_string(u);
        units_[branch][u] = {BindConv(store, unit + ".c1", s.in, half, 1, 1),
                             BindConv(store, unit + ".c2", half, half, 3, 1),
                             BindConv(store, unit + ".c3", half, s.in, 1, 1)};
      }
    }
    gate_ = BindConv(store, s.name + ".gate", s.in, s.in, 1, 1);
  }

  FeatureMap Forward(const FeatureMap& in, const FeatureMap*,
                     uint64_t* macs) const override {
    FeatureMap a = Branch(0, in, macs);
    FeatureMap b = CountedConv(gate_, Branch(1, in, macs), macs);
    ApplyActivation(Activation::kSigmoid, b);
    FeatureMap out = in;
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (size_t i = 0; i < ov.size(); ++i) ov[i] += av[i] * bv[i];
    return out;
  }

 private:
  struct Unit {
    ConvWeights c1, c2, c3;
  };

  FeatureMap Branch(int branch, const FeatureMap& in, uint64_t* macs) const {
    FeatureMap x = in;
    for (const Unit& u : units_[branch]) {
      FeatureMap h = CountedConv(u.c1, x, macs);
      ApplyActivation(Activation::kRelu, h);
      h = CountedConv(u.c2, h, macs);
      ApplyActivation(Activation::kRelu, h);
      h = CountedConv(u.c3, h, macs);
      AddInPlace(h, x);
      ApplyActivation(Activation::kRelu, h);
      x = std::move(h);
    }
    return x;
  }

  Unit units_[2][3];
  ConvWeights gate_;
};

class ConcatConvLayer : public Layer {
 public:
  ConcatConvLayer(const LayerSpec& s, const WeightStore& store)
      : conv_(BindConv(store, s.name, s.in + s.in2, s.out, s.kernel, 1)),
        name_(s.name) {}

  FeatureMap Forward(const FeatureMap& in, const FeatureMap* secondary,
                     uint64_t* macs) const override {
    if (!secondary) {
      throw Error(ErrorCode::kShape, name_ + ": missing secondary input");
    }
    if (secondary->height() > in.height() || secondary->width() > in.width()) {
      throw Error(ErrorCode::kShape,
                  name_ + ": secondary input larger than primary");
    }
    // The primary is cropped to the secondary's extent (hyper synthesis
    // output is a multiple of 8 and may overhang the latent grid).
    FeatureMap cat =
        Concat(Crop(in, secondary->height(), secondary->width()), *secondary);
    return CountedConv(conv_, cat, macs);
  }

 private:
  ConvWeights conv_;
  std::string name_;
};

std::unique_ptr<Layer> MakeLayer(const LayerSpec& s, const WeightStore& store) {
  switch (s.kind) {
    case LayerKind::kConv:
      return std::make_unique<ConvLayer>(s, store);
    case LayerKind::kSubpel:
      return std::make_unique<SubpelLayer>(s, store);
    case LayerKind::kActivation:
      return std::make_unique<ActivationLayer>(s.activation);
    case LayerKind::kResidual:
      return std::make_unique<ResidualLayer>(s, store);
    case LayerKind::kAttention:
      return std::make_unique<AttentionLayer>(s, store);
    case LayerKind::kConcatConv:
      return std::make_unique<ConcatConvLayer>(s, store);
  }
  throw Error(ErrorCode::kInternal, "unknown layer kind");
}

int ConvOut(int n, int k, int s) { return (n + 2 * (k / 2) - k) / s + 1; }

uint64_t ConvMacs(int k, int in, int out, int h, int w) {
  return static_cast<uint64_t>(k) * k * in * out * h * w;
}

Shape LayerShape(const LayerSpec& l, Shape in, Shape secondary,
                 uint64_t* macs) {
  uint64_t m = 0;
  Shape out = in;
  switch (l.kind) {
    case LayerKind::kActivation:
      break;
    case LayerKind::kConv:
      out = {l.out, ConvOut(in.height, l.kernel, l.stride),
             ConvOut(in.width, l.kernel, l.stride)};
      m = ConvMacs(l.kernel, l.in, l.out, out.height, out.width);
      break;
    case LayerKind::kSubpel:
      m = ConvMacs(l.kernel, l.in, l.out * l.up * l.up, in.height, in.width);
      out = {l.out, in.height * l.up, in.width * l.up};
      break;
    case LayerKind::kResidual:
      if (l.up > 1) {
        const int r2 = l.up * l.up;
        out = {l.out, in.height * l.up, in.width * l.up};
        m = ConvMacs(3, l.in, l.out * r2, in.height, in.width) +
            ConvMacs(l.skip_kernel, l.in, l.out * r2, in.height, in.width) +
            ConvMacs(3, l.out, l.out, out.height, out.width);
      } else {
        out = {l.out, ConvOut(in.height, 3, l.stride),
               ConvOut(in.width, 3, l.stride)};
        m = ConvMacs(3, l.in, l.out, out.height, out.width) +
            ConvMacs(3, l.out, l.out, out.height, out.width);
        if (l.in != l.out || l.stride != 1) {
          m += ConvMacs(l.skip_kernel, l.in, l.out, out.height, out.width);
        }
      }
      break;
    case LayerKind::kAttention: {
      const int c = l.in;
      const int h = c / 2;
      uint64_t unit =
          ConvMacs(1, c, h, 1, 1) + ConvMacs(3, h, h, 1, 1) + ConvMacs(1, h, c, 1, 1);
      m = (6 * unit + ConvMacs(1, c, c, 1, 1)) * in.height * in.width;
      break;
    }
    case LayerKind::kConcatConv:
      if (secondary.channels == 0) {
        throw Error(ErrorCode::kShape, l.name + ": missing secondary input");
      }
      out = {l.out, secondary.height, secondary.width};
      m = ConvMacs(l.kernel, l.in + l.in2, l.out, out.height, out.width);
      break;
  }
  if (macs) *macs += m;
  return out;
}

}  // namespace

Network::Network(NetSpec spec, const WeightStore& store)
    : spec_(std::move(spec)) {
  for (const LayerSpec& l : spec_.layers) {
    layers_.push_back(MakeLayer(l, store));
  }
  if (layers_.size() == 1 && spec_.layers[0].kind == LayerKind::kConv) {
    single_conv_ = &static_cast<const ConvLayer&>(*layers_[0]).conv();
  }
}

FeatureMap Network::Forward(const FeatureMap& in, const FeatureMap* secondary,
                            uint64_t* macs) const {
  if (in.channels() != spec_.in) {
    throw Error(ErrorCode::kShape,
                spec_.name + " expects " + std::to_string(spec_.in) +
                    " input channels, got " + std::to_string(in.channels()));
  }
  if (spec_.secondary != 0 &&
      (!secondary || secondary->channels() != spec_.secondary)) {
    throw Error(ErrorCode::kShape,
                spec_.name + " needs a " + std::to_string(spec_.secondary) +
                    "-channel secondary input");
  }
  FeatureMap x = layers_[0]->Forward(in, secondary, macs);
  for (size_t i = 1; i < layers_.size(); ++i) {
    x = layers_[i]->Forward(x, secondary, macs);
  }
  return x;
}

const ConvWeights& Network::single_conv() const {
  if (!single_conv_) {
    throw Error(ErrorCode::kStructure, spec_.name + " is not a single conv");
  }
  return *single_conv_;
}

NetworkGraph::NetworkGraph(ArchConfig arch, const WeightStore& store)
    : arch_(std::move(arch)) {
  for (const auto& [name, spec] : arch_.nets) {
    for (const LayerSpec& l : spec.layers) {
      for (const ParamSpec& p : l.Params()) {
        if (!store.Has(p.name)) {
          throw Error(ErrorCode::kConfig,
                      "layer " + l.name + " (net " + name +
                          "): missing weight tensor " + p.name);
        }
        const Tensor& t = store.Get(p.name);
        if (t.shape != p.shape || t.values.size() != p.count()) {
          throw Error(ErrorCode::kConfig, "layer " + l.name + " (net " + name +
                                              "): tensor " + p.name +
                                              " has mismatched shape");
        }
      }
    }
    nets_.emplace(name, std::make_unique<Network>(spec, store));
  }
}

const Network& NetworkGraph::net(const std::string& name) const {
  auto it = nets_.find(name);
  if (it == nets_.end()) {
    throw Error(ErrorCode::kConfig, "no network named '" + name + "'");
  }
  return *it->second;
}

NetworkGraph LoadNetwork(const ArchConfig& arch, const WeightStore& store) {
  return NetworkGraph(arch, store);
}

NetworkGraph LoadNetwork(std::string_view arch_text, const WeightStore& store) {
  return NetworkGraph(ParseArch(arch_text), store);
}

Shape NetOutputShape(const NetSpec& net, Shape in, Shape secondary) {
  for (const LayerSpec& l : net.layers) in = LayerShape(l, in, secondary, nullptr);
  return in;
}

uint64_t NetMacs(const NetSpec& net, Shape in, Shape secondary) {
  uint64_t macs = 0;
  for (const LayerSpec& l : net.layers) in = LayerShape(l, in, secondary, &macs);
  return macs;
}

}  // namespace rdonet
