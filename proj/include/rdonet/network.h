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

#ifndef RDONET_NETWORK_H_
#define RDONET_NETWORK_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rdonet/arch_config.h"
#include "rdonet/conv_kernels.h"
#include "rdonet/feature_map.h"
#include "rdonet/weights.h"

namespace rdonet {

inline constexpr float kLeakySlope = 0.01f;

class Layer {
 public:
  virtual ~Layer() = default;
  // `macs`, when non-null, is incremented by the multiply-accumulates done.
  virtual FeatureMap Forward(const FeatureMap& in, const FeatureMap* secondary,
                             uint64_t* macs) const = 0;
};

// A sequential sub-network with bound weights. Immutable once built.
class Network {
 public:
  Network(NetSpec spec, const WeightStore& store);

  FeatureMap Forward(const FeatureMap& in, const FeatureMap* secondary = nullptr,
                     uint64_t* macs = nullptr) const;

  const NetSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }

  // The conv of a single-layer net (context models evaluate it per position).
  const ConvWeights& single_conv() const;

 private:
  NetSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  const ConvWeights* single_conv_ = nullptr;
};

class NetworkGraph {
 public:
  NetworkGraph(ArchConfig arch, const WeightStore& store);

  const ArchConfig& arch() const { return arch_; }
  ModelKind model() const { return arch_.model; }
  int latent_channels() const { return arch_.latent_channels(); }
  int hyper_channels() const { return arch_.hyper_channels(); }
  const Network& net(const std::string& name) const;

 private:
  ArchConfig arch_;
  std::map<std::string, std::unique_ptr<Network>> nets_;
};

// Validates every parameter against the store (presence and shape) and binds.
NetworkGraph LoadNetwork(const ArchConfig& arch, const WeightStore& store);
NetworkGraph LoadNetwork(std::string_view arch_text, const WeightStore& store);

// Shape algebra, evaluated without weights. `secondary` is the extent of the
// secondary input for nets containing concat convs.
Shape NetOutputShape(const NetSpec& net, Shape in, Shape secondary = {});
// MACs of one Forward on an input of shape `in`.
uint64_t NetMacs(const NetSpec& net, Shape in, Shape secondary = {});

}  // namespace rdonet

#endif  // RDONET_NETWORK_H_
