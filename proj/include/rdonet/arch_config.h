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

#ifndef RDONET_ARCH_CONFIG_H_
#define RDONET_ARCH_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rdonet {

enum class LayerKind {
  kConv,        // optionally causal-masked (context model)
  kSubpel,      // conv to out*r^2 channels followed by pixel shuffle
  kActivation,
  kResidual,    // residual block; strided, upsampling or plain
  kAttention,   // residual attention block
  kConcatConv,  // conv over concat(current, secondary input)
};

enum class Activation { kRelu, kLeakyRelu, kSigmoid };

struct ParamSpec {
  std::string name;
  std::vector<int> shape;

  size_t count() const;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  std::string name;
  int in = 0;
  int in2 = 0;  // concat-conv secondary channels
  int out = 0;
  int kernel = 3;
  int stride = 1;
  int up = 1;           // subpel / residual upsampling factor
  int skip_kernel = 1;  // residual shortcut kernel when a projection is needed
  bool masked = false;
  Activation activation = Activation::kLeakyRelu;
  int line = 0;

  int OutChannels(int in_channels) const;
  std::vector<ParamSpec> Params() const;
};

struct NetSpec {
  std::string name;
  int in = 0;
  int out = 0;
  int secondary = 0;  // channels of the secondary input, 0 if unused
  int downsampling = 1;
  int upsampling = 1;
  std::vector<LayerSpec> layers;
};

enum class ModelKind { kRdoNet, kBaseline };

// Parsed and structurally validated architecture description.
struct ArchConfig {
  ModelKind model = ModelKind::kRdoNet;
  std::map<std::string, NetSpec> nets;

  bool has(const std::string& name) const { return nets.count(name) != 0; }
  const NetSpec& net(const std::string& name) const;

  int latent_channels() const { return net("fa").out; }
  int hyper_channels() const { return net("ls1.ha").out; }

  // Every parameter tensor referenced by the graph, deduplicated by name.
  std::vector<ParamSpec> Params() const;
};

// Grammar (one statement per line, '#' starts a comment):
//   model rdonet|baseline
//   set NAME EXPR
//   net NAME in=EXPR
//     conv NAME in= out= k= [stride=] [masked=1]
//     subpel NAME in= out= r= [k=]
//     act relu|lrelu|sigmoid
//     resblock NAME in= out= [stride=] [up=] [skip_k=]
//     attention NAME ch=
//     concat_conv NAME in= in2= out= k=
//     use NET
//   end
// EXPR is an integer expression over numbers and `set` variables using
// + - * / (division must be exact).
ArchConfig ParseArch(std::string_view text);
ArchConfig LoadArchFile(const std::filesystem::path& path);

}  // namespace rdonet

#endif  // RDONET_ARCH_CONFIG_H_
