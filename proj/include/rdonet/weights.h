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

#ifndef RDONET_WEIGHTS_H_
#define RDONET_WEIGHTS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rdonet/arch_config.h"

namespace rdonet {

struct Tensor {
  std::vector<int> shape;
  std::vector<float> values;
};

// Named float32 tensors. On disk: a text manifest
//
//   rdonet-weights 1
//   blob <file name relative to the manifest>
//   <name> <rank> <dim>... <element offset>
//
// and a blob of little-endian float32 values.
class WeightStore {
 public:
  void Put(std::string name, Tensor tensor);
  bool Has(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& Get(const std::string& name) const;
  Tensor& Mutable(const std::string& name);
  size_t size() const { return tensors_.size(); }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

WeightStore ReadWeights(const std::filesystem::path& manifest);
// Writes `manifest` and a sibling blob with the same stem and extension .bin.
void WriteWeights(const WeightStore& store,
                  const std::filesystem::path& manifest);

// Reference weights: every tensor is filled from its own 64-bit LCG stream
//   state_0 = seed XOR FNV-1a-64(name)
//   state_{n+1} = state_n * 6364136223846793005 + 1442695040888963407
//   u_n = (state_{n+1} >> 40) / 2^24
// mapped to (2 u_n - 1) * a with a = scale * sqrt(3 / fan_in) for weights
// and a = 0.01 for biases. Scale is 1 except for the last conv of residual
// branches (0.5). Identically named tensors in different configs are equal.
inline constexpr uint64_t kDefaultWeightSeed = 0x5244'4f4e'6574'0001ULL;
WeightStore ReferenceWeights(const ArchConfig& arch,
                             uint64_t seed = kDefaultWeightSeed);

uint64_t Fnv1a64(const std::string& s);

}  // namespace rdonet

#endif  // RDONET_WEIGHTS_H_
