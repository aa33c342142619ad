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

#include "rdonet/weights.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rdonet/status.h"

namespace rdonet {
namespace {

void PutLe32(std::vector<uint8_t>& out, float v) {
  uint32_t bits = std::bit_cast<uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
}

float GetLe32(const uint8_t* p) {
  uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

uint64_t Fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void WeightStore::Put(std::string name, Tensor tensor) {
  tensors_[std::move(name)] = std::move(tensor);
}

const Tensor& WeightStore::Get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw Error(ErrorCode::kConfig, "missing weight tensor " + name);
  }
  return it->second;
}

Tensor& WeightStore::Mutable(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw Error(ErrorCode::kConfig, "missing weight tensor " + name);
  }
  return it->second;
}

WeightStore ReadWeights(const std::filesystem::path& manifest) {
  std::ifstream mf(manifest);
  if (!mf) throw Error(ErrorCode::kIo, "cannot open " + manifest.string());
  std::string magic;
  int version = 0;
  mf >> magic >> version;
  if (magic != "rdonet-weights" || version != 1) {
    throw Error(ErrorCode::kConfig,
                manifest.string() + ": not an rdonet-weights v1 manifest");
  }
  std::string key, blob_name;
  mf >> key >> blob_name;
  if (key != "blob") {
    throw Error(ErrorCode::kConfig, manifest.string() + ": missing blob line");
  }
  auto blob_path = manifest.parent_path() / blob_name;
  std::ifstream bf(blob_path, std::ios::binary);
  if (!bf) throw Error(ErrorCode::kIo, "cannot open " + blob_path.string());
  std::vector<uint8_t> blob((std::istreambuf_iterator<char>(bf)),
                            std::istreambuf_iterator<char>());
  if (blob.size() % 4 != 0) {
    throw Error(ErrorCode::kConfig, blob_path.string() + ": size not a multiple of 4");
  }
  const size_t total = blob.size() / 4;

  WeightStore store;
  std::string name;
  while (mf >> name) {
    int rank = 0;
    mf >> rank;
    if (!mf || rank <= 0 || rank > 8) {
      throw Error(ErrorCode::kConfig, manifest.string() + ": bad rank for " + name);
    }
    Tensor t;
    t.shape.resize(rank);
    size_t count = 1;
    for (int& d : t.shape) {
      mf >> d;
      if (!mf || d <= 0) {
        throw Error(ErrorCode::kConfig, manifest.string() + ": bad shape for " + name);
      }
      count *= static_cast<size_t>(d);
    }
    size_t offset = 0;
    mf >> offset;
    if (!mf || offset > total || count > total - offset) {
      throw Error(ErrorCode::kConfig,
                  manifest.string() + ": " + name + " exceeds blob length");
    }
    t.values.resize(count);
    for (size_t i = 0; i < count; ++i) {
      t.values[i] = GetLe32(&blob[4 * (offset + i)]);
    }
    store.Put(name, std::move(t));
  }
  return store;
}

void WriteWeights(const WeightStore& store,
                  const std::filesystem::path& manifest) {
  auto blob_path = manifest;
  blob_path.replace_extension(".bin");
  if (blob_path == manifest) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight manifest cannot use the .bin extension: " + manifest.string());
  }
  std::ostringstream mf;
  mf << "rdonet-weights 1\nblob " << blob_path.filename().string() << "\n";
  std::vector<uint8_t> blob;
  size_t offset = 0;
  for (const auto& [name, t] : store.tensors()) {
    mf << name << ' ' << t.shape.size();
    for (int d : t.shape) mf << ' ' << d;
    mf << ' ' << offset << '\n';
    for (float v : t.values) PutLe32(blob, v);
    offset += t.values.size();
  }
  std::ofstream bf(blob_path, std::ios::binary);
  bf.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size()));
  std::ofstream out(manifest);
  out << mf.str();
  if (!bf || !out) {
    throw Error(ErrorCode::kIo, "failed writing " + manifest.string());
  }
}

WeightStore ReferenceWeights(const ArchConfig& arch, uint64_t seed) {
  WeightStore store;
  for (const ParamSpec& p : arch.Params()) {
    Tensor t;
    t.shape = p.shape;
    t.values.resize(p.count());
    double amplitude = 0.01;
    if (EndsWith(p.name, ".w")) {
      // shape = out, in, k, k
      double fan_in = static_cast<double>(p.shape[1]) * p.shape[2] * p.shape[3];
      double scale = EndsWith(p.name, ".c2.w") || EndsWith(p.name, ".c3.w")
                         ? 0.5
                         : 1.0;
      amplitude = scale * std::sqrt(3.0 / fan_in);
    }
    uint64_t state = seed ^ Fnv1a64(p.name);
    for (float& v : t.values) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      double u = static_cast<double>(state >> 40) / 16777216.0;
      v = static_cast<float>((2.0 * u - 1.0) * amplitude);
    }
    store.Put(p.name, std::move(t));
  }
  return store;
}

}  // namespace rdonet
