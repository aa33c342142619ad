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

#include "rdonet/feature_map.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdonet/status.h"

namespace rdonet {

FeatureMap::FeatureMap(int channels, int height, int width, float fill)
    : shape_{channels, height, width} {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw Error(ErrorCode::kShape,
                "feature map dimensions must be positive, got " +
                    std::to_string(channels) + "x" + std::to_string(height) +
                    "x" + std::to_string(width));
  }
  values_.assign(shape_.size(), fill);
}

bool FeatureMap::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](float v) { return std::isfinite(v); });
}

FeatureMap Crop(const FeatureMap& in, int height, int width) {
  if (height > in.height() || width > in.width()) {
    throw Error(ErrorCode::kShape, "crop larger than source");
  }
  if (height == in.height() && width == in.width()) return in;
  FeatureMap out(in.channels(), height, width);
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      std::copy_n(in.row(c, y), width, out.row(c, y));
    }
  }
  return out;
}

FeatureMap Concat(const FeatureMap& a, const FeatureMap& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::kShape, "concat of maps with different extents");
  }
  FeatureMap out(a.channels() + b.channels(), a.height(), a.width());
  auto dst = out.values();
  std::copy(a.values().begin(), a.values().end(), dst.begin());
  std::copy(b.values().begin(), b.values().end(),
            dst.begin() + static_cast<std::ptrdiff_t>(a.values().size()));
  return out;
}

}  // namespace rdonet
