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

#ifndef RDONET_FEATURE_MAP_H_
#define RDONET_FEATURE_MAP_H_

#include <cstddef>
#include <span>
#include <vector>

namespace rdonet {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  size_t size() const {
    return static_cast<size_t>(channels) * height * width;
  }
  bool operator==(const Shape&) const = default;
};

// C x H x W array of float32 values, stored channel-plane by channel-plane in
// row-major order.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width, float fill = 0.0f);
  explicit FeatureMap(Shape shape, float fill = 0.0f)
      : FeatureMap(shape.channels, shape.height, shape.width, fill) {}

  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  const Shape& shape() const { return shape_; }
  size_t plane_size() const {
    return static_cast<size_t>(shape_.height) * shape_.width;
  }
  bool empty() const { return values_.empty(); }

  float& at(int c, int y, int x) {
    return values_[(c * plane_size()) + static_cast<size_t>(y) * width() + x];
  }
  float at(int c, int y, int x) const {
    return values_[(c * plane_size()) + static_cast<size_t>(y) * width() + x];
  }

  std::span<float> plane(int c) {
    return {values_.data() + c * plane_size(), plane_size()};
  }
  std::span<const float> plane(int c) const {
    return {values_.data() + c * plane_size(), plane_size()};
  }
  float* row(int c, int y) {
    return values_.data() + c * plane_size() + static_cast<size_t>(y) * width();
  }
  const float* row(int c, int y) const {
    return values_.data() + c * plane_size() + static_cast<size_t>(y) * width();
  }

  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

  bool AllFinite() const;

  bool operator==(const FeatureMap& other) const = default;

 private:
  Shape shape_;
  std::vector<float> values_;
};

// Top-left crop to (height, width). Requires height/width not larger.
FeatureMap Crop(const FeatureMap& in, int height, int width);

// Channel concatenation; spatial dims must agree.
FeatureMap Concat(const FeatureMap& a, const FeatureMap& b);

}  // namespace rdonet

#endif  // RDONET_FEATURE_MAP_H_
