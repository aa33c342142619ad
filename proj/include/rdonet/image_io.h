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

#ifndef RDONET_IMAGE_IO_H_
#define RDONET_IMAGE_IO_H_

#include <filesystem>

#include "rdonet/feature_map.h"

namespace rdonet {

// 8-bit PNG (gray, gray+alpha, RGB, RGBA; alpha dropped) or binary PPM (P6,
// maxval 255), returned as 3 x H x W with values v / 255.
FeatureMap ReadImage(const std::filesystem::path& path);

// Writes 3 x H x W values in [0, 1] as 8-bit RGB, rounding v * 255 to the
// nearest integer. The format follows the extension (.png, else P6 PPM).
void WriteImage(const FeatureMap& image, const std::filesystem::path& path);

}  // namespace rdonet

#endif  // RDONET_IMAGE_IO_H_
