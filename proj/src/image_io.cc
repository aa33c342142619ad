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

#include "rdonet/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "rdonet/status.h"

namespace rdonet {
namespace {

using File = std::unique_ptr<FILE, int (*)(FILE*)>;

File Open(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

bool HasPngSignature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  png_byte sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

FeatureMap ReadPng(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorCode::kIo, path.string() + ": " + img.message);
  }
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, path.string() + ": only 8-bit PNG is supported");
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, path.string() + ": " + img.message);
  }
  const int w = static_cast<int>(img.width), h = static_cast<int>(img.height);
  FeatureMap out(3, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = buf[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0f;
      }
    }
  }
  return out;
}

// Reads one PPM header token, skipping whitespace and comments.
bool Token(FILE* f, int* value) {
  int ch = std::fgetc(f);
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = std::fgetc(f);
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = std::fgetc(f);
  }
  if (ch == EOF || !std::isdigit(ch)) return false;
  long v = 0;
  while (ch != EOF && std::isdigit(ch)) {
    v = v * 10 + (ch - '0');
    if (v > (1 << 24)) return false;
    ch = std::fgetc(f);
  }
  *value = static_cast<int>(v);
  return ch != EOF && std::isspace(ch);  // exactly one whitespace byte consumed
}

FeatureMap ReadPpm(const std::filesystem::path& path) {
  File f = Open(path, "rb");
  char magic[2];
  int w = 0, h = 0, maxval = 0;
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' || magic[1] != '6' ||
      !Token(f.get(), &w) || !Token(f.get(), &h) || !Token(f.get(), &maxval)) {
    throw Error(ErrorCode::kIo, path.string() + ": not a PNG or binary PPM");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::kIo, path.string() + ": only 8-bit P6 is supported");
  }
  std::vector<uint8_t> buf(static_cast<size_t>(w) * h * 3);
  if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size()) {
    throw Error(ErrorCode::kIo, path.string() + ": truncated pixel data");
  }
  FeatureMap out(3, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = buf[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0f;
      }
    }
  }
  return out;
}

std::vector<uint8_t> Interleave(const FeatureMap& image) {
  if (image.channels() != 3) {
    throw Error(ErrorCode::kShape, "images must have 3 channels");
  }
  std::vector<uint8_t> buf(image.plane_size() * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        buf[(static_cast<size_t>(y) * image.width() + x) * 3 + c] =
            static_cast<uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return buf;
}

}  // namespace

FeatureMap ReadImage(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "no such file: " + path.string());
  }
  return HasPngSignature(path) ? ReadPng(path) : ReadPpm(path);
}

void WriteImage(const FeatureMap& image, const std::filesystem::path& path) {
  const std::vector<uint8_t> buf = Interleave(image);
  if (path.extension() == ".png") {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = image.width();
    img.height = image.height();
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
      throw Error(ErrorCode::kIo, path.string() + ": " + img.message);
    }
    return;
  }
  File f = Open(path, "wb");
  std::fprintf(f.get(), "P6\n%d %d\n255\n", image.width(), image.height());
  if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size()) {
    throw Error(ErrorCode::kIo, "failed writing " + path.string());
  }
}

}  // namespace rdonet
