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

#ifndef RDONET_RANGE_CODER_H_
#define RDONET_RANGE_CODER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "rdonet/gmm.h"

namespace rdonet {

// Byte-oriented range coder with 32-bit range, 64-bit low and carry
// propagation through a pending 0xFF run. Probabilities are 16-bit.
// The always-zero leading byte is not emitted, so a stream of n symbols
// needs exactly (4 + renormalizations) bytes, and zero symbols need none.
class RangeEncoder {
 public:
  void Encode(const CdfTable& table, int index);
  // Flushes and returns the segment. Empty if nothing was encoded.
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  bool skip_first_ = true;
  bool any_ = false;
  std::vector<uint8_t> out_;
};

// Decodes a segment produced by RangeEncoder. Running past the end of the
// segment, an out-of-range code value, or unread bytes at Finish() raise
// kCorrupt tagged with `segment`.
class RangeDecoder {
 public:
  RangeDecoder(std::span<const uint8_t> data, int segment = -1);

  int Decode(const CdfTable& table);
  void Finish() const;

 private:
  void Start();
  uint8_t NextByte();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  int segment_;
  bool started_ = false;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace rdonet

#endif  // RDONET_RANGE_CODER_H_
