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

#include "rdonet/range_coder.h"

#include "rdonet/status.h"

namespace rdonet {
namespace {
constexpr uint32_t kTop = 1u << 24;
}  // namespace

void RangeEncoder::Encode(const CdfTable& table, int index) {
  any_ = true;
  const uint32_t r = range_ >> kFreqBits;
  low_ += static_cast<uint64_t>(r) * table.cum[index];
  range_ = r * table.freq(index);
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t temp = cache_;
    do {
      if (skip_first_) {
        skip_first_ = false;
      } else {
        out_.push_back(static_cast<uint8_t>(temp + carry));
      }
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  if (!any_) return {};
  for (int i = 0; i < 5; ++i) ShiftLow();
  any_ = false;
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data, int segment)
    : data_(data), segment_(segment) {}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= data_.size()) {
    throw Error(ErrorCode::kCorrupt, "segment exhausted", segment_);
  }
  return data_[pos_++];
}

void RangeDecoder::Start() {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | NextByte();
  started_ = true;
}

int RangeDecoder::Decode(const CdfTable& table) {
  if (!started_) Start();
  const uint32_t r = range_ >> kFreqBits;
  const uint32_t value = code_ / r;
  if (value >= kFreqTotal) {
    throw Error(ErrorCode::kCorrupt, "invalid code value", segment_);
  }
  const int index = table.Find(value);
  code_ -= r * table.cum[index];
  range_ = r * table.freq(index);
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | NextByte();
  }
  return index;
}

void RangeDecoder::Finish() const {
  if (pos_ != data_.size()) {
    throw Error(ErrorCode::kCorrupt,
                std::to_string(data_.size() - pos_) + " unread bytes in segment",
                segment_);
  }
}

}  // namespace rdonet
