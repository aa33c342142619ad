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

#include "rdonet/status.h"

namespace rdonet {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kStructure: return "structure";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kBadHeader: return "bad_header";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kSegmentOverflow: return "segment_overflow";
    case ErrorCode::kTrailingData: return "trailing_data";
    case ErrorCode::kCorrupt: return "corrupt";
    case ErrorCode::kRefused: return "refused";
    case ErrorCode::kInsufficientOverlap: return "insufficient_overlap";
    case ErrorCode::kImageTooSmall: return "image_too_small";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace rdonet
