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

#ifndef RDONET_STATUS_H_
#define RDONET_STATUS_H_

#include <stdexcept>
#include <string>

namespace rdonet {

// Error categories. The CLI maps each to a stable exit code and name.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kConfig,      // arch/weights/gains configuration problems
  kStructure,   // graph or grid structure violations
  kShape,       // tensor shape mismatch at runtime
  kBadMagic,
  kBadVersion,
  kBadHeader,
  kTruncated,
  kSegmentOverflow,
  kTrailingData,
  kCorrupt,     // entropy-coded payload does not decode
  kRefused,     // request exceeds a hard budget
  kInsufficientOverlap,
  kImageTooSmall,
  kInternal,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int segment = -1)
      : std::runtime_error(message), code_(code), segment_(segment) {}

  ErrorCode code() const { return code_; }
  // 1-based segment index in decode order, or -1 when not segment related.
  int segment() const { return segment_; }

 private:
  ErrorCode code_;
  int segment_;
};

}  // namespace rdonet

#endif  // RDONET_STATUS_H_
