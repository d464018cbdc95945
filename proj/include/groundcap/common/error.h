// Copyright 2026 The Groundcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GROUNDCAP_COMMON_ERROR_H_
#define GROUNDCAP_COMMON_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundcap {

// Error categories shared by every module. The protocol serializes these by
// name, so the spelling returned by ErrorCodeName is part of the wire format.
enum class ErrorCode {
  kInput,
  kTransport,
  kProtocol,
  kParse,
  kConfiguration,
  kTraining,
  kNumeric,
  kAnnotation,
  kDecode,
  kCapability,
  kIo,
  kUsage,
};

std::string_view ErrorCodeName(ErrorCode code);

// Returns kProtocol for unknown names.
ErrorCode ErrorCodeFromName(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }

  // Extra payload, e.g. the raw backend reply behind a parse error.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace groundcap

#endif  // GROUNDCAP_COMMON_ERROR_H_
