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

#include "groundcap/common/error.h"

#include <array>
#include <utility>

namespace groundcap {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 12> kNames = {{
    {ErrorCode::kInput, "input"},
    {ErrorCode::kTransport, "transport"},
    {ErrorCode::kProtocol, "protocol"},
    {ErrorCode::kParse, "parse"},
    {ErrorCode::kConfiguration, "configuration"},
    {ErrorCode::kTraining, "training"},
    {ErrorCode::kNumeric, "numeric"},
    {ErrorCode::kAnnotation, "annotation"},
    {ErrorCode::kDecode, "decode"},
    {ErrorCode::kCapability, "capability"},
    {ErrorCode::kIo, "io"},
    {ErrorCode::kUsage, "usage"},
}};

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown";
}

ErrorCode ErrorCodeFromName(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::kProtocol;
}

}  // namespace groundcap
