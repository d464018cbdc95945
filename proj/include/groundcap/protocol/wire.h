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

#ifndef GROUNDCAP_PROTOCOL_WIRE_H_
#define GROUNDCAP_PROTOCOL_WIRE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "groundcap/common/error.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/types.h"

// JSON codecs for the newline-delimited backend protocol. See protocol.md for
// the message layouts. Decoders throw Error(kProtocol) on missing or
// mistyped fields.
namespace groundcap::wire {

inline constexpr char kOpTopKNext[] = "top_k_next";
inline constexpr char kOpGreedyExtend[] = "greedy_extend";
inline constexpr char kOpHiddenStates[] = "hidden_states";
inline constexpr char kOpDiscriminative[] = "discriminative";
inline constexpr char kOpInfo[] = "info";

Json EncodeContext(const SequenceContext& ctx);
SequenceContext DecodeContext(const Json& j);

Json EncodeStepResult(const StepResult& r);
StepResult DecodeStepResult(const Json& j);

Json EncodeGreedyResult(const GreedyResult& r);
GreedyResult DecodeGreedyResult(const Json& j);

// {"count": n, "dim": d, "data": base64(n*d little-endian f32, row-major)}
Json EncodeHiddenStates(const std::vector<std::vector<float>>& states);
std::vector<std::vector<float>> DecodeHiddenStates(const Json& j);

Json EncodeInfo(const BackendInfo& info);
BackendInfo DecodeInfo(const Json& j);

Json OkResponse(std::uint64_t id, Json payload);
Json ErrorResponse(const Json& id, ErrorCode code, const std::string& message,
                   const std::string& detail = {});

// Returns the payload of an ok response, or throws the Error it carries.
Json UnwrapResponse(const Json& response);

// Typed field access with protocol errors.
template <typename T>
T Field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::kProtocol, std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kProtocol, std::string("mistyped field '") + name + "'");
  }
}

}  // namespace groundcap::wire

#endif  // GROUNDCAP_PROTOCOL_WIRE_H_
