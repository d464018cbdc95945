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

#include "groundcap/protocol/wire.h"

#include "groundcap/common/encoding.h"

namespace groundcap::wire {

Json EncodeContext(const SequenceContext& ctx) {
  Json j;
  j["image_ref"] = ctx.image_ref ? Json(*ctx.image_ref) : Json(nullptr);
  j["prompt"] = ctx.prompt;
  j["prefix_tokens"] = ctx.prefix_tokens;
  return j;
}

SequenceContext DecodeContext(const Json& j) {
  SequenceContext ctx;
  if (!j.is_object()) throw Error(ErrorCode::kProtocol, "ctx must be an object");
  if (j.contains("image_ref") && !j["image_ref"].is_null()) {
    ctx.image_ref = Field<std::string>(j, "image_ref");
  }
  ctx.prompt = Field<std::string>(j, "prompt");
  ctx.prefix_tokens = Field<std::vector<TokenId>>(j, "prefix_tokens");
  return ctx;
}

Json EncodeStepResult(const StepResult& r) {
  Json top = Json::array();
  for (const auto& t : r.top_tokens) top.push_back({t.token, t.probability});
  return {{"top_tokens", top},
          {"dim", r.hidden.size()},
          {"hidden", EncodeFloatsBase64(r.hidden)}};
}

StepResult DecodeStepResult(const Json& j) {
  StepResult r;
  for (const auto& e : Field<Json>(j, "top_tokens")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number()) {
      throw Error(ErrorCode::kProtocol, "top_tokens entries must be [id, probability]");
    }
    r.top_tokens.push_back({e[0].get<TokenId>(), e[1].get<double>()});
  }
  r.hidden = DecodeFloatsBase64(Field<std::string>(j, "hidden"));
  if (r.hidden.size() != Field<std::size_t>(j, "dim")) {
    throw Error(ErrorCode::kProtocol, "hidden payload does not match dim");
  }
  return r;
}

Json EncodeGreedyResult(const GreedyResult& r) {
  return {{"tokens", r.tokens}, {"truncated", r.truncated}};
}

GreedyResult DecodeGreedyResult(const Json& j) {
  return {Field<std::vector<TokenId>>(j, "tokens"), Field<bool>(j, "truncated")};
}

Json EncodeHiddenStates(const std::vector<std::vector<float>>& states) {
  const std::size_t dim = states.empty() ? 0 : states.front().size();
  std::vector<float> flat;
  flat.reserve(states.size() * dim);
  for (const auto& s : states) {
    if (s.size() != dim) {
      throw Error(ErrorCode::kProtocol, "hidden state dimension varies across positions");
    }
    flat.insert(flat.end(), s.begin(), s.end());
  }
  return {{"count", states.size()}, {"dim", dim}, {"data", EncodeFloatsBase64(flat)}};
}

std::vector<std::vector<float>> DecodeHiddenStates(const Json& j) {
  const auto count = Field<std::size_t>(j, "count");
  const auto dim = Field<std::size_t>(j, "dim");
  const auto flat = DecodeFloatsBase64(Field<std::string>(j, "data"));
  if (flat.size() != count * dim) {
    throw Error(ErrorCode::kProtocol, "hidden_states payload does not match count*dim");
  }
  std::vector<std::vector<float>> states(count);
  for (std::size_t i = 0; i < count; ++i) {
    states[i].assign(flat.begin() + i * dim, flat.begin() + (i + 1) * dim);
  }
  return states;
}

Json EncodeInfo(const BackendInfo& info) {
  return {{"name", info.name},
          {"vocab", info.vocab},
          {"period_id", info.period_id},
          {"comma_id", info.comma_id},
          {"eos_id", info.eos_id},
          {"hidden_dim", info.hidden_dim},
          {"supports_without_image", info.supports_without_image}};
}

BackendInfo DecodeInfo(const Json& j) {
  BackendInfo info;
  info.name = Field<std::string>(j, "name");
  info.vocab = Field<std::vector<std::string>>(j, "vocab");
  info.period_id = Field<TokenId>(j, "period_id");
  info.comma_id = Field<TokenId>(j, "comma_id");
  info.eos_id = Field<TokenId>(j, "eos_id");
  info.hidden_dim = Field<std::size_t>(j, "hidden_dim");
  info.supports_without_image = Field<bool>(j, "supports_without_image");
  return info;
}

Json OkResponse(std::uint64_t id, Json payload) {
  return {{"id", id}, {"ok", true}, {"payload", std::move(payload)}};
}

Json ErrorResponse(const Json& id, ErrorCode code, const std::string& message,
                   const std::string& detail) {
  Json err = {{"code", std::string(ErrorCodeName(code))}, {"message", message}};
  if (!detail.empty()) err["detail"] = detail;
  return {{"id", id}, {"ok", false}, {"error", err}};
}

Json UnwrapResponse(const Json& response) {
  if (Field<bool>(response, "ok")) return Field<Json>(response, "payload");
  const Json err = Field<Json>(response, "error");
  throw Error(ErrorCodeFromName(Field<std::string>(err, "code")),
              Field<std::string>(err, "message"),
              err.value("detail", std::string()));
}

}  // namespace groundcap::wire
