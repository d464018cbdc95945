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

#ifndef GROUNDCAP_COMMON_JSONL_H_
#define GROUNDCAP_COMMON_JSONL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace groundcap {

using Json = nlohmann::json;

// One JSON document per line; blank lines are skipped. Parse errors name the
// 1-based line number.
std::vector<Json> ParseJsonl(const std::string& text);
std::vector<Json> ReadJsonl(const std::filesystem::path& path);
std::string ToJsonl(const std::vector<Json>& docs);

Json ReadJsonFile(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; output is deterministic for a given
// document since nlohmann::json keeps object keys sorted.
void WriteJsonFile(const std::filesystem::path& path, const Json& doc);

}  // namespace groundcap

#endif  // GROUNDCAP_COMMON_JSONL_H_
