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


#ifndef GROUNDCAP_STORE_CONFIG_H_
#define GROUNDCAP_STORE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groundcap/common/jsonl.h"

namespace groundcap::store {

// Environment variables with this prefix override configuration values.
inline constexpr char kEnvPrefix[] = "HALU_";

// A TOML document as a JSON tree. Dates and times become strings. Throws
// Error(kConfiguration) with the source position on a syntax error.
Json ParseToml(std::string_view text, std::string_view source = "<toml>");

// Parses by extension: ".json" as JSON, anything else as TOML.
Json LoadConfig(const std::filesystem::path& path);

using EnvList = std::vector<std::pair<std::string, std::string>>;

// The process environment entries starting with kEnvPrefix.
EnvList HaluEnvironment();

// HALU_DECODE__K=3 sets config["decode"]["K"]: "__" separates levels and
// each level matches an existing key case-insensitively, else it is added in
// lower case (readers should look keys up with FindKey). Values are read as JSON when they parse (numbers, booleans,
// arrays) and as strings otherwise. Returns the applied keys as dotted paths.
std::vector<std::string> ApplyEnvOverrides(Json& config, const EnvList& env);

// object[key], else the first member whose key equals `key` ignoring case,
// else nullptr.
const Json* FindKey(const Json& object, std::string_view key);

// config["a"]["b"] for "a.b", or nullptr.
const Json* Lookup(const Json& config, std::string_view dotted);

// Root seed: config["seed"], default 0.
std::uint64_t RootSeed(const Json& config);

}  // namespace groundcap::store

#endif  // GROUNDCAP_STORE_CONFIG_H_
