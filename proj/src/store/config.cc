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


#include "groundcap/store/config.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <toml.hpp>

#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"

extern char** environ;

namespace groundcap::store {
namespace {

Json NodeToJson(const toml::node& node);

Json TableToJson(const toml::table& table) {
  Json out = Json::object();
  for (const auto& [key, value] : table) out[std::string(key.str())] = NodeToJson(value);
  return out;
}

Json NodeToJson(const toml::node& node) {
  if (const auto* t = node.as_table()) return TableToJson(*t);
  if (const auto* a = node.as_array()) {
    Json out = Json::array();
    for (const auto& v : *a) out.push_back(NodeToJson(v));
    return out;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  std::ostringstream os;
  if (const auto* d = node.as_date()) os << d->get();
  if (const auto* t = node.as_time()) os << t->get();
  if (const auto* dt = node.as_date_time()) os << dt->get();
  return os.str();
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> SplitLevels(std::string_view name) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = name.find("__", pos);
    out.emplace_back(name.substr(pos, next == std::string_view::npos ? name.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  return out;
}

std::string MatchKey(const Json& object, const std::string& level) {
  const auto lower = Lower(level);
  for (const auto& [key, value] : object.items()) {
    if (Lower(key) == lower) return key;
  }
  return lower;
}

}  // namespace

Json ParseToml(std::string_view text, std::string_view source) {
  try {
    return TableToJson(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw Error(ErrorCode::kConfiguration, os.str());
  }
}

Json LoadConfig(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  if (path.extension() == ".json") {
    try {
      return Json::parse(text);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kConfiguration, path.string() + ": " + e.what());
    }
  }
  return ParseToml(text, path.string());
}

EnvList HaluEnvironment() {
  EnvList out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (!entry.starts_with(kEnvPrefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> ApplyEnvOverrides(Json& config, const EnvList& env) {
  std::vector<std::string> applied;
  if (!config.is_object()) config = Json::object();
  const std::string_view prefix(kEnvPrefix);
  for (const auto& [name, raw] : env) {
    if (!std::string_view(name).starts_with(prefix) || name.size() == prefix.size()) continue;
    const auto levels = SplitLevels(std::string_view(name).substr(prefix.size()));
    if (std::any_of(levels.begin(), levels.end(), [](const auto& l) { return l.empty(); })) {
      throw Error(ErrorCode::kConfiguration, "malformed override variable " + name);
    }
    Json* node = &config;
    std::string dotted;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) {
        throw Error(ErrorCode::kConfiguration,
                    name + " descends into non-table value '" + dotted + "'");
      }
      const auto key = MatchKey(*node, levels[i]);
      dotted += (i ? "." : "") + key;
      node = &(*node)[key];
    }
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    *node = std::move(value);
    applied.push_back(dotted);
  }
  return applied;
}

const Json* FindKey(const Json& object, std::string_view key) {
  if (!object.is_object()) return nullptr;
  const std::string k(key);
  if (object.contains(k)) return &object.at(k);
  const auto lower = Lower(key);
  for (const auto& [name, value] : object.items()) {
    if (Lower(name) == lower) return &value;
  }
  return nullptr;
}

const Json* Lookup(const Json& config, std::string_view dotted) {
  const Json* node = &config;
  std::size_t pos = 0;
  while (pos <= dotted.size()) {
    const auto dot = dotted.find('.', pos);
    const auto key = std::string(dotted.substr(pos, dot == dotted.npos ? dotted.npos : dot - pos));
    node = FindKey(*node, key);
    if (node == nullptr) return nullptr;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return node;
}

std::uint64_t RootSeed(const Json& config) {
  const Json* s = Lookup(config, "seed");
  if (!s) return 0;
  if (!s->is_number_unsigned() && !s->is_number_integer()) {
    throw Error(ErrorCode::kConfiguration, "seed must be a non-negative integer");
  }
  if (s->is_number_integer() && s->get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kConfiguration, "seed must be a non-negative integer");
  }
  return s->get<std::uint64_t>();
}

}  // namespace groundcap::store
