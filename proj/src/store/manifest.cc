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


#include "groundcap/store/manifest.h"

#include <chrono>
#include <ctime>
#include <system_error>

#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"

namespace groundcap::store {
namespace fs = std::filesystem;
namespace {

std::string FormatUtc(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

}  // namespace

Json FileRecord::ToJson() const { return {{"path", path}, {"sha256", sha256}, {"bytes", bytes}}; }

FileRecord FileRecord::FromJson(const Json& j) {
  try {
    return {j.at("path").get<std::string>(), j.at("sha256").get<std::string>(),
            j.value("bytes", std::uintmax_t{0})};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad manifest file record: ") + e.what());
  }
}

RunManifest::RunManifest(fs::path file, std::string command)
    : file_(std::move(file)), command_(std::move(command)) {}

FileRecord RunManifest::Hash(const fs::path& path) const {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot read " + path.string() + ": " + ec.message());
  std::string shown = path.string();
  const auto rel = fs::relative(path, dir(), ec);
  if (!ec && !rel.empty() && *rel.begin() != "..") shown = rel.generic_string();
  return {shown, Sha256File(path), size};
}

void RunManifest::AddInput(const fs::path& path) { inputs_.push_back(Hash(path)); }
void RunManifest::AddOutput(const fs::path& path) { outputs_.push_back(Hash(path)); }

void RunManifest::Begin() {
  status_ = "running";
  started_at_ = UtcTimestamp();
  Write();
}

void RunManifest::Finalize() {
  status_ = "ok";
  finished_at_ = UtcTimestamp();
  Write();
}

void RunManifest::Fail(const std::exception& e) {
  status_ = "failed";
  finished_at_ = UtcTimestamp();
  error_ = ErrorToJson(e).at("error");
  Write();
}

Json RunManifest::ToJson() const {
  Json inputs = Json::array(), outputs = Json::array();
  for (const auto& r : inputs_) inputs.push_back(r.ToJson());
  for (const auto& r : outputs_) outputs.push_back(r.ToJson());
  Json j = {{"command", command_},
            {"argv", argv_},
            {"status", status_},
            {"versions", {{"groundcap", kVersion}, {"manifest_format", kManifestFormat}}},
            {"started_at", started_at_},
            {"finished_at", finished_at_.empty() ? Json(nullptr) : Json(finished_at_)},
            {"config", config_},
            {"seeds", seeds_},
            {"inputs", inputs},
            {"outputs", outputs},
            {"results", results_}};
  if (!error_.is_null()) j["error"] = error_;
  return j;
}

void RunManifest::Write() const {
  if (!dir().empty()) fs::create_directories(dir());
  WriteJsonFile(file_, ToJson());
}

std::string UtcTimestamp() { return FormatUtc("%Y-%m-%dT%H:%M:%SZ"); }

fs::path NewRunDirectory(const fs::path& root) {
  const fs::path base = root / FormatUtc("%Y%m%dT%H%M%SZ");
  fs::create_directories(root);
  fs::path candidate = base;
  for (int n = 2; !fs::create_directory(candidate); ++n) {
    candidate = base.string() + "-" + std::to_string(n);
  }
  return candidate;
}

Json ErrorToJson(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    Json j = {{"code", std::string(ErrorCodeName(err->code()))}, {"message", err->what()}};
    if (!err->detail().empty()) j["detail"] = err->detail();
    return {{"error", j}};
  }
  return {{"error", {{"code", "internal"}, {"message", e.what()}}}};
}

}  // namespace groundcap::store
