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


#ifndef GROUNDCAP_STORE_MANIFEST_H_
#define GROUNDCAP_STORE_MANIFEST_H_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "groundcap/common/jsonl.h"

namespace groundcap::store {

inline constexpr char kVersion[] = "0.1.0";
inline constexpr int kManifestFormat = 1;

struct FileRecord {
  std::string path;  // relative to the manifest's directory when inside it
  std::string sha256;
  std::uintmax_t bytes = 0;

  Json ToJson() const;
  static FileRecord FromJson(const Json& j);
};

// Record of one command run. Begin() writes it with status "running";
// Finalize() or Fail() rewrites it once the run ends.
class RunManifest {
 public:
  RunManifest(std::filesystem::path file, std::string command);

  const std::filesystem::path& file() const { return file_; }
  std::filesystem::path dir() const { return file_.parent_path(); }

  void set_argv(std::vector<std::string> argv) { argv_ = std::move(argv); }
  void set_config(Json config) { config_ = std::move(config); }
  void SetSeed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  // Hashes the file now. Throws Error(kIo) when it cannot be read.
  void AddInput(const std::filesystem::path& path);
  void AddOutput(const std::filesystem::path& path);
  void SetResult(const std::string& key, Json value) { results_[key] = std::move(value); }

  const std::vector<FileRecord>& inputs() const { return inputs_; }
  const std::vector<FileRecord>& outputs() const { return outputs_; }

  void Begin();
  // Rewrites the file keeping the current status.
  void Checkpoint() const { Write(); }
  void Finalize();
  void Fail(const std::exception& e);

  Json ToJson() const;

 private:
  FileRecord Hash(const std::filesystem::path& path) const;
  void Write() const;

  std::filesystem::path file_;
  std::string command_;
  std::vector<std::string> argv_;
  Json config_ = Json::object();
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<FileRecord> inputs_;
  std::vector<FileRecord> outputs_;
  Json results_ = Json::object();
  std::string status_ = "pending";
  std::string started_at_;
  std::string finished_at_;
  Json error_;
};

// ISO-8601 UTC, e.g. 2026-10-16T09:30:00Z.
std::string UtcTimestamp();

// Creates <root>/<YYYYMMDDTHHMMSSZ>, adding "-2", "-3"... when taken.
std::filesystem::path NewRunDirectory(const std::filesystem::path& root = "runs");

// {"error": {"code", "message", "detail"}} for an Error; other exceptions get
// code "internal".
Json ErrorToJson(const std::exception& e);

}  // namespace groundcap::store

#endif  // GROUNDCAP_STORE_MANIFEST_H_
