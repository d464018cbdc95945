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

#include "groundcap/common/assets.h"

#include <cstdlib>

#include "groundcap/common/error.h"

namespace groundcap {

std::filesystem::path AssetPath(std::string_view name) {
  const char* env = std::getenv("HALU_ASSET_DIR");
  std::filesystem::path dir = env && *env ? env : GROUNDCAP_ASSET_DIR;
  auto path = dir / name;
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "asset not found: " + path.string());
  }
  return path;
}

}  // namespace groundcap
