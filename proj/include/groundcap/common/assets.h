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

#ifndef GROUNDCAP_COMMON_ASSETS_H_
#define GROUNDCAP_COMMON_ASSETS_H_

#include <filesystem>
#include <string_view>

namespace groundcap {

// Shipped data files (lexicon, prompt template, synonym map). Looked up under
// $HALU_ASSET_DIR when set, else the source tree's assets/ directory.
std::filesystem::path AssetPath(std::string_view name);

}  // namespace groundcap

#endif  // GROUNDCAP_COMMON_ASSETS_H_
