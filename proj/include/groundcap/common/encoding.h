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

#ifndef GROUNDCAP_COMMON_ENCODING_H_
#define GROUNDCAP_COMMON_ENCODING_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace groundcap {

// Little-endian IEEE-754 binary32, base64 (standard alphabet, padded).
std::string EncodeFloatsBase64(std::span<const float> values);
std::vector<float> DecodeFloatsBase64(std::string_view text);

std::string Base64Encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> Base64Decode(std::string_view text);

std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(std::string_view text);
std::string Sha256File(const std::filesystem::path& path);

// Whole-file helpers; throw Error(kIo) on failure.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace groundcap

#endif  // GROUNDCAP_COMMON_ENCODING_H_
