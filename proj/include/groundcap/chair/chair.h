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

#ifndef GROUNDCAP_CHAIR_CHAIR_H_
#define GROUNDCAP_CHAIR_CHAIR_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundcap/annotate/annotator.h"
#include "groundcap/common/jsonl.h"

namespace groundcap::chair {

// Singular lemma -> category. Surfaces are matched case-insensitively.
class SynonymMap {
 public:
  // "surface<TAB>category" rows; blank lines and '#' comments are skipped.
  // Throws Error(kInput) naming the line for malformed rows or a surface
  // listed with two different categories.
  static SynonymMap Parse(std::string_view text, std::string_view source = "<synonyms>");
  static SynonymMap Load(const std::filesystem::path& path);

  void Add(std::string_view surface, std::string_view category);
  std::optional<std::string> Category(std::string_view surface) const;
  std::set<std::string> Categories() const;
  std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, std::string> map_;
  std::map<std::string, std::size_t> line_;
};

// The shipped table covering the 80 COCO categories.
SynonymMap DefaultSynonyms();

// image_id -> category set.
struct GroundTruth {
  std::map<std::string, std::set<std::string>> images;

  // {"<image_id>": ["cat", ...], ...}
  static GroundTruth FromJson(const Json& j);
  static GroundTruth Load(const std::filesystem::path& path);
  Json ToJson() const;
};

struct ChairCaption {
  std::string caption_id;
  std::string image_id;
  std::string text;
  std::vector<std::string> mentions;  // singular lemmas
};

// {"caption_id", "image_id", "text", optional "mentions"}; mentions missing
// from a record are extracted from the text with `extractor`.
std::vector<ChairCaption> CaptionsFromJsonl(const std::vector<Json>& docs,
                                            annotate::ObjectExtractor& extractor);

struct CaptionDetail {
  std::string caption_id;
  std::string image_id;
  std::size_t words = 0;
  std::set<std::string> mentioned;     // mapped categories
  std::set<std::string> hallucinated;  // mapped and not in the ground truth
  std::vector<std::string> unmapped;
  std::size_t gt_objects = 0;
  std::size_t gt_mentioned = 0;
  std::string error;  // set when the caption was excluded
};

struct ChairResult {
  std::optional<double> chair_s;
  std::optional<double> chair_i;
  std::optional<double> recall;  // micro-averaged over images
  std::optional<double> length;  // mean whitespace word count
  std::size_t captions = 0;      // evaluated
  std::size_t excluded = 0;
  std::size_t hallucinated_captions = 0;
  std::size_t mentions = 0;  // mapped, one per category per caption
  std::size_t hallucinated_mentions = 0;
  std::size_t unmapped_mentions = 0;
  std::size_t gt_objects = 0;
  std::size_t gt_mentioned = 0;
  std::vector<CaptionDetail> details;

  Json ToJson() const;
};

// Each caption's mentions are mapped to categories and deduplicated within
// the caption. Unmapped mentions are excluded from every ratio. Captions
// whose image is missing from `gt` are excluded and counted.
ChairResult EvaluateChair(std::span<const ChairCaption> captions, const GroundTruth& gt,
                          const SynonymMap& synonyms);

// "<name> CHAIR_s CHAIR_i Recall Len" as percentages with one decimal; the
// length is printed as is with one decimal. Undefined values print as "n/a".
std::string FormatChairRow(std::string_view name, const ChairResult& result);

}  // namespace groundcap::chair

#endif  // GROUNDCAP_CHAIR_CHAIR_H_
