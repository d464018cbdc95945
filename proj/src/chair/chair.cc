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

#include "groundcap/chair/chair.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "groundcap/common/assets.h"
#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"

namespace groundcap::chair {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string TrimCopy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> Ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Json Opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string OneDecimal(const std::optional<double>& v, double scale) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * scale);
  return buf;
}

std::size_t WordCount(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

}  // namespace

SynonymMap SynonymMap::Parse(std::string_view text, std::string_view source) {
  SynonymMap m;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string line = TrimCopy(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const auto where = std::string(source) + ":" + std::to_string(line_no);
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kInput, where + ": expected 'surface<TAB>category'");
    }
    const std::string surface = Lower(TrimCopy(line.substr(0, tab)));
    const std::string category = TrimCopy(line.substr(tab + 1));
    if (surface.empty() || category.empty()) {
      throw Error(ErrorCode::kInput, where + ": empty surface or category");
    }
    auto it = m.map_.find(surface);
    if (it != m.map_.end() && it->second != category) {
      throw Error(ErrorCode::kInput, where + ": '" + surface + "' maps to '" + category +
                                         "' but line " + std::to_string(m.line_[surface]) +
                                         " maps it to '" + it->second + "'");
    }
    m.map_[surface] = category;
    m.line_.emplace(surface, line_no);
  }
  return m;
}

SynonymMap SynonymMap::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

void SynonymMap::Add(std::string_view surface, std::string_view category) {
  const std::string key = Lower(surface);
  auto it = map_.find(key);
  if (it != map_.end() && it->second != category) {
    throw Error(ErrorCode::kInput, "'" + key + "' already maps to '" + it->second + "'");
  }
  map_[key] = std::string(category);
}

std::optional<std::string> SynonymMap::Category(std::string_view surface) const {
  auto it = map_.find(Lower(surface));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> SynonymMap::Categories() const {
  std::set<std::string> out;
  for (const auto& [s, c] : map_) out.insert(c);
  return out;
}

SynonymMap DefaultSynonyms() { return SynonymMap::Load(AssetPath("chair_synonyms.tsv")); }

GroundTruth GroundTruth::FromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInput, "ground truth must be a JSON object");
  GroundTruth gt;
  for (const auto& [image, cats] : j.items()) {
    if (!cats.is_array()) {
      throw Error(ErrorCode::kInput, "ground truth for '" + image + "' is not a list");
    }
    auto& set = gt.images[image];
    for (const auto& c : cats) set.insert(c.get<std::string>());
  }
  return gt;
}

GroundTruth GroundTruth::Load(const std::filesystem::path& path) {
  return FromJson(ReadJsonFile(path));
}

Json GroundTruth::ToJson() const {
  Json j = Json::object();
  for (const auto& [image, cats] : images) j[image] = cats;
  return j;
}

std::vector<ChairCaption> CaptionsFromJsonl(const std::vector<Json>& docs,
                                            annotate::ObjectExtractor& extractor) {
  std::vector<ChairCaption> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Json& d = docs[i];
    try {
      ChairCaption c;
      c.caption_id = d.at("caption_id").get<std::string>();
      c.image_id = d.at("image_id").get<std::string>();
      c.text = d.value("text", std::string());
      if (d.contains("mentions")) {
        for (const auto& m : d.at("mentions")) {
          c.mentions.push_back(m.is_string() ? m.get<std::string>() : m.at("object").get<std::string>());
        }
      } else if (!TrimCopy(c.text).empty()) {
        for (const auto& m : extractor.Extract(c.text)) c.mentions.push_back(m.object);
      }
      out.push_back(std::move(c));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInput, "caption record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

Json ChairResult::ToJson() const {
  Json rows = Json::array();
  for (const auto& d : details) {
    Json r = {{"caption_id", d.caption_id},
              {"image_id", d.image_id},
              {"words", d.words},
              {"mentioned", d.mentioned},
              {"hallucinated", d.hallucinated},
              {"unmapped", d.unmapped},
              {"gt_objects", d.gt_objects},
              {"gt_mentioned", d.gt_mentioned}};
    if (!d.error.empty()) r["error"] = d.error;
    rows.push_back(std::move(r));
  }
  return {{"chair_s", Opt(chair_s)},
          {"chair_i", Opt(chair_i)},
          {"recall", Opt(recall)},
          {"recall_averaging", "micro"},
          {"length", Opt(length)},
          {"captions", captions},
          {"excluded", excluded},
          {"hallucinated_captions", hallucinated_captions},
          {"mentions", mentions},
          {"hallucinated_mentions", hallucinated_mentions},
          {"unmapped_mentions", unmapped_mentions},
          {"gt_objects", gt_objects},
          {"gt_mentioned", gt_mentioned},
          {"details", rows}};
}

ChairResult EvaluateChair(std::span<const ChairCaption> captions, const GroundTruth& gt,
                          const SynonymMap& synonyms) {
  ChairResult r;
  std::size_t words = 0;
  for (const auto& c : captions) {
    CaptionDetail d;
    d.caption_id = c.caption_id;
    d.image_id = c.image_id;
    d.words = WordCount(c.text);
    auto it = gt.images.find(c.image_id);
    if (it == gt.images.end()) {
      d.error = "image '" + c.image_id + "' has no ground truth";
      ++r.excluded;
      r.details.push_back(std::move(d));
      continue;
    }
    const auto& truth = it->second;
    for (const auto& m : c.mentions) {
      const auto cat = synonyms.Category(m);
      if (!cat) {
        d.unmapped.push_back(m);
        continue;
      }
      d.mentioned.insert(*cat);
      if (!truth.contains(*cat)) d.hallucinated.insert(*cat);
    }
    d.gt_objects = truth.size();
    for (const auto& t : truth) d.gt_mentioned += d.mentioned.contains(t) ? 1 : 0;

    ++r.captions;
    words += d.words;
    r.hallucinated_captions += d.hallucinated.empty() ? 0 : 1;
    r.mentions += d.mentioned.size();
    r.hallucinated_mentions += d.hallucinated.size();
    r.unmapped_mentions += d.unmapped.size();
    r.gt_objects += d.gt_objects;
    r.gt_mentioned += d.gt_mentioned;
    r.details.push_back(std::move(d));
  }
  r.chair_s = Ratio(r.hallucinated_captions, r.captions);
  r.chair_i = Ratio(r.hallucinated_mentions, r.mentions);
  r.recall = Ratio(r.gt_mentioned, r.gt_objects);
  r.length = Ratio(words, r.captions);
  return r;
}

std::string FormatChairRow(std::string_view name, const ChairResult& result) {
  return std::string(name) + " " + OneDecimal(result.chair_s, 100.0) + " " +
         OneDecimal(result.chair_i, 100.0) + " " + OneDecimal(result.recall, 100.0) + " " +
         OneDecimal(result.length, 1.0);
}

}  // namespace groundcap::chair
