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

#ifndef GROUNDCAP_ANNOTATE_ANNOTATOR_H_
#define GROUNDCAP_ANNOTATE_ANNOTATOR_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundcap/common/error.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/fusion/fusion.h"
#include "groundcap/protocol/types.h"
#include "groundcap/protocol/vocabulary.h"

namespace groundcap::annotate {

enum class Label : std::uint8_t { kInaccurate = 0, kAccurate = 1 };

std::string_view LabelName(Label label);  // "ACCURATE" / "INACCURATE"
Label LabelFromName(std::string_view name);

// Half-open [begin, end). Character spans count bytes.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool empty() const { return begin >= end; }
  bool Contains(const Span& o) const { return begin <= o.begin && o.end <= end; }
  bool Overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct ObjectMention {
  std::string object;  // singular lemma
  Span char_span;
  Span token_span;
  std::optional<double> p_exist;
  std::optional<bool> accurate;
};

// Surface form -> singular lemma, matched case-insensitively on whole words.
// Surfaces may span several words separated by single spaces.
class Lexicon {
 public:
  struct Match {
    std::string lemma;
    Span chars;
  };

  // TSV rows "surface<TAB>lemma"; '#' starts a comment line. Throws
  // Error(kConfiguration) naming the line on a malformed row or when a
  // surface maps to two lemmas.
  static Lexicon Parse(std::string_view tsv);
  static Lexicon Load(const std::filesystem::path& path);
  // Each lemma maps to itself only.
  static Lexicon FromLemmas(std::span<const std::string> lemmas);

  void Add(std::string_view surface, std::string_view lemma);
  std::optional<std::string> Lemma(std::string_view surface) const;
  std::vector<std::string> SurfacesOf(std::string_view lemma) const;
  bool empty() const { return to_lemma_.empty(); }
  std::size_t size() const { return to_lemma_.size(); }

  // Left to right, longest match first; matches never overlap.
  std::vector<Match> Find(std::string_view text) const;

 private:
  std::map<std::string, std::string, std::less<>> to_lemma_;
  std::multimap<std::string, std::string, std::less<>> surfaces_;
  std::size_t max_words_ = 0;
};

// The shipped object lexicon with its plural forms.
Lexicon DefaultLexicon();

class ObjectExtractor {
 public:
  virtual ~ObjectExtractor() = default;
  // Mentions in caption order with char spans set; token spans are filled in
  // later. Throws Error(kInput) for an empty caption.
  virtual std::vector<ObjectMention> Extract(std::string_view caption) = 0;
};

class LexiconExtractor : public ObjectExtractor {
 public:
  explicit LexiconExtractor(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
  std::vector<ObjectMention> Extract(std::string_view caption) override;

 private:
  Lexicon lexicon_;
};

// Asks a language model for the object list using the prompt template, then
// locates each listed object in the caption through the inflection table.
// Objects that cannot be located are dropped.
class LlmExtractor : public ObjectExtractor {
 public:
  // Prompt in, completion text out. Transport failures should throw
  // Error(kTransport).
  using Completion = std::function<std::string(const std::string& prompt)>;

  LlmExtractor(Completion complete, std::string prompt_template, Lexicon inflections);

  std::string BuildPrompt(std::string_view caption) const;
  // "kitchen. man. woman." -> {"kitchen", "man", "woman"}; lowercased,
  // deduplicated, order kept.
  static std::vector<std::string> ParseObjectList(std::string_view reply);
  std::vector<ObjectMention> Extract(std::string_view caption) override;

 private:
  Completion complete_;
  std::string template_;
  Lexicon inflections_;
};

// The shipped object-extraction prompt; "{caption}" marks the insertion point.
std::string LoadPromptTemplate();

// Thrown by ExtractAll when an extractor fails part-way.
class ExtractionError : public Error {
 public:
  ExtractionError(const Error& cause, std::vector<std::vector<ObjectMention>> completed)
      : Error(cause.code(), cause.what(), cause.detail()), completed_(std::move(completed)) {}
  // Results for the captions before the failing one.
  const std::vector<std::vector<ObjectMention>>& completed() const { return completed_; }

 private:
  std::vector<std::vector<ObjectMention>> completed_;
};

std::vector<std::vector<ObjectMention>> ExtractAll(ObjectExtractor& extractor,
                                                   std::span<const std::string> captions);

struct CaptionToken {
  TokenId id = -1;
  std::string text;
  Span chars;
};

// Caption text rendered from token ids with the detokenizer's spacing rules,
// plus each token's character span. EOS tokens are dropped.
std::vector<CaptionToken> RenderTokens(const Vocabulary& vocab, std::span<const TokenId> ids,
                                       std::string* text);

// Greedy left-to-right alignment of token texts onto the caption, skipping
// whitespace and falling back to a case-insensitive comparison. A leading
// "▁" or "Ġ" marker on a token is ignored. Throws Error(kAnnotation) when a
// token does not match.
std::vector<Span> AlignTokens(std::string_view text, std::span<const std::string> token_texts);

// Sets token_span to the tokens overlapping each mention's char span. Throws
// Error(kAnnotation) when a mention overlaps no token.
void MapMentionsToTokens(std::vector<ObjectMention>& mentions,
                         std::span<const CaptionToken> tokens);

struct Segmentation {
  std::vector<Span> sentences;  // partition of the tokens; each ends at a period
  std::vector<Span> phrases;    // maximal runs without comma or period tokens
};

// Periods end sentences; commas and periods end phrases and belong to none.
Segmentation Segment(std::span<const CaptionToken> tokens);

// Start ACCURATE; each inaccurate mention marks its sentence INACCURATE;
// then each accurate mention resets its phrase to ACCURATE. Throws
// Error(kAnnotation) when a mention lacks an accuracy flag or lies outside
// every sentence.
std::vector<Label> LabelTokens(std::size_t token_count, const Segmentation& seg,
                               std::span<const ObjectMention> mentions);

struct CaptionRecord {
  std::string caption_id;
  std::string image_id;
  std::string text;
  std::vector<TokenId> token_ids;
  std::vector<std::string> token_texts;  // used when token_ids is empty
};

struct AnnotatedCaption {
  std::string caption_id;
  std::string image_id;
  std::string text;
  std::vector<CaptionToken> tokens;
  std::vector<Label> labels;
  Segmentation segmentation;
  std::vector<ObjectMention> mentions;  // scored ones carry p_exist/accurate
};

struct AnnotationSummary {
  std::size_t captions = 0;
  std::size_t tokens = 0;
  std::size_t accurate_tokens = 0;
  std::size_t inaccurate_tokens = 0;
  std::size_t mentions_scored = 0;
  std::size_t mentions_unscored = 0;
  double accurate_fraction() const {
    return tokens ? static_cast<double>(accurate_tokens) / static_cast<double>(tokens) : 0.0;
  }
};

struct CorpusAnnotation {
  std::vector<AnnotatedCaption> captions;
  AnnotationSummary summary;
};

struct AnnotateOptions {
  double threshold = 0.5;
};

// Scores are looked up by (caption_id, object); mentions without a complete
// score record stay unscored and do not affect labels. `vocab` resolves
// token_ids and may be null when every record carries token_texts. Throws
// Error(kAnnotation) listing the caption ids that have no tokenization.
CorpusAnnotation AnnotateCorpus(std::span<const CaptionRecord> captions,
                                ObjectExtractor& extractor, const Vocabulary* vocab,
                                const fusion::FusionModel& model,
                                std::span<const fusion::DetectionScoreRecord> scores,
                                const AnnotateOptions& options = {});

Json CaptionRecordToJson(const CaptionRecord& r);
CaptionRecord CaptionRecordFromJson(const Json& j);
Json AnnotatedToJson(const AnnotatedCaption& a);
AnnotatedCaption AnnotatedFromJson(const Json& j);
Json SummaryToJson(const AnnotationSummary& s);

}  // namespace groundcap::annotate

#endif  // GROUNDCAP_ANNOTATE_ANNOTATOR_H_
