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

#include "groundcap/annotate/annotator.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "spdlog/spdlog.h"

#include "groundcap/common/assets.h"
#include "groundcap/common/encoding.h"

namespace groundcap::annotate {
namespace {

bool IsWordByte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '-' || u >= 0x80;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(b, e - b + 1));
}

// Collapses internal whitespace runs to single spaces.
std::string NormalizeSurface(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::string out;
  for (std::string w; in >> w;) {
    if (!out.empty()) out.push_back(' ');
    out += Lower(w);
  }
  return out;
}

std::vector<Span> Words(std::string_view text) {
  std::vector<Span> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsWordByte(text[j])) ++j;
    words.push_back({i, j});
    i = j;
  }
  return words;
}

std::string_view StripMarker(std::string_view t) {
  for (std::string_view marker : {"\xE2\x96\x81", "\xC4\xA0"}) {  // "▁", "Ġ"
    if (t.starts_with(marker)) t.remove_prefix(marker.size());
  }
  return t;
}

bool IsDelimiter(const CaptionToken& t, std::string_view which) {
  return Trim(StripMarker(t.text)) == which;
}

}  // namespace

std::string_view LabelName(Label label) {
  return label == Label::kAccurate ? "ACCURATE" : "INACCURATE";
}

Label LabelFromName(std::string_view name) {
  if (name == "ACCURATE") return Label::kAccurate;
  if (name == "INACCURATE") return Label::kInaccurate;
  throw Error(ErrorCode::kInput, "unknown label '" + std::string(name) + "'");
}

Lexicon Lexicon::Parse(std::string_view tsv) {
  Lexicon lex;
  std::istringstream in{std::string(tsv)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || Trim(line.substr(tab + 1)).empty() ||
        Trim(line.substr(0, tab)).empty()) {
      throw Error(ErrorCode::kConfiguration,
                  "lexicon line " + std::to_string(line_no) + ": expected surface<TAB>lemma");
    }
    try {
      lex.Add(line.substr(0, tab), line.substr(tab + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfiguration,
                  "lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

Lexicon Lexicon::Load(const std::filesystem::path& path) { return Parse(ReadFile(path)); }

Lexicon Lexicon::FromLemmas(std::span<const std::string> lemmas) {
  Lexicon lex;
  for (const auto& l : lemmas) lex.Add(l, l);
  return lex;
}

void Lexicon::Add(std::string_view surface, std::string_view lemma) {
  const std::string s = NormalizeSurface(surface);
  const std::string l = NormalizeSurface(lemma);
  auto it = to_lemma_.find(s);
  if (it != to_lemma_.end()) {
    if (it->second != l) {
      throw Error(ErrorCode::kConfiguration,
                  "surface '" + s + "' maps to both '" + it->second + "' and '" + l + "'");
    }
    return;
  }
  to_lemma_.emplace(s, l);
  surfaces_.emplace(l, s);
  max_words_ = std::max<std::size_t>(max_words_, std::count(s.begin(), s.end(), ' ') + 1);
}

std::optional<std::string> Lexicon::Lemma(std::string_view surface) const {
  auto it = to_lemma_.find(NormalizeSurface(surface));
  if (it == to_lemma_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Lexicon::SurfacesOf(std::string_view lemma) const {
  std::vector<std::string> out;
  auto [b, e] = surfaces_.equal_range(NormalizeSurface(lemma));
  for (auto it = b; it != e; ++it) out.push_back(it->second);
  return out;
}

std::vector<Lexicon::Match> Lexicon::Find(std::string_view text) const {
  const auto words = Words(text);
  std::vector<Match> out;
  std::size_t i = 0;
  while (i < words.size()) {
    bool matched = false;
    const std::size_t longest = std::min(max_words_, words.size() - i);
    for (std::size_t n = longest; n >= 1 && !matched; --n) {
      std::string key;
      bool contiguous = true;
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
          const auto gap = text.substr(words[i + k - 1].end, words[i + k].begin - words[i + k - 1].end);
          if (gap.find_first_not_of(" \t") != std::string_view::npos) contiguous = false;
          key.push_back(' ');
        }
        key += Lower(text.substr(words[i + k].begin, words[i + k].end - words[i + k].begin));
      }
      if (!contiguous) continue;
      auto it = to_lemma_.find(key);
      if (it != to_lemma_.end()) {
        out.push_back({it->second, {words[i].begin, words[i + n - 1].end}});
        i += n;
        matched = true;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

Lexicon DefaultLexicon() { return Lexicon::Load(AssetPath("object_lexicon.tsv")); }

std::vector<ObjectMention> LexiconExtractor::Extract(std::string_view caption) {
  if (Trim(caption).empty()) throw Error(ErrorCode::kInput, "empty caption");
  std::vector<ObjectMention> out;
  for (auto& m : lexicon_.Find(caption)) {
    ObjectMention mention;
    mention.object = std::move(m.lemma);
    mention.char_span = m.chars;
    out.push_back(std::move(mention));
  }
  return out;
}

LlmExtractor::LlmExtractor(Completion complete, std::string prompt_template,
                           Lexicon inflections)
    : complete_(std::move(complete)),
      template_(std::move(prompt_template)),
      inflections_(std::move(inflections)) {
  if (template_.find("{caption}") == std::string::npos) {
    throw Error(ErrorCode::kConfiguration, "prompt template has no {caption} placeholder");
  }
}

std::string LlmExtractor::BuildPrompt(std::string_view caption) const {
  std::string prompt = template_;
  const auto pos = prompt.find("{caption}");
  prompt.replace(pos, std::string_view("{caption}").size(), caption);
  return prompt;
}

std::vector<std::string> LlmExtractor::ParseObjectList(std::string_view reply) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::string obj = NormalizeSurface(Trim(cur));
    if (!obj.empty() && std::find(out.begin(), out.end(), obj) == out.end()) out.push_back(obj);
    cur.clear();
  };
  for (char c : reply) {
    if (c == '.' || c == '\n' || c == ',' || c == ';') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<ObjectMention> LlmExtractor::Extract(std::string_view caption) {
  if (Trim(caption).empty()) throw Error(ErrorCode::kInput, "empty caption");
  const auto objects = ParseObjectList(complete_(BuildPrompt(caption)));
  Lexicon local;
  for (const auto& obj : objects) {
    const std::string lemma = inflections_.Lemma(obj).value_or(obj);
    std::vector<std::string> forms = inflections_.SurfacesOf(lemma);
    forms.push_back(obj);
    forms.push_back(lemma);
    for (const auto& f : forms) {
      if (!local.Lemma(f)) local.Add(f, lemma);
    }
  }
  std::vector<ObjectMention> out;
  std::set<std::string> located;
  for (auto& m : local.Find(caption)) {
    located.insert(m.lemma);
    ObjectMention mention;
    mention.object = std::move(m.lemma);
    mention.char_span = m.chars;
    out.push_back(std::move(mention));
  }
  for (const auto& obj : objects) {
    if (!located.contains(inflections_.Lemma(obj).value_or(obj))) {
      spdlog::warn("extracted object '{}' does not occur in the caption; dropped", obj);
    }
  }
  return out;
}

std::string LoadPromptTemplate() { return ReadFile(AssetPath("object_extraction_prompt.txt")); }

std::vector<std::vector<ObjectMention>> ExtractAll(ObjectExtractor& extractor,
                                                   std::span<const std::string> captions) {
  std::vector<std::vector<ObjectMention>> out;
  out.reserve(captions.size());
  for (const auto& c : captions) {
    try {
      out.push_back(extractor.Extract(c));
    } catch (const Error& e) {
      throw ExtractionError(e, std::move(out));
    }
  }
  return out;
}

std::vector<CaptionToken> RenderTokens(const Vocabulary& vocab, std::span<const TokenId> ids,
                                       std::string* text) {
  std::string out;
  std::vector<CaptionToken> tokens;
  for (TokenId id : ids) {
    if (id == vocab.eos_id()) continue;
    if (!out.empty() && id != vocab.period_id() && id != vocab.comma_id()) out.push_back(' ');
    const std::string& t = vocab.Text(id);
    tokens.push_back({id, t, {out.size(), out.size() + t.size()}});
    out += t;
  }
  if (text) *text = std::move(out);
  return tokens;
}

std::vector<Span> AlignTokens(std::string_view text, std::span<const std::string> token_texts) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < token_texts.size(); ++i) {
    const std::string_view tok = StripMarker(token_texts[i]);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])) &&
           !(tok.size() && std::isspace(static_cast<unsigned char>(tok.front())))) {
      ++pos;
    }
    const std::string_view here = text.substr(pos, tok.size());
    if (here != tok && Lower(here) != Lower(tok)) {
      throw Error(ErrorCode::kAnnotation,
                  "token " + std::to_string(i) + " '" + std::string(tok) +
                      "' does not align with the caption at byte " + std::to_string(pos));
    }
    spans.push_back({pos, pos + tok.size()});
    pos += tok.size();
  }
  return spans;
}

void MapMentionsToTokens(std::vector<ObjectMention>& mentions,
                         std::span<const CaptionToken> tokens) {
  for (auto& m : mentions) {
    std::size_t first = tokens.size(), last = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].chars.Overlaps(m.char_span)) {
        first = std::min(first, i);
        last = i + 1;
      }
    }
    if (first >= last) {
      throw Error(ErrorCode::kAnnotation, "mention '" + m.object + "' at byte " +
                                              std::to_string(m.char_span.begin) +
                                              " overlaps no token");
    }
    m.token_span = {first, last};
  }
}

Segmentation Segment(std::span<const CaptionToken> tokens) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  Segmentation seg;
  std::size_t sentence_start = 0;
  std::size_t phrase_start = kNone;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool period = IsDelimiter(tokens[i], ".");
    const bool delim = period || IsDelimiter(tokens[i], ",");
    if (delim) {
      if (phrase_start != kNone) seg.phrases.push_back({phrase_start, i});
      phrase_start = kNone;
    } else if (phrase_start == kNone) {
      phrase_start = i;
    }
    if (period) {
      seg.sentences.push_back({sentence_start, i + 1});
      sentence_start = i + 1;
    }
  }
  if (phrase_start != kNone) seg.phrases.push_back({phrase_start, tokens.size()});
  if (sentence_start < tokens.size()) seg.sentences.push_back({sentence_start, tokens.size()});
  return seg;
}

std::vector<Label> LabelTokens(std::size_t token_count, const Segmentation& seg,
                               std::span<const ObjectMention> mentions) {
  std::vector<Label> labels(token_count, Label::kAccurate);
  auto containing = [&](const std::vector<Span>& spans, const ObjectMention& m) -> const Span* {
    for (const auto& s : spans) {
      if (s.Contains(m.token_span)) return &s;
    }
    return nullptr;
  };
  for (const auto& m : mentions) {
    if (!m.accurate) {
      throw Error(ErrorCode::kAnnotation, "mention '" + m.object + "' has no accuracy flag");
    }
    if (m.token_span.empty() || m.token_span.end > token_count || !containing(seg.sentences, m)) {
      throw Error(ErrorCode::kAnnotation, "mention '" + m.object + "' lies outside every sentence");
    }
  }
  for (const auto& m : mentions) {
    if (*m.accurate) continue;
    const Span* s = containing(seg.sentences, m);
    std::fill(labels.begin() + s->begin, labels.begin() + s->end, Label::kInaccurate);
  }
  for (const auto& m : mentions) {
    if (!*m.accurate) continue;
    if (const Span* p = containing(seg.phrases, m)) {
      std::fill(labels.begin() + p->begin, labels.begin() + p->end, Label::kAccurate);
    }
  }
  return labels;
}

CorpusAnnotation AnnotateCorpus(std::span<const CaptionRecord> captions,
                                ObjectExtractor& extractor, const Vocabulary* vocab,
                                const fusion::FusionModel& model,
                                std::span<const fusion::DetectionScoreRecord> scores,
                                const AnnotateOptions& options) {
  std::vector<std::string> untokenized;
  for (const auto& c : captions) {
    const bool has_ids = !c.token_ids.empty() && vocab != nullptr;
    if (!has_ids && c.token_texts.empty()) untokenized.push_back(c.caption_id);
  }
  if (!untokenized.empty()) {
    std::string ids;
    for (const auto& id : untokenized) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::kAnnotation, "captions without tokenization: " + ids);
  }

  std::map<std::pair<std::string, std::string>, const fusion::DetectionScoreRecord*> index;
  for (const auto& s : scores) index[{s.caption_id, s.object}] = &s;

  CorpusAnnotation corpus;
  for (const auto& c : captions) {
    AnnotatedCaption a;
    a.caption_id = c.caption_id;
    a.image_id = c.image_id;
    if (!c.token_ids.empty() && vocab) {
      a.tokens = RenderTokens(*vocab, c.token_ids, &a.text);
    } else {
      a.text = c.text;
      const auto spans = AlignTokens(c.text, c.token_texts);
      for (std::size_t i = 0; i < spans.size(); ++i) {
        a.tokens.push_back({-1, c.token_texts[i], spans[i]});
      }
    }
    a.segmentation = Segment(a.tokens);
    if (!a.text.empty()) a.mentions = extractor.Extract(a.text);
    MapMentionsToTokens(a.mentions, a.tokens);

    std::vector<ObjectMention> scored;
    for (auto& m : a.mentions) {
      auto it = index.find({c.caption_id, m.object});
      if (it == index.end() || !it->second->complete()) {
        ++corpus.summary.mentions_unscored;
        continue;
      }
      m.p_exist = fusion::PredictPExist(model, *it->second);
      m.accurate = fusion::ClassifyObject(*m.p_exist, options.threshold);
      scored.push_back(m);
      ++corpus.summary.mentions_scored;
    }
    a.labels = LabelTokens(a.tokens.size(), a.segmentation, scored);

    ++corpus.summary.captions;
    corpus.summary.tokens += a.labels.size();
    for (Label l : a.labels) {
      (l == Label::kAccurate ? corpus.summary.accurate_tokens : corpus.summary.inaccurate_tokens)++;
    }
    corpus.captions.push_back(std::move(a));
  }
  return corpus;
}

Json CaptionRecordToJson(const CaptionRecord& r) {
  Json j = {{"caption_id", r.caption_id}, {"image_id", r.image_id}, {"text", r.text}};
  if (!r.token_ids.empty()) j["tokens"] = r.token_ids;
  if (!r.token_texts.empty()) j["token_texts"] = r.token_texts;
  return j;
}

CaptionRecord CaptionRecordFromJson(const Json& j) {
  try {
    CaptionRecord r;
    r.caption_id = j.at("caption_id").get<std::string>();
    r.image_id = j.value("image_id", std::string());
    r.text = j.value("text", std::string());
    if (j.contains("tokens")) r.token_ids = j["tokens"].get<std::vector<TokenId>>();
    if (j.contains("token_texts")) r.token_texts = j["token_texts"].get<std::vector<std::string>>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad caption record: ") + e.what());
  }
}

namespace {

Json SpanToJson(const Span& s) { return Json::array({s.begin, s.end}); }
Span SpanFromJson(const Json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }

Json SpansToJson(const std::vector<Span>& spans) {
  Json a = Json::array();
  for (const auto& s : spans) a.push_back(SpanToJson(s));
  return a;
}

std::vector<Span> SpansFromJson(const Json& j) {
  std::vector<Span> out;
  for (const auto& s : j) out.push_back(SpanFromJson(s));
  return out;
}

}  // namespace

Json AnnotatedToJson(const AnnotatedCaption& a) {
  Json tokens = Json::array(), labels = Json::array(), mentions = Json::array();
  for (const auto& t : a.tokens) tokens.push_back({t.id, t.text});
  for (Label l : a.labels) labels.push_back(LabelName(l));
  for (const auto& m : a.mentions) {
    Json mj = {{"object", m.object},
               {"char_span", SpanToJson(m.char_span)},
               {"token_span", SpanToJson(m.token_span)}};
    mj["p_exist"] = m.p_exist ? Json(*m.p_exist) : Json(nullptr);
    mj["accurate"] = m.accurate ? Json(*m.accurate) : Json(nullptr);
    mentions.push_back(std::move(mj));
  }
  return {{"caption_id", a.caption_id},
          {"image_id", a.image_id},
          {"text", a.text},
          {"tokens", tokens},
          {"labels", labels},
          {"sentence_bounds", SpansToJson(a.segmentation.sentences)},
          {"phrase_bounds", SpansToJson(a.segmentation.phrases)},
          {"mentions", mentions}};
}

AnnotatedCaption AnnotatedFromJson(const Json& j) {
  try {
    AnnotatedCaption a;
    a.caption_id = j.at("caption_id").get<std::string>();
    a.image_id = j.value("image_id", std::string());
    a.text = j.at("text").get<std::string>();
    std::vector<std::string> texts;
    for (const auto& t : j.at("tokens")) {
      a.tokens.push_back({t.at(0).get<TokenId>(), t.at(1).get<std::string>(), {}});
      texts.push_back(a.tokens.back().text);
    }
    const auto spans = AlignTokens(a.text, texts);
    for (std::size_t i = 0; i < spans.size(); ++i) a.tokens[i].chars = spans[i];
    for (const auto& l : j.at("labels")) a.labels.push_back(LabelFromName(l.get<std::string>()));
    if (a.labels.size() != a.tokens.size()) {
      throw Error(ErrorCode::kInput, "caption " + a.caption_id + ": labels and tokens differ in length");
    }
    a.segmentation.sentences = SpansFromJson(j.at("sentence_bounds"));
    a.segmentation.phrases = SpansFromJson(j.at("phrase_bounds"));
    for (const auto& mj : j.value("mentions", Json::array())) {
      ObjectMention m;
      m.object = mj.at("object").get<std::string>();
      m.char_span = SpanFromJson(mj.at("char_span"));
      m.token_span = SpanFromJson(mj.at("token_span"));
      if (!mj.value("p_exist", Json()).is_null()) m.p_exist = mj["p_exist"].get<double>();
      if (!mj.value("accurate", Json()).is_null()) m.accurate = mj["accurate"].get<bool>();
      a.mentions.push_back(std::move(m));
    }
    return a;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad annotated caption: ") + e.what());
  }
}

Json SummaryToJson(const AnnotationSummary& s) {
  return {{"captions", s.captions},
          {"tokens", s.tokens},
          {"accurate_tokens", s.accurate_tokens},
          {"inaccurate_tokens", s.inaccurate_tokens},
          {"accurate_fraction", s.accurate_fraction()},
          {"mentions_scored", s.mentions_scored},
          {"mentions_unscored", s.mentions_unscored}};
}

}  // namespace groundcap::annotate
