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

#include "groundcap/decode/decoder.h"

#include <algorithm>
#include <future>

#include "groundcap/common/error.h"
#include "groundcap/protocol/vocabulary.h"

namespace groundcap::decode {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<CandidateSentence> Candidates(Backend& backend, const Vocabulary& vocab,
                                          const SequenceContext& ctx, std::size_t k,
                                          std::size_t max_total_tokens) {
  const BackendInfo& info = backend.Info();
  const StepResult step = backend.TopKNext(ctx, std::min(k, info.vocab.size()), true);
  const std::size_t used = ctx.prefix_tokens.size();
  const std::vector<TokenId> stops = {info.period_id, info.eos_id};
  std::vector<CandidateSentence> out;
  for (const TokenProb& tp : step.top_tokens) {
    if (tp.probability <= 0.0) continue;
    CandidateSentence c;
    c.first_token_probability = tp.probability;
    c.tokens.push_back(tp.token);
    if (tp.token != info.period_id && tp.token != info.eos_id) {
      if (used + 1 >= max_total_tokens) {
        c.truncated = true;
      } else {
        SequenceContext next = ctx;
        next.prefix_tokens.push_back(tp.token);
        GreedyResult ext = backend.GreedyExtend(next, stops, true);
        const std::size_t room = max_total_tokens - used - 1;
        if (ext.tokens.size() > room) {
          ext.tokens.resize(room);
          ext.truncated = true;
        }
        c.tokens.insert(c.tokens.end(), ext.tokens.begin(), ext.tokens.end());
        c.truncated = ext.truncated;
      }
    }
    c.contains_eos = std::find(c.tokens.begin(), c.tokens.end(), info.eos_id) != c.tokens.end();
    c.text = Trim(vocab.Detokenize(c.tokens));
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

EnsembleClassifier::EnsembleClassifier(classifier::MlpEnsemble ensemble,
                                       classifier::FeatureMode mode)
    : ensemble_(std::move(ensemble)), mode_(mode) {}

std::vector<bool> EnsembleClassifier::Classify(const std::vector<std::vector<float>>& x1,
                                               const std::vector<std::vector<float>>& x2) const {
  if (x1.size() != x2.size()) throw Error(ErrorCode::kInput, "x1 and x2 row counts differ");
  classifier::Matrix x(static_cast<Eigen::Index>(x1.size()),
                       static_cast<Eigen::Index>(ensemble_.input_dim()));
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const auto row = classifier::FeatureRow({x1[i], x2[i], i, 0, std::nullopt}, mode_);
    if (row.size() != ensemble_.input_dim()) {
      throw Error(ErrorCode::kConfiguration,
                  "classifier expects dimension " + std::to_string(ensemble_.input_dim()) +
                      ", backend hidden states have " + std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  const auto pred = ensemble_.Predict(x);
  return {pred.begin(), pred.end()};
}

std::string EnsembleClassifier::Describe() const {
  return "mlp-ensemble:" + std::to_string(ensemble_.members().size()) + ":" +
         std::string(classifier::FeatureModeName(mode_));
}

std::unique_ptr<TokenClassifier> LoadClassifier(const std::filesystem::path& path) {
  const Json j = ReadJsonFile(path);
  if (j.contains("ensemble")) {
    return std::make_unique<EnsembleClassifier>(
        classifier::MlpEnsemble::FromJson(j.at("ensemble")),
        classifier::ParseFeatureMode(j.value("feature_mode", std::string("DIFF"))));
  }
  return std::make_unique<EnsembleClassifier>(classifier::MlpEnsemble::FromJson(j),
                                              classifier::FeatureMode::kDiff);
}

void DecodeConfig::Validate() const {
  if (k < 1) throw Error(ErrorCode::kConfiguration, "K must be at least 1");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kConfiguration, "t must be in [0, 1]");
  if (max_total_tokens < 1 || max_total_tokens > kMaxSequenceLen) {
    throw Error(ErrorCode::kConfiguration,
                "max_total_tokens must be in [1, " + std::to_string(kMaxSequenceLen) + "]");
  }
  if (prompt.empty()) throw Error(ErrorCode::kConfiguration, "empty prompt");
}

Json DecodeConfig::ToJson() const {
  return {{"K", k},
          {"t", t},
          {"max_total_tokens", max_total_tokens},
          {"prompt", prompt},
          {"break_on_selected_eos", break_on_selected_eos}};
}

DecodeConfig DecodeConfig::FromJson(const Json& j) {
  DecodeConfig c;
  try {
    c.k = j.value("K", j.value("k", c.k));  // env overrides add keys in lower case
    c.t = j.value("t", c.t);
    c.max_total_tokens = j.value("max_total_tokens", c.max_total_tokens);
    c.prompt = j.value("prompt", c.prompt);
    c.break_on_selected_eos = j.value("break_on_selected_eos", c.break_on_selected_eos);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("bad decode config: ") + e.what());
  }
  c.Validate();
  return c;
}

Json DecodeRun::ToJson() const {
  Json rounds_json = Json::array();
  for (const auto& r : rounds) {
    Json cands = Json::array();
    for (const auto& c : r.candidates) {
      std::vector<int> labels(c.token_labels.begin(), c.token_labels.end());
      cands.push_back({{"tokens", c.tokens},
                       {"text", c.text},
                       {"first_token_probability", c.first_token_probability},
                       {"accurate", c.accurate},
                       {"token_labels", labels},
                       {"contains_eos", c.contains_eos},
                       {"truncated", c.truncated}});
    }
    rounds_json.push_back({{"candidates", cands}, {"selected", r.selected}});
  }
  return {{"config", config.ToJson()},
          {"image_ref", image_ref},
          {"backend", backend},
          {"classifier", classifier},
          {"sents", sents},
          {"accu", accu},
          {"sent_tokens", sent_tokens},
          {"final_caption", final_caption},
          {"truncated", truncated},
          {"rounds", rounds_json}};
}

std::vector<CandidateSentence> TopKFirstTokenSampling(Backend& backend,
                                                      const SequenceContext& ctx, std::size_t k,
                                                      std::size_t max_total_tokens) {
  return Candidates(backend, Vocabulary(backend.Info()), ctx, k, max_total_tokens);
}

double ComputeAccurate(Backend& backend, const TokenClassifier& classifier,
                       const SequenceContext& ctx, CandidateSentence& candidate) {
  if (candidate.tokens.empty()) throw Error(ErrorCode::kInput, "empty candidate");
  const TokenId eos = backend.Info().eos_id;
  std::vector<TokenId> scored;
  for (TokenId t : candidate.tokens) {
    if (t != eos) scored.push_back(t);
  }
  candidate.token_labels.clear();
  if (scored.empty()) {
    candidate.accurate = 1.0;
    return 1.0;
  }
  auto without = std::async(std::launch::async,
                            [&] { return backend.FinalHiddenStates(ctx, scored, false); });
  const auto x1 = backend.FinalHiddenStates(ctx, scored, true);
  const auto x2 = without.get();
  candidate.token_labels = classifier.Classify(x1, x2);
  const auto good = std::count(candidate.token_labels.begin(), candidate.token_labels.end(), true);
  candidate.accurate = static_cast<double>(good) / static_cast<double>(scored.size());
  return candidate.accurate;
}

std::string FilterAndJoin(const std::vector<std::string>& sents, const std::vector<double>& accu,
                          double t) {
  std::string out;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    if (accu[i] < t) continue;
    const std::string s = Trim(sents[i]);
    if (s.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

DecodeRun SentenceLevelDecode(Backend& backend, const TokenClassifier& classifier,
                              const std::string& image_ref, const DecodeConfig& config) {
  config.Validate();
  const BackendInfo& info = backend.Info();
  if (classifier.input_dim() != 0 && classifier.input_dim() != info.hidden_dim) {
    throw Error(ErrorCode::kConfiguration,
                "classifier input dimension " + std::to_string(classifier.input_dim()) +
                    " does not match backend hidden size " + std::to_string(info.hidden_dim));
  }
  const Vocabulary vocab(info);
  DecodeRun run;
  run.config = config;
  run.image_ref = image_ref;
  run.backend = info.name;
  run.classifier = classifier.Describe();
  SequenceContext ctx{image_ref, config.prompt, {}};

  while (true) {
    if (ctx.prefix_tokens.size() >= config.max_total_tokens) {
      run.truncated = true;
      break;
    }
    DecodeRound round;
    round.candidates = Candidates(backend, vocab, ctx, config.k, config.max_total_tokens);
    if (round.candidates.empty()) {
      throw Error(ErrorCode::kDecode, "no candidates at prefix length " +
                                          std::to_string(ctx.prefix_tokens.size()));
    }
    if (config.parallel && round.candidates.size() > 1) {
      std::vector<std::future<double>> jobs;
      for (auto& c : round.candidates) {
        jobs.push_back(std::async(std::launch::async, [&, cand = &c] {
          return ComputeAccurate(backend, classifier, ctx, *cand);
        }));
      }
      for (auto& j : jobs) j.get();
    } else {
      for (auto& c : round.candidates) ComputeAccurate(backend, classifier, ctx, c);
    }
    for (std::size_t i = 1; i < round.candidates.size(); ++i) {
      if (round.candidates[i].accurate > round.candidates[round.selected].accurate) {
        round.selected = i;
      }
    }
    const CandidateSentence& sel = round.candidates[round.selected];
    run.sents.push_back(sel.text);
    run.accu.push_back(sel.accurate);
    run.sent_tokens.push_back(sel.tokens);
    ctx.prefix_tokens.insert(ctx.prefix_tokens.end(), sel.tokens.begin(), sel.tokens.end());
    const bool selected_ends = sel.contains_eos || sel.truncated;
    const bool any_ends = std::any_of(round.candidates.begin(), round.candidates.end(),
                                      [](const CandidateSentence& c) {
                                        return c.contains_eos || c.truncated;
                                      });
    run.truncated = sel.truncated;
    run.rounds.push_back(std::move(round));
    if (config.break_on_selected_eos ? selected_ends : any_ends) break;
  }
  run.final_caption = FilterAndJoin(run.sents, run.accu, config.t);
  return run;
}

}  // namespace groundcap::decode
