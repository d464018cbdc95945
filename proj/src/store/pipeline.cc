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


#include "groundcap/store/pipeline.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "groundcap/chair/chair.h"
#include "groundcap/common/assets.h"
#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"
#include "groundcap/common/random.h"
#include "groundcap/fusion/fusion.h"
#include "groundcap/protocol/client.h"
#include "groundcap/store/config.h"

namespace groundcap::store {
namespace fs = std::filesystem;
namespace {

void ConfigError(const std::string& message) {
  throw Error(ErrorCode::kConfiguration, message);
}

std::optional<fs::path> OptionalPath(const Json& section, const char* key) {
  if (!section.contains(key) || section[key].is_null()) return std::nullopt;
  return fs::path(section[key].get<std::string>());
}

Json PathOrNull(const std::optional<fs::path>& p) {
  return p ? Json(p->string()) : Json(nullptr);
}

std::string ThresholdTag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%.2f", t);
  return buf;
}

std::size_t WordCount(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::vector<TokenId> WithoutEos(std::vector<TokenId> ids, TokenId eos) {
  std::erase(ids, eos);
  return ids;
}

// Runs one stage in its own directory with its own manifest.
class StageRunner {
 public:
  StageRunner(fs::path root, Json config, RunManifest& top, std::vector<StageRecord>& records)
      : root_(std::move(root)), config_(std::move(config)), top_(top), records_(records) {}

  template <typename Body>
  void Run(const std::string& name, Body&& body) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02zu_", records_.size() + 1);
    const fs::path dir = root_ / (prefix + name);
    fs::create_directories(dir);
    RunManifest m(dir / "manifest.json", "pipeline:" + name);
    m.set_config(config_);
    const auto start = std::chrono::steady_clock::now();
    spdlog::info("stage {}: started", name);
    m.Begin();
    try {
      body(dir, m);
    } catch (const Error& e) {
      m.Fail(e);
      throw Error(e.code(), "stage " + name + ": " + e.what(), e.detail());
    } catch (const std::exception& e) {
      m.Fail(e);
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
    m.Finalize();
    StageRecord rec;
    rec.name = name;
    rec.manifest = m.file();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto r : m.outputs()) {
      r.path = (fs::path(prefix + name) / r.path).generic_string();
      rec.outputs.push_back(r);
      top_.AddOutput(root_ / r.path);
    }
    spdlog::info("stage {}: done in {:.2f} s", name, rec.seconds);
    records_.push_back(std::move(rec));
    top_.Checkpoint();
  }

 private:
  fs::path root_;
  Json config_;
  RunManifest& top_;
  std::vector<StageRecord>& records_;
};

void WriteOutput(RunManifest& m, const fs::path& path, std::string_view contents) {
  WriteFile(path, contents);
  m.AddOutput(path);
}

void WriteJsonOutput(RunManifest& m, const fs::path& path, const Json& doc) {
  WriteJsonFile(path, doc);
  m.AddOutput(path);
}

std::vector<Json> ReadInputJsonl(RunManifest& m, const fs::path& path) {
  m.AddInput(path);
  return ReadJsonl(path);
}

Json CaptionDoc(const std::string& id, const std::string& text) {
  return {{"caption_id", id}, {"image_id", id}, {"text", text}};
}

}  // namespace

Json ResolveMockConfig(const Json& mock, std::uint64_t root_seed) {
  Json out = mock.is_null() ? Json::object() : mock;
  if (!out.is_object()) ConfigError("mock section must be a table");
  if (out.contains("generate") && out["generate"].is_object() &&
      !out["generate"].contains("seed")) {
    out["generate"]["seed"] = SeedFrom(root_seed, HashString("scenes"));
  }
  if (!out.contains("behavior")) out["behavior"] = Json::object();
  if (!out["behavior"].contains("model_seed")) {
    out["behavior"]["model_seed"] = SeedFrom(root_seed, HashString("mock-model"));
  }
  return out;
}

std::unique_ptr<mock::MockLvlm> LoadMock(const fs::path& config) {
  Json doc = LoadConfig(config);
  ApplyEnvOverrides(doc, HaluEnvironment());
  const Json section = doc.contains("mock") ? doc["mock"] : doc;
  return mock::MockFromJson(ResolveMockConfig(section, RootSeed(doc)));
}

std::unique_ptr<Backend> OpenBackend(const std::string& target) {
  if (target.starts_with("mock:")) return LoadMock(target.substr(5));
  if (target.starts_with("unix:") || target.starts_with("stdio:")) return ConnectBackend(target);
  throw Error(ErrorCode::kUsage,
              "backend target must start with mock:, unix: or stdio: (got '" + target + "')");
}

std::vector<HiddenStatePair> CollectHiddenStates(
    Backend& backend, std::span<const annotate::AnnotatedCaption> captions,
    const std::string& prompt) {
  const Vocabulary vocab(backend.Info());
  std::vector<HiddenStatePair> out;
  for (const auto& c : captions) {
    if (c.tokens.empty()) continue;
    std::vector<TokenId> ids;
    ids.reserve(c.tokens.size());
    for (const auto& t : c.tokens) ids.push_back(t.id >= 0 ? t.id : vocab.Id(t.text));
    const SequenceContext ctx{c.image_id, prompt, {}};
    const auto x1 = backend.FinalHiddenStates(ctx, ids, true);
    const auto x2 = backend.FinalHiddenStates(ctx, ids, false);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.push_back({x1[i], x2[i], i, ids[i], c.labels[i] == annotate::Label::kAccurate});
    }
  }
  return out;
}

PipelineConfig PipelineConfig::FromJson(const Json& config) {
  if (!config.is_object()) ConfigError("pipeline config must be a table");
  PipelineConfig c;
  c.seed = RootSeed(config);
  c.mock = ResolveMockConfig(config.value("mock", Json()), c.seed);
  const Json none = Json::object();
  const Json& p = config.contains("pipeline") ? config["pipeline"] : none;
  const Json& a = config.contains("annotate") ? config["annotate"] : none;
  const Json& k = config.contains("classifier") ? config["classifier"] : none;
  const Json& d = config.contains("decode") ? config["decode"] : none;
  const Json& h = config.contains("chair") ? config["chair"] : none;
  try {
    c.train_fraction = p.value("train_fraction", c.train_fraction);
    c.detector_noise = p.value("detector_noise", c.detector_noise);
    c.thresholds = p.value("thresholds", c.thresholds);
    c.existence_threshold = a.value("threshold", c.existence_threshold);
    c.fusion_model = OptionalPath(a, "fusion_model");
    c.lexicon = OptionalPath(a, "lexicon");
    c.feature_mode = classifier::ParseFeatureMode(k.value("feature_mode", std::string("DIFF")));
    c.synonyms = OptionalPath(h, "synonyms");
  } catch (const Json::exception& e) {
    ConfigError(std::string("bad pipeline config: ") + e.what());
  }
  c.train = classifier::TrainConfig::FromJson(k);
  if (!k.contains("seed")) c.train.seed = SeedFrom(c.seed, HashString("classifier"));
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    ConfigError("pipeline.train_fraction must lie in (0, 1)");
  }
  if (!(c.detector_noise >= 0.0)) ConfigError("pipeline.detector_noise must be >= 0");
  if (c.thresholds.empty()) ConfigError("pipeline.thresholds must not be empty");
  for (double t : c.thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) ConfigError("pipeline.thresholds must lie in [0, 1]");
  }
  Json dj = d;
  dj["t"] = c.thresholds.front();
  c.decode = decode::DecodeConfig::FromJson(dj);
  return c;
}

Json PipelineConfig::ToJson() const {
  Json k = train.ToJson();
  k["feature_mode"] = std::string(classifier::FeatureModeName(feature_mode));
  Json d = decode.ToJson();
  d.erase("t");
  return {{"seed", seed},
          {"mock", mock},
          {"pipeline",
           {{"train_fraction", train_fraction},
            {"detector_noise", detector_noise},
            {"thresholds", thresholds}}},
          {"annotate",
           {{"threshold", existence_threshold},
            {"fusion_model", PathOrNull(fusion_model)},
            {"lexicon", PathOrNull(lexicon)}}},
          {"classifier", k},
          {"decode", d},
          {"chair", {{"synonyms", PathOrNull(synonyms)}}}};
}

RetainedStats MeasureRetained(const mock::MockLvlm& mock, const decode::DecodeRun& run, double t) {
  const TokenId eos = mock.Info().eos_id;
  const auto& scene = mock.Scene(run.image_ref);
  std::vector<TokenId> all;
  for (const auto& s : run.sent_tokens) {
    const auto ids = WithoutEos(s, eos);
    all.insert(all.end(), ids.begin(), ids.end());
  }
  const auto labels = mock.Labels(scene, all);
  RetainedStats stats;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < run.sent_tokens.size(); ++i) {
    const std::size_t n = WithoutEos(run.sent_tokens[i], eos).size();
    if (run.accu[i] >= t && !run.sents[i].empty()) {
      stats.tokens += n;
      for (std::size_t j = offset; j < offset + n; ++j) stats.inaccurate_tokens += !labels[j];
    }
    offset += n;
  }
  stats.words = WordCount(decode::FilterAndJoin(run.sents, run.accu, t));
  return stats;
}

PipelineResult RunPipeline(const Json& config, const fs::path& dir,
                           const std::vector<std::string>& argv,
                           const std::optional<fs::path>& config_file) {
  fs::create_directories(dir);
  RunManifest top(dir / "manifest.json", "pipeline");
  top.set_argv(argv);
  PipelineResult result;
  result.dir = dir;
  try {
    if (config_file) top.AddInput(*config_file);
    const PipelineConfig pc = PipelineConfig::FromJson(config);
    const Json snapshot = pc.ToJson();
    top.set_config(snapshot);
    top.SetSeed("root", pc.seed);
    top.SetSeed("classifier", pc.train.seed);
    top.SetSeed("detector", SeedFrom(pc.seed, HashString("detector")));
    if (pc.mock.contains("generate")) {
      top.SetSeed("scenes", pc.mock["generate"]["seed"].get<std::uint64_t>());
    }
    top.SetSeed("mock_model", pc.mock["behavior"]["model_seed"].get<std::uint64_t>());
    const fs::path lexicon_path = pc.lexicon.value_or(AssetPath("object_lexicon.tsv"));
    const fs::path synonyms_path = pc.synonyms.value_or(AssetPath("chair_synonyms.tsv"));
    top.AddInput(lexicon_path);
    top.AddInput(synonyms_path);
    if (pc.fusion_model) top.AddInput(*pc.fusion_model);
    top.Begin();

    StageRunner stages(dir, snapshot, top, result.stages);
    std::unique_ptr<mock::MockLvlm> mock;
    std::vector<std::string> train_ids, eval_ids;
    fs::path captions_file, scores_file, gt_file, annotated_file, features_file, classifier_file;
    std::vector<std::pair<std::string, fs::path>> caption_sets;  // CHAIR row name, file
    Json oracle;

    stages.Run("captions", [&](const fs::path& out, RunManifest& m) {
      mock = mock::MockFromJson(pc.mock);
      const auto& scenes = mock->scenes();
      const auto n_train = static_cast<std::size_t>(
          std::llround(pc.train_fraction * static_cast<double>(scenes.size())));
      if (n_train == 0 || n_train >= scenes.size()) {
        throw Error(ErrorCode::kConfiguration,
                    "train_fraction leaves no scenes for training or evaluation (" +
                        std::to_string(scenes.size()) + " scenes)");
      }
      const auto lexicon = annotate::Lexicon::Load(lexicon_path);
      const auto synonyms = chair::SynonymMap::Load(synonyms_path);
      m.AddInput(lexicon_path);
      m.AddInput(synonyms_path);
      annotate::LexiconExtractor extractor(lexicon);
      const std::uint64_t detector_seed = SeedFrom(pc.seed, HashString("detector"));
      const TokenId eos = mock->Info().eos_id;

      std::vector<Json> captions, scores, split;
      chair::GroundTruth gt;
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto& s = scenes[i];
        const bool train = i < n_train;
        split.push_back({{"scene_id", s.scene_id},
                         {"split", train ? "train" : "eval"},
                         {"true_objects", s.true_objects}});
        if (!train) {
          eval_ids.push_back(s.scene_id);
          auto& cats = gt.images[s.scene_id];
          for (const auto& o : s.true_objects) {
            if (auto c = synonyms.Category(o)) cats.insert(*c);
          }
          continue;
        }
        train_ids.push_back(s.scene_id);
        const SequenceContext ctx{s.scene_id, pc.decode.prompt, {}};
        annotate::CaptionRecord rec;
        rec.caption_id = s.scene_id;
        rec.image_id = s.scene_id;
        rec.token_ids = WithoutEos(PlainGreedyDecode(*mock, ctx).tokens, eos);
        rec.text = mock->vocab().vocab().Detokenize(rec.token_ids);
        captions.push_back(annotate::CaptionRecordToJson(rec));
        const std::set<std::string> present(s.true_objects.begin(), s.true_objects.end());
        std::set<std::string> seen;
        for (const auto& mention : extractor.Extract(rec.text)) {
          if (!seen.insert(mention.object).second) continue;
          scores.push_back(fusion::RecordToJson(fusion::SyntheticDetectorScores(
              rec.caption_id, mention.object, present.contains(mention.object),
              pc.detector_noise, detector_seed)));
        }
      }
      captions_file = out / "captions.jsonl";
      scores_file = out / "detection_scores.jsonl";
      gt_file = out / "ground_truth.json";
      WriteOutput(m, captions_file, ToJsonl(captions));
      WriteOutput(m, scores_file, ToJsonl(scores));
      WriteJsonOutput(m, gt_file, gt.ToJson());
      WriteJsonOutput(m, out / "scenes.json", split);
      m.SetResult("train_scenes", train_ids.size());
      m.SetResult("eval_scenes", eval_ids.size());
    });

    stages.Run("annotate", [&](const fs::path& out, RunManifest& m) {
      std::vector<annotate::CaptionRecord> records;
      for (const auto& j : ReadInputJsonl(m, captions_file)) {
        records.push_back(annotate::CaptionRecordFromJson(j));
      }
      m.AddInput(scores_file);
      const auto scores = fusion::ReadScoreRecords(scores_file);
      fusion::FusionModel model = fusion::FusionModel::Default();
      if (pc.fusion_model) {
        m.AddInput(*pc.fusion_model);
        model = fusion::LoadModel(*pc.fusion_model);
      }
      m.AddInput(lexicon_path);
      annotate::LexiconExtractor extractor(annotate::Lexicon::Load(lexicon_path));
      const auto corpus = annotate::AnnotateCorpus(records, extractor, &mock->vocab().vocab(),
                                                   model, scores, {pc.existence_threshold});
      std::vector<Json> docs;
      std::size_t agree = 0, total = 0;
      for (const auto& c : corpus.captions) {
        docs.push_back(annotate::AnnotatedToJson(c));
        std::vector<TokenId> ids;
        for (const auto& t : c.tokens) ids.push_back(t.id);
        const auto truth = mock->Labels(mock->Scene(c.image_id), ids);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          agree += truth[i] == (c.labels[i] == annotate::Label::kAccurate);
          ++total;
        }
      }
      annotated_file = out / "annotated.jsonl";
      WriteOutput(m, annotated_file, ToJsonl(docs));
      Json summary = annotate::SummaryToJson(corpus.summary);
      summary["oracle_label_agreement"] =
          total ? Json(static_cast<double>(agree) / static_cast<double>(total)) : Json(nullptr);
      WriteJsonOutput(m, out / "summary.json", summary);
      m.SetResult("summary", summary);
    });

    stages.Run("features", [&](const fs::path& out, RunManifest& m) {
      std::vector<annotate::AnnotatedCaption> captions;
      for (const auto& j : ReadInputJsonl(m, annotated_file)) {
        captions.push_back(annotate::AnnotatedFromJson(j));
      }
      const auto pairs = CollectHiddenStates(*mock, captions, pc.decode.prompt);
      const auto data = classifier::BuildFeatures(pairs, pc.feature_mode);
      features_file = out / "features.hsd";
      classifier::WriteHsd(features_file, data);
      m.AddOutput(features_file);
      m.SetResult("rows", data.labels.size());
      m.SetResult("dim", data.dim);
      m.SetResult("accurate_rows", data.CountAccurate());
      m.SetResult("feature_mode", std::string(classifier::FeatureModeName(pc.feature_mode)));
    });

    stages.Run("classifier", [&](const fs::path& out, RunManifest& m) {
      m.AddInput(features_file);
      const auto data = classifier::ReadHsd(features_file);
      const auto trained = classifier::Train(data, pc.train);
      classifier_file = out / "classifier.json";
      WriteJsonOutput(m, classifier_file,
                      {{"feature_mode", std::string(classifier::FeatureModeName(pc.feature_mode))},
                       {"train_config", pc.train.ToJson()},
                       {"ensemble", trained.ensemble.ToJson()}});
      WriteJsonOutput(m, out / "history.json", classifier::HistoryToJson(trained.history));
      const Json metrics = {{"test", classifier::EvalToJson(trained.test)},
                            {"majority", classifier::EvalToJson(trained.majority)},
                            {"test_rows", trained.split.test.size()}};
      WriteJsonOutput(m, out / "metrics.json", metrics);
      WriteOutput(m, out / "table.txt",
                  classifier::FormatTableRow("Majority", trained.majority) + "\n" +
                      classifier::FormatTableRow(classifier::FeatureModeName(pc.feature_mode),
                                                 trained.test) +
                      "\n");
      m.SetResult("metrics", metrics);
    });

    stages.Run("decode", [&](const fs::path& out, RunManifest& m) {
      m.AddInput(classifier_file);
      const auto cls = decode::LoadClassifier(classifier_file);
      const TokenId eos = mock->Info().eos_id;
      std::vector<Json> runs, greedy;
      std::map<double, std::vector<Json>> by_t;
      std::map<double, RetainedStats> stats;
      RetainedStats greedy_stats;
      for (const auto& id : eval_ids) {
        const auto run = decode::SentenceLevelDecode(*mock, *cls, id, pc.decode);
        runs.push_back(run.ToJson());
        for (double t : pc.thresholds) {
          by_t[t].push_back(CaptionDoc(id, decode::FilterAndJoin(run.sents, run.accu, t)));
          const auto s = MeasureRetained(*mock, run, t);
          stats[t].tokens += s.tokens;
          stats[t].inaccurate_tokens += s.inaccurate_tokens;
          stats[t].words += s.words;
        }
        const SequenceContext ctx{id, pc.decode.prompt, {}};
        const auto ids = WithoutEos(PlainGreedyDecode(*mock, ctx).tokens, eos);
        const auto labels = mock->Labels(mock->Scene(id), ids);
        const std::string text = mock->vocab().vocab().Detokenize(ids);
        greedy.push_back(CaptionDoc(id, text));
        greedy_stats.tokens += ids.size();
        for (bool ok : labels) greedy_stats.inaccurate_tokens += !ok;
        greedy_stats.words += WordCount(text);
      }
      WriteOutput(m, out / "runs.jsonl", ToJsonl(runs));
      caption_sets.emplace_back("Greedy", out / "captions_greedy.jsonl");
      WriteOutput(m, caption_sets.back().second, ToJsonl(greedy));
      const auto n = static_cast<double>(eval_ids.size());
      auto stats_json = [&](const RetainedStats& s) {
        return Json{{"tokens", s.tokens},
                    {"inaccurate_tokens", s.inaccurate_tokens},
                    {"token_hallucination_rate",
                     s.tokens ? Json(static_cast<double>(s.inaccurate_tokens) /
                                     static_cast<double>(s.tokens))
                              : Json(nullptr)},
                    {"mean_words", static_cast<double>(s.words) / n}};
      };
      oracle = {{"greedy", stats_json(greedy_stats)}, {"thresholds", Json::array()}};
      for (double t : pc.thresholds) {
        caption_sets.emplace_back("t=" + ThresholdTag(t).substr(1),
                                  out / ("captions_" + ThresholdTag(t) + ".jsonl"));
        WriteOutput(m, caption_sets.back().second, ToJsonl(by_t[t]));
        Json row = stats_json(stats[t]);
        row["t"] = t;
        oracle["thresholds"].push_back(row);
      }
      WriteJsonOutput(m, out / "oracle_stats.json", oracle);
      m.SetResult("oracle", oracle);
    });

    Json chair_doc;
    stages.Run("chair", [&](const fs::path& out, RunManifest& m) {
      m.AddInput(gt_file);
      const auto gt = chair::GroundTruth::Load(gt_file);
      m.AddInput(synonyms_path);
      const auto synonyms = chair::SynonymMap::Load(synonyms_path);
      m.AddInput(lexicon_path);
      annotate::LexiconExtractor extractor(annotate::Lexicon::Load(lexicon_path));
      chair_doc = {{"recall_averaging", "micro"}, {"baseline", nullptr}, {"rows", Json::array()}};
      std::string table;
      for (std::size_t i = 0; i < caption_sets.size(); ++i) {
        const auto& [name, file] = caption_sets[i];
        const auto caps = chair::CaptionsFromJsonl(ReadInputJsonl(m, file), extractor);
        const auto r = chair::EvaluateChair(caps, gt, synonyms);
        Json row = r.ToJson();
        row.erase("details");
        row["name"] = name;
        if (i == 0) {
          chair_doc["baseline"] = row;
        } else {
          row["t"] = pc.thresholds[i - 1];
          chair_doc["rows"].push_back(row);
        }
        table += chair::FormatChairRow(name, r) + "\n";
      }
      WriteJsonOutput(m, out / "chair.json", chair_doc);
      WriteOutput(m, out / "chair_table.txt", table);
      m.SetResult("chair", chair_doc);
    });

    result.summary = {{"chair", chair_doc}, {"oracle", oracle}};
    Json stage_list = Json::array();
    for (const auto& s : result.stages) {
      stage_list.push_back({{"name", s.name},
                            {"manifest", fs::relative(s.manifest, dir).generic_string()},
                            {"manifest_sha256", Sha256File(s.manifest)},
                            {"seconds", s.seconds}});
    }
    top.SetResult("stages", stage_list);
    top.SetResult("summary", result.summary);
    top.Finalize();
  } catch (const std::exception& e) {
    top.Fail(e);
    throw;
  }
  return result;
}

ReplayReport ReplayPipeline(const fs::path& manifest, const fs::path& dir,
                            const std::vector<std::string>& argv) {
  const Json recorded = ReadJsonFile(manifest);
  if (recorded.value("command", std::string()) != "pipeline" || !recorded.contains("config")) {
    throw Error(ErrorCode::kInput, manifest.string() + " is not a pipeline manifest");
  }
  ReplayReport report{RunPipeline(recorded["config"], dir, argv), {}};
  std::map<std::string, std::string> expected, actual;
  for (const auto& o : recorded.value("outputs", Json::array())) {
    const auto r = FileRecord::FromJson(o);
    expected[r.path] = r.sha256;
  }
  for (const auto& s : report.result.stages) {
    for (const auto& r : s.outputs) actual[r.path] = r.sha256;
  }
  for (const auto& [path, sha] : expected) {
    const auto it = actual.find(path);
    if (it == actual.end()) {
      report.mismatches.push_back(path + ": not produced");
    } else if (it->second != sha) {
      report.mismatches.push_back(path + ": sha256 " + it->second + " != recorded " + sha);
    }
  }
  for (const auto& [path, sha] : actual) {
    if (!expected.contains(path)) report.mismatches.push_back(path + ": not in manifest");
  }
  return report;
}

}  // namespace groundcap::store
