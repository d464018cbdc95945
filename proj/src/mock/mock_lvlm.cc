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

#include "groundcap/mock/mock_lvlm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "groundcap/common/error.h"
#include "groundcap/common/random.h"

namespace groundcap::mock {
namespace {

constexpr char kEos[] = "<eos>";
constexpr char kSlot[] = "{obj}";
constexpr std::array<double, 3> kDistractorShares = {0.55, 0.30, 0.15};

[[noreturn]] void ConfigError(const std::string& msg) {
  throw Error(ErrorCode::kConfiguration, msg);
}

std::vector<std::string> SplitWords(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::size_t ArgMax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

MockVocab::MockVocab(Vocabulary vocab, std::vector<std::string> nouns)
    : vocab_(std::move(vocab)), nouns_(std::move(nouns)) {
  for (const auto& n : nouns_) {
    if (!vocab_.Contains(n)) ConfigError("noun '" + n + "' is not in the vocabulary");
    if (!noun_ids_.insert(vocab_.Id(n)).second) ConfigError("duplicate noun '" + n + "'");
  }
}

MockVocab DefaultMockVocab() {
  const std::vector<std::string> words = {
      "This", "image", "features", "a", "and", "In", "addition", "to", "the",
      "there", "is", "nearby", "The", "next", "close", "A", "can", "be",
      "seen", "near", "There", "also", "in", "scene", "with", "of", "on",
      "an", "some", "two", "large", "small", "white", "red", "blue", "green",
      "black", "wooden", "sitting", "standing", "placed", "visible", "its",
      "other", "side", "top", "front", "background", "area", "view", "room",
      "space", "several", "one", "are", "by", "at", "from", "appears",
      "looks", "setting", "together", "each", "which", "while", "this",
      "that", "it", "has", "them", "bright", "dark", "old", "new"};
  const std::vector<std::string> nouns = {
      "person", "man", "woman", "child", "bicycle", "car", "motorcycle",
      "airplane", "bus", "train", "truck", "boat", "bench", "bird", "cat",
      "dog", "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe",
      "backpack", "umbrella", "handbag", "tie", "suitcase", "frisbee", "kite",
      "skateboard", "surfboard", "bottle", "cup", "fork", "knife", "spoon",
      "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot",
      "pizza", "donut", "cake", "chair", "couch", "bed", "toilet", "television",
      "laptop", "mouse", "remote", "keyboard", "microwave", "oven", "toaster",
      "sink", "refrigerator", "book", "clock", "vase", "toothbrush", "table",
      "plant", "kitchen", "stove", "dishwasher", "lamp", "window", "door",
      "pillow", "blanket", "curtain", "mirror", "shelf", "cabinet", "counter",
      "rug", "painting", "fence", "tree", "flower", "building", "sign", "pole",
      "road", "sidewalk", "glass", "plate", "napkin", "basket", "box", "bag",
      "hat", "helmet", "ball", "bat", "glove", "racket", "computer", "phone",
      "camera", "towel", "desk", "tower", "bridge", "cloud", "river", "boy",
      "girl", "statue", "floor", "grass", "beach", "ocean", "mountain", "sky"};
  std::vector<std::string> tokens = {kEos, ".", ","};
  tokens.insert(tokens.end(), words.begin(), words.end());
  tokens.insert(tokens.end(), nouns.begin(), nouns.end());
  return MockVocab(Vocabulary(std::move(tokens), ".", ",", kEos), nouns);
}

RateCurve::RateCurve(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  if (points_.empty()) ConfigError("rate curve needs at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto [x, y] = points_[i];
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
      ConfigError("rate curve points must lie in [0,1]x[0,1]");
    }
    if (i > 0 && x < points_[i - 1].first) ConfigError("rate curve x must be sorted");
  }
}

RateCurve RateCurve::Constant(double value) { return RateCurve({{0.0, value}}); }

RateCurve RateCurve::Step(double x0, double low, double high) {
  return RateCurve({{0.0, low}, {x0, low}, {x0, high}, {1.0, high}});
}

RateCurve RateCurve::Linear(double at0, double at1) {
  return RateCurve({{0.0, at0}, {1.0, at1}});
}

double RateCurve::At(double x) const {
  if (x < points_.front().first) return points_.front().second;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const auto [x0, y0] = points_[i];
    const auto [x1, y1] = points_[i + 1];
    if (x1 == x0) continue;
    if (x >= x0 && x < x1) return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }
  return points_.back().second;
}

bool RateCurve::IsMonotone() const {
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].second < points_[i - 1].second) return false;
  }
  return true;
}

std::vector<std::string> DefaultTemplates() {
  return {
      "This image features a {obj} and a {obj} .",
      "In addition to the {obj} , there is a {obj} nearby .",
      "The {obj} is next to the {obj} , close to a {obj} .",
      "A {obj} can be seen near the {obj} .",
      "There is also a {obj} in the scene .",
  };
}

MockLvlm::MockLvlm(MockVocab vocab, std::vector<SceneSpec> scenes,
                   MockBehavior behavior)
    : vocab_(std::move(vocab)), scenes_(std::move(scenes)), behavior_(std::move(behavior)) {
  const Vocabulary& v = vocab_.vocab();
  if (behavior_.hidden_dim < 8) ConfigError("hidden_dim must be at least 8");
  if (!(behavior_.grounded_signal_magnitude > 0.0)) {
    ConfigError("grounded_signal_magnitude must be positive");
  }
  if (!behavior_.hallucination_rate.IsMonotone()) {
    ConfigError("hallucination_rate must be non-decreasing");
  }
  if (!(behavior_.main_token_mass > 0.25 && behavior_.main_token_mass < 1.0)) {
    ConfigError("main_token_mass must lie in (0.25, 1)");
  }
  if (!(behavior_.without_image_mix >= 0.0 && behavior_.without_image_mix <= 1.0)) {
    ConfigError("without_image_mix must lie in [0, 1]");
  }
  if (behavior_.min_sentences < 1 || behavior_.max_sentences < behavior_.min_sentences) {
    ConfigError("need 1 <= min_sentences <= max_sentences");
  }
  if (behavior_.templates.empty()) ConfigError("at least one template is required");

  for (const auto& text : behavior_.templates) {
    Template t;
    const auto words = SplitWords(text);
    if (words.size() < 2 || words.back() != v.Text(v.period_id())) {
      ConfigError("template must end with a period: '" + text + "'");
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i] == kSlot) {
        if (i == 0) ConfigError("template cannot start with a slot: '" + text + "'");
        t.slot_offsets.push_back(i);
        t.tokens.push_back(-1);
      } else {
        if (!v.Contains(words[i])) {
          ConfigError("template word '" + words[i] + "' is not in the vocabulary");
        }
        t.tokens.push_back(v.Id(words[i]));
      }
    }
    if (t.slot_offsets.empty()) ConfigError("template has no object slot: '" + text + "'");
    if (!starter_to_template_.emplace(t.tokens.front(), templates_.size()).second) {
      ConfigError("templates must start with distinct tokens: '" + text + "'");
    }
    templates_.push_back(std::move(t));
  }

  for (std::size_t i = 0; i < scenes_.size(); ++i) {
    const SceneSpec& s = scenes_[i];
    if (!scene_index_.emplace(s.scene_id, i).second) {
      ConfigError("duplicate scene id '" + s.scene_id + "'");
    }
    if (s.true_objects.empty()) ConfigError("scene '" + s.scene_id + "' has no objects");
    auto& objs = scene_objects_[s.scene_id];
    for (const auto& o : s.true_objects) {
      if (!v.Contains(o) || !vocab_.IsNoun(v.Id(o))) {
        ConfigError("scene object '" + o + "' is not a vocabulary noun");
      }
      objs.insert(o);
    }
    if (objs.size() == vocab_.nouns().size()) {
      ConfigError("scene '" + s.scene_id + "' leaves no absent noun to inject");
    }
  }

  for (TokenId id = 0; id < static_cast<TokenId>(v.size()); ++id) {
    if (id != v.eos_id() && id != v.period_id() && id != v.comma_id()) {
      distractor_pool_.push_back(id);
    }
  }
  if (distractor_pool_.size() < 4) ConfigError("vocabulary too small");

  info_.name = "mock-lvlm";
  info_.vocab = v.tokens();
  info_.period_id = v.period_id();
  info_.comma_id = v.comma_id();
  info_.eos_id = v.eos_id();
  info_.hidden_dim = behavior_.hidden_dim;
  info_.supports_without_image = true;
}

const SceneSpec& MockLvlm::Scene(const std::string& scene_id) const {
  auto it = scene_index_.find(scene_id);
  if (it == scene_index_.end()) {
    throw Error(ErrorCode::kInput, "unknown image_ref '" + scene_id + "'");
  }
  return scenes_[it->second];
}

const SceneSpec* MockLvlm::SceneFor(const SequenceContext& ctx, bool /*with_image*/) const {
  if (!ctx.image_ref) throw Error(ErrorCode::kInput, "the mock backend requires an image_ref");
  return &Scene(*ctx.image_ref);
}

std::size_t MockLvlm::SentenceCount(const SceneSpec& scene) const {
  const std::size_t span = behavior_.max_sentences - behavior_.min_sentences + 1;
  return behavior_.min_sentences + Mix64(SeedFrom(scene.seed, 5)) % span;
}

double MockLvlm::RelativePosition(const SceneSpec& scene, std::size_t s) const {
  return static_cast<double>(s) / static_cast<double>(SentenceCount(scene));
}

PlannedSentence MockLvlm::Plan(const SceneSpec& scene, std::size_t s,
                               std::size_t template_index) const {
  const Template& t = templates_.at(template_index);
  const auto& present = scene_objects_.at(scene.scene_id);
  std::vector<std::string> absent;
  for (const auto& n : vocab_.nouns()) {
    if (!present.contains(n)) absent.push_back(n);
  }
  const std::vector<std::string> present_list(present.begin(), present.end());
  const double rate = behavior_.hallucination_rate.At(RelativePosition(scene, s));

  PlannedSentence p;
  p.template_index = template_index;
  p.tokens = t.tokens;
  for (std::size_t q = 0; q < t.slot_offsets.size(); ++q) {
    ObjectSlot slot;
    slot.offset = t.slot_offsets[q];
    slot.hallucinated = UnitUniform(SeedFrom(scene.seed, s, template_index, q, 1)) < rate;
    const auto& pool = slot.hallucinated ? absent : present_list;
    slot.object = pool[Mix64(SeedFrom(scene.seed, s, template_index, q, 2)) % pool.size()];
    p.tokens[slot.offset] = vocab_.vocab().Id(slot.object);
    p.slots.push_back(std::move(slot));
  }
  return p;
}

std::vector<double> MockLvlm::StarterWeights(const SceneSpec& scene, std::size_t s) const {
  std::vector<double> w(templates_.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = 0.5 + UnitUniform(SeedFrom(scene.seed, s, j, 3));
    if (s == 0 && j == 0) w[j] *= 4.0;
    if (s > 0 && j == 1) w[j] *= 3.0;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

std::vector<bool> MockLvlm::Labels(const SceneSpec& scene,
                                   std::span<const TokenId> tokens) const {
  const Vocabulary& v = vocab_.vocab();
  const auto& present = scene_objects_.at(scene.scene_id);
  std::vector<bool> acc(tokens.size(), true);
  auto is_delim = [&](TokenId t) { return t == v.period_id() || t == v.comma_id(); };

  std::size_t begin = 0;
  while (begin < tokens.size()) {
    if (tokens[begin] == v.eos_id()) {
      ++begin;
      continue;
    }
    std::size_t end = begin;
    while (end < tokens.size() && tokens[end] != v.period_id() && tokens[end] != v.eos_id()) {
      ++end;
    }
    if (end < tokens.size() && tokens[end] == v.period_id()) ++end;

    bool any_absent = false;
    for (std::size_t i = begin; i < end; ++i) {
      if (vocab_.IsNoun(tokens[i]) && !present.contains(v.Text(tokens[i]))) any_absent = true;
    }
    if (any_absent) {
      for (std::size_t i = begin; i < end; ++i) acc[i] = false;
      for (std::size_t i = begin; i < end; ++i) {
        if (!vocab_.IsNoun(tokens[i]) || !present.contains(v.Text(tokens[i]))) continue;
        std::size_t a = i;
        while (a > begin && !is_delim(tokens[a - 1])) --a;
        std::size_t b = i;
        while (b < end && !is_delim(tokens[b])) ++b;
        for (std::size_t k = a; k < b; ++k) acc[k] = true;
      }
    }
    begin = end;
  }
  return acc;
}

std::vector<double> MockLvlm::NextTokenDistribution(const SequenceContext& ctx,
                                                    bool with_image) const {
  const SceneSpec& scene = *SceneFor(ctx, with_image);
  const Vocabulary& v = vocab_.vocab();
  const double mix = behavior_.without_image_mix;
  std::vector<double> dist(v.size(), 0.0);
  const auto& prefix = ctx.prefix_tokens;

  if (std::find(prefix.begin(), prefix.end(), v.eos_id()) != prefix.end()) {
    dist[v.eos_id()] = 1.0;
    return dist;
  }
  std::size_t s = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] == v.period_id()) {
      ++s;
      start = i + 1;
    }
  }
  const std::vector<TokenId> partial(prefix.begin() + static_cast<std::ptrdiff_t>(start),
                                     prefix.end());
  const std::size_t n_sentences = SentenceCount(scene);

  if (partial.empty()) {
    if (s >= n_sentences) {
      // Closing the caption is grounded: the EOS position is ACCURATE.
      dist[v.eos_id()] = 1.0;
      return dist;
    }
    const auto w = StarterWeights(scene, s);
    for (std::size_t j = 0; j < w.size(); ++j) dist[templates_[j].tokens.front()] = w[j];
    if (!with_image) {
      const PlannedSentence top = Plan(scene, s, ArgMax(w));
      if (Labels(scene, top.tokens).front()) {
        for (std::size_t j = 0; j < w.size(); ++j) {
          TokenId t = templates_[j].tokens.front();
          dist[t] = (1.0 - mix) * dist[t] + mix / static_cast<double>(w.size());
        }
      }
    }
    return dist;
  }

  std::vector<TokenId> continuation;
  auto tmpl = starter_to_template_.find(partial.front());
  if (tmpl != starter_to_template_.end() && s < n_sentences) {
    PlannedSentence plan = Plan(scene, s, tmpl->second);
    if (partial.size() < plan.tokens.size() &&
        std::equal(partial.begin(), partial.end(), plan.tokens.begin())) {
      continuation = std::move(plan.tokens);
    }
  }
  if (continuation.empty()) {
    continuation = partial;
    continuation.push_back(v.period_id());
  }
  const std::size_t idx = partial.size();
  const TokenId main = continuation[idx];
  const bool grounded = Labels(scene, continuation)[idx];

  std::mt19937_64 rng(SeedFrom(behavior_.model_seed, s, partial.front(), idx, 4));
  std::vector<TokenId> distractors;
  while (distractors.size() < kDistractorShares.size()) {
    TokenId t = distractor_pool_[rng() % distractor_pool_.size()];
    if (t != main && std::find(distractors.begin(), distractors.end(), t) == distractors.end()) {
      distractors.push_back(t);
    }
  }
  const double q = behavior_.main_token_mass;
  dist[main] = q;
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    dist[distractors[i]] = (1.0 - q) * kDistractorShares[i];
  }
  if (!with_image && grounded) {
    for (double& p : dist) p *= (1.0 - mix);
    for (TokenId t : distractors) dist[t] += mix / static_cast<double>(distractors.size());
  }
  return dist;
}

std::vector<float> MockLvlm::HiddenState(TokenId token, std::size_t position,
                                         bool grounded, bool with_image) const {
  const std::size_t d = behavior_.hidden_dim;
  std::vector<float> h(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::mt19937_64 base_rng(SeedFrom(behavior_.model_seed, token, position, 11));
  std::vector<double> acc(d);
  for (auto& x : acc) x = normal(base_rng);
  if (grounded && with_image) {
    std::mt19937_64 dir_rng(SeedFrom(behavior_.model_seed, token, position, 12));
    std::vector<double> e(d);
    double norm = 0.0;
    for (auto& x : e) {
      x = normal(dir_rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) {
      acc[i] += behavior_.grounded_signal_magnitude * e[i] / norm;
    }
  }
  for (std::size_t i = 0; i < d; ++i) h[i] = static_cast<float>(acc[i]);
  return h;
}

GroundTruth MockLvlm::ExportGroundTruth(const SceneSpec& scene,
                                        std::span<const TokenId> caption) const {
  const Vocabulary& v = vocab_.vocab();
  const auto& present = scene_objects_.at(scene.scene_id);
  GroundTruth gt;
  gt.accurate = Labels(scene, caption);
  gt.objects = scene.true_objects;
  for (std::size_t i = 0; i < caption.size(); ++i) {
    if (!vocab_.IsNoun(caption[i])) continue;
    const std::string& name = v.Text(caption[i]);
    gt.mentions.push_back({i, name, !present.contains(name)});
  }
  return gt;
}

StepResult MockLvlm::DoTopKNext(const SequenceContext& ctx, std::size_t k,
                                bool with_image) {
  const auto dist = NextTokenDistribution(ctx, with_image);
  std::vector<TokenId> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return dist[a] > dist[b]; });
  StepResult r;
  for (std::size_t i = 0; i < k; ++i) r.top_tokens.push_back({order[i], dist[order[i]]});

  const auto& prefix = ctx.prefix_tokens;
  if (prefix.empty()) {
    r.hidden = HiddenState(-1, 0, false, with_image);
  } else {
    const bool grounded = Labels(Scene(*ctx.image_ref), prefix).back();
    r.hidden = HiddenState(prefix.back(), prefix.size() - 1, grounded, with_image);
  }
  return r;
}

GreedyResult MockLvlm::DoGreedyExtend(const SequenceContext& ctx,
                                      const std::vector<TokenId>& stop_tokens,
                                      bool with_image, std::size_t max_new_tokens) {
  GreedyResult r;
  SequenceContext cur = ctx;
  while (r.tokens.size() < max_new_tokens) {
    const auto dist = NextTokenDistribution(cur, with_image);
    const TokenId next = static_cast<TokenId>(ArgMax(dist));
    r.tokens.push_back(next);
    cur.prefix_tokens.push_back(next);
    if (std::find(stop_tokens.begin(), stop_tokens.end(), next) != stop_tokens.end()) {
      return r;
    }
  }
  r.truncated = true;
  return r;
}

std::vector<std::vector<float>> MockLvlm::DoFinalHiddenStates(
    const SequenceContext& ctx, std::span<const TokenId> tokens, bool with_image) {
  const SceneSpec& scene = *SceneFor(ctx, with_image);
  std::vector<TokenId> full = ctx.prefix_tokens;
  full.insert(full.end(), tokens.begin(), tokens.end());
  const auto labels = Labels(scene, full);
  const std::size_t offset = ctx.prefix_tokens.size();
  std::vector<std::vector<float>> states;
  states.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    states.push_back(HiddenState(tokens[i], offset + i, labels[offset + i], with_image));
  }
  return states;
}

std::string MockLvlm::DoDiscriminativeQuery(const std::string& image_ref,
                                            const std::string& object,
                                            const std::string& /*question*/) {
  const SceneSpec& scene = Scene(image_ref);
  return scene_objects_.at(scene.scene_id).contains(object) ? "Yes" : "No";
}

std::unique_ptr<MockLvlm> BuildMock(SceneSpec scene, MockBehavior behavior, MockVocab vocab) {
  return std::make_unique<MockLvlm>(std::move(vocab), std::vector<SceneSpec>{std::move(scene)},
                                    std::move(behavior));
}

std::vector<SceneSpec> GenerateScenes(const MockVocab& vocab, std::size_t count,
                                      std::uint64_t seed, std::size_t min_objects,
                                      std::size_t max_objects) {
  if (min_objects < 1 || max_objects < min_objects ||
      max_objects >= vocab.nouns().size()) {
    ConfigError("invalid object count range for scene generation");
  }
  std::vector<SceneSpec> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SceneSpec s;
    s.seed = SeedFrom(seed, i, 17);
    char id[32];
    std::snprintf(id, sizeof id, "scene-%05zu", i);
    s.scene_id = id;
    std::vector<std::string> nouns = vocab.nouns();
    std::mt19937_64 rng(s.seed);
    std::shuffle(nouns.begin(), nouns.end(), rng);
    const std::size_t n = min_objects + Mix64(s.seed) % (max_objects - min_objects + 1);
    s.true_objects.assign(nouns.begin(), nouns.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(s.true_objects.begin(), s.true_objects.end());
    scenes.push_back(std::move(s));
  }
  return scenes;
}

MockBehavior BehaviorFromJson(const Json& j) {
  MockBehavior b;
  if (j.is_null()) return b;
  try {
    if (j.contains("hallucination_rate")) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : j["hallucination_rate"]) pts.emplace_back(p.at(0), p.at(1));
      b.hallucination_rate = RateCurve(std::move(pts));
    }
    b.grounded_signal_magnitude =
        j.value("grounded_signal_magnitude", b.grounded_signal_magnitude);
    b.hidden_dim = j.value("hidden_dim", b.hidden_dim);
    if (j.contains("templates")) b.templates = j["templates"].get<std::vector<std::string>>();
    b.model_seed = j.value("model_seed", b.model_seed);
    b.min_sentences = j.value("min_sentences", b.min_sentences);
    b.max_sentences = j.value("max_sentences", b.max_sentences);
    b.main_token_mass = j.value("main_token_mass", b.main_token_mass);
    b.without_image_mix = j.value("without_image_mix", b.without_image_mix);
  } catch (const Json::exception& e) {
    ConfigError(std::string("mock behavior: ") + e.what());
  }
  return b;
}

Json BehaviorToJson(const MockBehavior& b) {
  Json curve = Json::array();
  for (const auto& [x, y] : b.hallucination_rate.points()) curve.push_back({x, y});
  return {{"hallucination_rate", curve},
          {"grounded_signal_magnitude", b.grounded_signal_magnitude},
          {"hidden_dim", b.hidden_dim},
          {"templates", b.templates},
          {"model_seed", b.model_seed},
          {"min_sentences", b.min_sentences},
          {"max_sentences", b.max_sentences},
          {"main_token_mass", b.main_token_mass},
          {"without_image_mix", b.without_image_mix}};
}

std::unique_ptr<MockLvlm> MockFromJson(const Json& config) {
  MockVocab vocab = DefaultMockVocab();
  std::vector<SceneSpec> scenes;
  try {
    if (config.contains("scenes")) {
      for (const auto& s : config["scenes"]) {
        scenes.push_back({s.at("scene_id").get<std::string>(),
                          s.at("true_objects").get<std::vector<std::string>>(),
                          s.value("seed", std::uint64_t{0})});
      }
    }
    if (config.contains("generate")) {
      const Json& g = config["generate"];
      auto more = GenerateScenes(vocab, g.at("count").get<std::size_t>(),
                                 g.value("seed", std::uint64_t{1}),
                                 g.value("min_objects", std::size_t{3}),
                                 g.value("max_objects", std::size_t{6}));
      scenes.insert(scenes.end(), more.begin(), more.end());
    }
  } catch (const Json::exception& e) {
    ConfigError(std::string("mock scenes: ") + e.what());
  }
  if (scenes.empty()) ConfigError("mock configuration defines no scenes");
  return std::make_unique<MockLvlm>(std::move(vocab), std::move(scenes),
                                    BehaviorFromJson(config.value("behavior", Json())));
}

}  // namespace groundcap::mock
