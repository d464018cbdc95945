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

#include "groundcap/analysis/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>

#include "groundcap/common/error.h"

namespace groundcap::analysis {
namespace {

std::vector<double> Normalized(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kInput, "distribution has negative or non-finite mass");
    }
    total += v;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInput, "distribution has zero total mass");
  std::vector<double> out(p.begin(), p.end());
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> Dense(const StepResult& r, std::size_t size) {
  std::vector<double> d(size, 0.0);
  for (const auto& tp : r.top_tokens) d[static_cast<std::size_t>(tp.token)] = tp.probability;
  return d;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

constexpr double kWidth = 640, kHeight = 320, kMargin = 40;

std::string SvgOpen() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) + "\" height=\"" +
         Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) + " " + Num(kHeight) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         "<line x1=\"" + Num(kMargin) + "\" y1=\"" + Num(kHeight - kMargin) + "\" x2=\"" +
         Num(kWidth - kMargin) + "\" y2=\"" + Num(kHeight - kMargin) + "\" stroke=\"black\"/>\n" +
         "<line x1=\"" + Num(kMargin) + "\" y1=\"" + Num(kMargin) + "\" x2=\"" + Num(kMargin) +
         "\" y2=\"" + Num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
}

double Y(double v) { return kHeight - kMargin - v * (kHeight - 2 * kMargin); }

}  // namespace

double Jsd(std::span<const double> p_in, std::span<const double> q_in) {
  if (p_in.size() != q_in.size()) {
    throw Error(ErrorCode::kInput, "distributions have different lengths");
  }
  const auto p = Normalized(p_in);
  const auto q = Normalized(q_in);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // Ordering the pair makes the result exactly symmetric even when the
    // compiler contracts multiply-adds.
    const double lo = std::min(p[i], q[i]);
    const double hi = std::max(p[i], q[i]);
    const double m = 0.5 * (lo + hi);
    const double t_lo = lo > 0.0 ? lo * std::log2(lo / m) : 0.0;
    const double t_hi = hi > 0.0 ? hi * std::log2(hi / m) : 0.0;
    sum += 0.5 * (t_lo + t_hi);
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<double> DivergenceProfile::Values() const {
  std::vector<double> out;
  for (const auto& s : steps) out.push_back(s.jsd);
  return out;
}

Json DivergenceProfile::ToJson() const {
  Json rows = Json::array();
  for (const auto& s : steps) {
    rows.push_back({{"position", s.position},
                    {"token", s.token},
                    {"jsd", s.jsd},
                    {"p_with_image", s.p_with_image},
                    {"p_without_image", s.p_without_image}});
  }
  return {{"image_ref", image_ref}, {"log_base", 2}, {"steps", rows}};
}

DivergenceProfile ComputeDivergenceProfile(Backend& backend, const std::string& image_ref,
                                           std::span<const TokenId> caption,
                                           const std::string& prompt) {
  const BackendInfo& info = backend.Info();
  if (!info.supports_without_image) {
    throw Error(ErrorCode::kCapability,
                "backend '" + info.name + "' cannot compute distributions without the image");
  }
  const std::size_t v = info.vocab.size();
  DivergenceProfile out;
  out.image_ref = image_ref;
  SequenceContext ctx{image_ref, prompt, {}};
  for (std::size_t t = 0; t < caption.size(); ++t) {
    auto without = std::async(std::launch::async, [&] { return backend.TopKNext(ctx, v, false); });
    const auto p = Dense(backend.TopKNext(ctx, v, true), v);
    const auto q = Dense(without.get(), v);
    const auto tok = static_cast<std::size_t>(caption[t]);
    if (tok >= v) throw Error(ErrorCode::kInput, "caption token outside the vocabulary");
    out.steps.push_back({t, caption[t], Jsd(p, q), p[tok], q[tok]});
    ctx.prefix_tokens.push_back(caption[t]);
  }
  return out;
}

std::optional<double> PositionHistogram::AccurateShare(std::size_t bin) const {
  if (Count(bin) == 0) return std::nullopt;
  return static_cast<double>(accurate[bin]) / static_cast<double>(Count(bin));
}

std::optional<double> PositionHistogram::InaccurateShare(std::size_t bin) const {
  if (Count(bin) == 0) return std::nullopt;
  return static_cast<double>(inaccurate[bin]) / static_cast<double>(Count(bin));
}

Json PositionHistogram::ToJson() const {
  Json rows = Json::array();
  for (std::size_t b = 0; b < bins; ++b) {
    const auto a = AccurateShare(b);
    const auto i = InaccurateShare(b);
    rows.push_back({{"bin", b},
                    {"lower", static_cast<double>(b) / static_cast<double>(bins)},
                    {"upper", static_cast<double>(b + 1) / static_cast<double>(bins)},
                    {"count", Count(b)},
                    {"accurate", accurate[b]},
                    {"inaccurate", inaccurate[b]},
                    {"accurate_share", a ? Json(*a) : Json(nullptr)},
                    {"inaccurate_share", i ? Json(*i) : Json(nullptr)}});
  }
  return {{"bins", bins}, {"position", "index / length, left-closed bins"}, {"rows", rows}};
}

PositionHistogram ComputePositionHistogram(std::span<const std::vector<bool>> labels,
                                           std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::kInput, "bins must be at least 1");
  PositionHistogram h;
  h.bins = bins;
  h.accurate.assign(bins, 0);
  h.inaccurate.assign(bins, 0);
  for (const auto& caption : labels) {
    const std::size_t n = caption.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = bins * i / n;
      ++(caption[i] ? h.accurate : h.inaccurate)[b];
    }
  }
  return h;
}

PositionHistogram ComputePositionHistogram(std::span<const annotate::AnnotatedCaption> captions,
                                           std::size_t bins) {
  std::vector<std::vector<bool>> labels;
  labels.reserve(captions.size());
  for (const auto& c : captions) {
    std::vector<bool> l;
    for (auto x : c.labels) l.push_back(x == annotate::Label::kAccurate);
    labels.push_back(std::move(l));
  }
  return ComputePositionHistogram(labels, bins);
}

std::optional<double> ConsistencyReport::NoRate() const {
  if (answered == 0) return std::nullopt;
  return static_cast<double>(no_answers) / static_cast<double>(answered);
}

Json ConsistencyReport::ToJson() const {
  Json rows = Json::array();
  // p_exist split by answer, ten equal-width bins on [0, 1].
  std::map<std::string, std::vector<std::size_t>> hist = {{"yes", std::vector<std::size_t>(10)},
                                                          {"no", std::vector<std::size_t>(10)}};
  std::map<std::string, std::pair<double, std::size_t>> mean = {{"yes", {0.0, 0}}, {"no", {0.0, 0}}};
  for (const auto& it : items) {
    Json row = {{"caption_id", it.caption_id},
                {"image_id", it.image_id},
                {"object", it.object},
                {"answer", it.answer ? Json(*it.answer ? "yes" : "no") : Json(nullptr)},
                {"p_exist", it.p_exist ? Json(*it.p_exist) : Json(nullptr)},
                {"reply", it.reply}};
    if (!it.error.empty()) row["error"] = it.error;
    rows.push_back(std::move(row));
    if (it.answer && it.p_exist) {
      const std::string key = *it.answer ? "yes" : "no";
      const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(*it.p_exist * 10.0));
      ++hist[key][bin];
      mean[key].first += *it.p_exist;
      ++mean[key].second;
    }
  }
  auto avg = [&](const std::string& k) {
    return mean[k].second ? Json(mean[k].first / static_cast<double>(mean[k].second)) : Json(nullptr);
  };
  const auto rate = NoRate();
  return {{"answered", answered},
          {"no_answers", no_answers},
          {"failures", failures},
          {"no_rate", rate ? Json(*rate) : Json(nullptr)},
          {"p_exist_by_answer", {{"yes", {{"histogram", hist["yes"]}, {"mean", avg("yes")}}},
                                 {"no", {{"histogram", hist["no"]}, {"mean", avg("no")}}}}},
          {"items", rows}};
}

ConsistencyReport ConsistencyStudy(Backend& backend,
                                   std::span<const annotate::AnnotatedCaption> captions) {
  ConsistencyReport report;
  std::map<std::pair<std::string, std::string>, std::string> replies;
  for (const auto& c : captions) {
    for (const auto& m : c.mentions) {
      ConsistencyItem item{c.caption_id, c.image_id, m.object, std::nullopt, m.p_exist, "", ""};
      auto key = std::make_pair(c.image_id, m.object);
      auto it = replies.find(key);
      if (it == replies.end()) {
        it = replies.emplace(key, backend.DiscriminativeReply(c.image_id, m.object)).first;
      }
      item.reply = it->second;
      try {
        item.answer = ParseYesNo(item.reply);
        ++report.answered;
        if (!*item.answer) ++report.no_answers;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kParse) throw;
        item.error = e.what();
        ++report.failures;
      }
      report.items.push_back(std::move(item));
    }
  }
  return report;
}

std::string ProfileSvg(const DivergenceProfile& profile) {
  std::string svg = SvgOpen();
  const std::size_t n = profile.steps.size();
  if (n > 0) {
    std::string points;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = kMargin + (n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1)) *
                                     (kWidth - 2 * kMargin);
      points += Num(x) + "," + Num(Y(profile.steps[i].jsd)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
  }
  svg += "<text x=\"" + Num(kMargin) + "\" y=\"20\" font-size=\"12\">JSD (base 2) by token position</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string HistogramSvg(const PositionHistogram& h) {
  std::string svg = SvgOpen();
  const double bw = (kWidth - 2 * kMargin) / static_cast<double>(std::max<std::size_t>(h.bins, 1));
  for (std::size_t b = 0; b < h.bins; ++b) {
    const auto acc = h.AccurateShare(b);
    if (!acc) continue;
    const double x = kMargin + static_cast<double>(b) * bw;
    const double split = Y(*acc);
    svg += "<rect x=\"" + Num(x + 1) + "\" y=\"" + Num(split) + "\" width=\"" + Num(bw - 2) +
           "\" height=\"" + Num(Y(0) - split) + "\" fill=\"seagreen\"/>\n";
    svg += "<rect x=\"" + Num(x + 1) + "\" y=\"" + Num(Y(1)) + "\" width=\"" + Num(bw - 2) +
           "\" height=\"" + Num(split - Y(1)) + "\" fill=\"firebrick\"/>\n";
  }
  svg += "<text x=\"" + Num(kMargin) +
         "\" y=\"20\" font-size=\"12\">Label share by relative position (green ACCURATE, red INACCURATE)</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace groundcap::analysis
