// Copyright 2026 The LIR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lir/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "lir/error.hpp"
#include "lir/linalg.hpp"
#include "lir/rng.hpp"

namespace lir::synth {

std::vector<LangCode> default_languages(std::size_t count) {
  static constexpr std::array<const char*, 12> kCodes = {"en", "zh", "de", "fr", "es", "ar",
                                                         "el", "hi", "ru", "th", "tr", "vi"};
  std::vector<LangCode> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(i < kCodes.size() ? kCodes[i] : "l" + std::to_string(i));
  return out;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); };
  if (languages.empty()) fail("at least one language is required");
  if (std::set<LangCode>(languages.begin(), languages.end()).size() != languages.size()) fail("duplicate language codes");
  for (const auto& l : languages) {
    if (l.empty()) fail("empty language code");
  }
  if (topics < 2) fail("topics must be >= 2");
  if (per_topic_per_lang < 2) fail("per-topic-per-language count must be >= 2 (one query plus candidates)");
  if (dim < languages.size() + 2) fail("dim must be >= languages + 2");
  if (labels && dim < languages.size() + 3) fail("labeled generation needs dim >= languages + 3");
  if (!(bias_scale >= 0.0) || !std::isfinite(bias_scale)) fail("bias must be finite and >= 0");
  if (!(semantic_scale > 0.0) || !std::isfinite(semantic_scale)) fail("semantic scale must be finite and > 0");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) fail("noise must be finite and >= 0");
  if (!(skew >= 0.0 && skew < 1.0)) fail("skew must lie in [0, 1)");
}

std::string record_id(const LangCode& lang, std::size_t topic, std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "-t%04zu-%04zu", topic, index);
  return lang + buf;
}

namespace {

// Random orthonormal frame: Gaussian columns, modified Gram-Schmidt applied
// twice. Returns the d frame vectors.
std::vector<std::vector<double>> random_frame(std::size_t d, Xoshiro256& rng) {
  std::vector<std::vector<double>> frame(d, std::vector<double>(d));
  for (auto& column : frame)
    for (double& x : column) x = rng.gaussian();
  for (std::size_t j = 0; j < d; ++j) {
    auto& v = frame[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const double p = dot(frame[k], v);
        for (std::size_t i = 0; i < d; ++i) v[i] -= p * frame[k][i];
      }
    }
    const double len = norm2(v);
    if (!(len > 1e-8)) throw Error(ErrorCode::kNumericalFailure, "degenerate random frame");
    for (double& x : v) x /= len;
  }
  return frame;
}

std::vector<double> combine(const std::vector<std::vector<double>>& frame, std::size_t first,
                            const std::vector<double>& coef) {
  std::vector<double> out(frame.front().size(), 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coef[k] * frame[first + k][i];
  return out;
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  const std::size_t n_lang = cfg.languages.size();
  Xoshiro256 rng(cfg.seed);

  const auto frame = random_frame(d, rng);
  const std::size_t shared_axis = n_lang;
  const std::size_t topic_first = n_lang + 1;
  const std::size_t topic_dims = d - topic_first;

  SynthOutput out;
  for (std::size_t l = 0; l < n_lang; ++l) {
    std::vector<double> dir(d);
    for (std::size_t i = 0; i < d; ++i) dir[i] = (1.0 - cfg.skew) * frame[l][i] + cfg.skew * frame[shared_axis][i];
    const double len = norm2(dir);
    for (double& x : dir) x = cfg.bias_scale * x / len;
    out.offsets[cfg.languages[l]] = std::move(dir);
  }

  out.topic_vectors.reserve(cfg.topics);
  for (std::size_t t = 0; t < cfg.topics; ++t) {
    std::vector<double> coef(topic_dims);
    for (double& c : coef) c = rng.gaussian();
    if (cfg.labels) {
      // Coordinate 0 is the label axis; the rest is label-free semantics.
      std::span<double> rest(coef.data() + 1, coef.size() - 1);
      const double len = norm2(rest);
      for (double& c : rest) c = len > 0.0 ? cfg.semantic_scale * c / len : 0.0;
      coef[0] = cfg.semantic_scale * (0.5 + static_cast<double>(t % 2));
    } else {
      const double len = norm2(coef);
      for (double& c : coef) c = len > 0.0 ? cfg.semantic_scale * c / len : 0.0;
    }
    out.topic_vectors.push_back(combine(frame, topic_first, coef));
  }

  const std::size_t total = n_lang * cfg.topics * cfg.per_topic_per_lang;
  out.records.reserve(total);
  out.record_topic.reserve(total);
  for (const auto& lang : cfg.languages) {
    const auto& mu = out.offsets[lang];
    for (std::size_t t = 0; t < cfg.topics; ++t) {
      const auto& topic = out.topic_vectors[t];
      for (std::size_t i = 0; i < cfg.per_topic_per_lang; ++i) {
        EmbeddingRecord r{record_id(lang, t, i), lang, std::vector<double>(d)};
        for (std::size_t k = 0; k < d; ++k) r.vec[k] = mu[k] + topic[k] + cfg.noise_scale * rng.gaussian();
        if (cfg.labels) out.labels[r.id] = static_cast<int>(t % 2);
        out.records.push_back(std::move(r));
        out.record_topic.push_back(t);
      }
    }
  }

  std::vector<std::set<std::string>> topic_candidates(cfg.topics);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const std::size_t index = i % cfg.per_topic_per_lang;
    if (index == 0) {
      out.dataset.queries.push_back(out.records[i]);
    } else {
      out.dataset.candidates.push_back(out.records[i]);
      topic_candidates[out.record_topic[i]].insert(out.records[i].id);
    }
  }
  for (std::size_t i = 0; i < out.records.size(); i += cfg.per_topic_per_lang) {
    out.dataset.qrels[out.records[i].id] = topic_candidates[out.record_topic[i]];
  }
  return out;
}

std::vector<EmbeddingRecord> records_of(const SynthOutput& out, const LangCode& lang) {
  std::vector<EmbeddingRecord> selected;
  for (const auto& r : out.records) {
    if (r.lang == lang) selected.push_back(r);
  }
  return selected;
}

}  // namespace lir::synth
