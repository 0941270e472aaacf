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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lir/core.hpp"

namespace lir::synth {

/// Language codes handed out in order by default_languages().
std::vector<LangCode> default_languages(std::size_t count);

struct SynthConfig {
  std::vector<LangCode> languages = default_languages(4);
  std::size_t topics = 50;
  std::size_t per_topic_per_lang = 25;
  std::size_t dim = 64;
  double bias_scale = 5.0;      // ‖language offset‖
  double semantic_scale = 1.0;  // ‖topic vector‖
  double noise_scale = 0.1;     // per-coordinate Gaussian σ
  std::uint64_t seed = 42;
  /// Topic-parity labels, realized along a dedicated semantic axis on
  /// which both classes sit at positive coordinates (0.5·s and 1.5·s).
  bool labels = false;
  /// In [0, 1). Mixes a shared direction into every offset, so offsets stop
  /// being mutually orthogonal. 0 keeps them orthogonal.
  double skew = 0.0;

  /// Throws ConfigError unless topics ≥ 2, per ≥ 2, languages ≥ 1 and
  /// unique, dim ≥ languages + 2, bias ≥ 0, semantic > 0, noise ≥ 0,
  /// 0 ≤ skew < 1.
  void validate() const;
};

struct SynthOutput {
  /// Every record, grouped by language, then topic, then index.
  std::vector<EmbeddingRecord> records;
  /// Index 0 of each (language, topic) is the query; the rest are
  /// candidates. A query's relevant set is every same-topic candidate in
  /// every language.
  RetrievalDataset dataset;
  /// Present when cfg.labels is set: record id → topic parity.
  std::map<std::string, int> labels;
  /// Language offsets μ_L (length d each).
  std::map<LangCode, std::vector<double>> offsets;
  /// Topic vectors (length d each), shared by every language.
  std::vector<std::vector<double>> topic_vectors;
  /// Topic index of each record, aligned with `records`.
  std::vector<std::size_t> record_topic;
};

/// Records are μ_L + topic_t + noise. A random orthonormal frame is drawn
/// first; its leading L directions carry the offsets, the next one is the
/// shared skew direction, and topics live in the remaining d − L − 1.
/// Offsets are therefore orthogonal to the topic span exactly. The draw
/// order is frame, topics, noise, so the seed fixes topics and noise
/// independently of bias and skew.
SynthOutput generate(const SynthConfig& cfg);

/// Id of a generated record: "<lang>-t<topic>-<index>" with zero-padded
/// numbers.
std::string record_id(const LangCode& lang, std::size_t topic, std::size_t index);

/// Records of one language, in generation order.
std::vector<EmbeddingRecord> records_of(const SynthOutput& out, const LangCode& lang);

}  // namespace lir::synth
