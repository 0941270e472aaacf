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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "lir/eval.hpp"
#include "lir/io.hpp"
#include "lir/removal.hpp"
#include "lir/synth.hpp"
#include "oracles.hpp"

namespace lir {
namespace {

using testing::code_of;

BasisMap fit_all(const synth::SynthOutput& data, const std::vector<LangCode>& langs, std::size_t r) {
  BasisMap bases;
  for (const auto& lang : langs) bases[lang] = fit_components(LanguageMatrix(synth::records_of(data, lang)), r);
  return bases;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("rank_candidates orders by cosine") {
    const EmbeddingRecord q{"q", "en", {1, 0}};
    const std::vector<EmbeddingRecord> cands = {{"c", "en", {-1, 0}}, {"a", "en", {1, 0}}, {"b", "zh", {0, 1}}};
    CHECK(eval::rank_candidates(q, cands).ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(eval::rank_candidates(q, cands).query_id == "q");
  }

  TEST_CASE("ties are broken by ascending id, independent of input order") {
    const EmbeddingRecord q{"q", "en", {1, 1}};
    std::vector<EmbeddingRecord> cands = {{"z", "en", {2, 1}}, {"m", "en", {2, 1}}, {"b", "en", {0, 0}}};
    const auto first = eval::rank_candidates(q, cands).ids;
    CHECK(first == std::vector<std::string>{"m", "z", "b"});
    std::reverse(cands.begin(), cands.end());
    CHECK(eval::rank_candidates(q, cands).ids == first);
  }

  TEST_CASE("zero vectors score 0") {
    CHECK(eval::cosine(std::vector<double>{0, 0}, std::vector<double>{1, 2}) == 0.0);
    const EmbeddingRecord q{"q", "en", {0, 0}};
    const std::vector<EmbeddingRecord> cands = {{"b", "en", {1, 0}}, {"a", "en", {0, 1}}};
    CHECK(eval::rank_candidates(q, cands).ids == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("rank_candidates matches a brute-force selection sort") {
    Xoshiro256 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
      const auto qv = testing::random_vector(4, rng);
      std::vector<EmbeddingRecord> cands;
      std::vector<std::string> ids;
      testing::DenseRows vecs;
      for (int i = 0; i < 5; ++i) {
        cands.push_back({"c" + std::to_string(i), "en", testing::random_vector(4, rng)});
        ids.push_back(cands.back().id);
        vecs.push_back(cands.back().vec);
      }
      CHECK(eval::rank_candidates({"q", "en", qv}, cands).ids == testing::brute_force_ranking(qv, ids, vecs));
    }
  }

  TEST_CASE("rank_candidates rejects dimension mismatch") {
    const std::vector<EmbeddingRecord> cands = {{"a", "en", {1, 0, 0}}};
    CHECK(code_of([&] { eval::rank_candidates({"q", "en", {1, 0}}, cands); }) == ErrorCode::kDimensionError);
  }

  TEST_CASE("average precision fixtures") {
    const eval::RankedList r{"q", {"r1", "x", "r2"}};
    const double ap = eval::average_precision(r, {"r1", "r2"});
    CHECK(ap == 5.0 / 6.0);
    CHECK(testing::exact_average_precision(r.ids, {"r1", "r2"}) == testing::Fraction(5, 6));

    CHECK(eval::average_precision({"q", {"a", "b", "c", "d"}}, {"a", "b"}) == 1.0);
    CHECK(eval::average_precision({"q", {"a", "b", "c", "d", "e"}}, {"e"}) == doctest::Approx(1.0 / 5.0));

    CHECK(code_of([&] { eval::average_precision(r, {}); }) == ErrorCode::kNoRelevant);
    CHECK(code_of([&] { eval::average_precision(r, {"nope"}); }) == ErrorCode::kInvalidData);
  }

  TEST_CASE("average precision is in [0,1] and 1 exactly when relevant items lead") {
    Xoshiro256 rng(43);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.next() % 10;
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
      for (std::size_t i = n - 1; i > 0; --i) std::swap(ids[i], ids[rng.next() % (i + 1)]);
      std::set<std::string> rel;
      for (const auto& id : ids)
        if (rng.uniform() < 0.4) rel.insert(id);
      if (rel.empty()) rel.insert(ids[rng.next() % n]);
      const double ap = eval::average_precision({"q", ids}, rel);
      CHECK(ap > 0.0);
      CHECK(ap <= 1.0);
      bool leading = true;
      for (std::size_t i = 0; i < rel.size(); ++i) leading = leading && rel.contains(ids[i]);
      CHECK((ap == 1.0) == leading);
    }
  }

  TEST_CASE("MAP is invariant under strictly increasing score transforms") {
    Xoshiro256 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::string> ids;
      std::vector<double> scores;
      std::vector<double> warped;
      for (int i = 0; i < 12; ++i) {
        ids.push_back("c" + std::to_string(i));
        // Coarse scores so ties occur.
        scores.push_back(std::round(4.0 * rng.uniform()) / 4.0);
        warped.push_back(std::exp(3.0 * scores.back()) + 7.0);
      }
      const std::set<std::string> rel = {"c1", "c4", "c7"};
      const auto a = eval::rank_by_scores("q", ids, scores);
      const auto b = eval::rank_by_scores("q", ids, warped);
      CHECK(a.ids == b.ids);
      CHECK(eval::average_precision(a, rel) == eval::average_precision(b, rel));
    }
  }

  TEST_CASE("single-query dataset with the relevant item first") {
    RetrievalDataset ds;
    ds.queries = {{"q", "en", {1, 0}}};
    ds.candidates = {{"good", "zh", {1, 0.1}}, {"bad", "zh", {0, 1}}};
    ds.qrels = {{"q", {"good"}}};
    const auto report = eval::evaluate_retrieval(ds, nullptr);
    CHECK(report.overall_map == 1.0);
    CHECK(report.per_language_map.at("en") == 1.0);
    CHECK(report.query_count == 1);
    CHECK_FALSE(report.config.mode.has_value());
  }

  TEST_CASE("overall MAP is the mean over queries, not over languages") {
    RetrievalDataset ds;
    ds.queries = {{"q1", "en", {1, 0}}, {"q2", "en", {0, 1}}, {"q3", "zh", {1, 0}}};
    ds.candidates = {{"a", "en", {1, 0}}, {"b", "en", {0, 1}}};
    ds.qrels = {{"q1", {"a"}}, {"q2", {"a"}}, {"q3", {"b"}}};
    const auto report = eval::evaluate_retrieval(ds, nullptr);
    CHECK(report.per_language_map.at("en") == doctest::Approx(0.75));
    CHECK(report.per_language_map.at("zh") == doctest::Approx(0.5));
    CHECK(report.overall_map == doctest::Approx((1.0 + 0.5 + 0.5) / 3.0));
  }

  TEST_CASE("evaluate_retrieval with rank-0 bases equals no bases bitwise") {
    synth::SynthConfig cfg;
    cfg.topics = 12;
    cfg.per_topic_per_lang = 5;
    const auto data = synth::generate(cfg);
    const BasisMap zero = fit_all(data, cfg.languages, 0);
    const auto plain = eval::evaluate_retrieval(data.dataset, nullptr);
    const auto with = eval::evaluate_retrieval(data.dataset, &zero);
    CHECK(plain.overall_map == with.overall_map);
    CHECK(plain.per_language_map == with.per_language_map);
    CHECK(with.config.rank == 0);
  }

  TEST_CASE("evaluate_retrieval needs every language covered") {
    synth::SynthConfig cfg;
    cfg.topics = 4;
    cfg.per_topic_per_lang = 3;
    const auto data = synth::generate(cfg);
    BasisMap partial = fit_all(data, {"en", "zh"}, 1);
    CHECK(code_of([&] { eval::evaluate_retrieval(data.dataset, &partial); }) == ErrorCode::kMissingBasis);
  }

  TEST_CASE("removal lifts MAP on a language-biased corpus and reports are reproducible") {
    synth::SynthConfig cfg;
    cfg.topics = 20;
    cfg.per_topic_per_lang = 8;
    const auto data = synth::generate(cfg);
    const BasisMap bases = fit_all(data, cfg.languages, 1);
    const auto before = eval::evaluate_retrieval(data.dataset, nullptr);
    const auto after = eval::evaluate_retrieval(data.dataset, &bases);
    CHECK(after.overall_map - before.overall_map >= 0.3);
    CHECK(after.config.mode == RemovalMode::kOrthogonal);
    CHECK(after.config.rank == 1);

    eval::RetrievalOptions threaded;
    threaded.parallelism.threads = 4;
    const auto again = eval::evaluate_retrieval(data.dataset, &bases, threaded);
    CHECK(io::eval_report_json(after) == io::eval_report_json(again));
  }

  TEST_CASE("logistic regression basics") {
    const Matrix x = Matrix::from_rows({{-1}, {1}});
    const std::vector<int> y = {0, 1};
    CHECK(eval::predict_probability(std::vector<double>{123.0}, {0.0, 0.0}) == 0.5);
    const auto w = eval::train_logistic(x, y, {.learning_rate = 0.5, .epochs = 500, .l2 = 0.0});
    CHECK(w.size() == 2);
    CHECK(eval::accuracy(x, y, w) == 1.0);
    CHECK(w[0] > 0.0);

    const auto none = eval::train_logistic(x, y, {.learning_rate = 0.5, .epochs = 0, .l2 = 0.0});
    CHECK(none == eval::LogisticWeights{0.0, 0.0});
  }

  TEST_CASE("duplicating every training row leaves the weights unchanged") {
    Xoshiro256 rng(53);
    const Matrix x = testing::random_matrix(30, 4, rng);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = x(i, 0) + 0.3 * x(i, 2) > 0 ? 1 : 0;
    Matrix doubled(60, 4);
    std::vector<int> y2;
    for (std::size_t i = 0; i < 30; ++i) {
      std::copy(x.row(i).begin(), x.row(i).end(), doubled.row(2 * i).begin());
      std::copy(x.row(i).begin(), x.row(i).end(), doubled.row(2 * i + 1).begin());
      y2.push_back(y[i]);
      y2.push_back(y[i]);
    }
    const eval::LogisticConfig cfg{.learning_rate = 0.2, .epochs = 200, .l2 = 0.01};
    const auto a = eval::train_logistic(x, y, cfg);
    const auto b = eval::train_logistic(doubled, y2, cfg);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
  }

  TEST_CASE("loss does not increase at a small learning rate") {
    Xoshiro256 rng(59);
    const Matrix x = testing::random_matrix(50, 5, rng, 2.0);
    std::vector<int> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = x(i, 1) - x(i, 3) + 0.5 * rng.gaussian() > 0 ? 1 : 0;
    std::vector<double> trace;
    eval::train_logistic(x, y, {.learning_rate = 0.01, .epochs = 300, .l2 = 0.05}, &trace);
    REQUIRE(trace.size() == 301);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  }

  TEST_CASE("logistic training errors") {
    const Matrix x = Matrix::from_rows({{-1}, {1}});
    CHECK(code_of([&] { eval::train_logistic(x, std::vector<int>{1, 1}, {}); }) == ErrorCode::kDegenerateLabels);
    CHECK(code_of([&] { eval::train_logistic(x, std::vector<int>{1}, {}); }) == ErrorCode::kDimensionError);
    CHECK(code_of([&] { eval::train_logistic(x, std::vector<int>{0, 2}, {}); }) == ErrorCode::kInvalidData);
  }

  TEST_CASE("transfer: baseline, rank zero, and same-language evaluation") {
    synth::SynthConfig cfg;
    cfg.labels = true;
    cfg.topics = 20;
    cfg.per_topic_per_lang = 10;
    const auto data = synth::generate(cfg);
    auto labeled = [&](const LangCode& lang) {
      eval::LabeledRecords set;
      set.records = synth::records_of(data, lang);
      for (const auto& r : set.records) set.labels.push_back(data.labels.at(r.id));
      return set;
    };
    const auto train = labeled("en");
    std::map<LangCode, eval::LabeledRecords> tests;
    for (const auto& lang : cfg.languages) tests[lang] = labeled(lang);

    const auto base = eval::evaluate_transfer(train, tests, nullptr);
    CHECK(base.train_language == "en");
    CHECK_FALSE(base.mode.has_value());
    double mean = 0.0;
    for (const auto& [lang, acc] : base.accuracy) mean += acc;
    CHECK(base.average == doctest::Approx(mean / 4.0));

    const BasisMap zero = fit_all(data, cfg.languages, 0);
    const auto r0 = eval::evaluate_transfer(train, tests, &zero);
    CHECK(r0.accuracy == base.accuracy);

    // Same-language evaluation at r = 0 is the in-language baseline.
    const Matrix feats = [&] {
      Matrix m(train.records.size(), cfg.dim);
      for (std::size_t i = 0; i < train.records.size(); ++i)
        std::copy(train.records[i].vec.begin(), train.records[i].vec.end(), m.row(i).begin());
      return m;
    }();
    const auto w = eval::train_logistic(feats, train.labels, eval::LogisticConfig{});
    CHECK(r0.accuracy.at("en") == eval::accuracy(feats, train.labels, w));

    const BasisMap one = fit_all(data, cfg.languages, 1);
    const auto lir = eval::evaluate_transfer(train, tests, &one);
    double base_other = 0.0;
    double lir_other = 0.0;
    for (const auto& lang : {"zh", "de", "fr"}) {
      base_other += base.accuracy.at(lang) / 3.0;
      lir_other += lir.accuracy.at(lang) / 3.0;
    }
    CHECK(lir_other - base_other >= 0.1);

    eval::TransferOptions eval_only;
    eval_only.placement = eval::Placement::kEvalOnly;
    CHECK_NOTHROW(eval::evaluate_transfer(train, tests, &one, eval_only));
  }

  TEST_CASE("transfer rejects multilingual training sets") {
    eval::LabeledRecords train;
    train.records = {{"a", "en", {1, 0}}, {"b", "zh", {0, 1}}};
    train.labels = {0, 1};
    CHECK(code_of([&] { eval::evaluate_transfer(train, {}, nullptr); }) == ErrorCode::kInvalidData);
  }

  TEST_CASE("export_projection examples") {
    // Two languages offset by ±4 on axis 0; semantics on axes 1 and 2.
    std::vector<EmbeddingRecord> recs;
    Xoshiro256 rng(61);
    std::vector<std::vector<double>> topics;
    for (int t = 0; t < 6; ++t) topics.push_back({0.0, rng.gaussian(), rng.gaussian()});
    for (const auto& [lang, offset] : {std::pair{"en", 4.0}, std::pair{"zh", -4.0}}) {
      for (int t = 0; t < 6; ++t) {
        for (int i = 0; i < 4; ++i) {
          recs.push_back({std::string(lang) + std::to_string(t) + "_" + std::to_string(i), lang,
                          {offset + 0.05 * rng.gaussian(), topics[t][1] + 0.05 * rng.gaussian(),
                           topics[t][2] + 0.05 * rng.gaussian()}});
        }
      }
    }
    auto ranges = [](const std::vector<eval::ProjectionRow>& rows) {
      std::map<std::string, std::pair<double, double>> r;
      for (const auto& row : rows) {
        auto [it, fresh] = r.try_emplace(row.lang, row.scores[0], row.scores[0]);
        it->second.first = std::min(it->second.first, row.scores[0]);
        it->second.second = std::max(it->second.second, row.scores[0]);
      }
      return r;
    };
    const auto before = eval::export_projection(recs, 1);
    REQUIRE(before.size() == recs.size());
    auto rb = ranges(before);
    const bool disjoint = rb["en"].second < rb["zh"].first || rb["zh"].second < rb["en"].first;
    CHECK(disjoint);

    BasisMap bases;
    for (const auto* lang : {"en", "zh"}) {
      std::vector<EmbeddingRecord> mine;
      for (const auto& r : recs)
        if (r.lang == lang) mine.push_back(r);
      bases[lang] = fit_components(LanguageMatrix(mine), 1);
    }
    const auto after = eval::export_projection(remove_batch(recs, bases).records, 1);
    auto ra = ranges(after);
    const bool overlap = ra["en"].first <= ra["zh"].second && ra["zh"].first <= ra["en"].second;
    CHECK(overlap);

    const std::vector<EmbeddingRecord> dup = {{"a", "en", {1, 2}}, {"b", "en", {1, 2}}, {"c", "zh", {1, 2}}};
    for (const auto& row : eval::export_projection(dup, 1)) CHECK(row.scores[0] == 0.0);

    CHECK(code_of([&] { eval::export_projection(dup, 3); }) == ErrorCode::kRankError);
    CHECK(code_of([&] { eval::export_projection(std::vector<EmbeddingRecord>{dup[0]}, 1); }) ==
          ErrorCode::kRankError);
  }
}

}  // namespace lir
