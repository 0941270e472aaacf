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

#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "lir/io.hpp"
#include "lir/removal.hpp"
#include "oracles.hpp"

namespace lir {
namespace {

using testing::TempDir;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome lir_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "lir");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) { return path.string(); }

// Small synthetic corpus, shared by the tests below.
Outcome make_synth(const std::filesystem::path& dir, const std::string& bias = "5", bool labels = false) {
  std::vector<std::string> args = {"synth", "--topics", "10", "--per", "6", "--dim", "16", "--bias", bias,
                                   "--out", p(dir)};
  if (labels) args.push_back("--labels");
  return lir_cmd(args);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fit writes the same bytes as the library") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    const auto fit = lir_cmd({"fit", "--input", p(dir / "s" / "corpus" / "en.lire"), "--rank", "1", "--output",
                              p(dir / "c")});
    REQUIRE(fit.code == 0);
    CHECK(fit.out.find("en: n=60 d=16 rank=1 top singular values: ") == 0);
    CHECK(fit.err.find("recommended") != std::string::npos);
    const auto records = io::read_embeddings(dir / "s" / "corpus" / "en.lire");
    const auto basis = fit_components(LanguageMatrix(records), 1);
    CHECK(io::read_file(dir / "c" / "en.lirc") == io::encode_components(basis));
  }

  TEST_CASE("fit over a directory writes one basis per language") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    std::filesystem::create_directory(dir / "two");
    std::filesystem::copy_file(dir / "s" / "corpus" / "en.lire", dir / "two" / "en.lire");
    std::filesystem::copy_file(dir / "s" / "corpus" / "zh.lire", dir / "two" / "zh.lire");
    REQUIRE(lir_cmd({"fit", "--input", p(dir / "two"), "--rank", "2", "--output", p(dir / "c")}).code == 0);
    CHECK(io::read_component_dir(dir / "c").size() == 2);
  }

  TEST_CASE("fit with too large a rank exits 2") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    const auto r = lir_cmd({"fit", "--input", p(dir / "s" / "corpus"), "--rank", "17", "--output", p(dir / "c")});
    CHECK(r.code == 2);
    CHECK(r.err.find("RankError") != std::string::npos);
  }

  TEST_CASE("apply is idempotent and modes agree on unit input") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    REQUIRE(lir_cmd({"fit", "--input", p(dir / "s" / "corpus"), "--rank", "1", "--output", p(dir / "c")}).code == 0);
    const auto en = p(dir / "s" / "corpus" / "en.lire");
    REQUIRE(lir_cmd({"apply", "--components", p(dir / "c"), "--input", en, "--output", p(dir / "once.lire")}).code == 0);
    REQUIRE(lir_cmd({"apply", "--components", p(dir / "c"), "--input", p(dir / "once.lire"), "--output",
                     p(dir / "twice.lire")})
                .code == 0);
    CHECK(io::read_file(dir / "once.lire") == io::read_file(dir / "twice.lire"));

    REQUIRE(lir_cmd({"apply", "--components", p(dir / "c"), "--input", en, "--output", p(dir / "o.lire"),
                     "--normalize"})
                .code == 0);
    REQUIRE(lir_cmd({"apply", "--components", p(dir / "c"), "--input", en, "--output", p(dir / "e.lire"),
                     "--normalize", "--mode", "paper-eq1"})
                .code == 0);
    const auto o = io::read_embeddings(dir / "o.lire");
    const auto e = io::read_embeddings(dir / "e.lire");
    REQUIRE(o.size() == e.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i)
      for (std::size_t j = 0; j < o[i].dim(); ++j) worst = std::max(worst, std::abs(o[i].vec[j] - e[i].vec[j]));
    CHECK(worst <= 1e-6);

    CHECK(lir_cmd({"apply", "--components", p(dir / "c"), "--input", en, "--output", p(dir / "x.lire"), "--mode",
                   "sideways"})
              .code == 2);
  }

  TEST_CASE("apply on a directory writes one file per language and matches the library") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    REQUIRE(lir_cmd({"fit", "--input", p(dir / "s" / "corpus"), "--rank", "1", "--output", p(dir / "c")}).code == 0);
    REQUIRE(lir_cmd({"apply", "--components", p(dir / "c"), "--input", p(dir / "s" / "corpus"), "--output",
                     p(dir / "out"), "--threads", "3"})
                .code == 0);
    const auto bases = io::read_component_dir(dir / "c");
    BatchOptions opts;
    opts.settle_f32 = true;
    for (const auto* lang : {"en", "zh", "de", "fr"}) {
      const auto records = io::read_embeddings(dir / "s" / "corpus" / (std::string(lang) + ".lire"));
      const auto expected = remove_batch(records, bases, RemovalMode::kOrthogonal, opts).records;
      CHECK(io::read_file(dir / "out" / (std::string(lang) + ".lire")) == io::encode_embeddings(expected));
    }
  }

  TEST_CASE("apply passes through languages without a basis unless strict") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    REQUIRE(lir_cmd({"fit", "--input", p(dir / "s" / "corpus" / "en.lire"), "--rank", "1", "--output",
                     p(dir / "c")})
                .code == 0);
    const auto zh = p(dir / "s" / "corpus" / "zh.lire");
    const auto loose = lir_cmd({"apply", "--components", p(dir / "c"), "--input", zh, "--output", p(dir / "z.lire")});
    CHECK(loose.code == 0);
    CHECK(loose.err.find("warning: no basis for 'zh'; 60 record(s)") != std::string::npos);
    CHECK(loose.out.find("passed through 60") != std::string::npos);
    CHECK(io::read_embeddings(dir / "z.lire") == io::read_embeddings(zh));

    const auto strict =
        lir_cmd({"apply", "--components", p(dir / "c"), "--input", zh, "--output", p(dir / "z2.lire"), "--strict"});
    CHECK(strict.code == 2);
    CHECK(strict.err.find("MissingBasis") != std::string::npos);
  }

  TEST_CASE("eval-retrieval reports MAP and rejects unknown candidates") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    const auto s = dir / "s";
    const auto base = lir_cmd({"eval-retrieval", "--queries", p(s / "queries"), "--candidates", p(s / "candidates"),
                               "--qrels", p(s / "qrels.jsonl"), "--report", p(dir / "base.json")});
    REQUIRE(base.code == 0);
    REQUIRE(lir_cmd({"fit", "--input", p(s / "corpus"), "--rank", "1", "--output", p(dir / "c")}).code == 0);
    REQUIRE(lir_cmd({"eval-retrieval", "--queries", p(s / "queries"), "--candidates", p(s / "candidates"), "--qrels",
                     p(s / "qrels.jsonl"), "--components", p(dir / "c"), "--report", p(dir / "lir.json")})
                .code == 0);
    const auto before = nlohmann::json::parse(io::read_file(dir / "base.json"));
    const auto after = nlohmann::json::parse(io::read_file(dir / "lir.json"));
    CHECK(after["overall_map"].get<double>() > before["overall_map"].get<double>());

    // Library call with the same inputs gives the same report bytes.
    RetrievalDataset ds;
    ds.queries = io::read_embedding_source(s / "queries");
    ds.candidates = io::read_embedding_source(s / "candidates");
    ds.qrels = io::read_qrels(s / "qrels.jsonl");
    const auto lib = io::eval_report_json(eval::evaluate_retrieval(ds, nullptr));
    const auto bytes = io::read_file(dir / "base.json");
    CHECK(std::string(bytes.begin(), bytes.end()) == lib);

    io::write_file(dir / "bad.jsonl", std::string("{\"query_id\":\"en-t0000-0000\",\"relevant\":[\"ghost\"]}\n"));
    const auto bad = lir_cmd({"eval-retrieval", "--queries", p(s / "queries"), "--candidates", p(s / "candidates"),
                              "--qrels", p(dir / "bad.jsonl"), "--report", p(dir / "bad.json")});
    CHECK(bad.code == 2);
  }

  TEST_CASE("eval-transfer: rank zero matches the baseline, single-class labels fail") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s", "5", true).code == 0);
    const auto s = dir / "s";
    const std::vector<std::string> common = {"eval-transfer", "--train", p(s / "corpus" / "en.lire"), "--tests",
                                             p(s / "corpus"), "--labels", p(s / "labels.jsonl")};
    auto with = [&](std::vector<std::string> extra) {
      auto args = common;
      args.insert(args.end(), extra.begin(), extra.end());
      return lir_cmd(args);
    };
    REQUIRE(with({"--report", p(dir / "base.json")}).code == 0);
    REQUIRE(lir_cmd({"fit", "--input", p(s / "corpus"), "--rank", "0", "--output", p(dir / "c0")}).code == 0);
    REQUIRE(with({"--components", p(dir / "c0"), "--report", p(dir / "r0.json")}).code == 0);
    const auto base = nlohmann::json::parse(io::read_file(dir / "base.json"));
    const auto r0 = nlohmann::json::parse(io::read_file(dir / "r0.json"));
    CHECK(base["accuracy"] == r0["accuracy"]);
    CHECK(base["average"] == r0["average"]);

    std::string ones;
    for (const auto& r : io::read_embeddings(s / "corpus" / "en.lire")) ones += "{\"id\":\"" + r.id + "\",\"label\":1}\n";
    io::write_file(dir / "ones.jsonl", ones);
    const auto bad = lir_cmd({"eval-transfer", "--train", p(s / "corpus" / "en.lire"), "--tests",
                              p(s / "corpus" / "en.lire"), "--labels", p(dir / "ones.jsonl"), "--report",
                              p(dir / "bad.json")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("DegenerateLabels") != std::string::npos);
  }

  TEST_CASE("project writes one row per record") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "s").code == 0);
    REQUIRE(lir_cmd({"project", "--input", p(dir / "s" / "corpus"), "--output", p(dir / "p.csv")}).code == 0);
    const auto bytes = io::read_file(dir / "p.csv");
    const auto lines = std::count(bytes.begin(), bytes.end(), '\n');
    CHECK(lines == 1 + 4 * 60);
    CHECK(std::string(bytes.begin(), bytes.begin() + 24) == "id,lang,score_1,score_2\n");
    CHECK(lir_cmd({"project", "--input", p(dir / "s" / "corpus"), "--dims", "17", "--output", p(dir / "q.csv")})
              .code == 2);
  }

  TEST_CASE("synth is reproducible and bias only moves offsets") {
    TempDir dir("cli");
    REQUIRE(make_synth(dir / "a").code == 0);
    REQUIRE(make_synth(dir / "b").code == 0);
    CHECK(testing::directory_checksums(dir / "a") == testing::directory_checksums(dir / "b"));

    REQUIRE(make_synth(dir / "flat", "0").code == 0);
    const auto truth = nlohmann::json::parse(io::read_file(dir / "a" / "ground_truth.json"));
    const auto biased = io::read_embeddings(dir / "a" / "corpus" / "de.lire");
    const auto flat = io::read_embeddings(dir / "flat" / "corpus" / "de.lire");
    const auto mu = truth["offsets"]["de"].get<std::vector<double>>();
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i)
      for (std::size_t j = 0; j < mu.size(); ++j)
        worst = std::max(worst, std::abs(biased[i].vec[j] - mu[j] - flat[i].vec[j]));
    // f32 storage of both files bounds the mismatch.
    CHECK(worst <= 1e-5);

    CHECK(lir_cmd({"synth", "--topics", "1", "--out", p(dir / "bad")}).code == 2);
    CHECK(lir_cmd({"synth", "--dim", "3", "--out", p(dir / "bad")}).code == 2);
    CHECK(lir_cmd({"synth", "--bias", "-1", "--out", p(dir / "bad")}).code == 2);
  }

  TEST_CASE("help documents defaults") {
    const auto apply = lir_cmd({"apply", "--help"});
    CHECK(apply.code == 0);
    CHECK(apply.out.find("orthogonal") != std::string::npos);
    const auto fit = lir_cmd({"fit", "--help"});
    CHECK(fit.code == 0);
    CHECK(fit.out.find("--center") != std::string::npos);
    CHECK(fit.out.find("default: off") != std::string::npos);
    CHECK(lir_cmd({"eval-retrieval", "--help"}).out.find("orthogonal") != std::string::npos);
    CHECK(lir_cmd({"eval-transfer", "--help"}).out.find("both") != std::string::npos);
    CHECK(lir_cmd({"project", "--help"}).out.find("2") != std::string::npos);
    CHECK(lir_cmd({}).code == 2);
    CHECK(lir_cmd({"frobnicate"}).code == 2);
  }
}

}  // namespace lir
