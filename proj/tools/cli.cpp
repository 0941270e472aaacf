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

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lir/core.hpp"
#include "lir/error.hpp"
#include "lir/eval.hpp"
#include "lir/io.hpp"
#include "lir/removal.hpp"
#include "lir/synth.hpp"

namespace lir::cli {

namespace fs = std::filesystem;

namespace {

struct FitArgs {
  std::string input;
  std::size_t rank = 0;
  std::string output;
  bool center = false;
  bool normalize = false;
};

struct ApplyArgs {
  std::string components;
  std::string input;
  std::string output;
  std::string mode = "orthogonal";
  bool strict = false;
  bool normalize = false;
  std::optional<std::size_t> rank;
  unsigned threads = 1;
};

struct RetrievalArgs {
  std::string queries;
  std::string candidates;
  std::string qrels;
  std::string components;
  std::string mode = "orthogonal";
  std::optional<std::size_t> rank;
  std::string report;
  unsigned threads = 1;
};

struct TransferArgs {
  std::string train;
  std::string tests;
  std::string labels;
  std::string components;
  std::string placement = "both";
  std::string mode = "orthogonal";
  std::optional<std::size_t> rank;
  double learning_rate = eval::LogisticConfig{}.learning_rate;
  std::size_t epochs = eval::LogisticConfig{}.epochs;
  double l2 = eval::LogisticConfig{}.l2;
  std::string report;
};

struct ProjectArgs {
  std::string input;
  std::size_t dims = 2;
  std::string output;
};

struct SynthArgs {
  std::size_t languages = 4;
  std::size_t topics = 50;
  std::size_t per = 25;
  std::size_t dim = 64;
  double bias = 5.0;
  double semantic = 1.0;
  double noise = 0.1;
  std::uint64_t seed = 42;
  bool labels = false;
  double skew = 0.0;
  std::string out;
};

std::map<LangCode, std::vector<EmbeddingRecord>> group_by_language(std::vector<EmbeddingRecord> records) {
  std::map<LangCode, std::vector<EmbeddingRecord>> groups;
  for (auto& r : records) groups[r.lang].push_back(std::move(r));
  return groups;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "cannot create directory '" + dir.string() + "'");
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_directory(file.parent_path());
}

std::string format_values(const std::vector<double>& values, std::size_t limit) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < std::min(limit, values.size()); ++i) s << (i ? " " : "") << values[i];
  return s.str();
}

int run_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  auto groups = group_by_language(io::read_embedding_source(args.input));
  const fs::path dir(args.output);
  ensure_directory(dir);
  const FitOptions options{.center = args.center, .normalize = args.normalize};
  for (const auto& [lang, records] : groups) {
    const LanguageMatrix m(records);
    if (m.n() < kRecommendedFitRows) {
      err << "note: fitting '" << lang << "' on " << m.n() << " rows; " << kRecommendedFitRows
          << "+ rows per language are recommended\n";
    }
    std::vector<double> sigma;
    const ComponentBasis basis = fit_components(m, args.rank, options, &sigma);
    io::write_components(dir / (lang + ".lirc"), basis);
    out << lang << ": n=" << m.n() << " d=" << m.d() << " rank=" << basis.rank()
        << " top singular values: " << format_values(sigma, 5) << "\n";
  }
  return kExitOk;
}

int run_apply(const ApplyArgs& args, std::ostream& out, std::ostream& err) {
  const RemovalMode mode = parse_removal_mode(args.mode);
  BasisMap bases = io::read_component_dir(args.components);
  if (args.rank) {
    for (auto& [lang, b] : bases) b = b.truncated(*args.rank);
  }
  const auto records = io::read_embedding_source(args.input);
  const BatchOptions options{
      .strict = args.strict, .normalize = args.normalize, .settle_f32 = true, .parallelism = {args.threads}};
  const BatchResult result = remove_batch(records, bases, mode, options);
  const fs::path output(args.output);
  if (fs::is_directory(args.input)) {
    ensure_directory(output);
    for (const auto& [lang, group] : group_by_language(result.records))
      io::write_embeddings(output / (lang + ".lire"), group);
  } else {
    ensure_parent(output);
    io::write_embeddings(output, result.records);
  }
  for (const auto& [lang, count] : result.passed_through) {
    err << "warning: no basis for '" << lang << "'; " << count << " record(s) passed through unchanged\n";
  }
  out << "applied " << to_string(mode) << " removal to " << result.records.size() - result.passed_through_total()
      << " record(s); passed through " << result.passed_through_total() << "\n";
  return kExitOk;
}

int run_retrieval(const RetrievalArgs& args, std::ostream& out, std::ostream&) {
  RetrievalDataset ds;
  ds.queries = io::read_embedding_source(args.queries);
  ds.candidates = io::read_embedding_source(args.candidates);
  ds.qrels = io::read_qrels(args.qrels);
  eval::RetrievalOptions options{.rank = args.rank, .mode = parse_removal_mode(args.mode), .parallelism = {args.threads}};
  std::optional<BasisMap> bases;
  if (!args.components.empty()) bases = io::read_component_dir(args.components);
  const EvalReport report = eval::evaluate_retrieval(ds, bases ? &*bases : nullptr, options);
  const fs::path path(args.report);
  ensure_parent(path);
  io::write_file(path, io::eval_report_json(report));
  out << "MAP " << std::setprecision(6) << report.overall_map << " over " << report.query_count << " queries\n";
  for (const auto& [lang, map] : report.per_language_map) out << "  " << lang << ": " << map << "\n";
  return kExitOk;
}

eval::LabeledRecords attach_labels(std::vector<EmbeddingRecord> records, const std::map<std::string, int>& labels) {
  eval::LabeledRecords set;
  set.labels.reserve(records.size());
  for (const auto& r : records) {
    auto it = labels.find(r.id);
    if (it == labels.end()) throw Error(ErrorCode::kInvalidData, "no label for record '" + r.id + "'");
    set.labels.push_back(it->second);
  }
  set.records = std::move(records);
  return set;
}

int run_transfer(const TransferArgs& args, std::ostream& out, std::ostream&) {
  const auto labels = io::read_labels(args.labels);
  const eval::LabeledRecords train = attach_labels(io::read_embeddings(args.train), labels);
  std::map<LangCode, eval::LabeledRecords> tests;
  for (auto& [lang, records] : group_by_language(io::read_embedding_source(args.tests))) {
    tests.emplace(lang, attach_labels(std::move(records), labels));
  }
  eval::TransferOptions options{.rank = args.rank,
                                .mode = parse_removal_mode(args.mode),
                                .placement = eval::parse_placement(args.placement),
                                .logistic = {args.learning_rate, args.epochs, args.l2}};
  std::optional<BasisMap> bases;
  if (!args.components.empty()) bases = io::read_component_dir(args.components);
  const auto report = eval::evaluate_transfer(train, tests, bases ? &*bases : nullptr, options);
  const fs::path path(args.report);
  ensure_parent(path);
  io::write_file(path, io::transfer_report_json(report));
  out << "trained on '" << report.train_language << "'; average accuracy " << std::setprecision(6) << report.average
      << "\n";
  for (const auto& [lang, acc] : report.accuracy) out << "  " << lang << ": " << acc << "\n";
  return kExitOk;
}

int run_project(const ProjectArgs& args, std::ostream& out, std::ostream&) {
  const auto records = io::read_embedding_source(args.input);
  const auto rows = eval::export_projection(records, args.dims);
  const fs::path path(args.output);
  ensure_parent(path);
  io::write_file(path, io::projection_csv(rows));
  out << "wrote " << rows.size() << " rows with " << args.dims << " score column(s)\n";
  return kExitOk;
}

int run_synth(const SynthArgs& args, std::ostream& out, std::ostream&) {
  synth::SynthConfig cfg;
  cfg.languages = synth::default_languages(args.languages);
  cfg.topics = args.topics;
  cfg.per_topic_per_lang = args.per;
  cfg.dim = args.dim;
  cfg.bias_scale = args.bias;
  cfg.semantic_scale = args.semantic;
  cfg.noise_scale = args.noise;
  cfg.seed = args.seed;
  cfg.labels = args.labels;
  cfg.skew = args.skew;
  const synth::SynthOutput data = synth::generate(cfg);

  const fs::path root(args.out);
  for (const char* sub : {"corpus", "queries", "candidates"}) ensure_directory(root / sub);
  for (const auto& lang : cfg.languages) {
    const std::string file = lang + ".lire";
    io::write_embeddings(root / "corpus" / file, synth::records_of(data, lang));
    std::vector<EmbeddingRecord> qs;
    std::vector<EmbeddingRecord> cs;
    for (const auto& q : data.dataset.queries)
      if (q.lang == lang) qs.push_back(q);
    for (const auto& c : data.dataset.candidates)
      if (c.lang == lang) cs.push_back(c);
    io::write_embeddings(root / "queries" / file, qs);
    io::write_embeddings(root / "candidates" / file, cs);
  }
  io::write_qrels(root / "qrels.jsonl", data.dataset.qrels);
  if (cfg.labels) io::write_labels(root / "labels.jsonl", data.labels);

  nlohmann::json truth = {{"config",
                           {{"bias", cfg.bias_scale},
                            {"dim", cfg.dim},
                            {"labels", cfg.labels},
                            {"languages", cfg.languages},
                            {"noise", cfg.noise_scale},
                            {"per_topic_per_lang", cfg.per_topic_per_lang},
                            {"seed", cfg.seed},
                            {"semantic", cfg.semantic_scale},
                            {"skew", cfg.skew},
                            {"topics", cfg.topics}}},
                          {"offsets", data.offsets}};
  io::write_file(root / "ground_truth.json", truth.dump(2) + "\n");
  out << "generated " << data.records.size() << " records (" << data.dataset.queries.size() << " queries, "
      << data.dataset.candidates.size() << " candidates) in " << root.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Language identity removal for multilingual embeddings"};
  app.name("lir");
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit per-language identity components (top right singular vectors)");
  fit_cmd->add_option("--input", fit.input, "Embedding file (.lire) or directory of them")->required();
  fit_cmd->add_option("--rank", fit.rank, "Number of components r to keep per language")->required();
  fit_cmd->add_option("--output", fit.output, "Directory receiving one <lang>.lirc per language")->required();
  fit_cmd->add_flag("--center", fit.center, "Subtract column means before factoring (default: off)");
  fit_cmd->add_flag("--normalize", fit.normalize, "Scale rows to unit length before factoring (default: off)");

  ApplyArgs apply;
  auto* apply_cmd = app.add_subcommand("apply", "Remove each record's language components");
  apply_cmd->add_option("--components", apply.components, "Directory of .lirc files")->required();
  apply_cmd->add_option("--input", apply.input, "Embedding file (.lire) or directory of them")->required();
  apply_cmd->add_option("--output", apply.output,
                        "Output .lire file; a directory of <lang>.lire files when --input is a directory")->required();
  apply_cmd->add_option("--mode", apply.mode, "Removal formula")
      ->check(CLI::IsMember({"orthogonal", "paper-eq1"}))
      ->capture_default_str();
  apply_cmd->add_flag("--strict", apply.strict,
                      "Fail when a language has no basis (default: off; such records pass through unchanged)");
  apply_cmd->add_flag("--normalize", apply.normalize, "Scale records to unit length before removal (default: off)");
  apply_cmd->add_option("--rank", apply.rank, "Use only the leading r stored components (default: all)");
  apply_cmd->add_option("--threads", apply.threads, "Worker threads; 0 uses every hardware thread")
      ->capture_default_str();

  RetrievalArgs retrieval;
  auto* ret_cmd = app.add_subcommand("eval-retrieval", "Cross-lingual retrieval MAP with optional removal");
  ret_cmd->add_option("--queries", retrieval.queries, "Query embeddings (.lire file or directory)")->required();
  ret_cmd->add_option("--candidates", retrieval.candidates, "Candidate embeddings (.lire file or directory)")
      ->required();
  ret_cmd->add_option("--qrels", retrieval.qrels, "Relevance judgments (JSONL)")->required();
  ret_cmd->add_option("--components", retrieval.components, "Directory of .lirc files (default: no removal)");
  ret_cmd->add_option("--mode", retrieval.mode, "Removal formula")
      ->check(CLI::IsMember({"orthogonal", "paper-eq1"}))
      ->capture_default_str();
  ret_cmd->add_option("--rank", retrieval.rank, "Use only the leading r stored components (default: all)");
  ret_cmd->add_option("--report", retrieval.report, "Output report (JSON)")->required();
  ret_cmd->add_option("--threads", retrieval.threads, "Worker threads; 0 uses every hardware thread")
      ->capture_default_str();

  TransferArgs transfer;
  auto* tr_cmd = app.add_subcommand("eval-transfer", "Zero-shot transfer of a logistic classifier");
  tr_cmd->add_option("--train", transfer.train, "Training embeddings, one language (.lire)")->required();
  tr_cmd->add_option("--tests", transfer.tests, "Directory of per-language test files (.lire)")->required();
  tr_cmd->add_option("--labels", transfer.labels, "Labels for training and test ids (JSONL)")->required();
  tr_cmd->add_option("--components", transfer.components, "Directory of .lirc files (default: no removal)");
  tr_cmd->add_option("--placement", transfer.placement, "Apply removal to training and test data, or test only")
      ->check(CLI::IsMember({"both", "eval"}))
      ->capture_default_str();
  tr_cmd->add_option("--mode", transfer.mode, "Removal formula")
      ->check(CLI::IsMember({"orthogonal", "paper-eq1"}))
      ->capture_default_str();
  tr_cmd->add_option("--rank", transfer.rank, "Use only the leading r stored components (default: all)");
  tr_cmd->add_option("--lr", transfer.learning_rate, "Gradient descent step size")->capture_default_str();
  tr_cmd->add_option("--epochs", transfer.epochs, "Full-batch gradient steps")->capture_default_str();
  tr_cmd->add_option("--l2", transfer.l2, "L2 penalty on weights (bias excluded)")->capture_default_str();
  tr_cmd->add_option("--report", transfer.report, "Output report (JSON)")->required();

  ProjectArgs project;
  auto* pr_cmd = app.add_subcommand("project", "Joint PCA scores of all records as CSV");
  pr_cmd->add_option("--input", project.input, "Embedding file (.lire) or directory of them")->required();
  pr_cmd->add_option("--dims", project.dims, "Number of principal components K")->capture_default_str();
  pr_cmd->add_option("--output", project.output, "Output CSV")->required();

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "Generate a synthetic multilingual corpus with language offsets");
  sy_cmd->add_option("--languages", sy.languages, "Number of languages")->capture_default_str();
  sy_cmd->add_option("--topics", sy.topics, "Number of topics")->capture_default_str();
  sy_cmd->add_option("--per", sy.per, "Records per topic per language")->capture_default_str();
  sy_cmd->add_option("--dim", sy.dim, "Embedding dimension")->capture_default_str();
  sy_cmd->add_option("--bias", sy.bias, "Norm of each language offset")->capture_default_str();
  sy_cmd->add_option("--semantic", sy.semantic, "Norm of each topic vector")->capture_default_str();
  sy_cmd->add_option("--noise", sy.noise, "Per-coordinate Gaussian noise")->capture_default_str();
  sy_cmd->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  sy_cmd->add_flag("--labels", sy.labels, "Emit topic-parity labels for transfer experiments (default: off)");
  sy_cmd->add_option("--skew", sy.skew, "Shared component mixed into offsets, in [0, 1)")->capture_default_str();
  sy_cmd->add_option("--out", sy.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*fit_cmd) return run_fit(fit, out, err);
    if (*apply_cmd) return run_apply(apply, out, err);
    if (*ret_cmd) return run_retrieval(retrieval, out, err);
    if (*tr_cmd) return run_transfer(transfer, out, err);
    if (*pr_cmd) return run_project(project, out, err);
    if (*sy_cmd) return run_synth(sy, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kNumericalFailure ? kExitNumericalFailure : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace lir::cli
