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

#include "lir/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "json.hpp"
#include "lir/error.hpp"
#include "lir/linalg.hpp"

namespace lir::io {

using nlohmann::json;

namespace {

constexpr char kEmbeddingMagic[4] = {'L', 'I', 'R', 'E'};
constexpr char kComponentMagic[4] = {'L', 'I', 'R', 'C'};

// ---- little-endian encoding -------------------------------------------------

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, double value, const std::string& context) {
  const float f = static_cast<float>(value);
  if (!std::isfinite(f)) throw Error(ErrorCode::kInvalidData, context + ": value " + std::to_string(value) +
                                                                  " is not representable as f32");
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile, std::string("file ends inside ") + what + " (need " + std::to_string(n) +
                                                 " bytes, " + std::to_string(remaining()) + " left)");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint8_t u8(const char* what) { return take(1, what)[0]; }

  std::uint16_t u16(const char* what) {
    auto s = take(2, what);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }

  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(s[b]) << (8 * b);
    return v;
  }

  double f32(const char* what) { return static_cast<double>(std::bit_cast<float>(u32(what))); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_preamble(std::vector<std::uint8_t>& out, const char (&magic)[4], const json& header) {
  out.insert(out.end(), magic, magic + 4);
  out.push_back(kFormatVersion);
  const std::string text = header.dump();
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
}

json read_preamble(Reader& in, const char (&magic)[4]) {
  if (in.remaining() < 4) throw Error(ErrorCode::kFormatError, "bad magic");
  auto m = in.take(4, "magic");
  if (!std::equal(m.begin(), m.end(), magic, magic + 4,
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw Error(ErrorCode::kFormatError, "bad magic");
  }
  const std::uint8_t version = in.u8("version");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t len = in.u32("header length");
  auto text = in.take(len, "header");
  json header = json::parse(text.begin(), text.end(), nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw Error(ErrorCode::kFormatError, "header is not a JSON object");
  return header;
}

template <typename T>
T header_field(const json& header, const char* key) {
  auto it = header.find(key);
  if (it == header.end()) throw Error(ErrorCode::kFormatError, std::string("header lacks '") + key + "'");
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) throw Error(ErrorCode::kFormatError, std::string("header '") + key + "' must be a non-negative integer");
    } else {
      if (!it->is_string()) throw Error(ErrorCode::kFormatError, std::string("header '") + key + "' must be a string");
    }
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kFormatError, std::string("header '") + key + "' has the wrong type");
  }
}

// ---- JSONL helpers -----------------------------------------------------------

template <typename Fn>
void for_each_jsonl_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) throw Error::at_line(ErrorCode::kParseError, line_no, "malformed JSON");
    if (!obj.is_object()) throw Error::at_line(ErrorCode::kParseError, line_no, "expected a JSON object");
    fn(obj, line_no);
  }
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error::at_line(ErrorCode::kParseError, line_no, std::string("missing '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_string()) throw Error::at_line(ErrorCode::kParseError, line_no, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

// ---- files -------------------------------------------------------------------

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to '" + path.string() + "'");
}

void write_file(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw Error(ErrorCode::kIoError, "'" + path.string() + "' is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- embeddings ----------------------------------------------------------------

std::vector<std::uint8_t> encode_embeddings(std::span<const EmbeddingRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kInvalidData, "cannot write an empty embedding file");
  const std::size_t d = validate_collection(records);
  const LangCode& lang = records.front().lang;
  for (const auto& r : records) {
    if (r.lang != lang) {
      throw Error(ErrorCode::kInvalidData, "one language per file: found '" + lang + "' and '" + r.lang + "'");
    }
    if (r.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::kInvalidData, "record id longer than 65535 bytes");
    }
  }
  if (d > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::kInvalidData, "dimension too large");

  json header = {{"count", static_cast<std::uint64_t>(records.size())},
                 {"dim", static_cast<std::uint32_t>(d)},
                 {"dtype", "f32"},
                 {"lang", lang}};
  std::vector<std::uint8_t> out;
  out.reserve(64 + records.size() * (d * 4 + 2 + records.front().id.size()));
  put_preamble(out, kEmbeddingMagic, header);
  for (const auto& r : records) {
    put_u16(out, static_cast<std::uint16_t>(r.id.size()));
    out.insert(out.end(), r.id.begin(), r.id.end());
    for (double x : r.vec) put_f32(out, x, "record '" + r.id + "'");
  }
  return out;
}

void write_embeddings(const fs::path& path, std::span<const EmbeddingRecord> records) {
  write_file(path, encode_embeddings(records));
}

std::vector<EmbeddingRecord> decode_embeddings(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const json header = read_preamble(in, kEmbeddingMagic);
  const auto dim = header_field<std::uint64_t>(header, "dim");
  const auto count = header_field<std::uint64_t>(header, "count");
  const auto dtype = header_field<std::string>(header, "dtype");
  const LangCode lang = normalize_lang(header_field<std::string>(header, "lang"));
  if (dtype != "f32") throw Error(ErrorCode::kFormatError, "unsupported dtype '" + dtype + "'");
  if (dim == 0 || dim > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::kFormatError, "invalid dim");
  if (lang.empty()) throw Error(ErrorCode::kFormatError, "empty language code");
  // Each record needs at least 2 + 4·dim bytes; a larger count cannot fit.
  if (count > in.remaining() / (2 + 4 * dim)) {
    throw Error(ErrorCode::kTruncatedFile, "header declares " + std::to_string(count) + " records but only " +
                                               std::to_string(in.remaining()) + " payload bytes follow");
  }

  std::vector<EmbeddingRecord> records;
  records.reserve(count);
  std::unordered_set<std::string> ids;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint16_t id_len = in.u16("record id length");
    auto id_bytes = in.take(id_len, "record id");
    EmbeddingRecord r{std::string(id_bytes.begin(), id_bytes.end()), lang, std::vector<double>(dim)};
    for (auto& x : r.vec) {
      x = in.f32("record vector");
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidData, "record '" + r.id + "' has a non-finite coordinate");
    }
    if (!ids.insert(r.id).second) throw Error(ErrorCode::kDuplicateKey, "duplicate record id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kFormatError, "count mismatch: " + std::to_string(in.remaining()) +
                                             " bytes follow the declared " + std::to_string(count) + " records");
  }
  return records;
}

std::vector<EmbeddingRecord> read_embeddings(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_embeddings(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(error_name(e.code()).size() + 2));
  }
}

std::vector<fs::path> embedding_files(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(ErrorCode::kIoError, "'" + path.string() + "' does not exist");
  if (!fs::is_directory(path, ec)) return {path};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".lire" || ext == ".jsonl")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kIoError, "no .lire or .jsonl files in '" + path.string() + "'");
  return files;
}

std::vector<EmbeddingRecord> read_embedding_source(const fs::path& path) {
  std::vector<EmbeddingRecord> all;
  for (const auto& file : embedding_files(path)) {
    auto part = file.extension() == ".jsonl" ? read_jsonl_embeddings(file) : read_embeddings(file);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  validate_collection(all);
  return all;
}

// ---- components ------------------------------------------------------------------

std::vector<std::uint8_t> encode_components(const ComponentBasis& basis, const std::optional<std::string>& mode_hint) {
  if (basis.dim() == 0) throw Error(ErrorCode::kInvalidData, "basis has dimension 0");
  if (basis.lang.empty()) throw Error(ErrorCode::kInvalidData, "basis has no language");
  json header = {{"dim", static_cast<std::uint32_t>(basis.dim())},
                 {"lang", basis.lang},
                 {"rank", static_cast<std::uint32_t>(basis.rank())},
                 {"sample_count", basis.sample_count},
                 {"source_fingerprint", basis.source_fingerprint}};
  if (mode_hint) header["mode_hint"] = *mode_hint;
  std::vector<std::uint8_t> out;
  out.reserve(128 + basis.dim() * basis.rank() * 4);
  put_preamble(out, kComponentMagic, header);
  for (std::size_t c = 0; c < basis.rank(); ++c)
    for (std::size_t r = 0; r < basis.dim(); ++r) put_f32(out, basis.basis(r, c), "basis of '" + basis.lang + "'");
  return out;
}

void write_components(const fs::path& path, const ComponentBasis& basis, const std::optional<std::string>& mode_hint) {
  write_file(path, encode_components(basis, mode_hint));
}

LoadedComponents decode_components(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const json header = read_preamble(in, kComponentMagic);
  const auto dim = header_field<std::uint64_t>(header, "dim");
  const auto rank = header_field<std::uint64_t>(header, "rank");
  LoadedComponents loaded;
  loaded.basis.lang = normalize_lang(header_field<std::string>(header, "lang"));
  loaded.basis.sample_count = header_field<std::uint64_t>(header, "sample_count");
  loaded.basis.source_fingerprint = header_field<std::string>(header, "source_fingerprint");
  if (header.contains("mode_hint")) loaded.mode_hint = header_field<std::string>(header, "mode_hint");
  if (dim == 0 || dim > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::kFormatError, "invalid dim");
  if (rank > dim) throw Error(ErrorCode::kFormatError, "rank exceeds dim");
  if (loaded.basis.lang.empty()) throw Error(ErrorCode::kFormatError, "empty language code");
  if (in.remaining() < dim * rank * 4) {
    throw Error(ErrorCode::kTruncatedFile, "basis payload needs " + std::to_string(dim * rank * 4) + " bytes, " +
                                               std::to_string(in.remaining()) + " present");
  }

  Matrix b(dim, rank);
  for (std::size_t c = 0; c < rank; ++c)
    for (std::size_t r = 0; r < dim; ++r) {
      b(r, c) = in.f32("basis");
      if (!std::isfinite(b(r, c))) throw Error(ErrorCode::kCorruptBasis, "basis has a non-finite entry");
    }
  if (in.remaining() != 0) throw Error(ErrorCode::kFormatError, "trailing bytes after the basis payload");

  loaded.stored_orthonormality_error = orthonormality_error(b);
  if (loaded.stored_orthonormality_error > kCorruptBasisThreshold) {
    throw Error(ErrorCode::kCorruptBasis, "max |BᵀB − I| = " + std::to_string(loaded.stored_orthonormality_error) +
                                              " for '" + loaded.basis.lang + "'");
  }
  // f32 storage loses orthonormality at the 1e-7 level; restore it in f64.
  for (std::size_t j = 0; j < rank; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < dim; ++i) p += b(i, k) * b(i, j);
        for (std::size_t i = 0; i < dim; ++i) b(i, j) -= p * b(i, k);
      }
    }
    double len = 0.0;
    for (std::size_t i = 0; i < dim; ++i) len += b(i, j) * b(i, j);
    len = std::sqrt(len);
    for (std::size_t i = 0; i < dim; ++i) b(i, j) /= len;
  }
  loaded.basis.basis = std::move(b);
  return loaded;
}

LoadedComponents read_components(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_components(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(error_name(e.code()).size() + 2));
  }
}

BasisMap read_component_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIoError, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lirc") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  BasisMap out;
  for (const auto& f : files) {
    auto loaded = read_components(f);
    const LangCode lang = loaded.basis.lang;
    if (!out.emplace(lang, std::move(loaded.basis)).second) {
      throw Error(ErrorCode::kDuplicateKey, "two component files for language '" + lang + "'");
    }
  }
  return out;
}

// ---- JSONL -------------------------------------------------------------------------

std::vector<EmbeddingRecord> read_jsonl_embeddings(const fs::path& path) {
  std::vector<EmbeddingRecord> records;
  std::unordered_set<std::string> ids;
  for_each_jsonl_line(path, [&](const json& obj, std::size_t line_no) {
    EmbeddingRecord r;
    r.id = require_string(obj, "id", line_no);
    r.lang = normalize_lang(require_string(obj, "lang", line_no));
    if (r.lang.empty()) throw Error::at_line(ErrorCode::kParseError, line_no, "empty language code");
    const json& vec = require(obj, "vec", line_no);
    if (!vec.is_array() || vec.empty()) {
      throw Error::at_line(ErrorCode::kParseError, line_no, "'vec' must be a non-empty array");
    }
    r.vec.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) throw Error::at_line(ErrorCode::kParseError, line_no, "'vec' holds a non-number");
      const double v = x.get<double>();
      if (!std::isfinite(v)) throw Error::at_line(ErrorCode::kInvalidData, line_no, "non-finite coordinate");
      r.vec.push_back(v);
    }
    if (!records.empty() && r.vec.size() != records.front().vec.size()) {
      throw Error::at_line(ErrorCode::kDimensionError, line_no,
                           "vector has " + std::to_string(r.vec.size()) + " entries, expected " +
                               std::to_string(records.front().vec.size()));
    }
    if (!ids.insert(r.id).second) throw Error::at_line(ErrorCode::kDuplicateKey, line_no, "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  });
  return records;
}

std::map<std::string, std::set<std::string>> read_qrels(const fs::path& path) {
  std::map<std::string, std::set<std::string>> qrels;
  for_each_jsonl_line(path, [&](const json& obj, std::size_t line_no) {
    std::string qid = require_string(obj, "query_id", line_no);
    const json& rel = require(obj, "relevant", line_no);
    if (!rel.is_array()) throw Error::at_line(ErrorCode::kParseError, line_no, "'relevant' must be an array");
    std::set<std::string> ids;
    for (const auto& x : rel) {
      if (!x.is_string()) throw Error::at_line(ErrorCode::kParseError, line_no, "'relevant' holds a non-string");
      ids.insert(x.get<std::string>());
    }
    if (qrels.contains(qid)) throw Error::at_line(ErrorCode::kDuplicateKey, line_no, "duplicate query_id '" + qid + "'");
    qrels.emplace(std::move(qid), std::move(ids));
  });
  return qrels;
}

std::map<std::string, int> read_labels(const fs::path& path) {
  std::map<std::string, int> labels;
  for_each_jsonl_line(path, [&](const json& obj, std::size_t line_no) {
    std::string id = require_string(obj, "id", line_no);
    const json& label = require(obj, "label", line_no);
    if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
      throw Error::at_line(ErrorCode::kParseError, line_no, "'label' must be 0 or 1");
    }
    if (labels.contains(id)) throw Error::at_line(ErrorCode::kDuplicateKey, line_no, "duplicate id '" + id + "'");
    labels.emplace(std::move(id), label.get<int>());
  });
  return labels;
}

void write_qrels(const fs::path& path, const std::map<std::string, std::set<std::string>>& qrels) {
  std::string text;
  for (const auto& [qid, rel] : qrels) {
    json line = {{"query_id", qid}, {"relevant", json::array()}};
    for (const auto& id : rel) line["relevant"].push_back(id);
    text += line.dump();
    text += '\n';
  }
  write_file(path, text);
}

void write_labels(const fs::path& path, const std::map<std::string, int>& labels) {
  std::string text;
  for (const auto& [id, label] : labels) {
    text += json{{"id", id}, {"label", label}}.dump();
    text += '\n';
  }
  write_file(path, text);
}

// ---- reports --------------------------------------------------------------------------

std::string eval_report_json(const EvalReport& report) {
  json config = {{"basis_fingerprints", report.config.basis_fingerprints},
                 {"candidates_fingerprint", report.config.candidates_fingerprint},
                 {"queries_fingerprint", report.config.queries_fingerprint},
                 {"rank", report.config.rank},
                 {"similarity", report.config.similarity}};
  config["mode"] = report.config.mode ? json(std::string(to_string(*report.config.mode))) : json(nullptr);
  json doc = {{"config", config},
              {"overall_map", report.overall_map},
              {"per_language_map", report.per_language_map},
              {"query_count", report.query_count}};
  return doc.dump(2) + "\n";
}

std::string transfer_report_json(const eval::TransferReport& report) {
  json config = {{"basis_fingerprints", report.basis_fingerprints},
                 {"logistic",
                  {{"epochs", report.logistic.epochs},
                   {"l2", report.logistic.l2},
                   {"learning_rate", report.logistic.learning_rate}}},
                 {"placement", std::string(eval::to_string(report.placement))},
                 {"rank", report.rank},
                 {"train_fingerprint", report.train_fingerprint}};
  config["mode"] = report.mode ? json(std::string(to_string(*report.mode))) : json(nullptr);
  json doc = {{"accuracy", report.accuracy},
              {"average", report.average},
              {"config", config},
              {"train_language", report.train_language}};
  return doc.dump(2) + "\n";
}

// ---- CSV ------------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string projection_csv(std::span<const eval::ProjectionRow> rows) {
  const std::size_t k = rows.empty() ? 0 : rows.front().scores.size();
  std::string out = "id,lang";
  for (std::size_t j = 1; j <= k; ++j) out += ",score_" + std::to_string(j);
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.id);
    out += ',';
    out += csv_field(r.lang);
    for (double s : r.scores) {
      out += ',';
      append_double(out, s);
    }
    out += '\n';
  }
  return out;
}

}  // namespace lir::io
