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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lir/core.hpp"
#include "lir/eval.hpp"

namespace lir::io {

namespace fs = std::filesystem;

inline constexpr std::uint8_t kFormatVersion = 1;

// Binary layout shared by both formats:
//   4-byte magic | 1-byte version | u32 LE header length | UTF-8 JSON header
// LIRE payload: per record, u16 LE id length, id bytes, dim × f32 LE.
// LIRC payload: dim × rank f32 LE, column-major.
// All values are stored as f32 and widened to f64 on load.

/// One language per file. Throws InvalidData for mixed languages, plus
/// validate_collection errors; IoError when the file cannot be written.
void write_embeddings(const fs::path& path, std::span<const EmbeddingRecord> records);
std::vector<std::uint8_t> encode_embeddings(std::span<const EmbeddingRecord> records);

/// Throws FormatError (bad magic, version, header, count mismatch),
/// TruncatedFile, or IoError.
std::vector<EmbeddingRecord> read_embeddings(const fs::path& path);
std::vector<EmbeddingRecord> decode_embeddings(std::span<const std::uint8_t> bytes);

/// A .lire file, or every .lire file of a directory in name order. Files
/// ending in .jsonl go through read_jsonl_embeddings instead.
std::vector<EmbeddingRecord> read_embedding_source(const fs::path& path);
/// Sorted .lire/.jsonl files of a directory, or the path itself for a file.
std::vector<fs::path> embedding_files(const fs::path& path);

void write_components(const fs::path& path, const ComponentBasis& basis,
                      const std::optional<std::string>& mode_hint = std::nullopt);
std::vector<std::uint8_t> encode_components(const ComponentBasis& basis,
                                            const std::optional<std::string>& mode_hint = std::nullopt);

/// Orthonormality slack expected from f32 storage.
inline constexpr double kF32OrthonormalitySlack = 1e-4;
/// Beyond this max |BᵀB − I| a stored basis is rejected as CorruptBasis.
inline constexpr double kCorruptBasisThreshold = 1e-2;

struct LoadedComponents {
  ComponentBasis basis;
  std::optional<std::string> mode_hint;
  /// max |BᵀB − I| of the stored (f32) basis, before repair.
  double stored_orthonormality_error = 0.0;
};

/// Loads a basis and re-orthonormalizes it in f64 (modified Gram–Schmidt,
/// two passes). Throws CorruptBasis past kCorruptBasisThreshold.
LoadedComponents read_components(const fs::path& path);
LoadedComponents decode_components(std::span<const std::uint8_t> bytes);

/// Every .lirc file in a directory, keyed by language. Throws DuplicateKey
/// when two files carry the same language.
BasisMap read_component_dir(const fs::path& dir);

/// Lines {"id","lang","vec"}. Blank lines are skipped. Throws ParseError,
/// DimensionError, DuplicateKey and InvalidData, each carrying the line number.
std::vector<EmbeddingRecord> read_jsonl_embeddings(const fs::path& path);
/// Lines {"query_id","relevant":[...]}.
std::map<std::string, std::set<std::string>> read_qrels(const fs::path& path);
/// Lines {"id","label"} with label 0 or 1.
std::map<std::string, int> read_labels(const fs::path& path);

void write_qrels(const fs::path& path, const std::map<std::string, std::set<std::string>>& qrels);
void write_labels(const fs::path& path, const std::map<std::string, int>& labels);

/// Pretty-printed JSON, keys sorted, trailing newline.
std::string eval_report_json(const EvalReport& report);
std::string transfer_report_json(const eval::TransferReport& report);

/// Header `id,lang,score_1,…,score_k`; shortest round-trip decimals; LF.
std::string projection_csv(std::span<const eval::ProjectionRow> rows);

/// Writes bytes to path, replacing it. Throws IoError.
void write_file(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_file(const fs::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const fs::path& path);

}  // namespace lir::io
