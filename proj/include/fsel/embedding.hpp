#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fsel/core.hpp"

namespace fsel {

/// One instance embedding per row. `ids` is either empty or holds one
/// distinct identifier per row.
struct EmbeddingMatrix {
  Matrix data;
  std::vector<std::string> ids;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
  bool has_ids() const { return !ids.empty(); }
};

/// Throws std::invalid_argument if the matrix violates its invariants
/// (empty shape, non-finite entries, id count/duplicates).
void validate(const EmbeddingMatrix& m);

/// Static word vectors, all of dimension `dim`.
struct WordVectorTable {
  std::unordered_map<std::string, Vector> vocab;
  Index dim = 0;
};

enum class PoolingMode { kMean, kSum };

enum class MatrixFormat { kBinary, kText };

// On-disk matrix layouts
// ----------------------
// Binary: magic "FSEL", version byte 0x01, uint32-LE n, uint32-LE d, then
// n*d float32-LE values row-major, then an id block: one flag byte (0 or 1)
// and, if 1, n strings each stored as uint32-LE byte length + UTF-8 bytes.
// Text: first line "n d", then n lines of an optional id followed by d
// decimal values, space-separated.

EmbeddingMatrix load_matrix(const std::filesystem::path& path,
                            MatrixFormat format);

void write_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path,
                  MatrixFormat format = MatrixFormat::kBinary);

/// Sniffs the binary magic; anything else is treated as text.
MatrixFormat detect_matrix_format(const std::filesystem::path& path);

/// Word-vector text layout: first line "V d", then V lines "token v1 .. vd".
WordVectorTable load_word_vectors(const std::filesystem::path& path);

/// Lowercases ASCII letters, splits on Unicode whitespace, strips leading and
/// trailing ASCII punctuation from each token, and drops empty tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Pools the word vectors of each instance's in-vocabulary tokens. OOV tokens
/// are skipped; an instance whose tokens are all OOV (or that has no tokens)
/// is an error, never a silent zero vector.
EmbeddingMatrix embed_instances(const std::vector<std::string>& texts,
                                const WordVectorTable& table,
                                PoolingMode mode);

/// Scales each row to unit Euclidean norm. A row of exactly zero norm is an
/// error.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

}  // namespace fsel
