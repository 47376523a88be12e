#pragma once

#include "cbd/text_encoding.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbd {

inline constexpr std::size_t kGloveDim = 100;
inline constexpr double kEmbeddingInitRange = 0.05;

struct GloveTable {
    std::unordered_map<std::string, std::vector<double>> vectors;
    std::size_t dim = 0;
    std::size_t skipped_lines = 0;  // wrong arity or unparsable numbers
    std::size_t duplicate_tokens = 0;  // later duplicates are ignored
};

/// Read the GloVe text format (`token v1 ... v_dim` per line). Malformed lines
/// are skipped and counted; throws DataError when the file is missing or
/// yields no vectors.
GloveTable load_glove(const std::filesystem::path& path, std::size_t dim = kGloveDim);

struct EmbeddingMatrix {
    Eigen::MatrixXd rows;  // vocab_size x dim; row 0 is PAD and always zero
    bool trainable = true;
    std::size_t oov_initialized = 0;  // rows drawn at random (OOV row included)
    double hit_rate = 0.0;            // pretrained rows / (vocab_size - 2)

    std::size_t vocab_size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(rows.cols()); }
};

/// Rows 1..V-1 are copied from glove when present; the remaining rows are
/// drawn, in increasing row order, uniformly from [-0.05, 0.05) by an
/// Xorshift64Star seeded with derive_seed(seed, kEmbeddingStream).
EmbeddingMatrix build_matrix(const Vocabulary& vocab, const GloveTable* glove, std::size_t dim, std::uint64_t seed);

inline constexpr std::uint64_t kEmbeddingStream = 0xE111;

}  // namespace cbd
