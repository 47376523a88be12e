#pragma once

#include "cbd/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>

namespace cbd {

/*
 * Checkpoint layout (all integers and floats little-endian):
 *
 *   8   magic "CBDLSTM\0"
 *   u32 format version (kCheckpointVersion)
 *   u32 dim, u32 hidden, u32 max_len, u64 vocab_size
 *   f64 dropout_embed, f64 dropout_output
 *   u8  embedding_trainable
 *   u64 vocabulary hash (Vocabulary::hash)
 *   u64 n, then n bytes of UTF-8 JSON (resolved run configuration)
 *   u32 tensor count, then per tensor in ParameterSet::tensors() order:
 *       u32 rows, u32 cols, rows*cols f64 in row-major order
 *   u64 FNV-1a of every preceding byte
 */
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    BiLSTMModel model;
    std::uint64_t vocab_hash = 0;
    nlohmann::json config = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws DataError on a missing file, bad magic/version, truncation or a
/// checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

}  // namespace cbd
