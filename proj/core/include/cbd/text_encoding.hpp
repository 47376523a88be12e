#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbd {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kOovId = 1;

/// Split on whitespace; inside a chunk, maximal runs of word characters
/// (see is_word_char) and maximal runs of other characters become separate
/// tokens. "you m*****f*****r !!" -> {"you", "m*****f*****r", "!!"}.
std::vector<std::string> tokenize(std::string_view text);

/// Frequency-ranked token index. Ids 0 and 1 are PAD and OOV; ids >= 2 are
/// assigned by descending corpus count, ties by first occurrence.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Build from an already ranked token list (ids 2, 3, ... in order).
    Vocabulary(std::vector<std::string> ranked_tokens, std::size_t max_size, std::size_t max_len);

    TokenId id(std::string_view token) const;
    /// "<pad>" and "<oov>" for the reserved ids.
    const std::string& token(TokenId id) const;

    /// Number of ids including PAD and OOV.
    std::size_t size() const noexcept { return tokens_.size() + 2; }
    std::size_t max_size() const noexcept { return max_size_; }
    std::size_t max_len() const noexcept { return max_len_; }
    /// Ranked tokens, id = index + 2.
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    /// FNV-1a of the token list; recorded in checkpoints.
    std::uint64_t hash() const;

    /// Header `#vocab max_len=<n> max_size=<n>`, then one token per line:
    /// the token on 0-based line k after the header has id k + 2.
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    std::size_t max_size_ = 0;
    std::size_t max_len_ = 0;
};

inline constexpr std::size_t kDefaultMaxLen = 64;
inline constexpr std::size_t kDefaultMaxVocab = 20000;

/// Throws ConfigError if max_size < 3, DataError on an empty corpus.
Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t max_size,
                       std::size_t max_len = kDefaultMaxLen);

struct EncodedSample {
    std::vector<TokenId> ids;      // exactly max_len, PAD-filled on the right
    std::size_t true_length = 0;   // tokens kept, <= max_len
    int label = 0;                 // 1 = cyberbullying
};

/// Map tokens to ids (OOV for unknown), keep the first max_len, pad with PAD.
EncodedSample encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len,
                     int label = 0);

}  // namespace cbd
