#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbd {

struct SlangEntry {
    std::string term;       // lowercase single token
    std::string expansion;  // literal replacement, inserted verbatim
};

/// Slang term -> literal expansion map. Immutable once constructed; every
/// constructor path validates the entry invariants.
class SlangLexicon {
public:
    SlangLexicon() = default;

    /// Throws DataError on an invalid entry or duplicate term.
    explicit SlangLexicon(std::vector<SlangEntry> entries, std::string source_path = {});

    const std::vector<SlangEntry>& entries() const noexcept { return entries_; }
    const std::string& source_path() const noexcept { return source_path_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Expansion for a lowercase token, or nullptr.
    const std::string* find(std::string_view token) const;

    /// FNV-1a over "term\texpansion\n" for every entry, in file order.
    std::uint64_t fingerprint() const;

private:
    std::vector<SlangEntry> entries_;
    std::string source_path_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Parse the lexicon format: `term<TAB>expansion` per line, `#` comments and
/// blank lines ignored. Terms are lowercased. Errors carry the line number.
SlangLexicon parse_lexicon(std::string_view text, std::string source_path = "<memory>");
SlangLexicon load_lexicon(const std::filesystem::path& path);

/// Replace every whitespace-delimited token whose core (the token with
/// leading/trailing punctuation removed) equals a lexicon term. Punctuation
/// around the core is kept in place. Expansions are not rescanned.
std::string expand_slang(std::string_view text, const SlangLexicon& lexicon);

/// True for the characters the tokenizer treats as part of a word:
/// ASCII alphanumerics, '*', '\'' and any byte of a multi-byte UTF-8 sequence.
constexpr bool is_word_char(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u == '*' ||
           u == '\'' || u >= 0x80;
}

/// Token with leading/trailing non-word characters removed.
std::string_view token_core(std::string_view token) noexcept;

}  // namespace cbd
