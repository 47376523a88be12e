#pragma once

#include "cbd/slang_lexicon.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cbd {

/// Suffix rewrite: token = stem + suffix  ->  stem' + replacement, applied only
/// when stem.size() >= min_stem_length. With undouble_consonant, a stem ending
/// in a doubled consonant (other than l, s, z) loses one copy: running -> run.
struct LemmaRule {
    std::string suffix;
    std::string replacement;
    std::size_t min_stem_length = 2;
    bool undouble_consonant = false;
};

/// Rule-based lemmatizer: the exception table wins, then the first rule whose
/// suffix and stem-length constraint match. Never returns an empty string and
/// never grows a token by more than one character.
class Lemmatizer {
public:
    /// Throws DataError if a rule or exception breaks the invariants above.
    Lemmatizer(std::vector<LemmaRule> rules, std::map<std::string, std::string, std::less<>> exceptions);

    /// Compiled-in default table (also shipped as data/lemma_rules.tsv).
    static const Lemmatizer& defaults();

    std::string lemmatize(std::string_view token) const;

    const std::vector<LemmaRule>& rules() const noexcept { return rules_; }
    const std::map<std::string, std::string, std::less<>>& exceptions() const noexcept { return exceptions_; }

    std::uint64_t fingerprint() const;

private:
    std::vector<LemmaRule> rules_;
    std::map<std::string, std::string, std::less<>> exceptions_;
};

std::string lemmatize_token(std::string_view token, const std::vector<LemmaRule>& rules,
                            const std::map<std::string, std::string, std::less<>>& exceptions);

/// Lemma table file. Same TAB layout as the slang lexicon:
///   -suffix<TAB>replacement<TAB>min_stem[<TAB>undouble]   rule (leading '-')
///   token<TAB>lemma                                       exception
/// Rules keep file order. The replacement field may be empty.
Lemmatizer parse_lemma_rules(std::string_view text, std::string_view source = "<memory>");
Lemmatizer load_lemma_rules(const std::filesystem::path& path);

struct PreprocessConfig {
    bool use_slang = true;
    std::shared_ptr<const SlangLexicon> lexicon;
    std::shared_ptr<const Lemmatizer> lemmatizer;  // null -> Lemmatizer::defaults()
    bool strip_urls = true;
    bool strip_emojis = true;
    bool strip_mentions = true;

    /// Throws ConfigError when use_slang is set without a nonempty lexicon.
    void validate() const;
};

/// True for U+1F300-U+1FAFF, U+2600-U+27BF, U+FE0F and U+200D.
constexpr bool is_emoji_codepoint(char32_t cp) noexcept {
    return (cp >= 0x1F300 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || cp == 0xFE0F || cp == 0x200D;
}

/// Lowercase (ASCII), replace emoji with spaces, drop URL and @-mention
/// tokens, strip '#', collapse whitespace, trim. Idempotent.
std::string normalize(std::string_view text, const PreprocessConfig& config);

/// normalize -> expand_slang (iff use_slang) -> tokenize -> lemmatize word
/// tokens; tokens are joined by single spaces.
std::string preprocess_text(std::string_view text, const PreprocessConfig& config);

}  // namespace cbd
