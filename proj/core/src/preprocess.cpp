#include "cbd/preprocess.hpp"

#include "cbd/error.hpp"
#include "cbd/hash.hpp"
#include "cbd/text_encoding.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cbd {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Decode one UTF-8 sequence at text[i]. Returns its byte length and writes the
// code point; invalid sequences decode as a single byte (code point 0xFFFD).
std::size_t decode_utf8(std::string_view text, std::size_t i, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        cp = 0xFFFD;
        return 1;
    }
    if (i + len > text.size()) {
        cp = 0xFFFD;
        return 1;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) {
            cp = 0xFFFD;
            return 1;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    return len;
}

bool is_url(std::string_view tok) {
    return tok.starts_with("http://") || tok.starts_with("https://") || tok.starts_with("www.");
}

void check_rule(const LemmaRule& r, std::string_view where) {
    if (r.suffix.empty()) throw DataError(std::string(where) + "lemma rule with empty suffix");
    if (r.min_stem_length < 2) throw DataError(std::string(where) + "lemma rule min_stem_length must be >= 2");
    if (r.replacement.size() > r.suffix.size() + 1)
        throw DataError(std::string(where) + "lemma rule -" + r.suffix + " lengthens tokens by more than one");
}

void check_exception(const std::string& token, const std::string& lemma, std::string_view where) {
    if (token.empty() || lemma.empty()) throw DataError(std::string(where) + "empty lemma exception");
    if (lemma.size() > token.size() + 1)
        throw DataError(std::string(where) + "lemma for '" + token + "' is too long");
}

Lemmatizer build_defaults() {
    std::vector<LemmaRule> rules = {
        {"sses", "ss", 2, false},
        {"ss", "ss", 2, false},
        {"ies", "y", 2, false},
        {"ied", "y", 2, false},
        {"xes", "x", 2, false},
        {"ches", "ch", 2, false},
        {"shes", "sh", 2, false},
        {"zzes", "zz", 2, false},
        {"ous", "ous", 2, false},
        {"us", "us", 2, false},
        {"is", "is", 2, false},
        {"s", "", 3, false},
        {"ing", "", 3, true},
        {"ed", "", 3, true},
    };
    std::map<std::string, std::string, std::less<>> exceptions = {
        {"cried", "cry"},     {"cries", "cry"},         {"crying", "cry"},   {"ass", "ass"},
        {"does", "do"},       {"goes", "go"},           {"was", "be"},       {"were", "be"},
        {"is", "be"},         {"are", "be"},            {"am", "be"},        {"been", "be"},
        {"being", "be"},      {"has", "have"},          {"had", "have"},     {"having", "have"},
        {"did", "do"},        {"doing", "do"},          {"said", "say"},     {"made", "make"},
        {"went", "go"},       {"gone", "go"},           {"men", "man"},      {"women", "woman"},
        {"children", "child"}, {"people", "people"},    {"thing", "thing"},  {"things", "thing"},
        {"nothing", "nothing"}, {"something", "something"}, {"anything", "anything"},
        {"everything", "everything"}, {"morning", "morning"}, {"evening", "evening"},
        {"king", "king"},     {"during", "during"},     {"string", "string"}, {"spring", "spring"},
        {"ceiling", "ceiling"}, {"hated", "hate"},      {"hates", "hate"},   {"hating", "hate"},
        {"loved", "love"},    {"loving", "love"},       {"liked", "like"},   {"liking", "like"},
        {"used", "use"},      {"using", "use"},         {"making", "make"},  {"taking", "take"},
        {"coming", "come"},   {"giving", "give"},       {"living", "live"},  {"bus", "bus"},
        {"gas", "gas"},       {"yes", "yes"},           {"news", "news"},    {"always", "always"},
        {"perhaps", "perhaps"}, {"series", "series"},   {"species", "species"}, {"need", "need"},
        {"feed", "feed"},     {"indeed", "indeed"},     {"hundred", "hundred"}, {"sacred", "sacred"},
        {"naked", "naked"},   {"wicked", "wicked"},
    };
    return Lemmatizer(std::move(rules), std::move(exceptions));
}

}  // namespace

Lemmatizer::Lemmatizer(std::vector<LemmaRule> rules, std::map<std::string, std::string, std::less<>> exceptions)
    : rules_(std::move(rules)), exceptions_(std::move(exceptions)) {
    for (const auto& r : rules_) check_rule(r, "");
    for (const auto& [t, l] : exceptions_) check_exception(t, l, "");
}

const Lemmatizer& Lemmatizer::defaults() {
    static const Lemmatizer instance = build_defaults();
    return instance;
}

std::string Lemmatizer::lemmatize(std::string_view token) const {
    return lemmatize_token(token, rules_, exceptions_);
}

std::uint64_t Lemmatizer::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& r : rules_) {
        h = fnv1a("-" + r.suffix + "\t" + r.replacement + "\t" + std::to_string(r.min_stem_length) +
                      (r.undouble_consonant ? "\tundouble\n" : "\n"),
                  h);
    }
    for (const auto& [t, l] : exceptions_) h = fnv1a(t + "\t" + l + "\n", h);
    return h;
}

std::string lemmatize_token(std::string_view token, const std::vector<LemmaRule>& rules,
                            const std::map<std::string, std::string, std::less<>>& exceptions) {
    if (auto it = exceptions.find(token); it != exceptions.end()) return it->second;
    for (const auto& r : rules) {
        if (!token.ends_with(r.suffix)) continue;
        std::string stem(token.substr(0, token.size() - r.suffix.size()));
        if (stem.size() < r.min_stem_length) continue;
        if (r.undouble_consonant && stem.size() >= 3) {
            const char a = stem[stem.size() - 2];
            const char b = stem.back();
            if (a == b && is_ascii_alpha(b) && !is_vowel(b) && b != 'l' && b != 's' && b != 'z') stem.pop_back();
        }
        return stem + r.replacement;
    }
    return std::string(token);
}

Lemmatizer parse_lemma_rules(std::string_view text, std::string_view source) {
    std::vector<LemmaRule> rules;
    std::map<std::string, std::string, std::less<>> exceptions;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') continue;

        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            fields.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields[0].starts_with('-')) {
            if (fields.size() < 3 || fields.size() > 4) throw DataError(where + "malformed lemma rule");
            LemmaRule r;
            r.suffix = fields[0].substr(1);
            r.replacement = fields[1];
            try {
                std::size_t used = 0;
                r.min_stem_length = std::stoul(fields[2], &used);
                if (used != fields[2].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw DataError(where + "min_stem must be an integer");
            }
            if (fields.size() == 4) {
                if (fields[3] != "undouble") throw DataError(where + "unknown rule flag '" + fields[3] + "'");
                r.undouble_consonant = true;
            }
            check_rule(r, where);
            rules.push_back(std::move(r));
        } else {
            if (fields.size() != 2) throw DataError(where + "malformed lemma exception, expected token<TAB>lemma");
            check_exception(fields[0], fields[1], where);
            if (!exceptions.emplace(fields[0], fields[1]).second)
                throw DataError(where + "duplicate lemma exception '" + fields[0] + "'");
        }
    }
    return Lemmatizer(std::move(rules), std::move(exceptions));
}

Lemmatizer load_lemma_rules(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open lemma rule file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lemma_rules(buf.str(), path.string());
}

void PreprocessConfig::validate() const {
    if (use_slang && (!lexicon || lexicon->empty()))
        throw ConfigError("slang expansion enabled but no lexicon loaded");
}

std::string normalize(std::string_view text, const PreprocessConfig& config) {
    // Pass 1: lowercase ASCII, blank out emoji.
    std::string buf;
    buf.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        char32_t cp = 0;
        const std::size_t len = decode_utf8(text, i, cp);
        if (config.strip_emojis && is_emoji_codepoint(cp)) {
            buf.push_back(' ');
        } else if (len == 1) {
            const char c = text[i];
            buf.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + ('a' - 'A')) : c);
        } else {
            buf.append(text.substr(i, len));
        }
        i += len;
    }

    // Pass 2: per whitespace token, strip '#', drop URLs and mentions, rejoin.
    std::string out;
    out.reserve(buf.size());
    std::size_t i = 0;
    while (i < buf.size()) {
        if (is_space(buf[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < buf.size() && !is_space(buf[j])) ++j;
        std::string tok = buf.substr(i, j - i);
        i = j;
        std::erase(tok, '#');
        if (tok.empty()) continue;
        if (config.strip_urls && is_url(tok)) continue;
        if (config.strip_mentions && tok.front() == '@') continue;
        if (!out.empty()) out.push_back(' ');
        out.append(tok);
    }
    return out;
}

std::string preprocess_text(std::string_view text, const PreprocessConfig& config) {
    config.validate();
    std::string normalized = normalize(text, config);
    if (config.use_slang) normalized = expand_slang(normalized, *config.lexicon);

    const Lemmatizer& lemmatizer = config.lemmatizer ? *config.lemmatizer : Lemmatizer::defaults();
    std::string out;
    for (const auto& tok : tokenize(normalized)) {
        if (!out.empty()) out.push_back(' ');
        const bool lemmatizable = std::any_of(tok.begin(), tok.end(), is_ascii_alpha) &&
                                  tok.find('*') == std::string::npos && is_word_char(tok.front());
        out.append(lemmatizable ? lemmatizer.lemmatize(tok) : tok);
    }
    return out;
}

}  // namespace cbd
