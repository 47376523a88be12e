#include "cbd/text_encoding.hpp"

#include "cbd/error.hpp"
#include "cbd/hash.hpp"
#include "cbd/slang_lexicon.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace cbd {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

const std::string kPadToken = "<pad>";
const std::string kOovToken = "<oov>";

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        const bool word = is_word_char(text[i]);
        std::size_t j = i + 1;
        while (j < text.size() && !is_space(text[j]) && is_word_char(text[j]) == word) ++j;
        out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> ranked_tokens, std::size_t max_size, std::size_t max_len)
    : tokens_(std::move(ranked_tokens)), max_size_(max_size), max_len_(max_len) {
    if (max_size_ < 3) throw ConfigError("vocabulary max_size must be >= 3");
    if (tokens_.size() + 2 > max_size_) throw DataError("vocabulary larger than its max_size");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].empty() || std::any_of(tokens_[i].begin(), tokens_[i].end(), is_space))
            throw DataError("invalid vocabulary token at id " + std::to_string(i + 2));
        if (!index_.emplace(tokens_[i], static_cast<TokenId>(i + 2)).second)
            throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
}

TokenId Vocabulary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kOovId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id == kPadId) return kPadToken;
    if (id < 0 || static_cast<std::size_t>(id) >= size()) return kOovToken;
    if (id == kOovId) return kOovToken;
    return tokens_[static_cast<std::size_t>(id) - 2];
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& t : tokens_) {
        h = fnv1a(t, h);
        h = fnv1a("\n", h);
    }
    return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file " + path.string());
    out << "#vocab max_len=" << max_len_ << " max_size=" << max_size_ << '\n';
    for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file " + path.string());
    std::string header;
    std::getline(in, header);
    std::size_t max_len = 0;
    std::size_t max_size = 0;
    if (std::sscanf(header.c_str(), "#vocab max_len=%zu max_size=%zu", &max_len, &max_size) != 2)
        throw DataError(path.string() + ": missing or malformed vocabulary header");
    std::vector<std::string> tokens;
    for (std::string line; std::getline(in, line);) tokens.push_back(std::move(line));
    return Vocabulary(std::move(tokens), max_size, max_len);
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t max_size, std::size_t max_len) {
    if (max_size < 3) throw ConfigError("vocabulary max_size must be >= 3");
    struct Stat {
        std::size_t count = 0;
        std::size_t first = 0;
    };
    std::unordered_map<std::string, Stat> stats;
    std::vector<std::string> order;
    for (const auto& doc : corpus) {
        for (const auto& tok : doc) {
            auto [it, fresh] = stats.try_emplace(tok, Stat{0, order.size()});
            if (fresh) order.push_back(tok);
            ++it->second.count;
        }
    }
    if (order.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

    std::vector<std::size_t> rank(order.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return stats[order[a]].count > stats[order[b]].count;
    });
    const std::size_t keep = std::min(order.size(), max_size - 2);
    std::vector<std::string> ranked;
    ranked.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) ranked.push_back(order[rank[i]]);
    return Vocabulary(std::move(ranked), max_size, max_len);
}

EncodedSample encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len, int label) {
    EncodedSample s;
    s.ids.assign(max_len, kPadId);
    s.true_length = std::min(tokens.size(), max_len);
    s.label = label;
    for (std::size_t i = 0; i < s.true_length; ++i) s.ids[i] = vocab.id(tokens[i]);
    return s;
}

}  // namespace cbd
