#include "cbd/slang_lexicon.hpp"

#include "cbd/error.hpp"
#include "cbd/hash.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cbd {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + ('a' - 'A')) : static_cast<char>(c);
    });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

void validate(const SlangEntry& e, const std::string& where) {
    if (e.term.empty()) throw DataError(where + "empty term");
    if (std::any_of(e.term.begin(), e.term.end(), is_space))
        throw DataError(where + "term '" + e.term + "' contains whitespace");
    if (e.term != ascii_lower(e.term)) throw DataError(where + "term '" + e.term + "' is not lowercase");
    if (e.expansion.empty()) throw DataError(where + "empty expansion for term '" + e.term + "'");
    if (e.expansion == e.term) throw DataError(where + "expansion equals term '" + e.term + "'");
}

}  // namespace

SlangLexicon::SlangLexicon(std::vector<SlangEntry> entries, std::string source_path)
    : entries_(std::move(entries)), source_path_(std::move(source_path)) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        validate(entries_[i], "");
        if (!index_.emplace(entries_[i].term, i).second)
            throw DataError("duplicate term '" + entries_[i].term + "'");
    }
}

const std::string* SlangLexicon::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? nullptr : &entries_[it->second].expansion;
}

std::uint64_t SlangLexicon::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& e : entries_) {
        h = fnv1a(e.term, h);
        h = fnv1a("\t", h);
        h = fnv1a(e.expansion, h);
        h = fnv1a("\n", h);
    }
    return h;
}

SlangLexicon parse_lexicon(std::string_view text, std::string source_path) {
    std::vector<SlangEntry> entries;
    std::unordered_map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (trim(line).empty() || trim(line).front() == '#') continue;

        const std::string where = source_path + ":" + std::to_string(line_no) + ": ";
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw DataError(where + "malformed line, expected term<TAB>expansion");
        SlangEntry e{ascii_lower(trim(line.substr(0, tab))), std::string(trim(line.substr(tab + 1)))};
        validate(e, where);
        if (auto [it, fresh] = seen.emplace(e.term, line_no); !fresh) {
            throw DataError(where + "duplicate term '" + e.term + "' (first on line " +
                            std::to_string(it->second) + ")");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw DataError(source_path + ": empty lexicon");
    return SlangLexicon(std::move(entries), std::move(source_path));
}

SlangLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open lexicon file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str(), path.string());
}

std::string_view token_core(std::string_view token) noexcept {
    while (!token.empty() && !is_word_char(token.front())) token.remove_prefix(1);
    while (!token.empty() && !is_word_char(token.back())) token.remove_suffix(1);
    return token;
}

std::string expand_slang(std::string_view text, const SlangLexicon& lexicon) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        const std::string_view token = text.substr(i, j - i);
        const std::string_view core = token_core(token);
        const std::string* expansion = core.empty() ? nullptr : lexicon.find(ascii_lower(core));
        if (expansion) {
            const auto lead = static_cast<std::size_t>(core.data() - token.data());
            out.append(token.substr(0, lead));
            out.append(*expansion);
            out.append(token.substr(lead + core.size()));
        } else {
            out.append(token);
        }
        i = j;
    }
    return out;
}

}  // namespace cbd
