#include "cbd/embeddings.hpp"

#include "cbd/error.hpp"
#include "cbd/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace cbd {

GloveTable load_glove(const std::filesystem::path& path, std::size_t dim) {
    if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open GloVe file " + path.string());

    GloveTable table;
    table.dim = dim;
    std::vector<double> values;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == 0 || sp == std::string::npos) {
            ++table.skipped_lines;
            continue;
        }
        values.clear();
        bool ok = true;
        const char* p = line.data() + sp;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            double v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{} || (next != end && *next != ' ') || !std::isfinite(v)) {
                ok = false;
                break;
            }
            values.push_back(v);
            p = next;
        }
        if (!ok || values.size() != dim) {
            ++table.skipped_lines;
            continue;
        }
        if (!table.vectors.try_emplace(line.substr(0, sp), values).second) ++table.duplicate_tokens;
    }
    if (table.vectors.empty()) throw DataError(path.string() + ": no embeddings loaded");
    return table;
}

EmbeddingMatrix build_matrix(const Vocabulary& vocab, const GloveTable* glove, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
    if (glove && glove->dim != dim) throw ConfigError("GloVe dimension does not match the requested dimension");

    const auto V = static_cast<Eigen::Index>(vocab.size());
    const auto D = static_cast<Eigen::Index>(dim);
    EmbeddingMatrix m;
    m.rows = Eigen::MatrixXd::Zero(V, D);
    Xorshift64Star rng(derive_seed(seed, kEmbeddingStream));
    std::size_t hits = 0;
    for (Eigen::Index r = 1; r < V; ++r) {
        const std::vector<double>* pre = nullptr;
        if (glove && r != kOovId) {
            auto it = glove->vectors.find(vocab.token(static_cast<TokenId>(r)));
            if (it != glove->vectors.end()) pre = &it->second;
        }
        if (pre) {
            for (Eigen::Index c = 0; c < D; ++c) m.rows(r, c) = (*pre)[static_cast<std::size_t>(c)];
            ++hits;
        } else {
            for (Eigen::Index c = 0; c < D; ++c) m.rows(r, c) = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
            ++m.oov_initialized;
        }
    }
    m.hit_rate = V > 2 ? static_cast<double>(hits) / static_cast<double>(V - 2) : 0.0;
    return m;
}

}  // namespace cbd
