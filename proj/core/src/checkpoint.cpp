#include "cbd/checkpoint.hpp"

#include "cbd/error.hpp"
#include "cbd/hash.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cbd {
namespace {

constexpr char kMagic[8] = {'C', 'B', 'D', 'L', 'S', 'T', 'M', '\0'};

class Writer {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        buf_.append(reinterpret_cast<const char*>(raw), sizeof(T));
    }
    void bytes(std::string_view s) { buf_.append(s); }
    std::string& str() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw DataError("checkpoint is truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const BiLSTMModel& m = ck.model;
    Writer w;
    w.bytes(std::string_view(kMagic, sizeof(kMagic)));
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.config.dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.config.hidden));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.config.max_len));
    w.put<std::uint64_t>(m.vocab_size());
    w.put<double>(m.config.dropout_embed);
    w.put<double>(m.config.dropout_output);
    w.put<std::uint8_t>(m.embedding_trainable ? 1 : 0);
    w.put<std::uint64_t>(ck.vocab_hash);
    const std::string json = ck.config.dump();
    w.put<std::uint64_t>(json.size());
    w.bytes(json);

    auto params = m.params;  // tensors() needs mutable access
    const auto tensors = params.tensors();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rows));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.cols));
        for (Eigen::Index r = 0; r < t.rows; ++r)
            for (Eigen::Index c = 0; c < t.cols; ++c) w.put<double>(t.data[c * t.rows + r]);
    }
    w.put<std::uint64_t>(fnv1a(w.str()));
    return std::move(w.str());
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file (bad magic)");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    {
        Reader tail(bytes.substr(bytes.size() - 8));
        if (tail.get<std::uint64_t>() != fnv1a(body)) throw DataError("checkpoint checksum mismatch");
    }
    Reader r(body);
    r.bytes(sizeof(kMagic));
    if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(v));

    Checkpoint ck;
    ModelConfig& cfg = ck.model.config;
    cfg.dim = r.get<std::uint32_t>();
    cfg.hidden = r.get<std::uint32_t>();
    cfg.max_len = r.get<std::uint32_t>();
    const auto vocab = r.get<std::uint64_t>();
    cfg.dropout_embed = r.get<double>();
    cfg.dropout_output = r.get<double>();
    ck.model.embedding_trainable = r.get<std::uint8_t>() != 0;
    ck.vocab_hash = r.get<std::uint64_t>();
    const auto json_len = r.get<std::uint64_t>();
    try {
        ck.config = nlohmann::json::parse(r.bytes(json_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint config block is not valid JSON: ") + e.what());
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint header: ") + e.what());
    }

    ck.model.params = ParameterSet::zeros(vocab, cfg.dim, cfg.hidden);
    auto tensors = ck.model.params.tensors();
    if (r.get<std::uint32_t>() != tensors.size()) throw DataError("checkpoint tensor count mismatch");
    for (auto& t : tensors) {
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        if (rows != t.rows || cols != t.cols) throw DataError("checkpoint tensor " + t.name + " has the wrong shape");
        for (Eigen::Index i = 0; i < t.rows; ++i)
            for (Eigen::Index j = 0; j < t.cols; ++j) t.data[j * t.rows + i] = r.get<double>();
    }
    if (r.position() != body.size()) throw DataError("trailing bytes in checkpoint");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const std::string bytes = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_checkpoint(buf.str());
}

}  // namespace cbd
