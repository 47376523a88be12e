#include "cbd/datasets.hpp"

#include "cbd/csv.hpp"
#include "cbd/error.hpp"
#include "cbd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace cbd {
namespace {

std::string lower_trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

using LabelMapper = std::function<Label(std::string_view)>;

std::vector<LabeledSample> load_source(const std::filesystem::path& path, Source source, const SchemaMap& schema,
                                       std::string_view label_column, const LabelMapper& mapper) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty()) throw DataError(path.string() + ": empty CSV file");
    const auto where = [&](std::size_t r) { return path.string() + ":" + std::to_string(table.lines[r]) + ": "; };

    std::size_t id_col = 0, text_col = 0, label_col = 0;
    try {
        id_col = table.column(schema.column(source, "id"));
        text_col = table.column(schema.column(source, "text"));
        label_col = table.column(schema.column(source, label_column));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }

    std::vector<LabeledSample> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        LabeledSample s;
        s.id = row[id_col];
        s.source = source;
        s.text = row[text_col];
        s.raw_label = lower_trim(row[label_col]);
        if (s.id.empty()) throw DataError(where(r) + "empty id");
        try {
            s.label = mapper(s.raw_label);
        } catch (const DataError& e) {
            throw DataError(where(r) + e.what());
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string read_text(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + std::string(what) + " " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string_view to_string(Source s) noexcept {
    switch (s) {
        case Source::Waseem: return "WASEEM";
        case Source::Encase: return "ENCASE";
        case Source::Formspring: return "FORMSPRING";
        case Source::Synthetic: return "SYNTHETIC";
    }
    return "SYNTHETIC";
}

std::string_view to_string(Label l) noexcept { return l == Label::Cyberbullying ? "CYBERBULLYING" : "NORMAL"; }

Source parse_source(std::string_view s) {
    const std::string v = lower_trim(s);
    if (v == "waseem") return Source::Waseem;
    if (v == "encase") return Source::Encase;
    if (v == "formspring") return Source::Formspring;
    if (v == "synthetic") return Source::Synthetic;
    throw DataError("unknown source '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
    const std::string v = lower_trim(s);
    if (v == "cyberbullying") return Label::Cyberbullying;
    if (v == "normal") return Label::Normal;
    throw DataError("unknown label '" + std::string(s) + "'");
}

SchemaMap SchemaMap::parse(std::string_view text) {
    SchemaMap map;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const std::string trimmed = lower_trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("schema map line " + std::to_string(line_no) + ": expected key=value");
        std::string key = lower_trim(line.substr(0, eq));
        std::string value(line.substr(eq + 1));
        while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
        while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front()))) value.erase(value.begin());
        if (key.empty() || value.empty()) throw DataError("schema map line " + std::to_string(line_no) + ": empty key or value");
        map.renames_[key] = value;
    }
    return map;
}

SchemaMap SchemaMap::load(const std::filesystem::path& path) { return parse(read_text(path, "schema map")); }

std::string SchemaMap::column(Source source, std::string_view canonical) const {
    std::string qualified = lower_trim(to_string(source));
    qualified += '.';
    qualified += canonical;
    if (auto it = renames_.find(qualified); it != renames_.end()) return it->second;
    if (auto it = renames_.find(canonical); it != renames_.end()) return it->second;
    return std::string(canonical);
}

Label map_waseem_label(std::string_view raw) {
    const std::string v = lower_trim(raw);
    if (v == "sexism" || v == "racism") return Label::Cyberbullying;
    if (v == "neither" || v == "none") return Label::Normal;
    throw DataError("unknown label '" + v + "' for WASEEM");
}

Label map_encase_label(std::string_view raw) {
    const std::string v = lower_trim(raw);
    if (v == "abusive" || v == "hateful" || v == "hate") return Label::Cyberbullying;
    if (v == "normal" || v == "spam") return Label::Normal;
    throw DataError("unknown label '" + v + "' for ENCASE");
}

Label map_formspring_severity(std::string_view raw, int threshold) {
    const std::string v = lower_trim(raw);
    int severity = 0;
    std::size_t used = 0;
    try {
        severity = std::stoi(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size()) throw DataError("FORMSPRING severity '" + v + "' is not an integer");
    if (severity < 0 || severity > 10) throw DataError("FORMSPRING severity " + v + " outside 0-10");
    return severity >= threshold ? Label::Cyberbullying : Label::Normal;
}

std::vector<LabeledSample> load_waseem(const std::filesystem::path& path, const SchemaMap& schema) {
    return load_source(path, Source::Waseem, schema, "label", map_waseem_label);
}

std::vector<LabeledSample> load_encase(const std::filesystem::path& path, const SchemaMap& schema) {
    return load_source(path, Source::Encase, schema, "label", map_encase_label);
}

std::vector<LabeledSample> load_formspring(const std::filesystem::path& path, int threshold, const SchemaMap& schema) {
    if (threshold < 1 || threshold > 10) throw ConfigError("formspring threshold must be in 1..10");
    return load_source(path, Source::Formspring, schema, "severity",
                       [threshold](std::string_view raw) { return map_formspring_severity(raw, threshold); });
}

std::vector<LabeledSample> load_synthetic(const std::filesystem::path& path, const SchemaMap& schema) {
    return load_source(path, Source::Synthetic, schema, "label", [](std::string_view raw) {
        const std::string v = lower_trim(raw);
        if (v == "1" || v == "cyberbullying") return Label::Cyberbullying;
        if (v == "0" || v == "normal") return Label::Normal;
        throw DataError("unknown label '" + v + "' for SYNTHETIC");
    });
}

std::vector<LabeledSample> combine(std::span<const std::vector<LabeledSample>> datasets) {
    std::vector<LabeledSample> out;
    std::unordered_set<std::string> ids;
    for (const auto& ds : datasets) {
        for (const auto& s : ds) {
            LabeledSample c = s;
            c.id = lower_trim(to_string(s.source)) + ":" + s.id;
            if (!ids.insert(c.id).second) throw DataError("duplicate sample id '" + c.id + "'");
            out.push_back(std::move(c));
        }
    }
    return out;
}

DatasetStats compute_stats(std::span<const LabeledSample> samples) {
    DatasetStats stats;
    for (const auto& s : samples) {
        auto& per = stats.per_source[s.source];
        if (s.label == Label::Cyberbullying) {
            ++per.cyberbullying;
            ++stats.totals.cyberbullying;
        } else {
            ++per.normal;
            ++stats.totals.normal;
        }
    }
    return stats;
}

std::optional<ClassCounts> reference_counts(Source source) noexcept {
    switch (source) {
        case Source::Waseem: return ClassCounts{2031, 7752};
        case Source::Encase: return ClassCounts{20706, 36473};
        case Source::Formspring: return ClassCounts{1124, 11733};
        case Source::Synthetic: return std::nullopt;
    }
    return std::nullopt;
}

std::vector<StatsDeviation> compare_to_reference(const DatasetStats& stats) {
    std::vector<StatsDeviation> out;
    for (const auto& [source, observed] : stats.per_source) {
        const auto expected = reference_counts(source);
        if (expected && *expected != observed) out.push_back({source, *expected, observed});
    }
    return out;
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
}

Split split(std::span<const LabeledSample> samples, const SplitSpec& options) {
    options.validate();
    Xorshift64Star rng(derive_seed(options.seed, 0x5B1D));
    std::vector<char> in_train(samples.size(), 0);

    auto take = [&](std::vector<std::size_t> idx) {
        const std::size_t n = idx.size();
        auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * options.train_fraction));
        if (n >= 2) k = std::clamp<std::size_t>(k, 1, n - 1);
        portable_shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < k; ++i) in_train[idx[i]] = 1;
    };

    if (options.stratified) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < samples.size(); ++i)
            (samples[i].label == Label::Cyberbullying ? pos : neg).push_back(i);
        if (pos.size() < 2 || neg.size() < 2)
            throw DataError("too few samples to stratify: need >= 2 per class, have " + std::to_string(pos.size()) +
                            " cyberbullying and " + std::to_string(neg.size()) + " normal");
        take(std::move(pos));
        take(std::move(neg));
    } else {
        if (samples.size() < 2) throw DataError("need at least 2 samples to split");
        std::vector<std::size_t> all(samples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(std::move(all));
    }

    Split out;
    for (std::size_t i = 0; i < samples.size(); ++i) (in_train[i] ? out.train : out.test).push_back(samples[i]);
    return out;
}

void write_unified(const std::filesystem::path& path, std::span<const LabeledSample> samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset cache " + path.string());
    csv::write_row(out, {"id", "source", "text", "raw_label", "label"});
    for (const auto& s : samples)
        csv::write_row(out, {s.id, std::string(to_string(s.source)), s.text, s.raw_label, std::string(to_string(s.label))});
}

std::vector<LabeledSample> load_unified(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty()) throw DataError(path.string() + ": empty dataset cache");
    const std::size_t id = table.column("id"), source = table.column("source"), text = table.column("text"),
                      raw = table.column("raw_label"), label = table.column("label");
    std::vector<LabeledSample> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            out.push_back({row[id], parse_source(row[source]), row[text], row[raw], parse_label(row[label])});
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.lines[r]) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace cbd
