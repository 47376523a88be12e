#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbd {

enum class Source { Waseem, Encase, Formspring, Synthetic };
enum class Label { Normal = 0, Cyberbullying = 1 };

std::string_view to_string(Source s) noexcept;
std::string_view to_string(Label l) noexcept;
Source parse_source(std::string_view s);  // "WASEEM", ... (case-insensitive)
Label parse_label(std::string_view s);    // "CYBERBULLYING" / "NORMAL"

struct LabeledSample {
    std::string id;
    Source source = Source::Synthetic;
    std::string text;
    std::string raw_label;
    Label label = Label::Normal;

    friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Column renames, read from `key=value` lines. A key is either a canonical
/// column (`text=tweet_text`, applies to every source) or source-qualified
/// (`encase.label=majority_label`); the qualified form wins.
class SchemaMap {
public:
    SchemaMap() = default;
    static SchemaMap parse(std::string_view text);
    static SchemaMap load(const std::filesystem::path& path);

    std::string column(Source source, std::string_view canonical) const;

private:
    std::map<std::string, std::string, std::less<>> renames_;
};

// Source loaders. Every raw label is trimmed and lowercased before mapping;
// unknown labels raise DataError naming the source and CSV line.
std::vector<LabeledSample> load_waseem(const std::filesystem::path& path, const SchemaMap& schema = {});
std::vector<LabeledSample> load_encase(const std::filesystem::path& path, const SchemaMap& schema = {});
/// severity >= threshold -> CYBERBULLYING. Severity must be an integer in 0..10.
std::vector<LabeledSample> load_formspring(const std::filesystem::path& path, int threshold = 1,
                                           const SchemaMap& schema = {});
/// Columns (id, text, label); label in {1, 0, cyberbullying, normal}.
std::vector<LabeledSample> load_synthetic(const std::filesystem::path& path, const SchemaMap& schema = {});

Label map_waseem_label(std::string_view raw);
Label map_encase_label(std::string_view raw);
Label map_formspring_severity(std::string_view raw, int threshold = 1);

/// Concatenate in argument order, prefixing ids with the lowercase source
/// name ("waseem:123"). Throws DataError on a duplicate prefixed id.
std::vector<LabeledSample> combine(std::span<const std::vector<LabeledSample>> datasets);

struct ClassCounts {
    std::size_t cyberbullying = 0;
    std::size_t normal = 0;
    std::size_t total() const noexcept { return cyberbullying + normal; }
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct DatasetStats {
    std::map<Source, ClassCounts> per_source;
    ClassCounts totals;
    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(std::span<const LabeledSample> samples);

/// Published per-source binary counts of the original datasets.
std::optional<ClassCounts> reference_counts(Source source) noexcept;

struct StatsDeviation {
    Source source;
    ClassCounts expected;
    ClassCounts observed;
};

/// Deviations from reference_counts for every source present in stats.
std::vector<StatsDeviation> compare_to_reference(const DatasetStats& stats);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const;
};

struct Split {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

/// Seeded partition. Stratified: each class contributes
/// clamp(round(n_c * train_fraction), 1, n_c - 1) samples to train. Both
/// parts keep input order. Throws DataError when a class has < 2 samples.
Split split(std::span<const LabeledSample> samples, const SplitSpec& options);

/// Unified dataset cache: CSV with header (id, source, text, raw_label, label).
void write_unified(const std::filesystem::path& path, std::span<const LabeledSample> samples);
std::vector<LabeledSample> load_unified(const std::filesystem::path& path);

}  // namespace cbd
