#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cbd::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

std::string default_lexicon_path();

struct RunConfig {
    // inputs
    std::optional<fs::path> waseem, encase, formspring, synthetic, schema_map;
    fs::path lexicon = default_lexicon_path();
    std::optional<fs::path> lemma_rules;  // built-in rules when absent
    std::optional<fs::path> glove;

    // preprocessing
    bool use_slang = true;
    bool strip_urls = true;
    bool strip_emojis = true;
    bool strip_mentions = true;
    int formspring_threshold = 1;

    // model and training
    std::string model = "custom";  // custom | glove
    std::size_t dim = 100;
    std::size_t hidden = 64;
    std::size_t max_len = 64;
    std::size_t max_vocab = 20000;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 0.002;
    std::uint64_t seed = 0;
    bool freeze_embeddings = false;

    // split
    double train_fraction = 0.8;
    bool stratified = true;

    // locations (not part of the resolved config)
    fs::path out = "cbd_out";
    std::optional<fs::path> data;        // prep output dir read by train/eval; defaults to out
    std::optional<fs::path> checkpoint;  // defaults to out/model.ckpt
    std::optional<fs::path> vocab;       // defaults to vocab.txt beside the checkpoint
    std::string eval_on = "test";        // test | train | all
};

// Every command returns its exit code and reports failures as exceptions
// from the cbd::Error hierarchy; run() maps those to exit codes.
int cmd_prep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// Resolved run configuration echoed into artifacts. Excludes output
/// locations so runs in different directories compare equal.
nlohmann::json resolved_config(const RunConfig& config);

/// Keys whose values differ between two flat JSON objects.
std::vector<std::string> differing_keys(const nlohmann::json& a, const nlohmann::json& b);

/// Parse argv-style arguments (without the program name) and dispatch.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace cbd::cli
