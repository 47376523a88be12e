#include "cbdetect/commands.hpp"

#include "cbd/checkpoint.hpp"
#include "cbd/csv.hpp"
#include "cbd/datasets.hpp"
#include "cbd/embeddings.hpp"
#include "cbd/error.hpp"
#include "cbd/evaluation.hpp"
#include "cbd/model.hpp"
#include "cbd/preprocess.hpp"
#include "cbd/slang_lexicon.hpp"
#include "cbd/text_encoding.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace cbd::cli {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json optional_path(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

void require_input(const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " does not exist: " + p.string());
}

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

fs::path data_dir(const RunConfig& c) { return c.data.value_or(c.out); }
fs::path checkpoint_path(const RunConfig& c) { return c.checkpoint.value_or(c.out / "model.ckpt"); }
fs::path vocab_path(const RunConfig& c) {
    return c.vocab.value_or(checkpoint_path(c).parent_path() / "vocab.txt");
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read " + path.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// Wall-clock time only ever goes here.
void log_line(const fs::path& dir, const std::string& message) {
    std::ofstream f(dir / "run.log", std::ios::app);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    f << stamp << ' ' << message << '\n';
}

struct Preprocessing {
    PreprocessConfig config;
    json description;  // keys stored in artifacts and read back by predict
};

Preprocessing make_preprocessing(bool use_slang, bool strip_urls, bool strip_emojis, bool strip_mentions,
                                 const fs::path& lexicon_path, const std::optional<fs::path>& lemma_path) {
    Preprocessing p;
    p.config.use_slang = use_slang;
    p.config.strip_urls = strip_urls;
    p.config.strip_emojis = strip_emojis;
    p.config.strip_mentions = strip_mentions;
    require_input(lexicon_path, "lexicon");
    p.config.lexicon = std::make_shared<const SlangLexicon>(load_lexicon(lexicon_path));
    if (lemma_path) {
        require_input(*lemma_path, "lemma rules");
        p.config.lemmatizer = std::make_shared<const Lemmatizer>(load_lemma_rules(*lemma_path));
    } else {
        p.config.lemmatizer = std::make_shared<const Lemmatizer>(Lemmatizer::defaults());
    }
    p.config.validate();
    p.description = {
        {"use_slang", use_slang},
        {"strip_urls", strip_urls},
        {"strip_emojis", strip_emojis},
        {"strip_mentions", strip_mentions},
        {"lexicon", lexicon_path.string()},
        {"lexicon_entries", p.config.lexicon->size()},
        {"lexicon_fingerprint", hex64(p.config.lexicon->fingerprint())},
        {"lemma_rules", lemma_path ? json(lemma_path->string()) : json("builtin")},
        {"lemma_fingerprint", hex64(p.config.lemmatizer->fingerprint())},
    };
    return p;
}

Preprocessing make_preprocessing(const RunConfig& c) {
    return make_preprocessing(c.use_slang, c.strip_urls, c.strip_emojis, c.strip_mentions, c.lexicon, c.lemma_rules);
}

// Rebuild the pipeline recorded in a checkpoint, refusing silently changed tables.
Preprocessing preprocessing_from(const json& d) {
    try {
        const auto lemma = d.at("lemma_rules").get<std::string>();
        Preprocessing p = make_preprocessing(
            d.at("use_slang").get<bool>(), d.at("strip_urls").get<bool>(), d.at("strip_emojis").get<bool>(),
            d.at("strip_mentions").get<bool>(), d.at("lexicon").get<std::string>(),
            lemma == "builtin" ? std::nullopt : std::optional<fs::path>(lemma));
        if (p.description.at("lexicon_fingerprint") != d.at("lexicon_fingerprint"))
            throw DataError("lexicon " + d.at("lexicon").get<std::string>() + " changed since training");
        if (p.description.at("lemma_fingerprint") != d.at("lemma_fingerprint"))
            throw DataError("lemma rules changed since training");
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint preprocessing record is incomplete: ") + e.what());
    }
}

void validate_common(const RunConfig& c) {
    if (c.model != "custom" && c.model != "glove") throw ConfigError("--model must be custom or glove");
    if (c.model == "glove" && !c.glove) throw ConfigError("--model glove requires --glove <path>");
    if (c.glove) require_input(*c.glove, "GloVe file");
    if (c.eval_on != "test" && c.eval_on != "train" && c.eval_on != "all")
        throw ConfigError("--eval-on must be test, train or all");
    if (c.formspring_threshold < 1 || c.formspring_threshold > 10)
        throw ConfigError("--formspring-threshold must be in 1..10");
    if (c.max_len == 0 || c.hidden == 0 || c.dim == 0) throw ConfigError("dim, hidden and max-len must be >= 1");
    if (c.max_vocab < 3) throw ConfigError("--max-vocab must be >= 3");
    if (c.epochs == 0) throw ConfigError("--epochs must be >= 1");
    if (c.batch_size == 0) throw ConfigError("--batch-size must be >= 1");
    SplitSpec{c.train_fraction, c.seed, c.stratified}.validate();
}

std::map<std::string, std::string> read_split(const fs::path& path) {
    const auto table = csv::read_file(path);
    const auto id = table.column("id");
    const auto part = table.column("part");
    std::map<std::string, std::string> out;
    for (const auto& row : table.rows) out[row[id]] = row[part];
    return out;
}

std::vector<EncodedSample> encode_all(std::span<const LabeledSample> samples, const Vocabulary& vocab,
                                      std::size_t max_len) {
    std::vector<EncodedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(encode(tokenize(s.text), vocab, max_len, s.label == Label::Cyberbullying ? 1 : 0));
    return out;
}

json metric_block(const json& metrics) {
    json out;
    for (const char* k : {"precision", "recall", "f1", "accuracy", "auc"}) out[k] = metrics.at(k);
    return out;
}

}  // namespace

std::string default_lexicon_path() {
#ifdef CBD_DEFAULT_LEXICON
    return CBD_DEFAULT_LEXICON;
#else
    return "data/slang_corpus.tsv";
#endif
}

json resolved_config(const RunConfig& c) {
    return {
        {"waseem", optional_path(c.waseem)},
        {"encase", optional_path(c.encase)},
        {"formspring", optional_path(c.formspring)},
        {"synthetic", optional_path(c.synthetic)},
        {"schema_map", optional_path(c.schema_map)},
        {"lexicon", c.lexicon.string()},
        {"lemma_rules", c.lemma_rules ? json(c.lemma_rules->string()) : json("builtin")},
        {"glove", optional_path(c.glove)},
        {"use_slang", c.use_slang},
        {"strip_urls", c.strip_urls},
        {"strip_emojis", c.strip_emojis},
        {"strip_mentions", c.strip_mentions},
        {"formspring_threshold", c.formspring_threshold},
        {"model", c.model},
        {"dim", c.dim},
        {"hidden", c.hidden},
        {"max_len", c.max_len},
        {"max_vocab", c.max_vocab},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"seed", c.seed},
        {"freeze_embeddings", c.freeze_embeddings},
        {"train_fraction", c.train_fraction},
        {"stratified", c.stratified},
        {"eval_on", c.eval_on},
    };
}

std::vector<std::string> differing_keys(const json& a, const json& b) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    std::vector<std::string> out;
    for (const auto& k : keys)
        if (!a.contains(k) || !b.contains(k) || a[k] != b[k]) out.push_back(k);
    return out;
}

int cmd_prep(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (!c.waseem && !c.encase && !c.formspring && !c.synthetic)
        throw ConfigError("no dataset given: pass at least one of --waseem, --encase, --formspring, --synthetic");
    for (const auto& p : {c.waseem, c.encase, c.formspring, c.synthetic, c.schema_map})
        if (p) require_input(*p, "input");
    validate_common(c);
    const Preprocessing pre = make_preprocessing(c);
    prepare_output(c.out);

    const SchemaMap schema = c.schema_map ? SchemaMap::load(*c.schema_map) : SchemaMap{};
    std::vector<std::vector<LabeledSample>> parts;
    if (c.waseem) parts.push_back(load_waseem(*c.waseem, schema));
    if (c.encase) parts.push_back(load_encase(*c.encase, schema));
    if (c.formspring) parts.push_back(load_formspring(*c.formspring, c.formspring_threshold, schema));
    if (c.synthetic) parts.push_back(load_synthetic(*c.synthetic, schema));
    const auto samples = combine(parts);
    const auto stats = compute_stats(samples);

    std::vector<LabeledSample> kept;
    kept.reserve(samples.size());
    std::size_t dropped = 0;
    for (const auto& s : samples) {
        LabeledSample p = s;
        p.text = preprocess_text(s.text, pre.config);
        if (p.text.empty()) {
            ++dropped;
            continue;
        }
        kept.push_back(std::move(p));
    }
    write_unified(c.out / "dataset.csv", kept);

    const json config = resolved_config(c);
    json report;
    report["config"] = config;
    for (const auto& [source, counts] : stats.per_source)
        report["per_source"][std::string(to_string(source))] = {
            {"cyberbullying", counts.cyberbullying}, {"normal", counts.normal}, {"total", counts.total()}};
    report["totals"] = {{"cyberbullying", stats.totals.cyberbullying},
                        {"normal", stats.totals.normal},
                        {"total", stats.totals.total()}};
    report["rows_written"] = kept.size();
    report["dropped_empty"] = dropped;
    report["deviations"] = json::array();
    for (const auto& d : compare_to_reference(stats)) {
        report["deviations"].push_back({{"source", std::string(to_string(d.source))},
                                        {"expected", {d.expected.cyberbullying, d.expected.normal}},
                                        {"observed", {d.observed.cyberbullying, d.observed.normal}}});
        err << "warning: " << to_string(d.source) << " counts (" << d.observed.cyberbullying << ", "
            << d.observed.normal << ") differ from the reference (" << d.expected.cyberbullying << ", "
            << d.expected.normal << ")\n";
    }
    write_json(c.out / "stats.json", report);
    write_json(c.out / "prep_config.json", {{"config", config}, {"preprocess", pre.description}});
    log_line(c.out, "prep rows=" + std::to_string(kept.size()) + " dropped_empty=" + std::to_string(dropped));

    out << "prepared " << kept.size() << " samples (" << stats.totals.cyberbullying << " cyberbullying, "
        << stats.totals.normal << " normal) -> " << (c.out / "dataset.csv").string() << '\n';
    return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream&) {
    validate_common(c);
    const fs::path dir = data_dir(c);
    require_input(dir / "dataset.csv", "dataset cache");
    require_input(dir / "prep_config.json", "prep config");
    prepare_output(c.out);

    const auto samples = load_unified(dir / "dataset.csv");
    const json prep = read_json(dir / "prep_config.json");
    const Split parts = split(samples, SplitSpec{c.train_fraction, c.seed, c.stratified});
    {
        std::ofstream f(c.out / "split.csv", std::ios::binary);
        csv::write_row(f, {"id", "part"});
        for (const auto& s : parts.train) csv::write_row(f, {s.id, "train"});
        for (const auto& s : parts.test) csv::write_row(f, {s.id, "test"});
    }

    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(parts.train.size());
    for (const auto& s : parts.train) corpus.push_back(tokenize(s.text));
    const Vocabulary vocab = build_vocab(corpus, c.max_vocab, c.max_len);
    vocab.save(c.out / "vocab.txt");

    std::optional<GloveTable> glove;
    if (c.model == "glove") glove = load_glove(*c.glove, c.dim);
    const EmbeddingMatrix matrix = build_matrix(vocab, glove ? &*glove : nullptr, c.dim, c.seed);

    ModelConfig mc;
    mc.dim = c.dim;
    mc.hidden = c.hidden;
    mc.max_len = c.max_len;
    BiLSTMModel model = init_model(mc, matrix, c.seed);
    model.embedding_trainable = !c.freeze_embeddings;

    const auto encoded = encode_all(parts.train, vocab, c.max_len);
    TrainConfig tc;
    tc.epochs = c.epochs;
    tc.batch_size = c.batch_size;
    tc.seed = c.seed;
    tc.learning_rate = c.learning_rate;
    log_line(c.out, "train start samples=" + std::to_string(encoded.size()) + " vocab=" +
                        std::to_string(vocab.size()));
    const TrainResult result = train(model, encoded, tc, [&](const EpochReport& r) {
        std::ostringstream s;
        s << "epoch " << r.epoch << " loss " << r.mean_loss;
        log_line(c.out, s.str());
    });

    Checkpoint ck;
    ck.model = std::move(model);
    ck.vocab_hash = vocab.hash();
    ck.config = {{"run", resolved_config(c)},
                 {"prep", prep.at("config")},
                 {"preprocess", prep.at("preprocess")},
                 {"summary",
                  {{"vocab_size", vocab.size()},
                   {"train_samples", parts.train.size()},
                   {"test_samples", parts.test.size()},
                   {"glove_hit_rate", glove ? json(matrix.hit_rate) : json(nullptr)}}}};
    save_checkpoint(c.out / "model.ckpt", ck);

    {
        std::ofstream f(c.out / "loss.csv", std::ios::binary);
        f << "epoch,mean_loss\n";
        char buf[64];
        for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, result.loss_history[e]);
            f << buf;
        }
    }
    log_line(c.out, "train done");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", result.loss_history.back());
    out << "final loss " << buf << " (epoch " << result.loss_history.size() << ")\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream&) {
    validate_common(c);
    const fs::path ckpt = checkpoint_path(c);
    require_input(ckpt, "checkpoint");
    require_input(vocab_path(c), "vocabulary");
    const fs::path split_file = ckpt.parent_path() / "split.csv";
    require_input(split_file, "split file");
    const fs::path dir = data_dir(c);
    require_input(dir / "dataset.csv", "dataset cache");
    prepare_output(c.out);

    const Checkpoint ck = load_checkpoint(ckpt);
    const Vocabulary vocab = Vocabulary::load(vocab_path(c));
    if (vocab.hash() != ck.vocab_hash)
        throw DataError("checkpoint/vocabulary hash mismatch: checkpoint " + hex64(ck.vocab_hash) + ", " +
                        vocab_path(c).string() + " " + hex64(vocab.hash()));

    const auto parts = read_split(split_file);
    std::vector<LabeledSample> selected;
    for (const auto& s : load_unified(dir / "dataset.csv")) {
        const auto it = parts.find(s.id);
        if (it == parts.end()) continue;
        if (c.eval_on == "all" || it->second == c.eval_on) selected.push_back(s);
    }
    if (selected.empty()) throw DataError("no samples in the '" + c.eval_on + "' part of the split");

    const auto encoded = encode_all(selected, vocab, ck.model.config.max_len);
    const auto probabilities = predict(ck.model, encoded);
    std::vector<int> labels;
    for (const auto& e : encoded) labels.push_back(e.label);
    const std::string tag = ck.config.at("run").at("model").get<std::string>();
    const bool slang = ck.config.at("preprocess").at("use_slang").get<bool>();
    const Evaluation ev = evaluate_run(tag, probabilities, labels, slang);

    json config = ck.config;
    config["eval_on"] = c.eval_on;
    write_evaluation(c.out, ev, config);
    log_line(c.out, "eval n=" + std::to_string(selected.size()));

    char buf[160];
    std::snprintf(buf, sizeof buf, "precision %.4f recall %.4f f1 %.4f accuracy %.4f auc %.4f (n=%zu)\n",
                  ev.report.precision(), ev.report.recall(), ev.report.f1(), ev.report.accuracy(), ev.report.auc,
                  ev.report.n);
    out << buf;
    return kExitOk;
}

int cmd_ablate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    validate_common(c);
    require_input(c.lexicon, "lexicon");
    json runs;
    std::map<bool, json> configs;
    for (const bool slang : {true, false}) {
        RunConfig r = c;
        r.use_slang = slang;
        r.out = c.out / (slang ? "with_slang" : "without_slang");
        r.data.reset();
        r.checkpoint.reset();
        r.vocab.reset();
        out << (slang ? "[with slang]\n" : "[without slang]\n");
        cmd_prep(r, out, err);
        cmd_train(r, out, err);
        cmd_eval(r, out, err);
        const json metrics = read_json(r.out / "metrics.json");
        const Vocabulary vocab = Vocabulary::load(r.out / "vocab.txt");
        runs[slang ? "with_slang" : "without_slang"] = {
            {"metrics", metric_block(metrics)}, {"vocab_size", vocab.size()}, {"vocab_hash", hex64(vocab.hash())}};
        configs[slang] = resolved_config(r);
    }

    json report;
    report["with_slang"] = runs["with_slang"];
    report["without_slang"] = runs["without_slang"];
    for (const char* k : {"precision", "recall", "f1", "accuracy", "auc"})
        report["diff"][k] = runs["with_slang"]["metrics"][k].get<double>() -
                            runs["without_slang"]["metrics"][k].get<double>();
    report["configs"] = {{"with_slang", configs[true]}, {"without_slang", configs[false]}};
    report["differing_keys"] = differing_keys(configs[true], configs[false]);
    write_json(c.out / "ablation.json", report);

    char buf[160];
    std::snprintf(buf, sizeof buf, "precision with %.4f without %.4f (diff %+.4f)\n",
                  runs["with_slang"]["metrics"]["precision"].get<double>(),
                  runs["without_slang"]["metrics"]["precision"].get<double>(),
                  report["diff"]["precision"].get<double>());
    out << buf;
    return kExitOk;
}

int cmd_predict(const RunConfig& c, std::istream& in, std::ostream& out, std::ostream&) {
    if (!c.checkpoint) throw ConfigError("predict requires --checkpoint <path>");
    require_input(*c.checkpoint, "checkpoint");
    require_input(vocab_path(c), "vocabulary");
    const Checkpoint ck = load_checkpoint(*c.checkpoint);
    const Vocabulary vocab = Vocabulary::load(vocab_path(c));
    if (vocab.hash() != ck.vocab_hash) throw DataError("checkpoint/vocabulary hash mismatch");
    const Preprocessing pre = preprocessing_from(ck.config.at("preprocess"));

    std::string line;
    char buf[64];
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tokens = tokenize(preprocess_text(line, pre.config));
        const double p = predict(ck.model, encode(tokens, vocab, ck.model.config.max_len));
        std::snprintf(buf, sizeof buf, "%.6f\t%s\n", p,
                      p >= kDefaultThreshold ? "CYBERBULLYING" : "NORMAL");
        out << buf;
    }
    return kExitOk;
}

namespace {

void add_data_options(CLI::App* app, RunConfig& c) {
    app->add_option("--waseem", c.waseem, "WASEEM CSV (id, text, label)");
    app->add_option("--encase", c.encase, "ENCASE CSV (id, text, label)");
    app->add_option("--formspring", c.formspring, "Formspring CSV (id, text, severity)");
    app->add_option("--synthetic", c.synthetic, "Synthetic CSV (id, text, label in 1/0)");
    app->add_option("--schema-map", c.schema_map, "key=value column renames");
    app->add_option("--formspring-threshold", c.formspring_threshold, "Severity at or above which a post is bullying")
        ->capture_default_str();
}

void add_preprocess_options(CLI::App* app, RunConfig& c) {
    app->add_option("--lexicon", c.lexicon, "Slang lexicon TSV")->capture_default_str();
    app->add_option("--lemma-rules", c.lemma_rules, "Lemma rule TSV (built-in table when omitted)");
    app->add_flag("--no-slang{false}", c.use_slang, "Disable slang expansion");
    app->add_flag("!--keep-urls", c.strip_urls, "Keep URL tokens");
    app->add_flag("!--keep-emojis", c.strip_emojis, "Keep emoji");
    app->add_flag("!--keep-mentions", c.strip_mentions, "Keep @mentions");
}

void add_train_options(CLI::App* app, RunConfig& c) {
    app->add_option("--model", c.model, "custom | glove")->capture_default_str();
    app->add_option("--glove", c.glove, "GloVe text file");
    app->add_option("--dim", c.dim, "Embedding dimension")->capture_default_str();
    app->add_option("--hidden", c.hidden, "LSTM hidden size")->capture_default_str();
    app->add_option("--max-len", c.max_len, "Sequence length")->capture_default_str();
    app->add_option("--max-vocab", c.max_vocab, "Vocabulary size including PAD and OOV")->capture_default_str();
    app->add_option("--epochs", c.epochs)->capture_default_str();
    app->add_option("--batch-size", c.batch_size)->capture_default_str();
    app->add_option("--learning-rate", c.learning_rate)->capture_default_str();
    app->add_flag("--freeze-embeddings", c.freeze_embeddings, "Keep the embedding matrix fixed");
    app->add_option("--train-fraction", c.train_fraction)->capture_default_str();
    app->add_flag("!--unstratified", c.stratified, "Split without stratifying by label");
}

void add_seed(CLI::App* app, RunConfig& c) { app->add_option("--seed", c.seed)->capture_default_str(); }

void add_out(CLI::App* app, RunConfig& c) {
    app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void add_checkpoint_options(CLI::App* app, RunConfig& c) {
    app->add_option("--checkpoint", c.checkpoint, "Model checkpoint");
    app->add_option("--vocab", c.vocab, "Vocabulary file (default: beside the checkpoint)");
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// `key=value` lines become `--key=value` arguments placed right after the
// subcommand, so flags given on the command line (parsed later) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!file) return args;
    std::ifstream f(*file);
    if (!f) throw ConfigError("config file does not exist: " + *file);
    std::vector<std::string> extra;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(*file + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        while (!key.empty() && key[0] == '-') key.erase(0, 1);
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty()) throw ConfigError(*file + ":" + std::to_string(lineno) + ": empty key");
        extra.push_back("--" + key + "=" + value);
    }
    const auto at = args.empty() || args[0].rfind("-", 0) == 0 ? args.begin() : args.begin() + 1;
    args.insert(at, extra.begin(), extra.end());
    return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Slang-aware cyberbullying detection with a Bi-LSTM classifier", "cbdetect"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* prep = app.add_subcommand("prep", "Load, label and preprocess datasets into a cache");
    auto* train = app.add_subcommand("train", "Split the cache, build the vocabulary and train a model");
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
    auto* ablate = app.add_subcommand("ablate", "prep + train + eval with and without slang expansion");
    auto* predict_cmd = app.add_subcommand("predict", "Score stdin lines with a checkpoint");

    std::string config_file;  // consumed by expand_config; listed for --help
    for (auto* sub : {prep, train, eval, ablate, predict_cmd})
        sub->add_option("--config", config_file, "key=value file; command-line flags override it");

    add_data_options(prep, c);
    add_preprocess_options(prep, c);
    add_out(prep, c);
    add_train_options(prep, c);  // accepted so one config file can drive every stage
    add_seed(prep, c);

    add_train_options(train, c);
    add_seed(train, c);
    add_out(train, c);
    train->add_option("--data", c.data, "Directory written by prep (default: --out)");

    add_out(eval, c);
    add_checkpoint_options(eval, c);
    eval->add_option("--data", c.data, "Directory written by prep (default: --out)");
    eval->add_option("--eval-on", c.eval_on, "test | train | all")->capture_default_str();

    add_data_options(ablate, c);
    add_preprocess_options(ablate, c);
    add_train_options(ablate, c);
    add_seed(ablate, c);
    add_out(ablate, c);

    add_checkpoint_options(predict_cmd, c);

    try {
        std::vector<std::string> expanded;
        try {
            expanded = expand_config(args);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        app.exit(e, err, err);
        return kExitUsage;
    }

    try {
        if (prep->parsed()) return cmd_prep(c, out, err);
        if (train->parsed()) return cmd_train(c, out, err);
        if (eval->parsed()) return cmd_eval(c, out, err);
        if (ablate->parsed()) return cmd_ablate(c, out, err);
        return cmd_predict(c, in, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cbd::cli
