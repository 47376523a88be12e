#include "cbd/evaluation.hpp"
#include "cbd/model.hpp"
#include "cbd/preprocess.hpp"
#include "cbd/rng.hpp"
#include "cbd/slang_lexicon.hpp"
#include "cbd/text_encoding.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

using namespace cbd;

namespace {

BiLSTMModel make_model(std::size_t vocab_size, std::size_t hidden) {
    std::vector<std::string> toks;
    for (std::size_t i = 2; i < vocab_size; ++i) toks.push_back("w" + std::to_string(i));
    const Vocabulary vocab(toks, vocab_size, kDefaultMaxLen);
    ModelConfig cfg;
    cfg.hidden = hidden;
    BiLSTMModel m = init_model(cfg, build_matrix(vocab, nullptr, cfg.dim, 3), 3);
    m.params.w_y.setConstant(0.01);
    return m;
}

EncodedSample make_sample(std::size_t length, std::size_t vocab_size) {
    Xorshift64Star rng(11);
    EncodedSample s;
    s.ids.assign(kDefaultMaxLen, kPadId);
    for (std::size_t i = 0; i < length; ++i) s.ids[i] = static_cast<TokenId>(2 + rng.below(vocab_size - 2));
    s.true_length = length;
    s.label = 1;
    return s;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
    const auto model = make_model(2000, static_cast<std::size_t>(state.range(1)));
    const auto sample = make_sample(static_cast<std::size_t>(state.range(0)), 2000);
    for (auto _ : state) benchmark::DoNotOptimize(forward(model, sample, false).probability);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Args({16, 64})->Args({64, 64})->Args({64, 128});

static void BM_ForwardBackward(benchmark::State& state) {
    const auto model = make_model(2000, static_cast<std::size_t>(state.range(1)));
    const auto sample = make_sample(static_cast<std::size_t>(state.range(0)), 2000);
    ParameterSet grads = model.params.zeros_like();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto pass = forward(model, sample, true, ++seed);
        accumulate_gradients(model, pass.cache, sample.label, grads);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Args({16, 64})->Args({64, 64});

static void BM_TrainEpoch(benchmark::State& state) {
    const auto base = make_model(2000, 64);
    std::vector<EncodedSample> data;
    for (std::size_t i = 0; i < 64; ++i) {
        auto s = make_sample(8 + i % 24, 2000);
        s.label = static_cast<int>(i % 2);
        data.push_back(s);
    }
    TrainConfig tc;
    tc.epochs = 1;
    for (auto _ : state) {
        auto model = base;
        benchmark::DoNotOptimize(train(model, data, tc).loss_history.back());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

static void BM_PreprocessText(benchmark::State& state) {
    PreprocessConfig cfg;
    cfg.lexicon = std::make_shared<const SlangLexicon>(load_lexicon(std::string(CBD_DATA_DIR) + "/slang_corpus.tsv"));
    cfg.use_slang = state.range(0) != 0;
    const std::string text =
        "@someone OMG stfu ur SO annoying!!! nobody likes u, kys #loser https://t.co/xyz crying and running away";
    for (auto _ : state) benchmark::DoNotOptimize(preprocess_text(text, cfg));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_PreprocessText)->Arg(1)->Arg(0);

static void BM_RocAuc(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Xorshift64Star rng(5);
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 3 == 0);
        p[i] = 0.5 * rng.uniform() + 0.3 * y[i];
    }
    for (auto _ : state) benchmark::DoNotOptimize(auc(roc_curve(p, y)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);
BENCHMARK_MAIN();
