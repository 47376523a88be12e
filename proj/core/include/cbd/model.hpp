#pragma once

#include "cbd/embeddings.hpp"
#include "cbd/text_encoding.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cbd {

// Gate order used everywhere (storage, init, checkpoints).
enum Gate : std::size_t { kForgetGate = 0, kInputGate = 1, kOutputGate = 2, kCandidateGate = 3 };
inline constexpr std::size_t kGateCount = 4;

/// Standard LSTM cell without peepholes.
struct LSTMCellParams {
    std::array<Eigen::MatrixXd, kGateCount> W;  // hidden x dim
    std::array<Eigen::MatrixXd, kGateCount> U;  // hidden x hidden
    std::array<Eigen::VectorXd, kGateCount> b;  // hidden

    static LSTMCellParams zeros(std::size_t dim, std::size_t hidden);
    Eigen::Index dim() const noexcept { return W[0].cols(); }
    Eigen::Index hidden() const noexcept { return W[0].rows(); }
};

struct CellState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// One step: f, i, o = sigmoid(W x + U h + b); g = tanh(...);
/// c' = f * c + i * g; h' = o * tanh(c'). Throws ConfigError on shape mismatch.
CellState lstm_cell_step(const LSTMCellParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                         const Eigen::VectorXd& c_prev);

struct TensorRef {
    std::string name;
    double* data = nullptr;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows * cols); }
    std::span<double> values() const noexcept { return {data, size()}; }
};

/// Every trainable tensor of the classifier. Gradients use the same type.
struct ParameterSet {
    Eigen::MatrixXd embedding;  // vocab x dim
    LSTMCellParams forward_cell;
    LSTMCellParams backward_cell;
    Eigen::VectorXd w_y;  // 2 * hidden
    Eigen::VectorXd b_y;  // 1

    static ParameterSet zeros(std::size_t vocab, std::size_t dim, std::size_t hidden);
    ParameterSet zeros_like() const;

    /// Fixed order: embedding; forward W_f W_i W_o W_c U_f U_i U_o U_c b_f b_i
    /// b_o b_c; backward (same 12); w_y; b_y. Data is Eigen column-major.
    std::vector<TensorRef> tensors();
    std::size_t parameter_count() const;
};

struct ModelConfig {
    std::size_t dim = kGloveDim;
    std::size_t hidden = 64;
    std::size_t max_len = kDefaultMaxLen;
    double dropout_embed = 0.4;   // after the embedding lookup
    double dropout_output = 0.5;  // after the Bi-LSTM concatenation

    void validate() const;
};

struct BiLSTMModel {
    ModelConfig config;
    ParameterSet params;
    bool embedding_trainable = true;

    std::size_t vocab_size() const noexcept { return static_cast<std::size_t>(params.embedding.rows()); }
};

/// Seeded initialisation around a prepared embedding matrix: input matrices
/// U(+-sqrt(6/(dim+hidden))), recurrent U(+-sqrt(6/(2 hidden))), biases 0
/// except forget-gate 1.0, output layer 0.
BiLSTMModel init_model(const ModelConfig& config, const EmbeddingMatrix& embedding, std::uint64_t seed);

struct StepCache {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd f, i, o, g, c, tanh_c, h;
};

struct ForwardCache {
    std::vector<TokenId> sequence;           // non-PAD ids actually consumed
    std::vector<Eigen::VectorXd> embed_mask;  // inverted-dropout scale per step (empty in inference)
    std::vector<StepCache> forward_steps;    // position t
    std::vector<StepCache> backward_steps;   // k-th step reads position T-1-k
    Eigen::VectorXd features;                // [h_fwd; h_bwd] before dropout
    Eigen::VectorXd feature_mask;            // empty in inference
    Eigen::VectorXd dropped;                 // features after dropout
    double logit = 0.0;
    double probability = 0.5;
    bool training = false;
};

struct ForwardPass {
    double probability = 0.5;
    ForwardCache cache;
};

/// probability = sigmoid(w_y . dropout([h_fwd_T; h_bwd_T]) + b_y). Consumes
/// the non-PAD ids among the first true_length positions. In training mode
/// the dropout masks come from Xorshift64Star(rng_seed).
ForwardPass forward(const BiLSTMModel& model, const EncodedSample& sample, bool training, std::uint64_t rng_seed = 0);

inline constexpr double kProbabilityClamp = 1e-12;

/// Binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
double loss_bce(double probability, int label);

/// Add scale * dLoss/dParams into `grads`. PAD row gradient stays zero.
void accumulate_gradients(const BiLSTMModel& model, const ForwardCache& cache, int label, ParameterSet& grads,
                          double scale = 1.0);

/// Full gradient of loss_bce(forward(...)) for one sample.
ParameterSet backward(const BiLSTMModel& model, const ForwardCache& cache, int label);

struct NadamState {
    std::uint64_t step = 0;
    std::vector<Eigen::VectorXd> first_moment;
    std::vector<Eigen::VectorXd> second_moment;
    double learning_rate = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// One Nadam update over paired params/grads tensors (same order). Lazily
/// sizes the moments on first use. `skip` marks tensors left untouched (e.g.
/// a frozen embedding). Throws NumericalError, without modifying anything,
/// if any gradient is non-finite.
void nadam_step(std::span<const TensorRef> params, std::span<const TensorRef> grads, NadamState& state,
                const std::vector<bool>& skip = {});

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double learning_rate = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool shuffle = true;

    void validate() const;
};

struct EpochReport {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
};

using ProgressSink = std::function<void(const EpochReport&)>;

struct TrainResult {
    std::vector<double> loss_history;  // per-epoch mean training loss
};

/// Mini-batch training: per batch, mean loss gradient then one Nadam step.
/// Deterministic for a given (model, data, config).
TrainResult train(BiLSTMModel& model, std::span<const EncodedSample> train_set, const TrainConfig& config,
                  const ProgressSink& progress = {});

double predict(const BiLSTMModel& model, const EncodedSample& sample);
std::vector<double> predict(const BiLSTMModel& model, std::span<const EncodedSample> samples);

inline constexpr std::uint64_t kInitStream = 0x1417;
inline constexpr std::uint64_t kShuffleStream = 0x5AFF;
inline constexpr std::uint64_t kDropoutStream = 0xD809;

}  // namespace cbd
