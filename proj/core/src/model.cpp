#include "cbd/model.hpp"

#include "cbd/error.hpp"
#include "cbd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cbd {
namespace {

constexpr std::array<const char*, kGateCount> kGateNames = {"f", "i", "o", "c"};

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

void check_cell_shapes(const LSTMCellParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                       const Eigen::VectorXd& c) {
    const auto H = p.hidden();
    const auto D = p.dim();
    for (std::size_t g = 0; g < kGateCount; ++g) {
        if (p.W[g].rows() != H || p.W[g].cols() != D || p.U[g].rows() != H || p.U[g].cols() != H ||
            p.b[g].size() != H)
            throw ConfigError("LSTM cell parameters have inconsistent shapes");
    }
    if (x.size() != D || h.size() != H || c.size() != H) throw ConfigError("LSTM cell input shape mismatch");
}

StepCache cell_step(const LSTMCellParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                    const Eigen::VectorXd& c_prev) {
    StepCache s;
    s.x = x;
    s.h_prev = h_prev;
    s.c_prev = c_prev;
    auto pre = [&](Gate g) -> Eigen::VectorXd { return p.W[g] * x + p.U[g] * h_prev + p.b[g]; };
    s.f = sigmoid(pre(kForgetGate));
    s.i = sigmoid(pre(kInputGate));
    s.o = sigmoid(pre(kOutputGate));
    s.g = pre(kCandidateGate).array().tanh().matrix();
    s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
    s.tanh_c = s.c.array().tanh().matrix();
    s.h = s.o.cwiseProduct(s.tanh_c);
    return s;
}

void fill_uniform(Eigen::MatrixXd& m, double range, Xorshift64Star& rng) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-range, range);
}

void push_cell(std::vector<TensorRef>& out, LSTMCellParams& cell, const std::string& prefix) {
    for (std::size_t g = 0; g < kGateCount; ++g)
        out.push_back({prefix + ".W_" + kGateNames[g], cell.W[g].data(), cell.W[g].rows(), cell.W[g].cols()});
    for (std::size_t g = 0; g < kGateCount; ++g)
        out.push_back({prefix + ".U_" + kGateNames[g], cell.U[g].data(), cell.U[g].rows(), cell.U[g].cols()});
    for (std::size_t g = 0; g < kGateCount; ++g)
        out.push_back({prefix + ".b_" + kGateNames[g], cell.b[g].data(), cell.b[g].size(), 1});
}

// Backpropagate dh at the last step through one direction. steps[k] consumed
// input position pos(k); dx for that position is added into dx[pos(k)].
template <typename PositionOf>
void bptt(const LSTMCellParams& p, const std::vector<StepCache>& steps, Eigen::VectorXd dh, LSTMCellParams& grad,
          std::vector<Eigen::VectorXd>& dx, PositionOf pos, double scale) {
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(p.hidden());
    for (std::size_t k = steps.size(); k-- > 0;) {
        const StepCache& s = steps[k];
        const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_c);
        dc += dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
        const Eigen::VectorXd d_f = dc.cwiseProduct(s.c_prev);
        const Eigen::VectorXd d_i = dc.cwiseProduct(s.g);
        const Eigen::VectorXd d_g = dc.cwiseProduct(s.i);

        std::array<Eigen::VectorXd, kGateCount> da;
        da[kForgetGate] = d_f.cwiseProduct(s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
        da[kInputGate] = d_i.cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
        da[kOutputGate] = d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
        da[kCandidateGate] = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());

        Eigen::VectorXd dh_prev = Eigen::VectorXd::Zero(p.hidden());
        Eigen::VectorXd& dxk = dx[pos(k)];
        for (std::size_t g = 0; g < kGateCount; ++g) {
            grad.W[g].noalias() += scale * da[g] * s.x.transpose();
            grad.U[g].noalias() += scale * da[g] * s.h_prev.transpose();
            grad.b[g] += scale * da[g];
            dxk.noalias() += p.W[g].transpose() * da[g];
            dh_prev.noalias() += p.U[g].transpose() * da[g];
        }
        dc = dc.cwiseProduct(s.f);
        dh = std::move(dh_prev);
    }
}

double squared_norm(ParameterSet& p) {
    double total = 0;
    for (const auto& t : p.tensors())
        for (double v : t.values()) total += v * v;
    return total;
}

}  // namespace

LSTMCellParams LSTMCellParams::zeros(std::size_t dim, std::size_t hidden) {
    LSTMCellParams p;
    const auto D = static_cast<Eigen::Index>(dim);
    const auto H = static_cast<Eigen::Index>(hidden);
    for (std::size_t g = 0; g < kGateCount; ++g) {
        p.W[g] = Eigen::MatrixXd::Zero(H, D);
        p.U[g] = Eigen::MatrixXd::Zero(H, H);
        p.b[g] = Eigen::VectorXd::Zero(H);
    }
    return p;
}

CellState lstm_cell_step(const LSTMCellParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                         const Eigen::VectorXd& c_prev) {
    check_cell_shapes(params, x, h_prev, c_prev);
    StepCache s = cell_step(params, x, h_prev, c_prev);
    return {std::move(s.h), std::move(s.c)};
}

ParameterSet ParameterSet::zeros(std::size_t vocab, std::size_t dim, std::size_t hidden) {
    ParameterSet p;
    p.embedding = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
    p.forward_cell = LSTMCellParams::zeros(dim, hidden);
    p.backward_cell = LSTMCellParams::zeros(dim, hidden);
    p.w_y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * hidden));
    p.b_y = Eigen::VectorXd::Zero(1);
    return p;
}

ParameterSet ParameterSet::zeros_like() const {
    return zeros(static_cast<std::size_t>(embedding.rows()), static_cast<std::size_t>(embedding.cols()),
                 static_cast<std::size_t>(forward_cell.hidden()));
}

std::vector<TensorRef> ParameterSet::tensors() {
    std::vector<TensorRef> out;
    out.reserve(2 + 2 * 3 * kGateCount + 1);
    out.push_back({"embedding", embedding.data(), embedding.rows(), embedding.cols()});
    push_cell(out, forward_cell, "forward");
    push_cell(out, backward_cell, "backward");
    out.push_back({"w_y", w_y.data(), w_y.size(), 1});
    out.push_back({"b_y", b_y.data(), 1, 1});
    return out;
}

std::size_t ParameterSet::parameter_count() const {
    auto& self = const_cast<ParameterSet&>(*this);
    std::size_t n = 0;
    for (const auto& t : self.tensors()) n += t.size();
    return n;
}

void ModelConfig::validate() const {
    if (dim == 0 || hidden == 0 || max_len == 0) throw ConfigError("model dim, hidden and max_len must be >= 1");
    if (!(dropout_embed >= 0.0 && dropout_embed < 1.0) || !(dropout_output >= 0.0 && dropout_output < 1.0))
        throw ConfigError("dropout rates must be in [0, 1)");
}

BiLSTMModel init_model(const ModelConfig& config, const EmbeddingMatrix& embedding, std::uint64_t seed) {
    config.validate();
    if (embedding.dim() != config.dim) throw ConfigError("embedding dimension does not match model dim");
    if (embedding.vocab_size() < 2) throw ConfigError("embedding matrix must contain PAD and OOV rows");

    BiLSTMModel model;
    model.config = config;
    model.embedding_trainable = embedding.trainable;
    model.params = ParameterSet::zeros(embedding.vocab_size(), config.dim, config.hidden);
    model.params.embedding = embedding.rows;
    model.params.embedding.row(0).setZero();

    Xorshift64Star rng(derive_seed(seed, kInitStream));
    const double w_range = std::sqrt(6.0 / static_cast<double>(config.dim + config.hidden));
    const double u_range = std::sqrt(6.0 / static_cast<double>(2 * config.hidden));
    for (LSTMCellParams* cell : {&model.params.forward_cell, &model.params.backward_cell}) {
        for (auto& w : cell->W) fill_uniform(w, w_range, rng);
        for (auto& u : cell->U) fill_uniform(u, u_range, rng);
        cell->b[kForgetGate].setConstant(1.0);
    }
    return model;
}

ForwardPass forward(const BiLSTMModel& model, const EncodedSample& sample, bool training, std::uint64_t rng_seed) {
    const ModelConfig& cfg = model.config;
    if (sample.ids.size() != cfg.max_len)
        throw ConfigError("sample length " + std::to_string(sample.ids.size()) + " does not match model max_len " +
                          std::to_string(cfg.max_len));
    const auto& P = model.params;
    if (static_cast<std::size_t>(P.embedding.cols()) != cfg.dim ||
        static_cast<std::size_t>(P.forward_cell.hidden()) != cfg.hidden)
        throw ConfigError("model parameters do not match model config");

    ForwardPass out;
    ForwardCache& cache = out.cache;
    cache.training = training;
    const std::size_t n = std::min(sample.true_length, sample.ids.size());
    const auto V = static_cast<TokenId>(P.embedding.rows());
    for (std::size_t t = 0; t < n; ++t) {
        const TokenId id = sample.ids[t];
        if (id < 0 || id >= V) throw DataError("token id " + std::to_string(id) + " outside the vocabulary");
        if (id != kPadId) cache.sequence.push_back(id);
    }

    Xorshift64Star rng(rng_seed);
    const auto D = static_cast<Eigen::Index>(cfg.dim);
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    const std::size_t T = cache.sequence.size();

    std::vector<Eigen::VectorXd> inputs(T);
    for (std::size_t t = 0; t < T; ++t) {
        inputs[t] = P.embedding.row(cache.sequence[t]).transpose();
        if (training && cfg.dropout_embed > 0.0) {
            Eigen::VectorXd mask(D);
            const double keep_scale = 1.0 / (1.0 - cfg.dropout_embed);
            for (Eigen::Index d = 0; d < D; ++d) mask(d) = rng.uniform() < cfg.dropout_embed ? 0.0 : keep_scale;
            inputs[t] = inputs[t].cwiseProduct(mask);
            cache.embed_mask.push_back(std::move(mask));
        }
    }

    Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H);
    cache.forward_steps.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        cache.forward_steps.push_back(cell_step(P.forward_cell, inputs[t], h, c));
        h = cache.forward_steps.back().h;
        c = cache.forward_steps.back().c;
    }
    const Eigen::VectorXd h_fwd = h;

    h.setZero();
    c.setZero();
    cache.backward_steps.reserve(T);
    for (std::size_t k = 0; k < T; ++k) {
        cache.backward_steps.push_back(cell_step(P.backward_cell, inputs[T - 1 - k], h, c));
        h = cache.backward_steps.back().h;
        c = cache.backward_steps.back().c;
    }

    cache.features.resize(2 * H);
    cache.features << h_fwd, h;
    cache.dropped = cache.features;
    if (training && cfg.dropout_output > 0.0) {
        cache.feature_mask.resize(2 * H);
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_output);
        for (Eigen::Index d = 0; d < 2 * H; ++d)
            cache.feature_mask(d) = rng.uniform() < cfg.dropout_output ? 0.0 : keep_scale;
        cache.dropped = cache.features.cwiseProduct(cache.feature_mask);
    }
    cache.logit = P.w_y.dot(cache.dropped) + P.b_y(0);
    cache.probability = sigmoid(cache.logit);
    out.probability = cache.probability;
    return out;
}

double loss_bce(double probability, int label) {
    const double p = std::clamp(probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return label ? -std::log(p) : -std::log1p(-p);
}

void accumulate_gradients(const BiLSTMModel& model, const ForwardCache& cache, int label, ParameterSet& grads,
                          double scale) {
    const auto& P = model.params;
    const Eigen::Index H = P.forward_cell.hidden();
    if (grads.embedding.rows() != P.embedding.rows() || grads.embedding.cols() != P.embedding.cols() ||
        grads.forward_cell.hidden() != H)
        throw ConfigError("gradient buffer does not match model shapes");
    const std::size_t T = cache.sequence.size();
    if (cache.forward_steps.size() != T || cache.backward_steps.size() != T || cache.features.size() != 2 * H)
        throw ConfigError("stale or missing forward cache");

    const double dlogit = cache.probability - static_cast<double>(label);
    grads.w_y += scale * dlogit * cache.dropped;
    grads.b_y(0) += scale * dlogit;

    Eigen::VectorXd dfeat = dlogit * P.w_y;
    if (cache.feature_mask.size() == dfeat.size()) dfeat = dfeat.cwiseProduct(cache.feature_mask);
    if (T == 0) return;

    std::vector<Eigen::VectorXd> dx(T, Eigen::VectorXd::Zero(P.embedding.cols()));
    bptt(P.forward_cell, cache.forward_steps, dfeat.head(H), grads.forward_cell, dx,
         [](std::size_t k) { return k; }, scale);
    bptt(P.backward_cell, cache.backward_steps, dfeat.tail(H), grads.backward_cell, dx,
         [T](std::size_t k) { return T - 1 - k; }, scale);

    for (std::size_t t = 0; t < T; ++t) {
        const TokenId id = cache.sequence[t];
        if (id == kPadId) continue;
        if (cache.embed_mask.size() == T) dx[t] = dx[t].cwiseProduct(cache.embed_mask[t]);
        grads.embedding.row(id) += scale * dx[t].transpose();
    }
    grads.embedding.row(kPadId).setZero();
}

ParameterSet backward(const BiLSTMModel& model, const ForwardCache& cache, int label) {
    ParameterSet grads = model.params.zeros_like();
    accumulate_gradients(model, cache, label, grads, 1.0);
    return grads;
}

void NadamState::validate() const {
    if (!(learning_rate > 0) || !(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1) || !(epsilon > 0))
        throw ConfigError("Nadam hyperparameters must be positive with betas in (0, 1)");
}

void nadam_step(std::span<const TensorRef> params, std::span<const TensorRef> grads, NadamState& state,
                const std::vector<bool>& skip) {
    state.validate();
    if (params.size() != grads.size()) throw ConfigError("parameter/gradient tensor count mismatch");
    if (!skip.empty() && skip.size() != params.size()) throw ConfigError("skip mask size mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].size() != grads[k].size()) throw ConfigError("shape mismatch in tensor " + params[k].name);
        if (!skip.empty() && skip[k]) continue;
        for (double g : grads[k].values())
            if (!std::isfinite(g)) throw NumericalError("non-finite gradient in tensor " + grads[k].name);
    }
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size())));
            state.second_moment.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size())));
        }
    }
    if (state.first_moment.size() != params.size()) throw ConfigError("optimizer state does not match parameters");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double b1 = state.beta1, b2 = state.beta2;
    const double bias1 = 1.0 - std::pow(b1, t);
    const double bias2 = 1.0 - std::pow(b2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!skip.empty() && skip[k]) continue;
        double* theta = params[k].data;
        const double* g = grads[k].data;
        double* m = state.first_moment[k].data();
        double* v = state.second_moment[k].data();
        const std::size_t n = params[k].size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / bias1;
            const double v_hat = v[j] / bias2;
            theta[j] -= state.learning_rate * (b1 * m_hat + (1.0 - b1) * g[j] / bias1) / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    NadamState{0, {}, {}, learning_rate, beta1, beta2, epsilon}.validate();
}

TrainResult train(BiLSTMModel& model, std::span<const EncodedSample> train_set, const TrainConfig& config,
                  const ProgressSink& progress) {
    config.validate();
    model.config.validate();
    if (train_set.empty()) throw DataError("training set is empty");

    NadamState state;
    state.learning_rate = config.learning_rate;
    state.beta1 = config.beta1;
    state.beta2 = config.beta2;
    state.epsilon = config.epsilon;

    std::vector<TensorRef> param_refs = model.params.tensors();
    std::vector<bool> skip(param_refs.size(), false);
    skip[0] = !model.embedding_trainable;

    ParameterSet grads = model.params.zeros_like();
    std::vector<TensorRef> grad_refs = grads.tensors();

    Xorshift64Star shuffle_rng(derive_seed(config.seed, kShuffleStream));
    const std::uint64_t dropout_base = derive_seed(config.seed, kDropoutStream);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    std::uint64_t sample_counter = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) portable_shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            for (const auto& g : grad_refs) std::fill_n(g.data, g.size(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const EncodedSample& s = train_set[order[k]];
                const ForwardPass pass = forward(model, s, true, splitmix64(dropout_base + sample_counter++));
                batch_loss += loss_bce(pass.probability, s.label);
                accumulate_gradients(model, pass.cache, s.label, grads, scale);
            }
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << batch_index
                    << "; parameter L2 norm " << std::sqrt(squared_norm(model.params))
                    << ", gradient L2 norm " << std::sqrt(squared_norm(grads));
                throw NumericalError(msg.str());
            }
            try {
                nadam_step(param_refs, grad_refs, state, skip);
            } catch (const NumericalError& e) {
                std::ostringstream msg;
                msg << e.what() << " at epoch " << epoch << ", batch " << batch_index << "; parameter L2 norm "
                    << std::sqrt(squared_norm(model.params));
                throw NumericalError(msg.str());
            }
            model.params.embedding.row(kPadId).setZero();
            epoch_loss += batch_loss;
        }
        const double mean = epoch_loss / static_cast<double>(train_set.size());
        result.loss_history.push_back(mean);
        if (progress) progress({epoch, mean});
    }
    return result;
}

double predict(const BiLSTMModel& model, const EncodedSample& sample) {
    return forward(model, sample, false).probability;
}

std::vector<double> predict(const BiLSTMModel& model, std::span<const EncodedSample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(predict(model, s));
    return out;
}

}  // namespace cbd
