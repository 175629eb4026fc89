#pragma once

// GRU, LSTM, and Transformer-encoder regressors over lag sequences plus
// static features. Each architecture consumes SequenceSample batches and is
// trained with Adam on MSE in the normalized domain, early-stopped on a
// chronological validation slice.

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "evload/features.hpp"
#include "evload/rng.hpp"
#include "evload/tensor.hpp"

namespace evload {

// Lag values ordered oldest first; FeatureMatrix stores lags most recent
// first (ascending offset), so rows are reversed here.
struct SequenceSample {
    std::vector<double> lag_sequence;
    std::vector<double> static_vec;
    double target = 0.0;
};

inline SequenceSample sample_from_row(const double* row, std::size_t n_cols,
                                      std::size_t n_lags, double target = 0.0) {
    SequenceSample s;
    s.lag_sequence.assign(n_lags, 0.0);
    for (std::size_t i = 0; i < n_lags; ++i)
        s.lag_sequence[i] = row[n_lags - 1 - i];
    s.static_vec.assign(row + n_lags, row + n_cols);
    s.target = target;
    return s;
}

inline std::vector<SequenceSample> samples_from_matrix(const FeatureMatrix& m,
                                                       std::size_t n_lags) {
    std::vector<SequenceSample> out;
    out.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        out.push_back(sample_from_row(m.row(r), m.n_cols, n_lags, m.target[r]));
    return out;
}

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch = 2048;
    int max_epochs = 200;
    int patience = 20;
    std::uint64_t seed = 0;
};

// Stop after `patience` consecutive epochs without validation improvement;
// epochs are 1-based, the best epoch's parameters are what training returns.
struct EarlyStopper {
    int patience;
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since = 0;

    bool update(int epoch, double val) {
        if (val < best) {
            best = val;
            best_epoch = epoch;
            since = 0;
            return false;
        }
        return ++since >= patience;
    }
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;
};

inline void write_history_csv(const TrainHistory& h, std::ostream& os) {
    os << "epoch,train_loss,val_loss\n";
    os.precision(10);
    for (std::size_t e = 0; e < h.train_loss.size(); ++e)
        os << e + 1 << "," << h.train_loss[e] << "," << h.val_loss[e] << "\n";
}

// --- cells ------------------------------------------------------------------

struct GruParams {
    nn::Tensor Wz, bz, Wr, br, Wh, bh;
};

inline nn::Tensor gru_cell(const nn::Tensor& x, const nn::Tensor& h_prev,
                           const GruParams& p) {
    using namespace nn;
    Tensor xh = concat(x, h_prev);
    Tensor z = sigmoid(add(matmul(xh, p.Wz), p.bz));
    Tensor r = sigmoid(add(matmul(xh, p.Wr), p.br));
    Tensor xrh = concat(x, mul(r, h_prev));
    Tensor cand = tanh_op(add(matmul(xrh, p.Wh), p.bh));
    Tensor ones = make_tensor(z.shape());
    for (auto& v : ones.data()) v = 1.0;
    return add(mul(sub(ones, z), h_prev), mul(z, cand));
}

struct LstmParams {
    nn::Tensor Wf, bf, Wi, bi, Wo, bo, Wg, bg;
};

inline std::pair<nn::Tensor, nn::Tensor> lstm_cell(const nn::Tensor& x,
                                                   const nn::Tensor& h_prev,
                                                   const nn::Tensor& c_prev,
                                                   const LstmParams& p) {
    using namespace nn;
    Tensor xh = concat(x, h_prev);
    Tensor f = sigmoid(add(matmul(xh, p.Wf), p.bf));
    Tensor i = sigmoid(add(matmul(xh, p.Wi), p.bi));
    Tensor o = sigmoid(add(matmul(xh, p.Wo), p.bo));
    Tensor g = tanh_op(add(matmul(xh, p.Wg), p.bg));
    Tensor c = add(mul(f, c_prev), mul(i, g));
    Tensor h = mul(o, tanh_op(c));
    return {h, c};
}

// --- transformer pieces -----------------------------------------------------

struct EncoderLayerParams {
    nn::Tensor Wq, bq, Wk, bk, Wv, bv, Wo, bo;  // attention
    nn::Tensor W1, b1, W2, b2;                  // feed-forward
};

// Pre-norm residual block: X + MHA(LN(X)), then + FF(LN(.)).
inline nn::Tensor encoder_layer(const nn::Tensor& X, const EncoderLayerParams& p,
                                int heads, double drop_rate, bool train,
                                RngStream* rng) {
    using namespace nn;
    const int d = X.shape().back();
    if (d % heads != 0) throw std::runtime_error("encoder: d_model % heads != 0");
    const int dk = d / heads;

    Tensor ln1 = layer_norm(X);
    Tensor q = add(matmul(ln1, p.Wq), p.bq);
    Tensor k = add(matmul(ln1, p.Wk), p.bk);
    Tensor v = add(matmul(ln1, p.Wv), p.bv);
    Tensor heads_out;
    for (int h = 0; h < heads; ++h) {
        Tensor qh = slice(q, h * dk, (h + 1) * dk);
        Tensor kh = slice(k, h * dk, (h + 1) * dk);
        Tensor vh = slice(v, h * dk, (h + 1) * dk);
        Tensor att = softmax(scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(dk)));
        if (train && rng) att = dropout(att, drop_rate, train, *rng);
        Tensor oh = matmul(att, vh);
        heads_out = h == 0 ? oh : concat(heads_out, oh);
    }
    Tensor mha = add(matmul(heads_out, p.Wo), p.bo);
    Tensor x1 = add(X, mha);

    Tensor ln2 = layer_norm(x1);
    Tensor ff = add(matmul(relu(add(matmul(ln2, p.W1), p.b1)), p.W2), p.b2);
    if (train && rng) ff = dropout(ff, drop_rate, train, *rng);
    return add(x1, ff);
}

// pe(pos, 2i) = sin(pos / 10000^{2i/d}); cos on odd dims.
inline std::vector<double> sinusoidal_encoding(int seq_len, int d_model) {
    std::vector<double> pe(static_cast<std::size_t>(seq_len) * d_model);
    for (int pos = 0; pos < seq_len; ++pos)
        for (int i = 0; i < d_model; ++i) {
            double angle = pos / std::pow(10000.0, 2.0 * (i / 2) / d_model);
            pe[pos * d_model + i] = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

// --- architectures ----------------------------------------------------------

class NeuralNet {
public:
    virtual ~NeuralNet() = default;

    nn::ParamSet& params() { return ps_; }
    const nn::ParamSet& params() const { return ps_; }
    int input_dim() const { return input_dim_; }

    // [B, 1] predictions for the batch; rng only consulted at train time.
    virtual nn::Tensor forward(const std::vector<const SequenceSample*>& batch,
                               bool train, RngStream* rng) = 0;

    std::vector<double> predict(const std::vector<SequenceSample>& samples,
                                int batch = 2048) {
        std::vector<double> out;
        out.reserve(samples.size());
        for (std::size_t at = 0; at < samples.size(); at += batch) {
            std::vector<const SequenceSample*> chunk;
            for (std::size_t i = at; i < std::min(samples.size(), at + batch); ++i)
                chunk.push_back(&samples[i]);
            auto y = forward(chunk, false, nullptr);
            out.insert(out.end(), y.data().begin(), y.data().end());
        }
        return out;
    }

protected:
    void check_batch(const std::vector<const SequenceSample*>& batch) const {
        if (batch.empty()) throw std::invalid_argument("forward: empty batch");
        for (const auto* s : batch)
            if (static_cast<int>(s->lag_sequence.size() ? 1 + s->static_vec.size()
                                                        : 0) != input_dim_ ||
                s->lag_sequence.size() != batch[0]->lag_sequence.size())
                throw std::invalid_argument("forward: sample schema mismatch");
    }

    // Step input x_t: [B, 1 + static_dim], lag scalar first.
    nn::Tensor step_input(const std::vector<const SequenceSample*>& batch,
                          std::size_t t) const {
        const int B = static_cast<int>(batch.size());
        nn::Tensor x = nn::make_tensor({B, input_dim_});
        for (int b = 0; b < B; ++b) {
            double* row = x.data().data() + b * input_dim_;
            row[0] = batch[b]->lag_sequence[t];
            std::copy(batch[b]->static_vec.begin(), batch[b]->static_vec.end(),
                      row + 1);
        }
        return x;
    }

    nn::ParamSet ps_;
    int input_dim_ = 0;
};

class GruNet : public NeuralNet {
public:
    GruNet(int static_dim, int hidden = 64, std::uint64_t seed = 0)
        : hidden_(hidden) {
        input_dim_ = 1 + static_dim;
        const int in = input_dim_ + hidden;
        cell_.Wz = ps_.add("gru.Wz", {in, hidden});
        cell_.bz = ps_.add("gru.bz", {hidden});
        cell_.Wr = ps_.add("gru.Wr", {in, hidden});
        cell_.br = ps_.add("gru.br", {hidden});
        cell_.Wh = ps_.add("gru.Wh", {in, hidden});
        cell_.bh = ps_.add("gru.bh", {hidden});
        head_w_ = ps_.add("head.w", {hidden, 1});
        head_b_ = ps_.add("head.b", {1});
        RngStream rng(seed, "gru-init");
        for (auto* w : {&cell_.Wz, &cell_.Wr, &cell_.Wh, &head_w_})
            nn::glorot_init(*w, rng);
    }

    nn::Tensor forward(const std::vector<const SequenceSample*>& batch, bool train,
                       RngStream*) override {
        (void)train;
        check_batch(batch);
        const int B = static_cast<int>(batch.size());
        nn::Tensor h = nn::make_tensor({B, hidden_});
        for (std::size_t t = 0; t < batch[0]->lag_sequence.size(); ++t)
            h = gru_cell(step_input(batch, t), h, cell_);
        return nn::add(nn::matmul(h, head_w_), head_b_);
    }

private:
    int hidden_;
    GruParams cell_;
    nn::Tensor head_w_, head_b_;
};

class LstmNet : public NeuralNet {
public:
    LstmNet(int static_dim, int hidden = 64, std::uint64_t seed = 0)
        : hidden_(hidden) {
        input_dim_ = 1 + static_dim;
        const int in = input_dim_ + hidden;
        cell_.Wf = ps_.add("lstm.Wf", {in, hidden});
        cell_.bf = ps_.add("lstm.bf", {hidden});
        cell_.Wi = ps_.add("lstm.Wi", {in, hidden});
        cell_.bi = ps_.add("lstm.bi", {hidden});
        cell_.Wo = ps_.add("lstm.Wo", {in, hidden});
        cell_.bo = ps_.add("lstm.bo", {hidden});
        cell_.Wg = ps_.add("lstm.Wg", {in, hidden});
        cell_.bg = ps_.add("lstm.bg", {hidden});
        head_w_ = ps_.add("head.w", {hidden, 1});
        head_b_ = ps_.add("head.b", {1});
        RngStream rng(seed, "lstm-init");
        for (auto* w : {&cell_.Wf, &cell_.Wi, &cell_.Wo, &cell_.Wg, &head_w_})
            nn::glorot_init(*w, rng);
    }

    nn::Tensor forward(const std::vector<const SequenceSample*>& batch, bool train,
                       RngStream*) override {
        (void)train;
        check_batch(batch);
        const int B = static_cast<int>(batch.size());
        nn::Tensor h = nn::make_tensor({B, hidden_});
        nn::Tensor c = nn::make_tensor({B, hidden_});
        for (std::size_t t = 0; t < batch[0]->lag_sequence.size(); ++t) {
            auto [h2, c2] = lstm_cell(step_input(batch, t), h, c, cell_);
            h = h2;
            c = c2;
        }
        return nn::add(nn::matmul(h, head_w_), head_b_);
    }

private:
    int hidden_;
    LstmParams cell_;
    nn::Tensor head_w_, head_b_;
};

struct TransformerConfig {
    int d_model = 128;
    int heads = 8;
    int layers = 4;
    int ff_dim = 256;
    double dropout = 0.1;

    void validate() const {
        if (d_model % heads != 0)
            throw std::invalid_argument("transformer: d_model % heads != 0");
    }
};

class TransformerNet : public NeuralNet {
public:
    TransformerNet(int static_dim, TransformerConfig cfg = {},
                   std::uint64_t seed = 0)
        : cfg_(cfg) {
        cfg_.validate();
        input_dim_ = 1 + static_dim;
        embed_w_ = ps_.add("embed.w", {input_dim_, cfg_.d_model});
        embed_b_ = ps_.add("embed.b", {cfg_.d_model});
        RngStream rng(seed, "transformer-init");
        nn::glorot_init(embed_w_, rng);
        layers_.resize(cfg_.layers);
        for (int l = 0; l < cfg_.layers; ++l) {
            auto& p = layers_[l];
            std::string pre = "enc" + std::to_string(l) + ".";
            p.Wq = ps_.add(pre + "Wq", {cfg_.d_model, cfg_.d_model});
            p.bq = ps_.add(pre + "bq", {cfg_.d_model});
            p.Wk = ps_.add(pre + "Wk", {cfg_.d_model, cfg_.d_model});
            p.bk = ps_.add(pre + "bk", {cfg_.d_model});
            p.Wv = ps_.add(pre + "Wv", {cfg_.d_model, cfg_.d_model});
            p.bv = ps_.add(pre + "bv", {cfg_.d_model});
            p.Wo = ps_.add(pre + "Wo", {cfg_.d_model, cfg_.d_model});
            p.bo = ps_.add(pre + "bo", {cfg_.d_model});
            p.W1 = ps_.add(pre + "W1", {cfg_.d_model, cfg_.ff_dim});
            p.b1 = ps_.add(pre + "b1", {cfg_.ff_dim});
            p.W2 = ps_.add(pre + "W2", {cfg_.ff_dim, cfg_.d_model});
            p.b2 = ps_.add(pre + "b2", {cfg_.d_model});
            for (auto* w : {&p.Wq, &p.Wk, &p.Wv, &p.Wo, &p.W1, &p.W2})
                nn::glorot_init(*w, rng);
        }
        head_w_ = ps_.add("head.w", {cfg_.d_model, 1});
        head_b_ = ps_.add("head.b", {1});
        nn::glorot_init(head_w_, rng);
    }

    nn::Tensor forward(const std::vector<const SequenceSample*>& batch, bool train,
                       RngStream* rng) override {
        check_batch(batch);
        const int B = static_cast<int>(batch.size());
        const int L = static_cast<int>(batch[0]->lag_sequence.size());
        nn::Tensor in = nn::make_tensor({B, L, input_dim_});
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < L; ++t) {
                double* row = in.data().data() +
                              (static_cast<std::size_t>(b) * L + t) * input_dim_;
                row[0] = batch[b]->lag_sequence[t];
                std::copy(batch[b]->static_vec.begin(),
                          batch[b]->static_vec.end(), row + 1);
            }
        nn::Tensor x = nn::add(nn::matmul(in, embed_w_), embed_b_);
        auto pe = sinusoidal_encoding(L, cfg_.d_model);
        nn::Tensor pos = nn::make_tensor({B, L, cfg_.d_model});
        for (int b = 0; b < B; ++b)
            std::copy(pe.begin(), pe.end(),
                      pos.data().begin() + static_cast<std::size_t>(b) * pe.size());
        x = nn::add(x, pos);
        for (const auto& layer : layers_)
            x = encoder_layer(x, layer, cfg_.heads, cfg_.dropout, train, rng);
        nn::Tensor pooled = nn::reduce_mean(x, 1);  // mean over positions
        return nn::add(nn::matmul(pooled, head_w_), head_b_);
    }

    const TransformerConfig& config() const { return cfg_; }

private:
    TransformerConfig cfg_;
    nn::Tensor embed_w_, embed_b_, head_w_, head_b_;
    std::vector<EncoderLayerParams> layers_;
};

// --- training ---------------------------------------------------------------

// Rows [0, n_train) train, the rest validate; returns per-epoch losses and
// leaves the network holding the best epoch's parameters.
inline TrainHistory train_model(NeuralNet& net,
                                const std::vector<SequenceSample>& samples,
                                std::size_t n_train, const TrainConfig& cfg) {
    if (n_train == 0 || n_train >= samples.size())
        throw std::invalid_argument("train: empty train or validation slice");

    RngStream shuffle_rng(cfg.seed, "epoch-shuffle");
    RngStream dropout_rng(cfg.seed, "dropout");
    nn::Adam opt(cfg.learning_rate);
    TrainHistory hist;
    EarlyStopper stop{cfg.patience};
    std::vector<double> best_params = net.params().snapshot();

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    auto eval_loss = [&](std::size_t from, std::size_t to) {
        double ss = 0.0;
        for (std::size_t at = from; at < to; at += cfg.batch) {
            std::vector<const SequenceSample*> chunk;
            for (std::size_t i = at; i < std::min(to, at + cfg.batch); ++i)
                chunk.push_back(&samples[i]);
            auto y = net.forward(chunk, false, nullptr);
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                double d = y.data()[i] - chunk[i]->target;
                ss += d * d;
            }
        }
        return ss / static_cast<double>(to - from);
    };

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double train_ss = 0.0;
        for (std::size_t at = 0; at < n_train; at += cfg.batch) {
            std::vector<const SequenceSample*> chunk;
            std::vector<double> targets;
            for (std::size_t i = at; i < std::min(n_train, at + cfg.batch); ++i) {
                chunk.push_back(&samples[order[i]]);
                targets.push_back(samples[order[i]].target);
            }
            net.params().zero_grad();
            nn::Tape tape;
            {
                nn::TapeScope scope(tape);
                auto y = net.forward(chunk, true, &dropout_rng);
                auto t = nn::make_tensor({static_cast<int>(chunk.size()), 1},
                                         std::move(targets));
                auto loss = nn::mse_loss(y, t);
                if (!std::isfinite(loss.scalar()))
                    throw std::runtime_error("train: loss diverged (non-finite)");
                tape.backward(loss);
                train_ss += loss.scalar() * static_cast<double>(chunk.size());
            }
            opt.step(net.params());
        }
        hist.train_loss.push_back(train_ss / static_cast<double>(n_train));
        double val = eval_loss(n_train, samples.size());
        hist.val_loss.push_back(val);
        bool improved = val < stop.best;
        bool done = stop.update(epoch, val);
        if (improved) best_params = net.params().snapshot();
        if (done) break;
    }
    hist.best_epoch = stop.best_epoch;
    net.params().restore(best_params);
    return hist;
}

}  // namespace evload
