#include "persona/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr char kModelMagic[] = "persona-model";
constexpr std::uint32_t kModelVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_indices(const ModelParams& params, std::span<const int> idx) {
    for (int i : idx) {
        if (i < 0 || i >= params.embeddings.rows) {
            throw std::out_of_range("token index out of range: " + std::to_string(i));
        }
    }
}

struct ForwardScratch {
    std::vector<int> sorted_idx;      // canonical pooling order
    std::vector<double> pooled;       // d, after any pooled-placement mask
    std::vector<double> pooled_mask;  // d; empty means identity
    std::vector<double> hidden;       // h, tanh activations before dropout
    std::vector<double> mask;         // h, inverted-dropout multipliers
    std::vector<double> dropped;      // h
};

// Shared forward pass. With keep == 1 no rng draws happen and the result
// equals the inference path exactly. Pooling sums in sorted index order so
// the output is bit-identical under any permutation of the input.
double forward_impl(const ModelParams& params, std::span<const int> idx, Rng* rng,
                    ForwardScratch& s) {
    const int d = params.w1.rows;
    const int h = params.w1.cols;
    s.sorted_idx.assign(idx.begin(), idx.end());
    std::sort(s.sorted_idx.begin(), s.sorted_idx.end());
    s.pooled.assign(static_cast<std::size_t>(d), 0.0);
    for (int i : s.sorted_idx) {
        const double* row = params.embeddings.row(i);
        for (int k = 0; k < d; ++k) s.pooled[static_cast<std::size_t>(k)] += row[k];
    }
    const double inv_n = 1.0 / static_cast<double>(idx.size());
    for (double& x : s.pooled) x *= inv_n;

    const double keep = rng ? params.hyper.dropout_keep : 1.0;
    const bool on_pooled = params.hyper.dropout_placement == DropoutPlacement::pooled;
    s.pooled_mask.clear();
    if (keep < 1.0 && on_pooled) {
        s.pooled_mask.resize(static_cast<std::size_t>(d));
        const double inv_keep = 1.0 / keep;
        for (int k = 0; k < d; ++k) {
            const double m = rng->next_uniform() < keep ? inv_keep : 0.0;
            s.pooled_mask[static_cast<std::size_t>(k)] = m;
            s.pooled[static_cast<std::size_t>(k)] *= m;
        }
    }

    s.hidden.assign(static_cast<std::size_t>(h), 0.0);
    for (int k = 0; k < d; ++k) {
        const double xk = s.pooled[static_cast<std::size_t>(k)];
        const double* row = params.w1.row(k);
        for (int j = 0; j < h; ++j) s.hidden[static_cast<std::size_t>(j)] += xk * row[j];
    }
    for (int j = 0; j < h; ++j) {
        s.hidden[static_cast<std::size_t>(j)] = std::tanh(s.hidden[static_cast<std::size_t>(j)] + params.b1[static_cast<std::size_t>(j)]);
    }

    s.dropped.resize(static_cast<std::size_t>(h));
    if (keep < 1.0 && !on_pooled) {
        s.mask.resize(static_cast<std::size_t>(h));
        const double inv_keep = 1.0 / keep;
        for (int j = 0; j < h; ++j) {
            s.mask[static_cast<std::size_t>(j)] = rng->next_uniform() < keep ? inv_keep : 0.0;
            s.dropped[static_cast<std::size_t>(j)] = s.hidden[static_cast<std::size_t>(j)] * s.mask[static_cast<std::size_t>(j)];
        }
    } else {
        s.mask.assign(static_cast<std::size_t>(h), 1.0);
        s.dropped = s.hidden;
    }

    double logit = params.b2;
    for (int j = 0; j < h; ++j) logit += params.w2[static_cast<std::size_t>(j)] * s.dropped[static_cast<std::size_t>(j)];
    return sigmoid(logit);
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const Hyperparams& hp, double lr, double bc1, double bc2) {
    const std::size_t n = param.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = hp.adam_beta1 * m[i] + (1.0 - hp.adam_beta1) * g;
        v[i] = hp.adam_beta2 * v[i] + (1.0 - hp.adam_beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + hp.adam_eps);
    }
}

// Serialization helpers; the artifact is little-endian (asserted on load by
// the magic/version check being meaningful only on matching layouts).
void put_u32(std::string& out, std::uint32_t x) { out.append(reinterpret_cast<const char*>(&x), sizeof(x)); }
void put_u64(std::string& out, std::uint64_t x) { out.append(reinterpret_cast<const char*>(&x), sizeof(x)); }
void put_i32(std::string& out, std::int32_t x) { out.append(reinterpret_cast<const char*>(&x), sizeof(x)); }
void put_i64(std::string& out, std::int64_t x) { out.append(reinterpret_cast<const char*>(&x), sizeof(x)); }
void put_f64(std::string& out, double x) { out.append(reinterpret_cast<const char*>(&x), sizeof(x)); }

void put_doubles(std::string& out, std::span<const double> xs) {
    put_u64(out, xs.size());
    out.append(reinterpret_cast<const char*>(xs.data()), xs.size() * sizeof(double));
}

struct ByteReader {
    std::string_view bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw DataError("model artifact truncated");
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        T x;
        std::memcpy(&x, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return x;
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(bytes.substr(pos, n));
        pos += n;
        return s;
    }
    std::vector<double> get_doubles() {
        const auto n = get<std::uint64_t>();
        need(n * sizeof(double));
        std::vector<double> xs(n);
        std::memcpy(xs.data(), bytes.data() + pos, n * sizeof(double));
        pos += n * sizeof(double);
        return xs;
    }
};

}  // namespace

int derived_patience(std::size_t global_train_size, int batch_size) {
    if (batch_size < 1) throw DataError("derived_patience: batch_size must be >= 1");
    const std::size_t b = static_cast<std::size_t>(batch_size);
    return static_cast<int>((5 * global_train_size + b - 1) / b);
}

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    g.embeddings = Matrix(params.embeddings.rows, params.embeddings.cols);
    g.w1 = Matrix(params.w1.rows, params.w1.cols);
    g.b1.assign(params.b1.size(), 0.0);
    g.w2.assign(params.w2.size(), 0.0);
    g.b2 = 0.0;
    return g;
}

void Gradients::clear() {
    std::fill(embeddings.data.begin(), embeddings.data.end(), 0.0);
    std::fill(w1.data.begin(), w1.data.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    b2 = 0.0;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState state;
    state.m = Gradients::zeros_like(params);
    state.v = Gradients::zeros_like(params);
    state.t = 0;
    return state;
}

ModelParams init_params(const Vocab& vocab, const Hyperparams& hyper, Rng& rng) {
    const int d = hyper.embedding_dim;
    const int h = hyper.hidden_dim;
    ModelParams params;
    params.vocab = vocab;
    params.hyper = hyper;
    params.embeddings = Matrix(vocab.size(), d);
    for (double& x : params.embeddings.data) x = (rng.next_uniform() * 2.0 - 1.0) * 0.05;
    params.w1 = Matrix(d, h);
    const double w1_bound = std::sqrt(6.0 / static_cast<double>(d + h));
    for (double& x : params.w1.data) x = (rng.next_uniform() * 2.0 - 1.0) * w1_bound;
    params.b1.assign(static_cast<std::size_t>(h), 0.0);
    const double w2_bound = std::sqrt(6.0 / static_cast<double>(h + 1));
    params.w2.resize(static_cast<std::size_t>(h));
    for (double& x : params.w2) x = (rng.next_uniform() * 2.0 - 1.0) * w2_bound;
    params.b2 = 0.0;
    return params;
}

double forward_infer(const ModelParams& params, std::span<const int> token_indices) {
    check_indices(params, token_indices);
    if (token_indices.empty()) return 0.5;
    ForwardScratch s;
    return forward_impl(params, token_indices, nullptr, s);
}

double forward_train(const ModelParams& params, std::span<const int> token_indices, Rng& rng) {
    check_indices(params, token_indices);
    if (token_indices.empty()) return 0.5;
    ForwardScratch s;
    return forward_impl(params, token_indices, &rng, s);
}

void accumulate_grad(const ModelParams& params, std::span<const int> token_indices, double target,
                     Rng& rng, double scale, Gradients& acc) {
    check_indices(params, token_indices);
    if (token_indices.empty()) return;  // constant output, zero gradient

    const int d = params.w1.rows;
    const int h = params.w1.cols;
    ForwardScratch s;
    const double p = forward_impl(params, token_indices, &rng, s);

    const double delta2 = (p - target) * scale;  // dBCE/dlogit, scaled
    acc.b2 += delta2;
    std::vector<double> dz1(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        acc.w2[sj] += delta2 * s.dropped[sj];
        const double da = delta2 * params.w2[sj] * s.mask[sj];
        dz1[sj] = da * (1.0 - s.hidden[sj] * s.hidden[sj]);
        acc.b1[sj] += dz1[sj];
    }

    std::vector<double> dx(static_cast<std::size_t>(d), 0.0);
    for (int k = 0; k < d; ++k) {
        const std::size_t sk = static_cast<std::size_t>(k);
        const double xk = s.pooled[sk];
        const double* w1_row = params.w1.row(k);
        double* g1_row = acc.w1.row(k);
        double acc_dx = 0.0;
        for (int j = 0; j < h; ++j) {
            g1_row[j] += xk * dz1[static_cast<std::size_t>(j)];
            acc_dx += w1_row[j] * dz1[static_cast<std::size_t>(j)];
        }
        // back through a pooled-placement mask, when one was drawn
        dx[sk] = s.pooled_mask.empty() ? acc_dx : acc_dx * s.pooled_mask[sk];
    }

    const double inv_n = 1.0 / static_cast<double>(token_indices.size());
    for (int i : token_indices) {
        double* g_row = acc.embeddings.row(i);
        for (int k = 0; k < d; ++k) g_row[k] += dx[static_cast<std::size_t>(k)] * inv_n;
    }
}

Gradients grad(const ModelParams& params, std::span<const int> token_indices, double target,
               Rng& rng) {
    Gradients g = Gradients::zeros_like(params);
    accumulate_grad(params, token_indices, target, rng, 1.0, g);
    return g;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr) {
    if (grads.embeddings.rows != params.embeddings.rows || grads.w1.rows != params.w1.rows ||
        grads.b1.size() != params.b1.size() || grads.w2.size() != params.w2.size()) {
        throw DataError("adam_step: gradient shape mismatch");
    }
    state.t += 1;
    const Hyperparams& hp = params.hyper;
    const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(state.t));
    adam_update(params.embeddings.data, grads.embeddings.data, state.m.embeddings.data,
                state.v.embeddings.data, hp, lr, bc1, bc2);
    adam_update(params.w1.data, grads.w1.data, state.m.w1.data, state.v.w1.data, hp, lr, bc1, bc2);
    adam_update(params.b1, grads.b1, state.m.b1, state.v.b1, hp, lr, bc1, bc2);
    adam_update(params.w2, grads.w2, state.m.w2, state.v.w2, hp, lr, bc1, bc2);
    std::span<double> b2{&params.b2, 1};
    std::span<const double> gb2{&grads.b2, 1};
    std::span<double> mb2{&state.m.b2, 1};
    std::span<double> vb2{&state.v.b2, 1};
    adam_update(b2, gb2, mb2, vb2, hp, lr, bc1, bc2);
}

EvalSummary evaluate(const ModelParams& params, std::span<const Sentence> sentences) {
    EvalSummary summary;
    summary.total = static_cast<long>(sentences.size());
    for (const auto& sentence : sentences) {
        const std::vector<int> idx = params.vocab.encode(sentence.tokens);
        const double p = forward_infer(params, idx);
        const bool predicted_positive = p >= 0.5;
        if (predicted_positive == (sentence.label == Polarity::positive)) ++summary.correct;
    }
    return summary;
}

ModelParams train(std::span<const Sentence> train_examples, std::span<const Sentence> dev,
                  const Vocab& vocab, const Hyperparams& hyper) {
    if (train_examples.empty()) throw DataError("train: empty train shard");
    if (dev.empty()) throw DataError("train: empty dev shard");
    if (hyper.patience_batches < 0) throw DataError("train: patience_batches unset");

    Rng rng(hyper.seed);
    ModelParams params = init_params(vocab, hyper, rng);

    std::vector<std::vector<int>> enc_train;
    std::vector<double> targets;
    enc_train.reserve(train_examples.size());
    targets.reserve(train_examples.size());
    for (const auto& s : train_examples) {
        enc_train.push_back(vocab.encode(s.tokens));
        targets.push_back(s.label == Polarity::positive ? 1.0 : 0.0);
    }
    std::vector<std::vector<int>> enc_dev;
    std::vector<bool> dev_positive;
    enc_dev.reserve(dev.size());
    for (const auto& s : dev) {
        enc_dev.push_back(vocab.encode(s.tokens));
        dev_positive.push_back(s.label == Polarity::positive);
    }
    auto dev_accuracy = [&](const ModelParams& m) {
        long correct = 0;
        ForwardScratch s;
        for (std::size_t i = 0; i < enc_dev.size(); ++i) {
            const double p = enc_dev[i].empty() ? 0.5 : forward_impl(m, enc_dev[i], nullptr, s);
            if ((p >= 0.5) == static_cast<bool>(dev_positive[i]) ) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(enc_dev.size());
    };

    ModelParams best = params;
    double best_acc = dev_accuracy(params);
    long last_improve_batch = 0;

    AdamState state = AdamState::zeros_like(params);
    Gradients batch_grad = Gradients::zeros_like(params);
    double lr = hyper.lr0;
    long batch = 0;

    std::vector<std::size_t> order(train_examples.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t batch_size = static_cast<std::size_t>(hyper.batch_size);
    while (batch < hyper.max_batches) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            batch_grad.clear();
            const double scale = 1.0 / static_cast<double>(end - start);
            for (std::size_t i = start; i < end; ++i) {
                accumulate_grad(params, enc_train[order[i]], targets[order[i]], rng, scale,
                                batch_grad);
            }
            adam_step(params, batch_grad, state, lr);
            ++batch;

            if (hyper.eval_every_batches > 0 && batch % hyper.eval_every_batches == 0) {
                if (batch - last_improve_batch >= hyper.patience_batches) return best;
                const double acc = dev_accuracy(params);
                if (acc > best_acc) {
                    best_acc = acc;
                    best = params;
                    last_improve_batch = batch;
                } else {
                    lr *= hyper.lr_decay;
                }
            }
            if (batch >= hyper.max_batches) break;
        }
    }
    return best;
}

ModelParams train(const UserShard& shard, const Hyperparams& hyper, OovPolicy oov) {
    if (shard.train.empty()) throw DataError("train: empty train shard");
    const Vocab vocab = build_vocab(shard.train, oov);
    return train(shard.train, shard.dev, vocab, hyper);
}

std::string model_to_bytes(const ModelParams& params) {
    std::string out;
    out.append(kModelMagic);
    put_u32(out, kModelVersion);
    const Hyperparams& hp = params.hyper;
    put_i32(out, hp.embedding_dim);
    put_i32(out, hp.hidden_dim);
    put_f64(out, hp.dropout_keep);
    out.push_back(hp.dropout_placement == DropoutPlacement::pooled ? 1 : 0);
    put_f64(out, hp.lr0);
    put_f64(out, hp.lr_decay);
    put_f64(out, hp.adam_beta1);
    put_f64(out, hp.adam_beta2);
    put_f64(out, hp.adam_eps);
    put_i32(out, hp.batch_size);
    put_i32(out, hp.eval_every_batches);
    put_i32(out, hp.patience_batches);
    put_i64(out, hp.max_batches);
    put_u64(out, hp.seed);
    out.push_back(params.vocab.oov_policy() == OovPolicy::unk ? 1 : 0);
    put_u64(out, static_cast<std::uint64_t>(params.vocab.size()));
    for (int i = 0; i < params.vocab.size(); ++i) {
        const std::string& w = params.vocab.word(i);
        put_u32(out, static_cast<std::uint32_t>(w.size()));
        out.append(w);
    }
    put_i32(out, params.embeddings.rows);
    put_i32(out, params.embeddings.cols);
    put_doubles(out, params.embeddings.data);
    put_i32(out, params.w1.rows);
    put_i32(out, params.w1.cols);
    put_doubles(out, params.w1.data);
    put_doubles(out, params.b1);
    put_doubles(out, params.w2);
    put_f64(out, params.b2);
    return out;
}

ModelParams model_from_bytes(std::string_view bytes) {
    ByteReader r{bytes};
    const std::string magic = r.get_string(sizeof(kModelMagic) - 1);
    if (magic != kModelMagic) throw DataError("not a model artifact (bad magic)");
    const auto version = r.get<std::uint32_t>();
    if (version != kModelVersion) {
        throw DataError("unsupported model artifact version: " + std::to_string(version));
    }
    ModelParams params;
    Hyperparams hp;
    hp.embedding_dim = r.get<std::int32_t>();
    hp.hidden_dim = r.get<std::int32_t>();
    hp.dropout_keep = r.get<double>();
    hp.dropout_placement = r.get<char>() ? DropoutPlacement::pooled : DropoutPlacement::hidden;
    hp.lr0 = r.get<double>();
    hp.lr_decay = r.get<double>();
    hp.adam_beta1 = r.get<double>();
    hp.adam_beta2 = r.get<double>();
    hp.adam_eps = r.get<double>();
    hp.batch_size = r.get<std::int32_t>();
    hp.eval_every_batches = r.get<std::int32_t>();
    hp.patience_batches = r.get<std::int32_t>();
    hp.max_batches = r.get<std::int64_t>();
    hp.seed = r.get<std::uint64_t>();
    params.hyper = hp;
    const OovPolicy policy = r.get<char>() ? OovPolicy::unk : OovPolicy::omit;
    const auto vocab_size = r.get<std::uint64_t>();
    std::vector<std::string> words;
    words.reserve(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        const auto len = r.get<std::uint32_t>();
        words.push_back(r.get_string(len));
    }
    params.vocab = vocab_from_words(std::move(words), policy);
    params.embeddings.rows = r.get<std::int32_t>();
    params.embeddings.cols = r.get<std::int32_t>();
    params.embeddings.data = r.get_doubles();
    params.w1.rows = r.get<std::int32_t>();
    params.w1.cols = r.get<std::int32_t>();
    params.w1.data = r.get_doubles();
    params.b1 = r.get_doubles();
    params.w2 = r.get_doubles();
    params.b2 = r.get<double>();
    if (r.pos != bytes.size()) throw DataError("model artifact has trailing bytes");
    return params;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());
    const std::string bytes = model_to_bytes(params);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing model file: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_bytes(bytes);
}

}  // namespace persona
