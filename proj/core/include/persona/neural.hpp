#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "persona/partition.hpp"
#include "persona/rng.hpp"
#include "persona/text.hpp"
#include "persona/treebank.hpp"

namespace persona {

/// Row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols); }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols); }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }

    bool operator==(const Matrix&) const = default;
};

/// Where the dropout mask applies: the hidden tanh activations (default) or
/// the pooled embedding vector.
enum class DropoutPlacement { hidden, pooled };

struct Hyperparams {
    int embedding_dim = 35;
    int hidden_dim = 50;
    double dropout_keep = 0.5;
    DropoutPlacement dropout_placement = DropoutPlacement::hidden;
    double lr0 = 1e-3;
    double lr_decay = 0.95;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 32;
    int eval_every_batches = 100;
    // Batches without dev improvement before stopping. -1 means unset; the
    // runner derives ceil(5 * |global train| / batch_size).
    int patience_batches = -1;
    long max_batches = 20000;
    std::uint64_t seed = 0;

    bool operator==(const Hyperparams&) const = default;
};

/// ceil(5 * global_train_size / batch_size): the early-stopping window
/// equivalent to five epochs on the full train set.
int derived_patience(std::size_t global_train_size, int batch_size);

/// One user's private classifier: mean of word embeddings into a two-layer
/// tanh network with a sigmoid output.
struct ModelParams {
    Matrix embeddings;         // vocab_size x d
    Matrix w1;                 // d x h
    std::vector<double> b1;    // h
    std::vector<double> w2;    // h
    double b2 = 0.0;
    Vocab vocab;
    Hyperparams hyper;
};

/// Gradient (or any accumulator) shaped like ModelParams.
struct Gradients {
    Matrix embeddings;
    Matrix w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    static Gradients zeros_like(const ModelParams& params);
    void clear();
};

struct AdamState {
    Gradients m;
    Gradients v;
    long t = 0;

    static AdamState zeros_like(const ModelParams& params);
};

ModelParams init_params(const Vocab& vocab, const Hyperparams& hyper, Rng& rng);

/// p = sigma(w2 . dropout(tanh(W1^T mean(emb[idx]) + b1)) + b2). The empty
/// index list (all tokens OOV) returns exactly 0.5.
double forward_infer(const ModelParams& params, std::span<const int> token_indices);

/// Training-mode forward: inverted dropout on the hidden activations,
/// masks drawn from rng (no draws when dropout_keep == 1).
double forward_train(const ModelParams& params, std::span<const int> token_indices, Rng& rng);

/// Exact gradient of BCE(forward_train(.), target) for every parameter;
/// embedding rows of absent words get zero gradient. target in [0,1].
Gradients grad(const ModelParams& params, std::span<const int> token_indices, double target,
               Rng& rng);

/// grad() scaled by `scale`, added into `acc` without allocating.
void accumulate_grad(const ModelParams& params, std::span<const int> token_indices, double target,
                     Rng& rng, double scale, Gradients& acc);

/// Standard Adam with bias correction, applied in place; state.t increments.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr);

struct EvalSummary {
    long correct = 0;
    long total = 0;

    double accuracy() const { return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
    EvalSummary& operator+=(const EvalSummary& other) {
        correct += other.correct;
        total += other.total;
        return *this;
    }
    bool operator==(const EvalSummary&) const = default;
};

/// Threshold rule: p >= 0.5 predicts positive.
EvalSummary evaluate(const ModelParams& params, std::span<const Sentence> sentences);

/// Minibatch Adam with dev-driven LR decay and early stopping; returns the
/// best-dev-accuracy snapshot. Deterministic given hyper.seed.
ModelParams train(std::span<const Sentence> train_examples, std::span<const Sentence> dev,
                  const Vocab& vocab, const Hyperparams& hyper);

/// Convenience overload: vocab built from the shard's train sentences only.
ModelParams train(const UserShard& shard, const Hyperparams& hyper,
                  OovPolicy oov = OovPolicy::omit);

/// Flat binary model artifact (versioned; bit-exact round-trip).
std::string model_to_bytes(const ModelParams& params);
ModelParams model_from_bytes(std::string_view bytes);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace persona
