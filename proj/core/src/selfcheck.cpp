#include "persona/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "persona/fedeval.hpp"
#include "persona/neural.hpp"
#include "persona/rng.hpp"
#include "persona/synth.hpp"
#include "persona/text.hpp"

namespace persona {

namespace {

double bce(double p, double y) { return -y * std::log(p) - (1.0 - y) * std::log(1.0 - p); }

// Every parameter of the model, flattened for perturbation.
std::vector<double*> parameter_refs(ModelParams& params) {
    std::vector<double*> refs;
    for (double& x : params.embeddings.data) refs.push_back(&x);
    for (double& x : params.w1.data) refs.push_back(&x);
    for (double& x : params.b1) refs.push_back(&x);
    for (double& x : params.w2) refs.push_back(&x);
    refs.push_back(&params.b2);
    return refs;
}

std::vector<double> gradient_values(const Gradients& grads) {
    std::vector<double> values;
    for (double x : grads.embeddings.data) values.push_back(x);
    for (double x : grads.w1.data) values.push_back(x);
    for (double x : grads.b1) values.push_back(x);
    for (double x : grads.w2) values.push_back(x);
    values.push_back(grads.b2);
    return values;
}

std::vector<Sentence> synth_sentences(int count, std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.neutral_frac = 0.0;
    Rng rng = Rng(seed).split("sentences");
    std::vector<Sentence> sentences;
    int id = 0;
    for (const auto& tree : synth_trees(spec, count, rng)) {
        auto [tokens, root_label] = sentence_of(tree);
        const auto label = binarize(root_label);
        if (!label) continue;
        Sentence s;
        s.tokens = std::move(tokens);
        s.label = *label;
        s.id = id++;
        sentences.push_back(std::move(s));
    }
    return sentences;
}

}  // namespace

CheckResult check_rng_reference() {
    CheckResult result{"rng-reference", false, ""};
    // Frozen from an independently compiled copy of the published reference
    // implementation (seed 42).
    const std::uint64_t expected_u64[] = {15021278609987233951ULL, 5881210131331364753ULL,
                                          18149643915985481100ULL, 12933668939759105464ULL,
                                          14637574242682825331ULL};
    Rng rng(42);
    for (std::uint64_t expected : expected_u64) {
        if (rng.next_u64() != expected) {
            result.details = "next_u64 sequence diverges from the pinned reference";
            return result;
        }
    }
    const std::uint64_t expected_below6[] = {1, 5, 0, 4, 5, 1, 2, 0};
    Rng rng2(42);
    for (std::uint64_t expected : expected_below6) {
        if (rng2.next_below(6) != expected) {
            result.details = "next_below(6) sequence diverges from the pinned reference";
            return result;
        }
    }
    result.passed = true;
    result.details = "matches pinned reference vectors (seed 42)";
    return result;
}

CheckResult check_gradients(int configurations, double step, double tolerance, std::uint64_t seed) {
    CheckResult result{"gradient-check", false, ""};
    Rng rng(seed);
    double max_rel_err = 0.0;

    for (int c = 0; c < configurations; ++c) {
        const int vocab_size = 5 + static_cast<int>(rng.next_below(16));
        const int d = 2 + static_cast<int>(rng.next_below(5));
        const int h = 2 + static_cast<int>(rng.next_below(7));
        std::vector<std::string> words;
        for (int i = 0; i < vocab_size; ++i) words.push_back("w" + std::to_string(i));
        const Vocab vocab = vocab_from_words(std::move(words), OovPolicy::omit);

        Hyperparams hyper;
        hyper.embedding_dim = d;
        hyper.hidden_dim = h;
        hyper.dropout_keep = 1.0;  // disabled for finite differences
        Rng init_rng = rng.split("init/" + std::to_string(c));
        ModelParams params = init_params(vocab, hyper, init_rng);

        const int len = 1 + static_cast<int>(rng.next_below(12));
        std::vector<int> idx;
        for (int i = 0; i < len; ++i) idx.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(vocab_size))));
        const double target = static_cast<double>(rng.next_below(2));

        Rng grad_rng(0);
        const std::vector<double> analytic = gradient_values(grad(params, idx, target, grad_rng));

        const std::vector<double*> refs = parameter_refs(params);
        for (std::size_t k = 0; k < refs.size(); ++k) {
            const double saved = *refs[k];
            *refs[k] = saved + step;
            const double up = bce(forward_infer(params, idx), target);
            *refs[k] = saved - step;
            const double down = bce(forward_infer(params, idx), target);
            *refs[k] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
            const double rel = std::abs(analytic[k] - numeric) / denom;
            max_rel_err = std::max(max_rel_err, rel);
        }
    }

    std::ostringstream details;
    details << configurations << " configurations, max relative error " << max_rel_err;
    result.details = details.str();
    result.passed = max_rel_err < tolerance;
    return result;
}

CheckResult check_fedeval_exactness(int rounds, std::uint64_t seed) {
    CheckResult result{"fedeval-exactness", false, ""};
    Rng rng(seed);
    for (int round = 0; round < rounds; ++round) {
        const std::vector<Sentence> sentences = synth_sentences(500, seed + static_cast<std::uint64_t>(round));
        const Vocab vocab = build_vocab(sentences);
        Hyperparams hyper;
        Rng init_rng = rng.split("model/" + std::to_string(round));
        const ModelParams model = init_params(vocab, hyper, init_rng);

        const int n_nodes = 2 + static_cast<int>(rng.next_below(7));
        std::vector<UserShard> shards(static_cast<std::size_t>(n_nodes));
        for (int u = 0; u < n_nodes; ++u) shards[static_cast<std::size_t>(u)].user = u;
        for (const auto& sentence : sentences) {
            shards[rng.next_below(static_cast<std::uint64_t>(n_nodes))].test.push_back(sentence);
        }
        std::vector<UserNode> nodes;
        for (int u = 0; u < n_nodes; ++u) {
            nodes.emplace_back(u, shards[static_cast<std::size_t>(u)], model);
        }

        const GlobalEvalReport report = global_accuracy(model, nodes, EvalSplit::test);
        const EvalSummary centralized = evaluate(model, sentences);
        if (report.aggregate.correct != centralized.correct ||
            report.aggregate.total != centralized.total) {
            std::ostringstream details;
            details << "round " << round << ": aggregated (" << report.aggregate.correct << "/"
                    << report.aggregate.total << ") != centralized (" << centralized.correct << "/"
                    << centralized.total << ")";
            result.details = details.str();
            return result;
        }
    }
    std::ostringstream details;
    details << rounds << " random partitions, aggregation exactly equals centralized evaluation";
    result.details = details.str();
    result.passed = true;
    return result;
}

std::vector<CheckResult> run_selfchecks() {
    return {check_rng_reference(), check_gradients(), check_fedeval_exactness()};
}

}  // namespace persona
