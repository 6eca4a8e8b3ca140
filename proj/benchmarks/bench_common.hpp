#pragma once

#include <string>
#include <vector>

#include "persona/neural.hpp"
#include "persona/rng.hpp"
#include "persona/synth.hpp"
#include "persona/treebank.hpp"

namespace persona::bench {

inline std::vector<Sentence> sample_sentences(int count, std::uint64_t seed = 99) {
    SynthSpec spec;
    spec.seed = seed;
    spec.neutral_frac = 0.0;
    Rng rng = Rng(seed).split("bench");
    std::vector<Sentence> sentences;
    int id = 0;
    for (const auto& tree : synth_trees(spec, count, rng)) {
        auto [tokens, root] = sentence_of(tree);
        if (auto label = binarize(root)) {
            Sentence s;
            s.tokens = std::move(tokens);
            s.label = *label;
            s.id = id++;
            sentences.push_back(std::move(s));
        }
    }
    return sentences;
}

inline ModelParams sample_model(const std::vector<Sentence>& sentences, std::uint64_t seed = 7) {
    Hyperparams hyper;
    Rng rng(seed);
    return init_params(build_vocab(sentences), hyper, rng);
}

}  // namespace persona::bench
