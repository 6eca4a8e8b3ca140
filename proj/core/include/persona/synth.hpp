#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "persona/rng.hpp"
#include "persona/treebank.hpp"

namespace persona {

/// Generator for a full-scale corpus in the treebank file format, used when
/// no real dataset is available. Sentences express sentiment through a pool
/// of strongly polarized words (the future polar lexicon), a small pool of
/// mildly polarized words (shared signal every user model can learn), and a
/// large rare filler vocabulary whose words appear a handful of times, so
/// small shards memorize them idiosyncratically. Deterministic given the
/// seed.
struct SynthSpec {
    std::uint64_t seed = 416;
    int train_trees = 8544;
    int dev_trees = 1101;
    int test_trees = 2210;

    // Vocabulary pools. Common fillers stay frequent enough to look neutral
    // to the lexicon recovery; rare fillers appear a handful of times
    // globally, so small shards memorize them.
    int strong_pos = 205;
    int strong_neg = 205;
    int weak_pos = 260;
    int weak_neg = 260;
    int filler = 1200;        // mildly skewed, shared coverage
    int filler_rare = 3800;   // uniform; a few occurrences per shard
    double rare_rate = 0.55;  // chance a filler slot draws from the rare pool

    // Per-sentence strong-word count distribution (remainder is one word).
    double strong_none = 0.18;
    double strong_two = 0.12;
    double strong_three = 0.04;

    double p_weak = 0.14;          // per remaining token slot
    double strong_fidelity = 0.98; // chance a strong word matches the label
    double weak_fidelity = 0.66;

    double label_noise = 0.08;   // final-label flip rate
    double neutral_frac = 0.18;  // trees with root label 2
    int min_len = 4;
    int max_len = 16;
};

/// The generator's word pools (deterministic given spec.seed), for
/// measuring how well lexicon recovery finds the planted strong words.
struct SynthVocab {
    std::vector<std::string> strong_pos, strong_neg, weak_pos, weak_neg, filler, filler_rare;
};
SynthVocab synth_vocabulary(const SynthSpec& spec);

/// `count` trees drawn from the spec's distribution using the given stream.
std::vector<SentimentTree> synth_trees(const SynthSpec& spec, int count, Rng& rng);

/// Write train/dev/test files under `dir` (created if missing).
void write_synth_corpus(const SynthSpec& spec, const std::filesystem::path& dir,
                        const CorpusFiles& files = {});

}  // namespace persona
