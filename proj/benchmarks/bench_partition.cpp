#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "persona/partition.hpp"

using namespace persona;
using persona::bench::sample_sentences;

namespace {

PolarLexicon bench_lexicon() {
    PolarLexicon lexicon;
    SynthSpec spec;
    const SynthVocab pools = synth_vocabulary(spec);
    for (int i = 0; i < 200; ++i) {
        lexicon.positive_words.push_back(pools.strong_pos[static_cast<std::size_t>(i) % pools.strong_pos.size()] +
                                         std::to_string(i / pools.strong_pos.size()));
        lexicon.negative_words.push_back(pools.strong_neg[static_cast<std::size_t>(i) % pools.strong_neg.size()] +
                                         std::to_string(i / pools.strong_neg.size()));
    }
    return lexicon;
}

void BM_AssignWords(benchmark::State& state) {
    const PolarLexicon lexicon = bench_lexicon();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(assign_words(lexicon, 8, rng).owner.size());
    }
}
BENCHMARK(BM_AssignWords);

void BM_AssignSentences(benchmark::State& state) {
    Corpus corpus;
    corpus.train = sample_sentences(2000, 41);
    corpus.dev = sample_sentences(250, 42);
    corpus.test = sample_sentences(500, 43);
    const PolarLexicon lexicon = bench_lexicon();
    Rng word_rng(5);
    const WordOwnership ownership = assign_words(lexicon, 8, word_rng);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(assign_sentences(corpus, ownership, rng).size());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 2750);
}
BENCHMARK(BM_AssignSentences);

}  // namespace
