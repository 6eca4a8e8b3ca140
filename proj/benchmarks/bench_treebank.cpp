#include <benchmark/benchmark.h>

#include <sstream>

#include "bench_common.hpp"
#include "persona/treebank.hpp"

using namespace persona;

namespace {

std::string corpus_text(int trees) {
    SynthSpec spec;
    Rng rng = Rng(31).split("bench");
    std::ostringstream out;
    for (const auto& tree : synth_trees(spec, trees, rng)) out << serialize(tree) << '\n';
    return out.str();
}

void BM_ParseTrees(benchmark::State& state) {
    const std::string text = corpus_text(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto trees = parse_trees(text);
        benchmark::DoNotOptimize(trees);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ParseTrees)->Arg(100)->Arg(1000);

void BM_SerializeTree(benchmark::State& state) {
    SynthSpec spec;
    Rng rng = Rng(32).split("bench");
    const auto trees = synth_trees(spec, 100, rng);
    std::size_t i = 0;
    for (auto _ : state) {
        std::string text = serialize(trees[i++ % trees.size()]);
        benchmark::DoNotOptimize(text);
    }
}
BENCHMARK(BM_SerializeTree);

}  // namespace
