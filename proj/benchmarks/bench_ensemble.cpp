#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "persona/ensemble.hpp"

using namespace persona;
using persona::bench::sample_model;
using persona::bench::sample_sentences;

namespace {

void BM_PredictAverage(benchmark::State& state) {
    const auto sentences = sample_sentences(100);
    std::vector<ModelParams> members;
    for (int m = 0; m < state.range(0); ++m) {
        members.push_back(sample_model(sentences, static_cast<std::uint64_t>(m)));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_average(members, sentences[i++ % sentences.size()].tokens));
    }
}
BENCHMARK(BM_PredictAverage)->Arg(2)->Arg(8);

void BM_PredictConfident(benchmark::State& state) {
    const auto sentences = sample_sentences(100);
    std::vector<ModelParams> members;
    for (int m = 0; m < state.range(0); ++m) {
        members.push_back(sample_model(sentences, static_cast<std::uint64_t>(m)));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_confident(members, sentences[i++ % sentences.size()].tokens));
    }
}
BENCHMARK(BM_PredictConfident)->Arg(2)->Arg(8);

void BM_PredictorRoundTrip(benchmark::State& state) {
    const auto sentences = sample_sentences(100);
    std::vector<ModelParams> members;
    for (int m = 0; m < 4; ++m) members.push_back(sample_model(sentences, static_cast<std::uint64_t>(m)));
    const Predictor predictor = Predictor::ensemble(members, Strategy::average);
    for (auto _ : state) {
        const std::string bytes = predictor_to_bytes(predictor);
        benchmark::DoNotOptimize(predictor_from_bytes(bytes).members.size());
        state.SetBytesProcessed(state.bytes_processed() + static_cast<int64_t>(bytes.size()));
    }
}
BENCHMARK(BM_PredictorRoundTrip);

}  // namespace
