#include <benchmark/benchmark.h>

#include "bench_common.hpp"

using namespace persona;
using persona::bench::sample_model;
using persona::bench::sample_sentences;

namespace {

void BM_ForwardInfer(benchmark::State& state) {
    const auto sentences = sample_sentences(200);
    const ModelParams model = sample_model(sentences);
    std::vector<std::vector<int>> encoded;
    for (const auto& s : sentences) encoded.push_back(model.vocab.encode(s.tokens));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_infer(model, encoded[i++ % encoded.size()]));
    }
}
BENCHMARK(BM_ForwardInfer);

void BM_GradAccumulate(benchmark::State& state) {
    const auto sentences = sample_sentences(200);
    const ModelParams model = sample_model(sentences);
    std::vector<std::vector<int>> encoded;
    for (const auto& s : sentences) encoded.push_back(model.vocab.encode(s.tokens));
    Gradients grads = Gradients::zeros_like(model);
    Rng rng(3);
    std::size_t i = 0;
    for (auto _ : state) {
        accumulate_grad(model, encoded[i++ % encoded.size()], 1.0, rng, 1.0, grads);
        benchmark::DoNotOptimize(grads.b2);
    }
}
BENCHMARK(BM_GradAccumulate);

void BM_AdamStep(benchmark::State& state) {
    const auto sentences = sample_sentences(200);
    ModelParams model = sample_model(sentences);
    Gradients grads = Gradients::zeros_like(model);
    Rng rng(4);
    accumulate_grad(model, model.vocab.encode(sentences[0].tokens), 1.0, rng, 1.0, grads);
    AdamState adam = AdamState::zeros_like(model);
    for (auto _ : state) {
        adam_step(model, grads, adam, 1e-3);
        benchmark::DoNotOptimize(model.b2);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(model.embeddings.data.size()));
}
BENCHMARK(BM_AdamStep);

void BM_Evaluate(benchmark::State& state) {
    const auto sentences = sample_sentences(500);
    const ModelParams model = sample_model(sentences);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(model, sentences).correct);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(sentences.size()));
}
BENCHMARK(BM_Evaluate);

}  // namespace
