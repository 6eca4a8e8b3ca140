#pragma once

#include <span>
#include <string>
#include <vector>

#include "persona/neural.hpp"

namespace persona {

enum class Strategy { single, average, confidence };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

/// Mean of the members' inference-mode outputs; each member encodes the
/// tokens with its own private vocab.
double predict_average(std::span<const ModelParams> members, std::span<const std::string> tokens);

/// Output of the member maximizing |p - 0.5|; ties break by lowest index.
double predict_confident(std::span<const ModelParams> members, std::span<const std::string> tokens);

/// A frozen single model or ensemble, evaluable on raw token sequences.
/// This is the artifact nodes receive for evaluation.
struct Predictor {
    std::vector<ModelParams> members;
    Strategy strategy = Strategy::single;

    static Predictor single_model(ModelParams model);
    static Predictor ensemble(std::vector<ModelParams> members, Strategy strategy);

    double predict(std::span<const std::string> tokens) const;
};

EvalSummary evaluate(const Predictor& predictor, std::span<const Sentence> sentences);

/// Versioned artifact wrapping one or more model artifacts (wire format for
/// evaluation requests; bit-exact round-trip).
std::string predictor_to_bytes(const Predictor& predictor);
Predictor predictor_from_bytes(std::string_view bytes);

}  // namespace persona
