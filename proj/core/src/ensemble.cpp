#include "persona/ensemble.hpp"

#include <cmath>
#include <cstring>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr char kPredictorMagic[] = "persona-predictor";
constexpr std::uint32_t kPredictorVersion = 1;

double member_output(const ModelParams& member, std::span<const std::string> tokens) {
    const std::vector<int> idx = member.vocab.encode(tokens);
    return forward_infer(member, idx);
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::single: return "single";
        case Strategy::average: return "average";
        case Strategy::confidence: return "confidence";
    }
    throw std::invalid_argument("unknown strategy");
}

Strategy strategy_from_name(std::string_view name) {
    if (name == "single") return Strategy::single;
    if (name == "average") return Strategy::average;
    if (name == "confidence") return Strategy::confidence;
    throw DataError("unknown strategy: " + std::string(name));
}

double predict_average(std::span<const ModelParams> members, std::span<const std::string> tokens) {
    if (members.empty()) throw DataError("predict_average: empty member list");
    double sum = 0.0;
    for (const auto& member : members) sum += member_output(member, tokens);
    return sum / static_cast<double>(members.size());
}

double predict_confident(std::span<const ModelParams> members, std::span<const std::string> tokens) {
    if (members.empty()) throw DataError("predict_confident: empty member list");
    double best_p = 0.5;
    double best_confidence = -1.0;
    for (const auto& member : members) {
        const double p = member_output(member, tokens);
        const double confidence = std::abs(p - 0.5);
        if (confidence > best_confidence) {
            best_confidence = confidence;
            best_p = p;
        }
    }
    return best_p;
}

Predictor Predictor::single_model(ModelParams model) {
    Predictor p;
    p.members.push_back(std::move(model));
    p.strategy = Strategy::single;
    return p;
}

Predictor Predictor::ensemble(std::vector<ModelParams> members, Strategy strategy) {
    if (members.empty()) throw DataError("ensemble: empty member list");
    Predictor p;
    p.members = std::move(members);
    p.strategy = strategy;
    return p;
}

double Predictor::predict(std::span<const std::string> tokens) const {
    if (members.empty()) throw DataError("predict: empty member list");
    switch (strategy) {
        case Strategy::single:
            return member_output(members.front(), tokens);
        case Strategy::average:
            return predict_average(members, tokens);
        case Strategy::confidence:
            return predict_confident(members, tokens);
    }
    throw std::invalid_argument("unknown strategy");
}

EvalSummary evaluate(const Predictor& predictor, std::span<const Sentence> sentences) {
    EvalSummary summary;
    summary.total = static_cast<long>(sentences.size());
    for (const auto& sentence : sentences) {
        const double p = predictor.predict(sentence.tokens);
        if ((p >= 0.5) == (sentence.label == Polarity::positive)) ++summary.correct;
    }
    return summary;
}

std::string predictor_to_bytes(const Predictor& predictor) {
    std::string out;
    out.append(kPredictorMagic);
    std::uint32_t version = kPredictorVersion;
    out.append(reinterpret_cast<const char*>(&version), sizeof(version));
    out.push_back(static_cast<char>(predictor.strategy));
    const std::uint32_t count = static_cast<std::uint32_t>(predictor.members.size());
    out.append(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& member : predictor.members) {
        const std::string bytes = model_to_bytes(member);
        const std::uint64_t size = bytes.size();
        out.append(reinterpret_cast<const char*>(&size), sizeof(size));
        out.append(bytes);
    }
    return out;
}

Predictor predictor_from_bytes(std::string_view bytes) {
    const std::size_t magic_len = sizeof(kPredictorMagic) - 1;
    if (bytes.size() < magic_len + sizeof(std::uint32_t) + 1 + sizeof(std::uint32_t) ||
        bytes.substr(0, magic_len) != kPredictorMagic) {
        throw DataError("not a predictor artifact (bad magic)");
    }
    std::size_t pos = magic_len;
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + pos, sizeof(version));
    pos += sizeof(version);
    if (version != kPredictorVersion) {
        throw DataError("unsupported predictor artifact version: " + std::to_string(version));
    }
    Predictor predictor;
    predictor.strategy = static_cast<Strategy>(bytes[pos]);
    pos += 1;
    std::uint32_t count;
    std::memcpy(&count, bytes.data() + pos, sizeof(count));
    pos += sizeof(count);
    if (count == 0) throw DataError("predictor artifact has no members");
    for (std::uint32_t i = 0; i < count; ++i) {
        if (pos + sizeof(std::uint64_t) > bytes.size()) throw DataError("predictor artifact truncated");
        std::uint64_t size;
        std::memcpy(&size, bytes.data() + pos, sizeof(size));
        pos += sizeof(size);
        if (pos + size > bytes.size()) throw DataError("predictor artifact truncated");
        predictor.members.push_back(model_from_bytes(bytes.substr(pos, size)));
        pos += size;
    }
    if (pos != bytes.size()) throw DataError("predictor artifact has trailing bytes");
    return predictor;
}

}  // namespace persona
