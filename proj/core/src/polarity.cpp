#include "persona/polarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "persona/errors.hpp"
#include "persona/rng.hpp"

namespace persona {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Binary presence features: distinct vocab indices per sentence.
std::vector<std::vector<int>> presence_features(std::span<const Sentence> train, const Vocab& vocab) {
    std::vector<std::vector<int>> features;
    features.reserve(train.size());
    for (const auto& sentence : train) {
        std::vector<int> idx = vocab.encode(sentence.tokens);
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        features.push_back(std::move(idx));
    }
    return features;
}

}  // namespace

LogRegModel train_logreg(std::span<const Sentence> train, const Vocab& vocab,
                         const LogRegOptions& options) {
    if (train.empty()) throw DataError("train_logreg: empty corpus");
    bool has_pos = false, has_neg = false;
    for (const auto& s : train) (s.label == Polarity::positive ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DataError("train_logreg: degenerate single-class corpus");

    const auto features = presence_features(train, vocab);
    const std::size_t n = train.size();
    const std::size_t dim = static_cast<std::size_t>(vocab.size());

    LogRegModel model;
    model.weights.resize(dim);
    Rng rng(options.seed);
    for (auto& w : model.weights) w = (rng.next_uniform() - 0.5) * 0.002;

    std::vector<double> grad(dim);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = model.bias;
            for (int idx : features[i]) z += model.weights[static_cast<std::size_t>(idx)];
            double err = sigmoid(z) - (train[i].label == Polarity::positive ? 1.0 : 0.0);
            for (int idx : features[i]) grad[static_cast<std::size_t>(idx)] += err;
            grad_bias += err;
        }
        const double scale = options.lr / static_cast<double>(n);
        for (std::size_t j = 0; j < dim; ++j) {
            model.weights[j] -= scale * grad[j] + options.lr * options.l2 * model.weights[j];
        }
        model.bias -= scale * grad_bias;
    }

    for (double w : model.weights) {
        if (!std::isfinite(w)) throw DataError("train_logreg: non-finite weight after training");
    }
    return model;
}

double logreg_predict(const LogRegModel& model, const Vocab& vocab,
                      std::span<const std::string> tokens) {
    std::vector<int> idx = vocab.encode(tokens);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    double z = model.bias;
    for (int i : idx) z += model.weights[static_cast<std::size_t>(i)];
    return sigmoid(z);
}

PolarLexicon top_polar_words(const LogRegModel& model, const Vocab& vocab, int k) {
    if (k < 1) throw DataError("top_polar_words: k must be >= 1");
    if (vocab.size() < 2 * k) {
        throw DataError("top_polar_words: vocab size " + std::to_string(vocab.size()) +
                        " smaller than 2k = " + std::to_string(2 * k));
    }
    // Each side resolves ties by vocab index ascending. The negative side
    // selects from the words the positive side left, which keeps the sides
    // disjoint even when weights tie across the middle.
    std::vector<int> by_weight_desc(static_cast<std::size_t>(vocab.size()));
    std::iota(by_weight_desc.begin(), by_weight_desc.end(), 0);
    std::sort(by_weight_desc.begin(), by_weight_desc.end(), [&](int a, int b) {
        const double wa = model.weights[static_cast<std::size_t>(a)];
        const double wb = model.weights[static_cast<std::size_t>(b)];
        if (wa != wb) return wa > wb;
        return a < b;
    });

    PolarLexicon lexicon;
    std::vector<bool> taken(static_cast<std::size_t>(vocab.size()), false);
    lexicon.positive_words.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const int idx = by_weight_desc[static_cast<std::size_t>(i)];
        taken[static_cast<std::size_t>(idx)] = true;
        lexicon.positive_words.push_back(vocab.word(idx));
    }

    std::vector<int> by_weight_asc(std::move(by_weight_desc));
    std::sort(by_weight_asc.begin(), by_weight_asc.end(), [&](int a, int b) {
        const double wa = model.weights[static_cast<std::size_t>(a)];
        const double wb = model.weights[static_cast<std::size_t>(b)];
        if (wa != wb) return wa < wb;
        return a < b;
    });
    lexicon.negative_words.reserve(static_cast<std::size_t>(k));
    for (int i = 0; static_cast<int>(lexicon.negative_words.size()) < k; ++i) {
        const int idx = by_weight_asc[static_cast<std::size_t>(i)];
        if (taken[static_cast<std::size_t>(idx)]) continue;
        lexicon.negative_words.push_back(vocab.word(idx));
    }
    return lexicon;
}

void save_lexicon(const PolarLexicon& lexicon, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write lexicon file: " + path.string());
    for (const auto& word : lexicon.positive_words) out << "+ " << word << '\n';
    for (const auto& word : lexicon.negative_words) out << "- " << word << '\n';
    if (!out) throw DataError("failed writing lexicon file: " + path.string());
}

PolarLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon file: " + path.string());
    PolarLexicon lexicon;
    std::unordered_set<std::string> seen;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.size() < 3 || (line[0] != '+' && line[0] != '-') || line[1] != ' ') {
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": expected '+ word' or '- word'");
        }
        std::string word = line.substr(2);
        if (!seen.insert(word).second) {
            throw DataError(path.string() + ": duplicate lexicon word: " + word);
        }
        (line[0] == '+' ? lexicon.positive_words : lexicon.negative_words).push_back(std::move(word));
    }
    if (lexicon.positive_words.empty() || lexicon.negative_words.empty()) {
        throw DataError(path.string() + ": lexicon missing a polarity side");
    }
    return lexicon;
}

}  // namespace persona
