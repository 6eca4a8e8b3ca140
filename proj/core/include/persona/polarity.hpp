#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "persona/text.hpp"
#include "persona/treebank.hpp"

namespace persona {

/// Bag-of-words logistic regression over binary word-presence features.
/// Experimenter-side only: it ranks words to manufacture user bias and is
/// not one of the simulated user models, so it may see the global train set.
struct LogRegModel {
    std::vector<double> weights;  // one per vocab index
    double bias = 0.0;
};

struct LogRegOptions {
    double l2 = 1e-4;
    double lr = 0.1;
    int epochs = 500;
    std::uint64_t seed = 0;
};

/// Full-batch gradient descent on L2-regularized binary cross-entropy.
/// Deterministic given the seed. Throws DataError on single-class input.
LogRegModel train_logreg(std::span<const Sentence> train, const Vocab& vocab,
                         const LogRegOptions& options = {});

double logreg_predict(const LogRegModel& model, const Vocab& vocab,
                      std::span<const std::string> tokens);

/// The k most positive words (descending weight) and k most negative words
/// (ascending weight). Ties break by vocab index ascending.
struct PolarLexicon {
    std::vector<std::string> positive_words;
    std::vector<std::string> negative_words;

    std::size_t size() const { return positive_words.size() + negative_words.size(); }
};

/// Throws DataError if vocab.size() < 2k.
PolarLexicon top_polar_words(const LogRegModel& model, const Vocab& vocab, int k);

/// Plain-text lexicon cache: one word per line, `+ ` or `- ` prefix column,
/// positives first. Makes trials replayable without retraining.
void save_lexicon(const PolarLexicon& lexicon, const std::filesystem::path& path);
PolarLexicon load_lexicon(const std::filesystem::path& path);

}  // namespace persona
