#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "persona/treebank.hpp"

namespace persona {

/// Out-of-vocabulary handling for encode(): omit drops unknown tokens,
/// unk maps them to a shared <unk> index reserved at slot 0.
enum class OovPolicy { omit, unk };

/// Bijection between words and indices 0..size-1, built in first-occurrence
/// order over its source sentences. Immutable after construction.
class Vocab {
public:
    static constexpr const char* kUnkToken = "<unk>";

    Vocab() = default;

    std::optional<int> index_of(std::string_view word) const;
    const std::string& word(int index) const { return words_.at(static_cast<std::size_t>(index)); }
    int size() const { return static_cast<int>(words_.size()); }
    OovPolicy oov_policy() const { return policy_; }

    std::vector<int> encode(std::span<const std::string> tokens) const;
    std::vector<std::string> decode(std::span<const int> indices) const;

    friend Vocab build_vocab(std::span<const Sentence> sentences, OovPolicy policy);
    friend Vocab vocab_from_words(std::vector<std::string> words, OovPolicy policy);

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> words_;
    OovPolicy policy_ = OovPolicy::omit;
};

/// Distinct normalized tokens of the input, first-occurrence order.
/// Throws DataError on empty input.
Vocab build_vocab(std::span<const Sentence> sentences, OovPolicy policy = OovPolicy::omit);

/// Rebuild from an explicit word list (model artifacts). Words must be unique.
Vocab vocab_from_words(std::vector<std::string> words, OovPolicy policy);

}  // namespace persona
