#include "persona/text.hpp"

#include "persona/errors.hpp"

namespace persona {

std::optional<int> Vocab::index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (auto idx = index_of(token)) {
            out.push_back(*idx);
        } else if (policy_ == OovPolicy::unk) {
            out.push_back(0);
        }
    }
    return out;
}

std::vector<std::string> Vocab::decode(std::span<const int> indices) const {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (int idx : indices) out.push_back(word(idx));
    return out;
}

Vocab build_vocab(std::span<const Sentence> sentences, OovPolicy policy) {
    if (sentences.empty()) throw DataError("build_vocab: empty sentence list");
    Vocab v;
    v.policy_ = policy;
    auto add = [&v](const std::string& word) {
        if (v.index_.emplace(word, static_cast<int>(v.words_.size())).second) {
            v.words_.push_back(word);
        }
    };
    if (policy == OovPolicy::unk) add(Vocab::kUnkToken);
    for (const auto& sentence : sentences) {
        for (const auto& token : sentence.tokens) add(token);
    }
    return v;
}

Vocab vocab_from_words(std::vector<std::string> words, OovPolicy policy) {
    Vocab v;
    v.policy_ = policy;
    v.words_ = std::move(words);
    for (std::size_t i = 0; i < v.words_.size(); ++i) {
        if (!v.index_.emplace(v.words_[i], static_cast<int>(i)).second) {
            throw DataError("vocab_from_words: duplicate word: " + v.words_[i]);
        }
    }
    return v;
}

}  // namespace persona
