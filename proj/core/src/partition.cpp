#include "persona/partition.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"

namespace persona {

namespace {

// Distinct owners of the sentence's lexicon words, ascending.
std::vector<int> relevant_owners(const Sentence& sentence, const WordOwnership& ownership) {
    std::vector<int> owners;
    for (const auto& token : sentence.tokens) {
        if (auto owner = ownership.owner_of(token)) {
            if (std::find(owners.begin(), owners.end(), *owner) == owners.end()) {
                owners.push_back(*owner);
            }
        }
    }
    std::sort(owners.begin(), owners.end());
    return owners;
}

}  // namespace

WordOwnership assign_words(const PolarLexicon& lexicon, int n_users, Rng& rng,
                           WordPartition partition) {
    if (n_users < 1) throw DataError("assign_words: n_users must be >= 1");

    std::vector<std::string> words;
    words.reserve(lexicon.size());
    words.insert(words.end(), lexicon.positive_words.begin(), lexicon.positive_words.end());
    words.insert(words.end(), lexicon.negative_words.begin(), lexicon.negative_words.end());

    WordOwnership ownership;
    ownership.n_users = n_users;
    if (partition == WordPartition::iid) {
        for (const auto& word : words) {
            ownership.owner.emplace(word, static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_users))));
        }
    } else {
        rng.shuffle(words);
        for (std::size_t i = 0; i < words.size(); ++i) {
            ownership.owner.emplace(words[i], static_cast<int>(i % static_cast<std::size_t>(n_users)));
        }
    }
    return ownership;
}

std::vector<UserShard> assign_sentences(const Corpus& corpus, const WordOwnership& ownership,
                                        Rng& rng, PureTestPolicy policy) {
    const int n = ownership.n_users;
    if (n < 1) throw DataError("assign_sentences: ownership covers no users");

    std::vector<UserShard> shards(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) shards[static_cast<std::size_t>(u)].user = u;

    auto assign_split = [&](const std::vector<Sentence>& split,
                            std::vector<Sentence> UserShard::* member) {
        for (const auto& sentence : split) {
            std::vector<int> owners = relevant_owners(sentence, ownership);
            int user;
            if (owners.empty()) {
                user = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
            } else if (owners.size() == 1) {
                user = owners[0];
            } else {
                user = owners[rng.next_below(owners.size())];
            }
            (shards[static_cast<std::size_t>(user)].*member).push_back(sentence);
        }
    };
    assign_split(corpus.train, &UserShard::train);
    assign_split(corpus.dev, &UserShard::dev);
    assign_split(corpus.test, &UserShard::test);

    for (auto& shard : shards) shard.pure_test = pure_user_test(shard, ownership, policy);
    return shards;
}

std::vector<Sentence> pure_user_test(const UserShard& shard, const WordOwnership& ownership,
                                     PureTestPolicy policy) {
    std::vector<Sentence> pure;
    for (const auto& sentence : shard.test) {
        bool foreign = false;
        bool own = false;
        for (const auto& token : sentence.tokens) {
            if (auto owner = ownership.owner_of(token)) {
                if (*owner == shard.user) {
                    own = true;
                } else {
                    foreign = true;
                    break;
                }
            }
        }
        if (foreign) continue;
        if (policy == PureTestPolicy::require_own_word && !own) continue;
        pure.push_back(sentence);
    }
    return pure;
}

std::string shard_manifest_json(std::span<const UserShard> shards) {
    nlohmann::ordered_json manifest;
    manifest["n_users"] = shards.size();
    auto ids = [](const std::vector<Sentence>& sentences) {
        std::vector<int> out;
        out.reserve(sentences.size());
        for (const auto& s : sentences) out.push_back(s.id);
        return out;
    };
    auto& users = manifest["users"];
    for (const auto& shard : shards) {
        nlohmann::ordered_json entry;
        entry["user"] = shard.user;
        entry["train"] = ids(shard.train);
        entry["dev"] = ids(shard.dev);
        entry["test"] = ids(shard.test);
        entry["pure_test"] = ids(shard.pure_test);
        users.push_back(std::move(entry));
    }
    return manifest.dump(2);
}

}  // namespace persona
