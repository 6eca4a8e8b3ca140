#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "persona/polarity.hpp"
#include "persona/rng.hpp"
#include "persona/treebank.hpp"

namespace persona {

enum class WordPartition { iid, balanced };

/// Maps every lexicon word to exactly one owning user in 0..n_users-1.
struct WordOwnership {
    std::unordered_map<std::string, int> owner;
    int n_users = 0;

    std::optional<int> owner_of(std::string_view word) const {
        auto it = owner.find(std::string(word));
        if (it == owner.end()) return std::nullopt;
        return it->second;
    }
};

/// iid: each word assigned independently and uniformly (sizes need not be
/// equal). balanced: shuffle then deal round-robin (sizes within one).
WordOwnership assign_words(const PolarLexicon& lexicon, int n_users, Rng& rng,
                           WordPartition partition = WordPartition::iid);

/// One user's private data. pure_test is the subset of test whose polar-word
/// intersection with every other user's owned set is empty.
struct UserShard {
    int user = 0;
    std::vector<Sentence> train, dev, test, pure_test;
};

/// include_lexicon_free keeps sentences with zero polar words in pure_test;
/// require_own_word additionally demands at least one owned word.
enum class PureTestPolicy { include_lexicon_free, require_own_word };

/// Assign every sentence of every split to exactly one user: a single
/// relevant owner is forced, several draw uniformly among them, none draws
/// uniformly among all users. Fills pure_test per the policy.
std::vector<UserShard> assign_sentences(const Corpus& corpus, const WordOwnership& ownership,
                                        Rng& rng,
                                        PureTestPolicy policy = PureTestPolicy::include_lexicon_free);

std::vector<Sentence> pure_user_test(const UserShard& shard, const WordOwnership& ownership,
                                     PureTestPolicy policy = PureTestPolicy::include_lexicon_free);

/// Sentence ids per user per split, as JSON text (replay/debugging).
std::string shard_manifest_json(std::span<const UserShard> shards);

}  // namespace persona
