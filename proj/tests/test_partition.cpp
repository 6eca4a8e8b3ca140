#include <doctest.h>

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "persona/partition.hpp"
#include "persona/synth.hpp"
#include "test_support.hpp"

using namespace persona;
using persona::testing::make_sentence;

namespace {

PolarLexicon tiny_lexicon() {
    PolarLexicon lexicon;
    lexicon.positive_words = {"great", "fine", "super", "nice"};
    lexicon.negative_words = {"awful", "poor", "dull", "weak"};
    return lexicon;
}

PolarLexicon lexicon_of_size(int per_side) {
    PolarLexicon lexicon;
    for (int i = 0; i < per_side; ++i) {
        lexicon.positive_words.push_back("pos" + std::to_string(i));
        lexicon.negative_words.push_back("neg" + std::to_string(i));
    }
    return lexicon;
}

Corpus small_corpus() {
    Corpus corpus;
    corpus.train = testing::reid({make_sentence({"great", "story"}, Polarity::positive),
                                  make_sentence({"awful", "plot"}, Polarity::negative),
                                  make_sentence({"plain", "text"}, Polarity::positive),
                                  make_sentence({"fine", "dull", "mix"}, Polarity::negative)});
    corpus.dev = testing::reid({make_sentence({"nice"}, Polarity::positive),
                                make_sentence({"weak"}, Polarity::negative)});
    corpus.test = testing::reid({make_sentence({"super", "thing"}, Polarity::positive),
                                 make_sentence({"poor", "thing"}, Polarity::negative),
                                 make_sentence({"nothing", "here"}, Polarity::positive)});
    return corpus;
}

using Key = std::pair<std::vector<std::string>, int>;  // tokens + id identify a sentence

std::multiset<Key> keys(const std::vector<Sentence>& sentences) {
    std::multiset<Key> out;
    for (const auto& s : sentences) out.insert({s.tokens, s.id});
    return out;
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("one user owns every word") {
    Rng rng(1);
    const WordOwnership ownership = assign_words(tiny_lexicon(), 1, rng);
    CHECK(ownership.owner.size() == 8);
    for (const auto& [word, user] : ownership.owner) CHECK(user == 0);
}

TEST_CASE("zero users is an error") {
    Rng rng(1);
    CHECK_THROWS_AS(assign_words(tiny_lexicon(), 0, rng), DataError);
}

TEST_CASE("iid assignment covers exactly the lexicon with valid owners") {
    const PolarLexicon lexicon = lexicon_of_size(200);
    Rng rng(5);
    const WordOwnership ownership = assign_words(lexicon, 5, rng);
    CHECK(ownership.owner.size() == 400);
    CHECK(ownership.n_users == 5);
    for (const auto& word : lexicon.positive_words) {
        auto owner = ownership.owner_of(word);
        REQUIRE(owner.has_value());
        CHECK(*owner >= 0);
        CHECK(*owner < 5);
    }
    CHECK(!ownership.owner_of("unlisted").has_value());
}

TEST_CASE("mean words per user is ~200 over many seeds") {
    const PolarLexicon lexicon = lexicon_of_size(200);
    double total_user0 = 0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(static_cast<std::uint64_t>(s));
        const WordOwnership ownership = assign_words(lexicon, 2, rng);
        int user0 = 0;
        for (const auto& [word, user] : ownership.owner) user0 += user == 0 ? 1 : 0;
        total_user0 += user0;
    }
    const double mean = total_user0 / seeds;
    CHECK(mean > 200 * 0.95);
    CHECK(mean < 200 * 1.05);
}

TEST_CASE("same seed gives identical ownership") {
    const PolarLexicon lexicon = lexicon_of_size(50);
    Rng a(9), b(9);
    const WordOwnership oa = assign_words(lexicon, 4, a);
    const WordOwnership ob = assign_words(lexicon, 4, b);
    CHECK(oa.owner == ob.owner);
}

TEST_CASE("balanced partition sizes differ by at most one") {
    const PolarLexicon lexicon = lexicon_of_size(101);  // 202 words over 4 users
    Rng rng(3);
    const WordOwnership ownership = assign_words(lexicon, 4, rng, WordPartition::balanced);
    std::map<int, int> sizes;
    for (const auto& [word, user] : ownership.owner) sizes[user]++;
    int lo = 1 << 30, hi = 0;
    for (const auto& [user, count] : sizes) {
        lo = std::min(lo, count);
        hi = std::max(hi, count);
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("sentence assignment honors owner constraints") {
    WordOwnership ownership;
    ownership.n_users = 3;
    ownership.owner = {{"great", 1}, {"awful", 0}, {"dull", 2}, {"fine", 0}};

    Corpus corpus;
    corpus.train = testing::reid({make_sentence({"great", "story"}, Polarity::positive)});
    corpus.dev = testing::reid({make_sentence({"x"}, Polarity::positive)});
    corpus.test = testing::reid({make_sentence({"fine", "dull"}, Polarity::negative)});

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto shards = assign_sentences(corpus, ownership, rng);
        REQUIRE(shards.size() == 3);
        // "great story" is forced to user 1
        CHECK(shards[1].train.size() == 1);
        // "fine dull" has owners {0, 2}: never user 1
        CHECK(shards[1].test.empty());
        const std::size_t total_test = shards[0].test.size() + shards[2].test.size();
        CHECK(total_test == 1);
    }
}

TEST_CASE("lexicon-free sentences spread uniformly") {
    WordOwnership ownership;
    ownership.n_users = 4;
    ownership.owner = {{"zzz", 0}};

    Corpus corpus;
    for (int i = 0; i < 1; ++i) {
        corpus.train = testing::reid({make_sentence({"plain"}, Polarity::positive)});
        corpus.dev = corpus.train;
        corpus.test = corpus.train;
    }
    std::vector<int> counts(4, 0);
    const int draws = 4000;
    for (int s = 0; s < draws; ++s) {
        Rng rng(static_cast<std::uint64_t>(s));
        const auto shards = assign_sentences(corpus, ownership, rng);
        for (int u = 0; u < 4; ++u) {
            if (!shards[static_cast<std::size_t>(u)].train.empty()) counts[static_cast<std::size_t>(u)]++;
        }
    }
    for (int c : counts) {
        CHECK(c > draws / 4 * 0.90);
        CHECK(c < draws / 4 * 1.10);
    }
}

TEST_CASE("shard unions reconstruct every split as a multiset") {
    const Corpus corpus = small_corpus();
    const PolarLexicon lexicon = tiny_lexicon();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng word_rng(seed);
        const WordOwnership ownership = assign_words(lexicon, 3, word_rng);
        Rng sentence_rng(seed + 1000);
        const auto shards = assign_sentences(corpus, ownership, sentence_rng);

        std::multiset<Key> train_union, dev_union, test_union;
        for (const auto& shard : shards) {
            for (const auto& s : shard.train) train_union.insert({s.tokens, s.id});
            for (const auto& s : shard.dev) dev_union.insert({s.tokens, s.id});
            for (const auto& s : shard.test) test_union.insert({s.tokens, s.id});
        }
        CHECK(train_union == keys(corpus.train));
        CHECK(dev_union == keys(corpus.dev));
        CHECK(test_union == keys(corpus.test));
    }
}

TEST_CASE("pure test excludes foreign polar words") {
    WordOwnership ownership;
    ownership.n_users = 2;
    ownership.owner = {{"super", 0}, {"poor", 1}};

    UserShard shard;
    shard.user = 0;
    shard.test = testing::reid({make_sentence({"super", "thing"}, Polarity::positive),
                                make_sentence({"poor", "thing"}, Polarity::negative),
                                make_sentence({"nothing", "here"}, Polarity::positive)});

    const auto pure = pure_user_test(shard, ownership);
    REQUIRE(pure.size() == 2);  // own word kept, lexicon-free kept, foreign dropped
    CHECK(pure[0].tokens[0] == "super");
    CHECK(pure[1].tokens[0] == "nothing");

    const auto strict = pure_user_test(shard, ownership, PureTestPolicy::require_own_word);
    REQUIRE(strict.size() == 1);
    CHECK(strict[0].tokens[0] == "super");
}

TEST_CASE("single user keeps the whole test split pure") {
    Rng rng(4);
    const WordOwnership ownership = assign_words(tiny_lexicon(), 1, rng);
    Rng sentence_rng(5);
    const auto shards = assign_sentences(small_corpus(), ownership, sentence_rng);
    REQUIRE(shards.size() == 1);
    CHECK(shards[0].pure_test.size() == shards[0].test.size());
}

TEST_CASE("identical inputs give identical shards") {
    const Corpus corpus = small_corpus();
    const PolarLexicon lexicon = tiny_lexicon();
    auto run = [&] {
        Rng word_rng(17);
        const WordOwnership ownership = assign_words(lexicon, 2, word_rng);
        Rng sentence_rng(18);
        return assign_sentences(corpus, ownership, sentence_rng);
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t u = 0; u < a.size(); ++u) {
        CHECK(keys(a[u].train) == keys(b[u].train));
        CHECK(keys(a[u].dev) == keys(b[u].dev));
        CHECK(keys(a[u].test) == keys(b[u].test));
        CHECK(keys(a[u].pure_test) == keys(b[u].pure_test));
    }
}

TEST_CASE("manifest lists sentence ids per user per split") {
    Rng word_rng(2);
    const WordOwnership ownership = assign_words(tiny_lexicon(), 2, word_rng);
    Rng sentence_rng(3);
    const auto shards = assign_sentences(small_corpus(), ownership, sentence_rng);
    const auto manifest = nlohmann::json::parse(shard_manifest_json(shards));
    CHECK(manifest["n_users"] == 2);
    REQUIRE(manifest["users"].size() == 2);
    std::size_t total_train = 0;
    for (const auto& user : manifest["users"]) {
        total_train += user["train"].size();
        CHECK(user.contains("pure_test"));
    }
    CHECK(total_train == small_corpus().train.size());
}

}  // TEST_SUITE
