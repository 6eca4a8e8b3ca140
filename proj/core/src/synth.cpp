#include "persona/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <unordered_set>

#include "persona/errors.hpp"

namespace persona {

namespace {

// Word pools with per-leaf fine-grained labels. Pool polarity is what the
// partition machinery later rediscovers through logistic regression.
struct WordBank {
    std::vector<std::string> strong_pos, strong_neg, weak_pos, weak_neg, filler, filler_rare;
};

std::vector<std::string> make_pseudowords(int count, Rng& rng,
                                          std::unordered_set<std::string>& taken) {
    static const char* kOnsets[] = {"b", "br", "c", "cl", "d", "dr", "f", "fl", "g", "gr",
                                    "h", "j", "k", "l", "m", "n", "p", "pl", "qu", "r",
                                    "s", "sk", "sl", "sn", "st", "t", "tr", "v", "w", "z"};
    static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "io", "ou", "oo"};
    static const char* kCodas[] = {"", "b", "ck", "d", "g", "l", "m", "n", "nd", "ng",
                                   "nt", "p", "r", "rd", "rn", "s", "sh", "st", "t", "x"};
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(words.size()) < count) {
        const int syllables = 2 + static_cast<int>(rng.next_below(2));
        std::string w;
        for (int s = 0; s < syllables; ++s) {
            w += kOnsets[rng.next_below(std::size(kOnsets))];
            w += kVowels[rng.next_below(std::size(kVowels))];
            if (s + 1 == syllables) w += kCodas[rng.next_below(std::size(kCodas))];
        }
        if (taken.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

WordBank make_bank(const SynthSpec& spec, Rng& rng) {
    std::unordered_set<std::string> taken;
    WordBank bank;
    bank.strong_pos = make_pseudowords(spec.strong_pos, rng, taken);
    bank.strong_neg = make_pseudowords(spec.strong_neg, rng, taken);
    bank.weak_pos = make_pseudowords(spec.weak_pos, rng, taken);
    bank.weak_neg = make_pseudowords(spec.weak_neg, rng, taken);
    bank.filler = make_pseudowords(spec.filler, rng, taken);
    bank.filler_rare = make_pseudowords(spec.filler_rare, rng, taken);
    return bank;
}

// Skewed pick: low ranks more likely, Zipf-flavored; power 1 is uniform.
const std::string& pick_skewed(const std::vector<std::string>& pool, Rng& rng,
                               double power = 2.0) {
    const double u = std::pow(rng.next_uniform(), power);
    const auto idx = static_cast<std::size_t>(u * static_cast<double>(pool.size()));
    return pool[std::min(idx, pool.size() - 1)];
}

struct Leaf {
    std::string token;
    int label;  // fine-grained 0..4
};

SentimentTree build_span(std::span<const Leaf> leaves, Rng& rng) {
    if (leaves.size() == 1) {
        SentimentTree node;
        node.label = leaves[0].label;
        node.token = leaves[0].token;
        return node;
    }
    const std::size_t split = 1 + rng.next_below(leaves.size() - 1);
    SentimentTree node;
    node.children.push_back(build_span(leaves.subspan(0, split), rng));
    node.children.push_back(build_span(leaves.subspan(split), rng));
    // Parent sentiment: rounded mean of the children, nudged toward neutral.
    node.label = (node.children[0].label + node.children[1].label) / 2;
    return node;
}

SentimentTree make_tree(const SynthSpec& spec, const WordBank& bank, Rng& rng) {
    const bool neutral = rng.next_uniform() < spec.neutral_frac;
    const bool positive = rng.next_below(2) == 1;
    const int length =
        spec.min_len + static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(spec.max_len - spec.min_len + 1)));

    // Strong words per sentence: 0..3 with configured probabilities, at
    // distinct random positions.
    int n_strong = 0;
    if (!neutral) {
        const double roll = rng.next_uniform();
        if (roll < spec.strong_two) {
            n_strong = 2;
        } else if (roll < spec.strong_two + spec.strong_three) {
            n_strong = 3;
        } else if (roll < spec.strong_two + spec.strong_three + spec.strong_none) {
            n_strong = 0;
        } else {
            n_strong = 1;
        }
    }
    std::vector<int> positions(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) positions[static_cast<std::size_t>(i)] = i;
    rng.shuffle(positions);
    std::vector<bool> is_strong(static_cast<std::size_t>(length), false);
    for (int i = 0; i < n_strong; ++i) is_strong[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = true;

    std::vector<Leaf> leaves;
    leaves.reserve(static_cast<std::size_t>(length));
    int strength = 0;  // signed strong-word count, sign of the majority
    for (int i = 0; i < length; ++i) {
        if (is_strong[static_cast<std::size_t>(i)]) {
            const bool match = rng.next_uniform() < spec.strong_fidelity;
            const bool token_positive = match == positive;
            const auto& pool = token_positive ? bank.strong_pos : bank.strong_neg;
            strength += token_positive ? 1 : -1;
            // uniform pick: every strong word stays frequent enough for the
            // lexicon recovery to find it
            leaves.push_back({pick_skewed(pool, rng, 1.0),
                              token_positive ? (rng.next_below(2) ? 4 : 3) : (rng.next_below(2) ? 0 : 1)});
        } else if (rng.next_uniform() < spec.p_weak) {
            const bool match = rng.next_uniform() < (neutral ? 0.5 : spec.weak_fidelity);
            const bool token_positive = match == positive;
            const auto& pool = token_positive ? bank.weak_pos : bank.weak_neg;
            leaves.push_back({pick_skewed(pool, rng), token_positive ? 3 : 1});
        } else if (rng.next_uniform() < spec.rare_rate) {
            leaves.push_back({pick_skewed(bank.filler_rare, rng, 1.0), 2});
        } else {
            leaves.push_back({pick_skewed(bank.filler, rng, 1.2), 2});
        }
    }

    SentimentTree tree = build_span(leaves, rng);
    if (neutral) {
        tree.label = 2;
        return tree;
    }
    bool label_positive = positive;
    if (rng.next_uniform() < spec.label_noise) label_positive = !label_positive;
    const bool extreme = std::abs(strength) >= 2;
    tree.label = label_positive ? (extreme ? 4 : 3) : (extreme ? 0 : 1);
    return tree;
}

}  // namespace

SynthVocab synth_vocabulary(const SynthSpec& spec) {
    Rng vocab_rng = Rng(spec.seed).split("vocab");
    const WordBank bank = make_bank(spec, vocab_rng);
    return {bank.strong_pos, bank.strong_neg, bank.weak_pos,
            bank.weak_neg,   bank.filler,     bank.filler_rare};
}

std::vector<SentimentTree> synth_trees(const SynthSpec& spec, int count, Rng& rng) {
    Rng vocab_rng = Rng(spec.seed).split("vocab");
    const WordBank bank = make_bank(spec, vocab_rng);
    std::vector<SentimentTree> trees;
    trees.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) trees.push_back(make_tree(spec, bank, rng));
    return trees;
}

void write_synth_corpus(const SynthSpec& spec, const std::filesystem::path& dir,
                        const CorpusFiles& files) {
    std::filesystem::create_directories(dir);
    Rng root(spec.seed);
    const struct {
        const std::string* name;
        int count;
        const char* stream;
    } splits[] = {{&files.train, spec.train_trees, "train"},
                  {&files.dev, spec.dev_trees, "dev"},
                  {&files.test, spec.test_trees, "test"}};
    for (const auto& split : splits) {
        Rng rng = root.split(split.stream);
        const auto trees = synth_trees(spec, split.count, rng);
        std::ofstream out(dir / *split.name);
        if (!out) throw DataError("cannot write corpus file: " + (dir / *split.name).string());
        for (const auto& tree : trees) out << serialize(tree) << '\n';
        if (!out) throw DataError("failed writing corpus file: " + (dir / *split.name).string());
    }
}

}  // namespace persona
