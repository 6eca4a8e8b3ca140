#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "persona/errors.hpp"

namespace persona {

enum class Polarity { negative, positive };

/// One node of a labeled sentiment tree. A node is either a leaf (token set,
/// no children) or internal (>= 1 child, no token); labels are in 0..4.
struct SentimentTree {
    int label = 0;
    std::string token;
    std::vector<SentimentTree> children;

    bool is_leaf() const { return children.empty(); }
    bool operator==(const SentimentTree&) const = default;
};

/// A flattened sentence-level example: normalized tokens in leaf order and
/// the binarized root label. `tree` indexes the split's retained tree list
/// (train only), -1 elsewhere.
struct Sentence {
    std::vector<std::string> tokens;
    Polarity label = Polarity::negative;
    int id = 0;
    int tree = -1;
};

struct Corpus {
    std::vector<Sentence> train, dev, test;
    // Parallel to `train`: the source tree of train[i], kept for
    // phrase-granularity training-example expansion.
    std::vector<SentimentTree> train_trees;
};

/// Parse one tree per nonempty line: node = `(` digit ` ` (token | node+) `)`.
/// Throws ParseError with line/offset on malformed input.
std::vector<SentimentTree> parse_trees(std::string_view text);

/// Parse a single tree; `line` is only used for error reporting.
SentimentTree parse_tree(std::string_view text, int line = 1);

/// Canonical single-space form, e.g. "(3 (2 A) (4 B))".
std::string serialize(const SentimentTree& tree);

/// In-order leaf tokens (lowercased) and the root's fine-grained label.
std::pair<std::vector<std::string>, int> sentence_of(const SentimentTree& tree);

/// 0,1 -> negative; 3,4 -> positive; 2 -> nullopt (dropped).
std::optional<Polarity> binarize(int root_label);

/// Sentence-level examples of every subtree with a non-neutral label, the
/// root included; ids are assigned by the caller.
std::vector<Sentence> phrase_examples(const SentimentTree& tree);

struct CorpusFiles {
    std::string train = "train.txt";
    std::string dev = "dev.txt";
    std::string test = "test.txt";
};

/// Load the three split files, drop neutral-rooted sentences, assign ids
/// sequentially per split. Throws DataError (missing file, empty split) or
/// ParseError wrapped with the file name.
Corpus load_corpus(const std::filesystem::path& dir, const CorpusFiles& files = {});

std::string normalize_token(std::string_view token);

}  // namespace persona
