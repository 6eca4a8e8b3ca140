#include "persona/treebank.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace persona {

namespace {

constexpr int kMaxDepth = 10000;

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    int line;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message, line, static_cast<int>(pos));
    }

    void skip_spaces() {
        while (!done() && peek() == ' ') ++pos;
    }

    void expect(char c) {
        if (done() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }
};

SentimentTree parse_node(Cursor& cur, int depth) {
    if (depth > kMaxDepth) cur.fail("tree nesting too deep");
    cur.expect('(');
    if (cur.done() || !std::isdigit(static_cast<unsigned char>(cur.peek()))) {
        cur.fail("expected digit label after '('");
    }
    SentimentTree node;
    node.label = cur.peek() - '0';
    ++cur.pos;
    if (node.label > 4) cur.fail("label outside 0..4");
    if (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek()))) {
        cur.fail("label outside 0..4");
    }
    cur.expect(' ');
    cur.skip_spaces();
    if (cur.done()) cur.fail("unterminated node");

    if (cur.peek() == '(') {
        while (!cur.done() && cur.peek() == '(') {
            node.children.push_back(parse_node(cur, depth + 1));
            cur.skip_spaces();
        }
        cur.expect(')');
    } else {
        std::size_t start = cur.pos;
        while (!cur.done() && cur.peek() != ')' && cur.peek() != ' ' && cur.peek() != '(') ++cur.pos;
        node.token = std::string(cur.text.substr(start, cur.pos - start));
        if (node.token.empty()) cur.fail("empty node");
        cur.skip_spaces();
        cur.expect(')');
    }
    return node;
}

void collect_leaves(const SentimentTree& node, std::vector<std::string>& out) {
    if (node.is_leaf()) {
        out.push_back(normalize_token(node.token));
        return;
    }
    for (const auto& child : node.children) collect_leaves(child, out);
}

void serialize_into(const SentimentTree& node, std::string& out) {
    out += '(';
    out += static_cast<char>('0' + node.label);
    out += ' ';
    if (node.is_leaf()) {
        out += node.token;
    } else {
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            if (i > 0) out += ' ';
            serialize_into(node.children[i], out);
        }
    }
    out += ')';
}

void collect_phrases(const SentimentTree& node, std::vector<Sentence>& out) {
    if (auto label = binarize(node.label)) {
        Sentence s;
        s.tokens = sentence_of(node).first;
        s.label = *label;
        out.push_back(std::move(s));
    }
    for (const auto& child : node.children) collect_phrases(child, out);
}

std::vector<SentimentTree> parse_split_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_trees(buffer.str());
    } catch (const ParseError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// Keeps one sentence per non-neutral tree; `keep_tree` retains the source
// trees (train split only).
void build_split(std::vector<SentimentTree>&& trees, std::vector<Sentence>& sentences,
                 std::vector<SentimentTree>* kept_trees, const std::string& split_name) {
    int next_id = 0;
    for (auto& tree : trees) {
        auto [tokens, root_label] = sentence_of(tree);
        auto label = binarize(root_label);
        if (!label) continue;
        Sentence s;
        s.tokens = std::move(tokens);
        s.label = *label;
        s.id = next_id++;
        if (kept_trees) {
            s.tree = static_cast<int>(kept_trees->size());
            kept_trees->push_back(std::move(tree));
        }
        sentences.push_back(std::move(s));
    }
    if (sentences.empty()) {
        throw DataError("empty split after neutral filtering: " + split_name);
    }
}

}  // namespace

std::string normalize_token(std::string_view token) {
    std::string out(token);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

SentimentTree parse_tree(std::string_view text, int line) {
    Cursor cur{text, 0, line};
    cur.skip_spaces();
    SentimentTree root = parse_node(cur, 0);
    cur.skip_spaces();
    if (!cur.done()) cur.fail("trailing characters after tree");
    return root;
}

std::vector<SentimentTree> parse_trees(std::string_view text) {
    std::vector<SentimentTree> trees;
    int line_number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_number;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = line.find_first_not_of(' ') == std::string_view::npos;
        if (!blank) trees.push_back(parse_tree(line, line_number));
        if (end == text.size()) break;
        start = end + 1;
    }
    return trees;
}

std::string serialize(const SentimentTree& tree) {
    std::string out;
    serialize_into(tree, out);
    return out;
}

std::pair<std::vector<std::string>, int> sentence_of(const SentimentTree& tree) {
    std::vector<std::string> tokens;
    collect_leaves(tree, tokens);
    return {std::move(tokens), tree.label};
}

std::optional<Polarity> binarize(int root_label) {
    switch (root_label) {
        case 0:
        case 1:
            return Polarity::negative;
        case 2:
            return std::nullopt;
        case 3:
        case 4:
            return Polarity::positive;
        default:
            throw std::invalid_argument("binarize: label outside 0..4: " + std::to_string(root_label));
    }
}

std::vector<Sentence> phrase_examples(const SentimentTree& tree) {
    std::vector<Sentence> out;
    collect_phrases(tree, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
    return out;
}

Corpus load_corpus(const std::filesystem::path& dir, const CorpusFiles& files) {
    Corpus corpus;
    build_split(parse_split_file(dir / files.train), corpus.train, &corpus.train_trees, files.train);
    build_split(parse_split_file(dir / files.dev), corpus.dev, nullptr, files.dev);
    build_split(parse_split_file(dir / files.test), corpus.test, nullptr, files.test);
    return corpus;
}

}  // namespace persona
