#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "persona/errors.hpp"
#include "persona/runner.hpp"
#include "persona/selfcheck.hpp"
#include "persona/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTrial = 3;

struct CliOptions {
    persona::ExperimentConfig config;
    std::string config_file;
    std::string dropout_placement = "hidden";
    std::string manifest_dir;
    std::string users = "2,3,5,8";
    std::string strategies = "single,average,confidence";
    std::string alpha_grid;
    std::string lexicon;
    std::string out_dir = "out";
    std::string formats = "json";
    std::string granularity = "sentence";
    std::string oov = "omit";
    std::string word_partition = "iid";
    std::string pure_policy = "include_lexicon_free";
    std::string weighting = "uniform";
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Flat key=value config file, keys mirroring the long flags without the
// leading dashes. Values for flags already given on the command line are
// dropped: flags override the file.
std::vector<std::string> config_file_args(const std::string& path,
                                          const std::set<std::string>& user_flags) {
    std::ifstream in(path);
    if (!in) throw persona::DataError("cannot open config file: " + path);
    std::vector<std::string> args;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw persona::DataError(path + ":" + std::to_string(line_number) +
                                     ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw persona::DataError(path + ":" + std::to_string(line_number) + ": empty key");
        }
        if (user_flags.count("--" + key)) continue;
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

// Rewrites argv so config-file entries appear as flags right after the
// subcommand, before the user's own flags.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::size_t subcommand = 0;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            subcommand = i;
            break;
        }
    }
    if (subcommand == 0) return args;

    std::string config_path;
    std::set<std::string> user_flags;
    for (std::size_t i = subcommand + 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg.rfind("--", 0) != 0) continue;
        const auto eq = arg.find('=');
        const std::string flag = eq == std::string::npos ? arg : arg.substr(0, eq);
        user_flags.insert(flag);
        if (flag == "--config") {
            if (eq != std::string::npos) {
                config_path = arg.substr(eq + 1);
            } else if (i + 1 < args.size()) {
                config_path = args[i + 1];
            }
        }
    }
    if (config_path.empty()) return args;

    const std::vector<std::string> extra = config_file_args(config_path, user_flags);
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(subcommand) + 1, extra.begin(), extra.end());
    return args;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw persona::DataError("empty integer list: " + text);
    return out;
}

// "0:1:0.05" (start:stop:step) or a comma list "0,0.5,0.9".
std::vector<double> parse_alpha_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string part;
        std::vector<double> parts;
        while (std::getline(ss, part, ':')) parts.push_back(std::stod(part));
        if (parts.size() != 3 || parts[2] <= 0.0) {
            throw persona::DataError("alpha grid range must be start:stop:step with step > 0");
        }
        for (double a = parts[0]; a <= parts[1] + 1e-12; a += parts[2]) {
            grid.push_back(std::min(a, parts[1]));
        }
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) grid.push_back(std::stod(item));
        }
    }
    if (grid.empty()) throw persona::DataError("empty alpha grid: " + text);
    return grid;
}

void finalize_config(CliOptions& opt) {
    opt.config.user_counts = parse_int_list(opt.users);
    opt.config.strategies.clear();
    for (const auto& name : split_list(opt.strategies)) {
        opt.config.strategies.push_back(persona::strategy_from_name(name));
    }
    if (!opt.alpha_grid.empty()) opt.config.alpha_grid = parse_alpha_grid(opt.alpha_grid);
    if (!opt.lexicon.empty()) opt.config.lexicon_path = std::filesystem::path(opt.lexicon);
    opt.config.train_granularity = opt.granularity == "phrase" ? persona::TrainGranularity::phrase
                                                               : persona::TrainGranularity::sentence;
    opt.config.oov_policy = opt.oov == "unk" ? persona::OovPolicy::unk : persona::OovPolicy::omit;
    opt.config.word_partition = opt.word_partition == "balanced" ? persona::WordPartition::balanced
                                                                 : persona::WordPartition::iid;
    opt.config.pure_test_policy = opt.pure_policy == "require_own_word"
                                      ? persona::PureTestPolicy::require_own_word
                                      : persona::PureTestPolicy::include_lexicon_free;
    opt.config.user_weighting = opt.weighting == "by_count" ? persona::UserWeighting::by_count
                                                            : persona::UserWeighting::uniform;
    opt.config.hyper.dropout_placement = opt.dropout_placement == "pooled"
                                             ? persona::DropoutPlacement::pooled
                                             : persona::DropoutPlacement::hidden;
    if (!opt.manifest_dir.empty()) opt.config.manifest_dir = std::filesystem::path(opt.manifest_dir);
    opt.config.validate();
}

std::vector<persona::ReportFormat> parse_formats(const std::string& list) {
    const std::vector<std::string> names = split_list(list);
    std::vector<persona::ReportFormat> formats;
    for (const auto& name : names) {
        if (name == "json") {
            formats.push_back(persona::ReportFormat::json);
        } else if (name == "csv") {
            formats.push_back(persona::ReportFormat::csv);
        } else if (name == "md" || name == "markdown") {
            formats.push_back(persona::ReportFormat::markdown);
        } else {
            throw persona::DataError("unknown report format: " + name);
        }
    }
    return formats;
}

// Every experiment knob, mirrored between flags and the key=value config
// file (flags override the file).
void add_experiment_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_file, "flat key=value config file; flags override it");
    cmd->add_option("--data-dir", opt.config.data_dir, "corpus directory")->required();
    cmd->add_option("--train-file", opt.config.files.train, "train split file name");
    cmd->add_option("--dev-file", opt.config.files.dev, "dev split file name");
    cmd->add_option("--test-file", opt.config.files.test, "test split file name");
    cmd->add_option("--lexicon", opt.lexicon, "lexicon cache path (default <data-dir>/lexicon.txt)");
    cmd->add_option("--k", opt.config.lexicon_k, "polar words per side");
    cmd->add_option("--logreg-l2", opt.config.logreg.l2, "polarity model L2");
    cmd->add_option("--logreg-lr", opt.config.logreg.lr, "polarity model learning rate");
    cmd->add_option("--logreg-epochs", opt.config.logreg.epochs, "polarity model epochs");
    cmd->add_option("--logreg-seed", opt.config.logreg.seed, "polarity model seed");
}

void add_run_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--users", opt.users, "comma-separated user counts");
    cmd->add_option("--trials", opt.config.trials, "independent trials per user count");
    cmd->add_option("--seed", opt.config.base_seed, "base seed");
    cmd->add_option("--strategies", opt.strategies, "comma-separated strategies to evaluate");
    cmd->add_option("--alpha", opt.config.alpha, "personalization weight for preference reporting");
    cmd->add_option("--alpha-grid", opt.alpha_grid, "alpha grid, start:stop:step or comma list");
    cmd->add_option("--embedding-dim", opt.config.hyper.embedding_dim, "embedding dimension");
    cmd->add_option("--hidden-dim", opt.config.hyper.hidden_dim, "hidden layer width");
    cmd->add_option("--dropout-keep", opt.config.hyper.dropout_keep, "dropout keep probability");
    cmd->add_option("--dropout-placement", opt.dropout_placement, "hidden|pooled")
        ->check(CLI::IsMember({"hidden", "pooled"}));
    cmd->add_option("--lr0", opt.config.hyper.lr0, "initial learning rate");
    cmd->add_option("--lr-decay", opt.config.hyper.lr_decay, "decay factor on dev plateau");
    cmd->add_option("--batch-size", opt.config.hyper.batch_size, "minibatch size");
    cmd->add_option("--eval-every", opt.config.hyper.eval_every_batches, "batches between dev evaluations");
    cmd->add_option("--patience", opt.config.hyper.patience_batches,
                    "early-stopping window in batches (-1 derives 5 global epochs)");
    cmd->add_option("--max-batches", opt.config.hyper.max_batches, "hard cap on training batches");
    cmd->add_option("--train-granularity", opt.granularity, "sentence|phrase")
        ->check(CLI::IsMember({"sentence", "phrase"}));
    cmd->add_option("--oov-policy", opt.oov, "omit|unk")->check(CLI::IsMember({"omit", "unk"}));
    cmd->add_option("--word-partition", opt.word_partition, "iid|balanced")
        ->check(CLI::IsMember({"iid", "balanced"}));
    cmd->add_option("--pure-test-policy", opt.pure_policy, "include_lexicon_free|require_own_word")
        ->check(CLI::IsMember({"include_lexicon_free", "require_own_word"}));
    cmd->add_option("--user-weighting", opt.weighting, "uniform|by_count")
        ->check(CLI::IsMember({"uniform", "by_count"}));
    cmd->add_option("--threads", opt.config.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--manifest-dir", opt.manifest_dir, "write per-trial shard manifests here");
    cmd->add_option("--format", opt.formats, "comma-separated report formats: json csv md");
}

int cmd_prepare(CliOptions& opt) {
    finalize_config(opt);
    const auto lexicon_path = opt.config.resolved_lexicon_path();
    std::error_code ec;
    std::filesystem::remove(lexicon_path, ec);  // retrain rather than reuse
    const persona::PreparedData data = persona::prepare_data(opt.config);
    std::cout << "corpus: " << data.corpus.train.size() << " train / " << data.corpus.dev.size()
              << " dev / " << data.corpus.test.size() << " test sentences after neutral filtering\n";
    std::cout << "lexicon: " << data.lexicon.positive_words.size() << " positive + "
              << data.lexicon.negative_words.size() << " negative words -> " << lexicon_path.string()
              << "\n";
    return kExitOk;
}

int cmd_run(CliOptions& opt) {
    finalize_config(opt);
    const persona::PreparedData data = persona::prepare_data(opt.config);
    std::cerr << "lexicon " << (data.lexicon_from_cache ? "loaded from cache" : "trained") << " ("
              << data.lexicon.size() << " words)\n";

    std::vector<std::string> trial_errors;
    const std::vector<persona::TrialResult> trials =
        persona::run_trials(opt.config, data.corpus, data.lexicon,
                            [](const std::string& message) { std::cerr << message << "\n"; },
                            &trial_errors);
    if (!trial_errors.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        const auto out = std::filesystem::path(opt.out_dir);
        std::ofstream fail(out / "FAILED.txt");
        for (const auto& error : trial_errors) fail << error << "\n";
        std::ofstream partial(out / "trials_partial.json", std::ios::binary);
        partial << persona::trials_to_json(opt.config, trials);
        for (const auto& error : trial_errors) std::cerr << "error: " << error << "\n";
        std::cerr << trials.size() << " completed trials saved to "
                  << (out / "trials_partial.json").string() << "\n";
        return kExitTrial;
    }

    const persona::ExperimentReport report = persona::report_from_trials(opt.config, trials);
    const auto formats = parse_formats(opt.formats);
    persona::emit_report(report, trials, opt.out_dir, formats);
    std::cout << persona::report_to_markdown(report);
    std::cerr << "report written to " << opt.out_dir << "\n";
    return kExitOk;
}

int cmd_report(const std::string& in_dir, const std::string& alpha_grid, double alpha,
               bool has_alpha, const std::string& format_names) {
    const auto trials_path = std::filesystem::path(in_dir) / "trials.json";
    std::ifstream in(trials_path);
    if (!in) throw persona::DataError("cannot open " + trials_path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto [config, trials] = persona::trials_from_json(buffer.str());
    if (has_alpha) config.alpha = alpha;
    if (!alpha_grid.empty()) config.alpha_grid = parse_alpha_grid(alpha_grid);
    config.validate();
    const persona::ExperimentReport report = persona::report_from_trials(config, trials);
    persona::emit_report(report, trials, in_dir, parse_formats(format_names));
    std::cout << persona::report_to_markdown(report);
    return kExitOk;
}

int cmd_selfcheck() {
    const auto results = persona::run_selfchecks();
    bool all_passed = true;
    for (const auto& result : results) {
        std::cout << (result.passed ? "PASS" : "FAIL") << "  " << result.name << ": "
                  << result.details << "\n";
        all_passed = all_passed && result.passed;
    }
    return all_passed ? kExitOk : kExitTrial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persona: benchmark for personalization of private sentiment models"};
    app.require_subcommand(1);

    CliOptions prepare_opt;
    CLI::App* prepare = app.add_subcommand("prepare", "parse the corpus and cache the polar lexicon");
    add_experiment_options(prepare, prepare_opt);

    CliOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "run seeded trials and emit reports");
    add_experiment_options(run, run_opt);
    add_run_options(run, run_opt);

    std::string report_in, report_grid;
    double report_alpha = 0.9;
    std::string report_formats = "json,md";
    CLI::App* report = app.add_subcommand("report", "recompute tables from stored trial results");
    std::string report_config;
    report->add_option("--config", report_config, "flat key=value config file; flags override it");
    report->add_option("--in", report_in, "directory containing trials.json")->required();
    CLI::Option* alpha_opt = report->add_option("--alpha", report_alpha, "preference-report alpha");
    report->add_option("--alpha-grid", report_grid, "alpha grid, start:stop:step or comma list");
    report->add_option("--format", report_formats, "comma-separated report formats: json csv md");

    CLI::App* selfcheck =
        app.add_subcommand("selfcheck", "run gradient-check and fedeval-equivalence suites");

    persona::SynthSpec synth_spec;
    std::string synth_out = "synth_corpus";
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic treebank-format corpus");
    std::string synth_config;
    synth->add_option("--config", synth_config, "flat key=value config file; flags override it");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_spec.seed, "generator seed");
    synth->add_option("--train-trees", synth_spec.train_trees, "trees in train split");
    synth->add_option("--dev-trees", synth_spec.dev_trees, "trees in dev split");
    synth->add_option("--test-trees", synth_spec.test_trees, "trees in test split");
    synth->add_option("--strong-pos", synth_spec.strong_pos, "strongly positive word count");
    synth->add_option("--strong-neg", synth_spec.strong_neg, "strongly negative word count");
    synth->add_option("--weak-pos", synth_spec.weak_pos, "weakly positive word count");
    synth->add_option("--weak-neg", synth_spec.weak_neg, "weakly negative word count");
    synth->add_option("--filler", synth_spec.filler, "common neutral filler word count");
    synth->add_option("--filler-rare", synth_spec.filler_rare, "rare neutral filler word count");
    synth->add_option("--rare-rate", synth_spec.rare_rate, "chance a filler slot draws a rare word");
    synth->add_option("--strong-none", synth_spec.strong_none, "P(sentence has no strong word)");
    synth->add_option("--strong-two", synth_spec.strong_two, "P(sentence has two strong words)");
    synth->add_option("--strong-three", synth_spec.strong_three, "P(sentence has three strong words)");
    synth->add_option("--p-weak", synth_spec.p_weak, "per-token weak-word probability");
    synth->add_option("--strong-fidelity", synth_spec.strong_fidelity, "strong-word label fidelity");
    synth->add_option("--weak-fidelity", synth_spec.weak_fidelity, "weak-word label fidelity");
    synth->add_option("--label-noise", synth_spec.label_noise, "final label flip rate");
    synth->add_option("--neutral-frac", synth_spec.neutral_frac, "neutral-root tree fraction");
    synth->add_option("--min-len", synth_spec.min_len, "minimum sentence length");
    synth->add_option("--max-len", synth_spec.max_len, "maximum sentence length");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const persona::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        // CLI11 wants reversed argv when parsing from strings
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        reversed.pop_back();  // drop the program name
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(prepare_opt);
        if (run->parsed()) return cmd_run(run_opt);
        if (report->parsed()) {
            return cmd_report(report_in, report_grid, report_alpha, alpha_opt->count() > 0,
                              report_formats);
        }
        if (selfcheck->parsed()) return cmd_selfcheck();
        if (synth->parsed()) {
            persona::write_synth_corpus(synth_spec, synth_out);
            std::cout << "synthetic corpus written to " << synth_out << " (" << synth_spec.train_trees
                      << "/" << synth_spec.dev_trees << "/" << synth_spec.test_trees << " trees)\n";
            return kExitOk;
        }
    } catch (const persona::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const persona::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTrial;
    }
    return kExitUsage;
}
