#include "persona/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "persona/errors.hpp"
#include "persona/fedeval.hpp"
#include "persona/rng.hpp"

namespace persona {

namespace {

// Phrase-granularity expansion happens inside a user's shard: a sentence's
// subtree phrases belong to the same simulated user.
std::vector<Sentence> training_examples(const ExperimentConfig& config, const Corpus& corpus,
                                        const UserShard& shard) {
    if (config.train_granularity == TrainGranularity::sentence) return shard.train;
    std::vector<Sentence> examples;
    int next_id = 0;
    for (const auto& sentence : shard.train) {
        if (sentence.tree < 0 || sentence.tree >= static_cast<int>(corpus.train_trees.size())) {
            throw DataError("phrase granularity requires retained train trees");
        }
        for (auto& phrase : phrase_examples(corpus.train_trees[static_cast<std::size_t>(sentence.tree)])) {
            phrase.id = next_id++;
            examples.push_back(std::move(phrase));
        }
    }
    return examples;
}

struct TrialStats {
    // Accumulators across trials for one cell. Means are over per-trial
    // values; per-user cells are first reduced within the trial.
    std::vector<double> per_trial;
    long samples = 0;
    int empty_cells = 0;

    void add(double value) { per_trial.push_back(value); }

    CellStats finish() const {
        CellStats stats;
        stats.trials = static_cast<int>(per_trial.size());
        stats.samples = samples;
        stats.empty_cells = empty_cells;
        if (per_trial.empty()) return stats;
        double sum = 0.0;
        for (double v : per_trial) sum += v;
        stats.mean = sum / static_cast<double>(per_trial.size());
        if (per_trial.size() > 1) {
            double ss = 0.0;
            for (double v : per_trial) ss += (v - stats.mean) * (v - stats.mean);
            stats.stddev = std::sqrt(ss / static_cast<double>(per_trial.size() - 1));
        }
        return stats;
    }
};

// Within-trial reduction of per-user cells under the configured weighting.
// Returns nothing when every cell is empty.
std::optional<double> reduce_users(std::span<const Cell> cells, UserWeighting weighting,
                                   long& samples_out, int& empty_out) {
    double sum = 0.0;
    long correct = 0, total = 0;
    int populated = 0;
    for (const auto& cell : cells) {
        if (cell.empty()) {
            ++empty_out;
            continue;
        }
        ++populated;
        sum += cell.accuracy();
        correct += cell.correct;
        total += cell.total;
        samples_out += cell.total;
    }
    if (populated == 0) return std::nullopt;
    if (weighting == UserWeighting::uniform) return sum / static_cast<double>(populated);
    return static_cast<double>(correct) / static_cast<double>(total);
}

const EnsembleTrialCells* find_ensemble(const TrialResult& trial, Strategy strategy) {
    for (const auto& e : trial.ensembles) {
        if (e.strategy == strategy) return &e;
    }
    return nullptr;
}

}  // namespace

std::string granularity_name(TrainGranularity g) {
    return g == TrainGranularity::sentence ? "sentence" : "phrase";
}
std::string oov_policy_name(OovPolicy p) { return p == OovPolicy::omit ? "omit" : "unk"; }
std::string word_partition_name(WordPartition p) {
    return p == WordPartition::iid ? "iid" : "balanced";
}
std::string pure_test_policy_name(PureTestPolicy p) {
    return p == PureTestPolicy::include_lexicon_free ? "include_lexicon_free" : "require_own_word";
}
std::string user_weighting_name(UserWeighting w) {
    return w == UserWeighting::uniform ? "uniform" : "by_count";
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw DataError("config: trials must be >= 1");
    if (user_counts.empty()) throw DataError("config: user count list is empty");
    for (int n : user_counts) {
        if (n < 1) throw DataError("config: user counts must be >= 1");
    }
    if (lexicon_k < 1) throw DataError("config: lexicon k must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("config: alpha outside [0,1]");
    for (double a : alpha_grid) {
        if (!(a >= 0.0 && a <= 1.0)) throw DataError("config: alpha grid value outside [0,1]");
    }
    if (strategies.empty()) throw DataError("config: strategy list is empty");
    if (hyper.batch_size < 1) throw DataError("config: batch_size must be >= 1");
    if (!(hyper.lr_decay > 0.0 && hyper.lr_decay < 1.0)) {
        throw DataError("config: lr_decay must be in (0,1)");
    }
    if (!(hyper.dropout_keep > 0.0 && hyper.dropout_keep <= 1.0)) {
        throw DataError("config: dropout_keep must be in (0,1]");
    }
}

std::filesystem::path ExperimentConfig::resolved_lexicon_path() const {
    return lexicon_path ? *lexicon_path : data_dir / "lexicon.txt";
}

std::uint64_t trial_seed(std::uint64_t base_seed, int n_users, int trial_index) {
    return mix_seed(base_seed, static_cast<std::uint64_t>(n_users),
                    static_cast<std::uint64_t>(trial_index));
}

PreparedData prepare_data(const ExperimentConfig& config, bool allow_cache_write) {
    config.validate();
    PreparedData data;
    data.corpus = load_corpus(config.data_dir, config.files);

    const auto lexicon_file = config.resolved_lexicon_path();
    if (std::filesystem::exists(lexicon_file)) {
        data.lexicon = load_lexicon(lexicon_file);
        data.lexicon_from_cache = true;
        if (static_cast<int>(data.lexicon.positive_words.size()) != config.lexicon_k) {
            throw DataError("lexicon cache " + lexicon_file.string() + " has k=" +
                            std::to_string(data.lexicon.positive_words.size()) +
                            ", config wants k=" + std::to_string(config.lexicon_k) +
                            " (delete the cache or pass --lexicon)");
        }
        return data;
    }

    const Vocab vocab = build_vocab(data.corpus.train);
    const LogRegModel model = train_logreg(data.corpus.train, vocab, config.logreg);
    data.lexicon = top_polar_words(model, vocab, config.lexicon_k);
    if (allow_cache_write) {
        try {
            save_lexicon(data.lexicon, lexicon_file);
        } catch (const DataError&) {
            // Read-only data dir: proceed uncached.
        }
    }
    return data;
}

TrialResult run_trial(const ExperimentConfig& config, const Corpus& corpus,
                      const PolarLexicon& lexicon, int n_users, int trial_index) {
    TrialResult result;
    result.n_users = n_users;
    result.trial_index = trial_index;
    result.seed = trial_seed(config.base_seed, n_users, trial_index);

    Rng trial_rng(result.seed);
    Rng word_rng = trial_rng.split("words");
    Rng sentence_rng = trial_rng.split("sentences");
    const WordOwnership ownership = assign_words(lexicon, n_users, word_rng, config.word_partition);
    const std::vector<UserShard> shards =
        assign_sentences(corpus, ownership, sentence_rng, config.pure_test_policy);

    const int patience = config.hyper.patience_batches >= 0
                             ? config.hyper.patience_batches
                             : derived_patience(corpus.train.size(), config.hyper.batch_size);

    std::vector<ModelParams> models;
    models.reserve(static_cast<std::size_t>(n_users));
    for (int u = 0; u < n_users; ++u) {
        const UserShard& shard = shards[static_cast<std::size_t>(u)];
        if (shard.train.empty() || shard.dev.empty()) {
            throw DataError("trial " + std::to_string(trial_index) + " (" + std::to_string(n_users) +
                            " users): user " + std::to_string(u) + " has an empty train or dev shard");
        }
        const std::vector<Sentence> examples = training_examples(config, corpus, shard);
        const Vocab vocab = build_vocab(examples, config.oov_policy);
        Hyperparams hyper = config.hyper;
        hyper.patience_batches = patience;
        hyper.seed = trial_rng.split("train/u" + std::to_string(u)).next_u64();
        models.push_back(train(examples, shard.dev, vocab, hyper));
    }

    if (config.manifest_dir) {
        std::filesystem::create_directories(*config.manifest_dir);
        const auto path = *config.manifest_dir / ("users" + std::to_string(n_users) + "_trial" +
                                                  std::to_string(trial_index) + ".json");
        std::ofstream out(path);
        if (!out) throw DataError("cannot write shard manifest: " + path.string());
        out << shard_manifest_json(shards);
    }

    std::vector<UserNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n_users));
    for (int u = 0; u < n_users; ++u) {
        nodes.emplace_back(u, shards[static_cast<std::size_t>(u)], models[static_cast<std::size_t>(u)]);
    }

    const bool want_single =
        std::find(config.strategies.begin(), config.strategies.end(), Strategy::single) !=
        config.strategies.end();
    if (want_single) {
        for (int u = 0; u < n_users; ++u) {
            const Predictor predictor = Predictor::single_model(models[static_cast<std::size_t>(u)]);
            const EvalSummary pure =
                node_evaluate(nodes[static_cast<std::size_t>(u)], predictor, EvalSplit::pure_test);
            result.single_pure.push_back({pure.correct, pure.total});
            const GlobalEvalReport global = global_accuracy(predictor, nodes, EvalSplit::test);
            result.single_global.push_back({global.aggregate.correct, global.aggregate.total});
        }
    }

    for (Strategy strategy : config.strategies) {
        if (strategy == Strategy::single) continue;
        const Predictor predictor = Predictor::ensemble(models, strategy);
        EnsembleTrialCells cells;
        cells.strategy = strategy;
        const GlobalEvalReport global = global_accuracy(predictor, nodes, EvalSplit::test);
        cells.global = {global.aggregate.correct, global.aggregate.total};
        for (int u = 0; u < n_users; ++u) {
            const EvalSummary pure =
                node_evaluate(nodes[static_cast<std::size_t>(u)], predictor, EvalSplit::pure_test);
            cells.pure.push_back({pure.correct, pure.total});
        }
        result.ensembles.push_back(std::move(cells));
    }
    return result;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config, const Corpus& corpus,
                                    const PolarLexicon& lexicon, const ProgressFn& progress,
                                    std::vector<std::string>* errors_out) {
    config.validate();
    struct Task {
        int n_users;
        int trial_index;
    };
    std::vector<Task> tasks;
    for (int n : config.user_counts) {
        for (int t = 0; t < config.trials; ++t) tasks.push_back({n, t});
    }

    std::vector<TrialResult> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min(tasks.size(),
                 static_cast<std::size_t>(config.threads > 0 ? static_cast<unsigned>(config.threads) : hw));

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task task = tasks[i];
            try {
                results[i] = run_trial(config, corpus, lexicon, task.n_users, task.trial_index);
                if (progress) {
                    std::lock_guard lock(progress_mutex);
                    progress("trial " + std::to_string(task.trial_index + 1) + "/" +
                             std::to_string(config.trials) + " done for " +
                             std::to_string(task.n_users) + " users");
                }
            } catch (const std::exception& e) {
                errors[i] = "trial " + std::to_string(task.trial_index) + " (" +
                            std::to_string(task.n_users) + " users): " + e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (errors_out) {
        std::vector<TrialResult> succeeded;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (errors[i].empty()) {
                succeeded.push_back(std::move(results[i]));
            } else {
                errors_out->push_back(errors[i]);
            }
        }
        return succeeded;
    }
    for (const auto& error : errors) {
        if (!error.empty()) throw DataError(error);
    }
    return results;
}

ExperimentReport report_from_trials(const ExperimentConfig& config,
                                    std::span<const TrialResult> trials) {
    ExperimentReport report;
    report.config = config;
    report.footnotes = {
        "accuracies are higher-is-better; alpha cutoffs and preferences are computed under that "
        "orientation, and a loss-oriented reading of the same numbers flips every preference",
        "user-specific (pure-test) cells aggregate per-user accuracies with weighting=" +
            user_weighting_name(config.user_weighting) +
            " within each trial before averaging over trials",
        "difference tables are recomputed from the trial-averaged means as single minus ensemble",
    };
    long empty_cells = 0;

    for (int n_users : config.user_counts) {
        UserCountReport row;
        row.n_users = n_users;

        TrialStats single_pure, single_global;
        std::vector<TrialStats> ens_global(config.strategies.size());
        std::vector<TrialStats> ens_pure(config.strategies.size());

        for (const auto& trial : trials) {
            if (trial.n_users != n_users) continue;
            ++row.trials;
            if (!trial.single_pure.empty()) {
                if (auto v = reduce_users(trial.single_pure, config.user_weighting,
                                          single_pure.samples, single_pure.empty_cells)) {
                    single_pure.add(*v);
                }
                if (auto v = reduce_users(trial.single_global, UserWeighting::uniform,
                                          single_global.samples, single_global.empty_cells)) {
                    single_global.add(*v);
                }
            }
            for (std::size_t s = 0; s < config.strategies.size(); ++s) {
                const Strategy strategy = config.strategies[s];
                if (strategy == Strategy::single) continue;
                if (const EnsembleTrialCells* cells = find_ensemble(trial, strategy)) {
                    if (!cells->global.empty()) {
                        ens_global[s].add(cells->global.accuracy());
                        ens_global[s].samples += cells->global.total;
                    } else {
                        ++ens_global[s].empty_cells;
                    }
                    if (auto v = reduce_users(cells->pure, config.user_weighting,
                                              ens_pure[s].samples, ens_pure[s].empty_cells)) {
                        ens_pure[s].add(*v);
                    }
                }
            }
        }

        row.single_pure = single_pure.finish();
        row.single_global = single_global.finish();
        for (std::size_t s = 0; s < config.strategies.size(); ++s) {
            const Strategy strategy = config.strategies[s];
            if (strategy == Strategy::single) continue;
            row.ensemble_global.emplace_back(strategy, ens_global[s].finish());
            row.ensemble_pure.emplace_back(strategy, ens_pure[s].finish());
        }

        // Pairwise break-even analysis over the configured strategies, in
        // config order, from the trial-averaged means.
        auto perf_of = [&](Strategy strategy) -> std::optional<PerfPair> {
            if (strategy == Strategy::single) {
                if (row.single_pure.trials == 0 || row.single_global.trials == 0) return std::nullopt;
                return PerfPair{row.single_pure.mean, row.single_global.mean,
                                Orientation::higher_is_better};
            }
            const CellStats* pure = nullptr;
            const CellStats* global = nullptr;
            for (const auto& [s, stats] : row.ensemble_pure) {
                if (s == strategy) pure = &stats;
            }
            for (const auto& [s, stats] : row.ensemble_global) {
                if (s == strategy) global = &stats;
            }
            if (!pure || !global || pure->trials == 0 || global->trials == 0) return std::nullopt;
            return PerfPair{pure->mean, global->mean, Orientation::higher_is_better};
        };
        for (std::size_t i = 0; i < config.strategies.size(); ++i) {
            for (std::size_t j = i + 1; j < config.strategies.size(); ++j) {
                const auto perf_i = perf_of(config.strategies[i]);
                const auto perf_j = perf_of(config.strategies[j]);
                if (!perf_i || !perf_j) continue;
                BreakevenEntry entry;
                entry.first = config.strategies[i];
                entry.second = config.strategies[j];
                entry.perf_first = *perf_i;
                entry.perf_second = *perf_j;
                entry.cutoff = breakeven_alpha(*perf_i, *perf_j);
                entry.at_alpha = preferred(config.alpha, *perf_i, *perf_j);
                row.breakevens.push_back(entry);
            }
        }
        empty_cells += row.single_pure.empty_cells;
        for (const auto& [strategy, stats] : row.ensemble_pure) empty_cells += stats.empty_cells;
        report.rows.push_back(std::move(row));
    }
    if (empty_cells > 0) {
        report.footnotes.push_back(
            "warning: " + std::to_string(empty_cells) +
            " per-user cells had an empty pure test set and were skipped, not zero-filled");
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& corpus,
                                const PolarLexicon& lexicon, const ProgressFn& progress) {
    const std::vector<TrialResult> trials = run_trials(config, corpus, lexicon, progress);
    return report_from_trials(config, trials);
}

}  // namespace persona
