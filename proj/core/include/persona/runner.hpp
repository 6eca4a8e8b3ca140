#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persona/ensemble.hpp"
#include "persona/metric.hpp"
#include "persona/neural.hpp"
#include "persona/partition.hpp"
#include "persona/polarity.hpp"
#include "persona/treebank.hpp"

namespace persona {

enum class TrainGranularity { sentence, phrase };
enum class UserWeighting { uniform, by_count };
enum class ReportFormat { json, csv, markdown };

struct ExperimentConfig {
    std::filesystem::path data_dir;
    CorpusFiles files;
    std::optional<std::filesystem::path> lexicon_path;  // default: data_dir/lexicon.txt

    std::vector<int> user_counts = {2, 3, 5, 8};
    int trials = 15;
    std::uint64_t base_seed = 1;
    int lexicon_k = 200;
    LogRegOptions logreg;
    Hyperparams hyper;
    std::vector<Strategy> strategies = {Strategy::single, Strategy::average, Strategy::confidence};

    double alpha = 0.9;
    std::vector<double> alpha_grid;  // empty -> 0:1:0.05

    TrainGranularity train_granularity = TrainGranularity::sentence;
    OovPolicy oov_policy = OovPolicy::omit;
    WordPartition word_partition = WordPartition::iid;
    PureTestPolicy pure_test_policy = PureTestPolicy::include_lexicon_free;
    UserWeighting user_weighting = UserWeighting::uniform;

    int threads = 0;  // 0 -> hardware concurrency

    // When set, every trial writes its shard manifest (sentence ids per user
    // per split) as users<N>_trial<T>.json under this directory.
    std::optional<std::filesystem::path> manifest_dir;

    void validate() const;  // throws DataError on out-of-range fields
    std::filesystem::path resolved_lexicon_path() const;
};

/// One (correct, total) measurement. total == 0 marks an empty cell; such
/// cells are flagged and excluded from averages, never zero-filled.
struct Cell {
    long correct = 0;
    long total = 0;

    bool empty() const { return total == 0; }
    double accuracy() const { return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
    bool operator==(const Cell&) const = default;
};

struct EnsembleTrialCells {
    Strategy strategy = Strategy::average;
    Cell global;
    std::vector<Cell> pure;  // per user

    bool operator==(const EnsembleTrialCells&) const = default;
};

struct TrialResult {
    int n_users = 0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<Cell> single_pure;    // per user
    std::vector<Cell> single_global;  // per user (summed over nodes)
    std::vector<EnsembleTrialCells> ensembles;

    bool operator==(const TrialResult&) const = default;
};

struct CellStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample stddev over trials, 0 when trials < 2
    int trials = 0;
    long samples = 0;     // total sentence count behind the mean
    int empty_cells = 0;  // skipped (flagged) per-user cells across trials
};

struct BreakevenEntry {
    Strategy first = Strategy::single;
    Strategy second = Strategy::average;
    PerfPair perf_first, perf_second;
    AlphaCutoff cutoff;
    Preference at_alpha = Preference::indifferent;  // preference at config.alpha
};

struct UserCountReport {
    int n_users = 0;
    int trials = 0;
    CellStats single_pure, single_global;
    std::vector<std::pair<Strategy, CellStats>> ensemble_global;
    std::vector<std::pair<Strategy, CellStats>> ensemble_pure;
    std::vector<BreakevenEntry> breakevens;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<UserCountReport> rows;
    std::vector<std::string> footnotes;
};

/// Load the corpus and the lexicon cache; trains and caches the lexicon when
/// the cache is missing (prepare writes it explicitly).
struct PreparedData {
    Corpus corpus;
    PolarLexicon lexicon;
    bool lexicon_from_cache = false;
};
PreparedData prepare_data(const ExperimentConfig& config, bool allow_cache_write = true);

/// One seeded trial: partition words and sentences, train one private model
/// per user, evaluate every configured strategy on pure tests and globally
/// through the node boundary. Deterministic given (config, n_users, trial).
TrialResult run_trial(const ExperimentConfig& config, const Corpus& corpus,
                      const PolarLexicon& lexicon, int n_users, int trial_index);

using ProgressFn = std::function<void(const std::string&)>;

/// The trials x user-counts grid, possibly on several threads; results are
/// assembled in deterministic order regardless of scheduling. With `errors`
/// null the first trial failure throws; otherwise failures land there and the
/// successful trials are returned (for partial-results persistence).
std::vector<TrialResult> run_trials(const ExperimentConfig& config, const Corpus& corpus,
                                    const PolarLexicon& lexicon, const ProgressFn& progress = {},
                                    std::vector<std::string>* errors = nullptr);

/// Trial-averaged tables and break-even analysis from stored trial results.
ExperimentReport report_from_trials(const ExperimentConfig& config,
                                    std::span<const TrialResult> trials);

ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& corpus,
                                const PolarLexicon& lexicon, const ProgressFn& progress = {});

/// Deterministic per-trial seed: a stable splitmix64 chain over
/// (base_seed, n_users, trial_index).
std::uint64_t trial_seed(std::uint64_t base_seed, int n_users, int trial_index);

// --- emission and persistence (report.cpp) ---

/// JSON data body; byte-stable for identical configs (no timestamps).
std::string report_to_json(const ExperimentReport& report);
std::string trials_to_json(const ExperimentConfig& config, std::span<const TrialResult> trials);
std::pair<ExperimentConfig, std::vector<TrialResult>> trials_from_json(const std::string& text);
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_markdown(const ExperimentReport& report);

/// Write report.json (+ cells.csv / report.md per formats), trials.json and
/// run_meta.json (the only file carrying timestamps) under out_dir.
void emit_report(const ExperimentReport& report, std::span<const TrialResult> trials,
                 const std::filesystem::path& out_dir, std::span<const ReportFormat> formats);

std::string granularity_name(TrainGranularity g);
std::string oov_policy_name(OovPolicy p);
std::string word_partition_name(WordPartition p);
std::string pure_test_policy_name(PureTestPolicy p);
std::string user_weighting_name(UserWeighting w);

}  // namespace persona
