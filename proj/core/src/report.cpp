#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"
#include "persona/runner.hpp"

namespace persona {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::vector<double> effective_grid(const ExperimentConfig& config) {
    if (!config.alpha_grid.empty()) return config.alpha_grid;
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

ordered_json config_json(const ExperimentConfig& config) {
    ordered_json j;
    j["data_dir"] = config.data_dir.string();
    j["files"] = {{"train", config.files.train}, {"dev", config.files.dev}, {"test", config.files.test}};
    j["lexicon"] = config.resolved_lexicon_path().string();
    j["user_counts"] = config.user_counts;
    j["trials"] = config.trials;
    j["base_seed"] = config.base_seed;
    j["lexicon_k"] = config.lexicon_k;
    j["logreg"] = {{"l2", config.logreg.l2},
                   {"lr", config.logreg.lr},
                   {"epochs", config.logreg.epochs},
                   {"seed", config.logreg.seed}};
    const Hyperparams& hp = config.hyper;
    j["hyper"] = {{"embedding_dim", hp.embedding_dim},
                  {"hidden_dim", hp.hidden_dim},
                  {"dropout_keep", hp.dropout_keep},
                  {"dropout_placement",
                   hp.dropout_placement == DropoutPlacement::pooled ? "pooled" : "hidden"},
                  {"lr0", hp.lr0},
                  {"lr_decay", hp.lr_decay},
                  {"adam_beta1", hp.adam_beta1},
                  {"adam_beta2", hp.adam_beta2},
                  {"adam_eps", hp.adam_eps},
                  {"batch_size", hp.batch_size},
                  {"eval_every_batches", hp.eval_every_batches},
                  {"patience_batches", hp.patience_batches},
                  {"max_batches", hp.max_batches},
                  {"seed", hp.seed}};
    std::vector<std::string> strategies;
    for (Strategy s : config.strategies) strategies.push_back(strategy_name(s));
    j["strategies"] = strategies;
    if (config.manifest_dir) {
        j["manifest_dir"] = config.manifest_dir->string();
    } else {
        j["manifest_dir"] = nullptr;
    }
    j["alpha"] = config.alpha;
    j["alpha_grid"] = effective_grid(config);
    j["train_granularity"] = granularity_name(config.train_granularity);
    j["oov_policy"] = oov_policy_name(config.oov_policy);
    j["word_partition"] = word_partition_name(config.word_partition);
    j["pure_test_policy"] = pure_test_policy_name(config.pure_test_policy);
    j["user_weighting"] = user_weighting_name(config.user_weighting);
    j["rng_algorithm"] = Rng::kAlgorithm;
    return j;
}

ExperimentConfig config_from_json(const ordered_json& j) {
    ExperimentConfig config;
    config.data_dir = j.at("data_dir").get<std::string>();
    config.files.train = j.at("files").at("train").get<std::string>();
    config.files.dev = j.at("files").at("dev").get<std::string>();
    config.files.test = j.at("files").at("test").get<std::string>();
    config.lexicon_path = std::filesystem::path(j.at("lexicon").get<std::string>());
    config.user_counts = j.at("user_counts").get<std::vector<int>>();
    config.trials = j.at("trials").get<int>();
    config.base_seed = j.at("base_seed").get<std::uint64_t>();
    config.lexicon_k = j.at("lexicon_k").get<int>();
    const auto& lr = j.at("logreg");
    config.logreg.l2 = lr.at("l2").get<double>();
    config.logreg.lr = lr.at("lr").get<double>();
    config.logreg.epochs = lr.at("epochs").get<int>();
    config.logreg.seed = lr.at("seed").get<std::uint64_t>();
    const auto& hp = j.at("hyper");
    config.hyper.embedding_dim = hp.at("embedding_dim").get<int>();
    config.hyper.hidden_dim = hp.at("hidden_dim").get<int>();
    config.hyper.dropout_keep = hp.at("dropout_keep").get<double>();
    config.hyper.dropout_placement = hp.at("dropout_placement").get<std::string>() == "pooled"
                                         ? DropoutPlacement::pooled
                                         : DropoutPlacement::hidden;
    config.hyper.lr0 = hp.at("lr0").get<double>();
    config.hyper.lr_decay = hp.at("lr_decay").get<double>();
    config.hyper.adam_beta1 = hp.at("adam_beta1").get<double>();
    config.hyper.adam_beta2 = hp.at("adam_beta2").get<double>();
    config.hyper.adam_eps = hp.at("adam_eps").get<double>();
    config.hyper.batch_size = hp.at("batch_size").get<int>();
    config.hyper.eval_every_batches = hp.at("eval_every_batches").get<int>();
    config.hyper.patience_batches = hp.at("patience_batches").get<int>();
    config.hyper.max_batches = hp.at("max_batches").get<long>();
    config.hyper.seed = hp.at("seed").get<std::uint64_t>();
    config.strategies.clear();
    for (const auto& name : j.at("strategies")) {
        config.strategies.push_back(strategy_from_name(name.get<std::string>()));
    }
    if (j.contains("manifest_dir") && !j.at("manifest_dir").is_null()) {
        config.manifest_dir = std::filesystem::path(j.at("manifest_dir").get<std::string>());
    }
    config.alpha = j.at("alpha").get<double>();
    config.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    const auto granularity = j.at("train_granularity").get<std::string>();
    config.train_granularity =
        granularity == "phrase" ? TrainGranularity::phrase : TrainGranularity::sentence;
    config.oov_policy = j.at("oov_policy").get<std::string>() == "unk" ? OovPolicy::unk : OovPolicy::omit;
    config.word_partition =
        j.at("word_partition").get<std::string>() == "balanced" ? WordPartition::balanced : WordPartition::iid;
    config.pure_test_policy = j.at("pure_test_policy").get<std::string>() == "require_own_word"
                                  ? PureTestPolicy::require_own_word
                                  : PureTestPolicy::include_lexicon_free;
    config.user_weighting = j.at("user_weighting").get<std::string>() == "by_count"
                                ? UserWeighting::by_count
                                : UserWeighting::uniform;
    return config;
}

ordered_json cell_json(const Cell& cell) {
    return {{"correct", cell.correct}, {"total", cell.total}};
}

Cell cell_from_json(const ordered_json& j) {
    return {j.at("correct").get<long>(), j.at("total").get<long>()};
}

ordered_json stats_json(const CellStats& stats) {
    ordered_json j;
    if (stats.trials > 0) {
        j["mean"] = stats.mean;
        j["stddev"] = stats.stddev;
    } else {
        j["mean"] = nullptr;
        j["stddev"] = nullptr;
    }
    j["trials"] = stats.trials;
    j["samples"] = stats.samples;
    j["empty_cells"] = stats.empty_cells;
    return j;
}

const CellStats* find_stats(const std::vector<std::pair<Strategy, CellStats>>& list, Strategy s) {
    for (const auto& [strategy, stats] : list) {
        if (strategy == s) return &stats;
    }
    return nullptr;
}

std::string format_double(double v, int precision) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "persona-experiment-report";
    j["config"] = config_json(report.config);
    j["footnotes"] = report.footnotes;

    const std::vector<double> grid = effective_grid(report.config);
    auto& rows = j["results"];
    rows = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["n_users"] = row.n_users;
        r["trials"] = row.trials;
        ordered_json cells;
        cells["single_pure"] = stats_json(row.single_pure);
        cells["single_global"] = stats_json(row.single_global);
        ordered_json eg, ep;
        for (const auto& [strategy, stats] : row.ensemble_global) eg[strategy_name(strategy)] = stats_json(stats);
        for (const auto& [strategy, stats] : row.ensemble_pure) ep[strategy_name(strategy)] = stats_json(stats);
        cells["ensemble_global"] = std::move(eg);
        cells["ensemble_pure"] = std::move(ep);
        r["cells"] = std::move(cells);

        // Difference tables (single minus ensemble), recomputed from means.
        ordered_json diff_pure, diff_global;
        if (row.single_pure.trials > 0) {
            for (const auto& [strategy, stats] : row.ensemble_pure) {
                if (stats.trials > 0) diff_pure[strategy_name(strategy)] = row.single_pure.mean - stats.mean;
            }
        }
        if (row.single_global.trials > 0) {
            for (const auto& [strategy, stats] : row.ensemble_global) {
                if (stats.trials > 0) diff_global[strategy_name(strategy)] = row.single_global.mean - stats.mean;
            }
        }
        r["differences"] = {{"pure", std::move(diff_pure)}, {"global", std::move(diff_global)}};

        auto& breakevens = r["breakevens"];
        breakevens = ordered_json::array();
        for (const auto& entry : row.breakevens) {
            ordered_json b;
            b["first"] = strategy_name(entry.first);
            b["second"] = strategy_name(entry.second);
            b["perf"] = {{"first", {{"local", entry.perf_first.local}, {"global", entry.perf_first.global}}},
                         {"second", {{"local", entry.perf_second.local}, {"global", entry.perf_second.global}}}};
            if (entry.cutoff.value) {
                b["alpha_cutoff"] = *entry.cutoff.value;
            } else {
                b["alpha_cutoff"] = nullptr;
            }
            b["preferred_above"] = preference_name(entry.cutoff.above);
            b["preferred_below"] = preference_name(entry.cutoff.below);
            b["preferred_at_alpha"] = preference_name(entry.at_alpha);
            breakevens.push_back(std::move(b));
        }

        // Personalization score curves over the alpha grid.
        auto& scores = r["alpha_scores"];
        scores = ordered_json::array();
        for (double alpha : grid) {
            ordered_json point;
            point["alpha"] = alpha;
            if (row.single_pure.trials > 0 && row.single_global.trials > 0) {
                point["single"] = personalization_score(
                    alpha, {row.single_pure.mean, row.single_global.mean, Orientation::higher_is_better});
            }
            for (const auto& [strategy, stats] : row.ensemble_pure) {
                const CellStats* global = find_stats(row.ensemble_global, strategy);
                if (stats.trials > 0 && global && global->trials > 0) {
                    point[strategy_name(strategy)] = personalization_score(
                        alpha, {stats.mean, global->mean, Orientation::higher_is_better});
                }
            }
            scores.push_back(std::move(point));
        }
        rows.push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

std::string trials_to_json(const ExperimentConfig& config, std::span<const TrialResult> trials) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "persona-trials";
    j["config"] = config_json(config);
    auto& list = j["trials"];
    list = ordered_json::array();
    for (const auto& trial : trials) {
        ordered_json t;
        t["n_users"] = trial.n_users;
        t["trial"] = trial.trial_index;
        t["seed"] = trial.seed;
        auto& singles = t["single"];
        singles = ordered_json::array();
        for (std::size_t u = 0; u < trial.single_pure.size(); ++u) {
            singles.push_back({{"user", u},
                               {"pure", cell_json(trial.single_pure[u])},
                               {"global", cell_json(trial.single_global[u])}});
        }
        auto& ensembles = t["ensembles"];
        ensembles = ordered_json::array();
        for (const auto& e : trial.ensembles) {
            ordered_json ej;
            ej["strategy"] = strategy_name(e.strategy);
            ej["global"] = cell_json(e.global);
            auto& pure = ej["pure"];
            pure = ordered_json::array();
            for (const auto& cell : e.pure) pure.push_back(cell_json(cell));
            ensembles.push_back(std::move(ej));
        }
        list.push_back(std::move(t));
    }
    return j.dump(2) + "\n";
}

std::pair<ExperimentConfig, std::vector<TrialResult>> trials_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("trials file is not valid JSON: ") + e.what());
    }
    if (j.value("kind", "") != "persona-trials") throw DataError("not a persona-trials file");
    if (j.value("schema_version", -1) != kSchemaVersion) {
        throw DataError("unsupported trials schema version");
    }
    ExperimentConfig config = config_from_json(j.at("config"));
    std::vector<TrialResult> trials;
    for (const auto& t : j.at("trials")) {
        TrialResult trial;
        trial.n_users = t.at("n_users").get<int>();
        trial.trial_index = t.at("trial").get<int>();
        trial.seed = t.at("seed").get<std::uint64_t>();
        for (const auto& s : t.at("single")) {
            trial.single_pure.push_back(cell_from_json(s.at("pure")));
            trial.single_global.push_back(cell_from_json(s.at("global")));
        }
        for (const auto& ej : t.at("ensembles")) {
            EnsembleTrialCells cells;
            cells.strategy = strategy_from_name(ej.at("strategy").get<std::string>());
            cells.global = cell_from_json(ej.at("global"));
            for (const auto& c : ej.at("pure")) cells.pure.push_back(cell_from_json(c));
            trial.ensembles.push_back(std::move(cells));
        }
        trials.push_back(std::move(trial));
    }
    return {std::move(config), std::move(trials)};
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "n_users,strategy,metric,mean,stddev,trials,samples,empty_cells\n";
    auto emit = [&out](int n_users, const std::string& strategy, const std::string& metric,
                       const CellStats& stats) {
        out << n_users << ',' << strategy << ',' << metric << ',';
        if (stats.trials > 0) {
            out << format_double(stats.mean, 6) << ',' << format_double(stats.stddev, 6);
        } else {
            out << ',';
        }
        out << ',' << stats.trials << ',' << stats.samples << ',' << stats.empty_cells << '\n';
    };
    for (const auto& row : report.rows) {
        for (Strategy strategy : report.config.strategies) {
            const std::string name = strategy_name(strategy);
            if (strategy == Strategy::single) {
                emit(row.n_users, name, "pure_accuracy", row.single_pure);
                emit(row.n_users, name, "global_accuracy", row.single_global);
            } else {
                const CellStats* pure = find_stats(row.ensemble_pure, strategy);
                const CellStats* global = find_stats(row.ensemble_global, strategy);
                if (pure) emit(row.n_users, name, "pure_accuracy", *pure);
                if (global) emit(row.n_users, name, "global_accuracy", *global);
            }
        }
    }
    return out.str();
}

std::string report_to_markdown(const ExperimentReport& report) {
    std::ostringstream out;
    const auto& strategies = report.config.strategies;
    const bool has_single =
        std::find(strategies.begin(), strategies.end(), Strategy::single) != strategies.end();

    std::vector<Strategy> ensembles;
    for (Strategy s : strategies) {
        if (s != Strategy::single) ensembles.push_back(s);
    }

    auto stat_str = [](const CellStats& stats) {
        if (stats.trials == 0) return std::string("n/a");
        return format_double(stats.mean, 3);
    };

    out << "# Experiment report\n\n";
    out << "## Accuracy by number of users\n\n";
    out << "| Num. users |";
    if (has_single) out << " Single model (user-specific) | Single model (global) |";
    for (Strategy s : ensembles) out << ' ' << strategy_name(s) << " aggregation (global) |";
    out << "\n|---|";
    if (has_single) out << "---|---|";
    for (std::size_t i = 0; i < ensembles.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& row : report.rows) {
        out << "| " << row.n_users << " |";
        if (has_single) {
            out << ' ' << stat_str(row.single_pure) << " | " << stat_str(row.single_global) << " |";
        }
        for (Strategy s : ensembles) {
            const CellStats* stats = find_stats(row.ensemble_global, s);
            out << ' ' << (stats ? stat_str(*stats) : "n/a") << " |";
        }
        out << "\n";
    }

    if (has_single && !ensembles.empty()) {
        out << "\n## Single minus ensemble, user-specific data\n\n| Num. users |";
        for (Strategy s : ensembles) out << " difference (" << strategy_name(s) << ") |";
        out << "\n|---|";
        for (std::size_t i = 0; i < ensembles.size(); ++i) out << "---|";
        out << "\n";
        for (const auto& row : report.rows) {
            out << "| " << row.n_users << " |";
            for (Strategy s : ensembles) {
                const CellStats* stats = find_stats(row.ensemble_pure, s);
                if (row.single_pure.trials > 0 && stats && stats->trials > 0) {
                    out << ' ' << format_double(row.single_pure.mean - stats->mean, 3) << " |";
                } else {
                    out << " n/a |";
                }
            }
            out << "\n";
        }

        out << "\n## Single minus ensemble, global data\n\n| Num. users |";
        for (Strategy s : ensembles) out << " difference (" << strategy_name(s) << ") |";
        out << "\n|---|";
        for (std::size_t i = 0; i < ensembles.size(); ++i) out << "---|";
        out << "\n";
        for (const auto& row : report.rows) {
            out << "| " << row.n_users << " |";
            for (Strategy s : ensembles) {
                const CellStats* stats = find_stats(row.ensemble_global, s);
                if (row.single_global.trials > 0 && stats && stats->trials > 0) {
                    out << ' ' << format_double(row.single_global.mean - stats->mean, 3) << " |";
                } else {
                    out << " n/a |";
                }
            }
            out << "\n";
        }
    }

    bool any_breakeven = false;
    for (const auto& row : report.rows) any_breakeven = any_breakeven || !row.breakevens.empty();
    if (any_breakeven) {
        out << "\n## Break-even alpha per strategy pair\n\n";
        out << "| Num. users | pair | alpha cutoff | preferred above | preferred below | at alpha="
            << format_double(report.config.alpha, 2) << " |\n|---|---|---|---|---|---|\n";
        for (const auto& row : report.rows) {
            for (const auto& entry : row.breakevens) {
                auto pref = [&](Preference p) {
                    switch (p) {
                        case Preference::first: return strategy_name(entry.first);
                        case Preference::second: return strategy_name(entry.second);
                        case Preference::indifferent: return std::string("indifferent");
                    }
                    return std::string("indifferent");
                };
                out << "| " << row.n_users << " | " << strategy_name(entry.first) << " vs "
                    << strategy_name(entry.second) << " | "
                    << (entry.cutoff.value ? format_double(*entry.cutoff.value, 4) : std::string("none"))
                    << " | " << pref(entry.cutoff.above) << " | " << pref(entry.cutoff.below) << " | "
                    << pref(entry.at_alpha) << " |\n";
            }
        }
    }

    out << "\n## Notes\n\n";
    for (const auto& note : report.footnotes) out << "- " << note << "\n";
    return out.str();
}

void emit_report(const ExperimentReport& report, std::span<const TrialResult> trials,
                 const std::filesystem::path& out_dir, std::span<const ReportFormat> formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    auto write_file = [&out_dir](const std::string& name, const std::string& content) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write report file: " + path.string());
        out << content;
        if (!out) throw DataError("failed writing report file: " + path.string());
    };

    write_file("report.json", report_to_json(report));
    write_file("trials.json", trials_to_json(report.config, trials));
    for (ReportFormat format : formats) {
        if (format == ReportFormat::csv) write_file("cells.csv", report_to_csv(report));
        if (format == ReportFormat::markdown) write_file("report.md", report_to_markdown(report));
    }

    // Run metadata lives apart from the data body: it may carry timestamps.
    const auto now = std::chrono::system_clock::now();
    const std::time_t now_t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now_t), "%Y-%m-%dT%H:%M:%SZ");
    ordered_json meta;
    meta["generated_at"] = stamp.str();
    meta["schema_version"] = kSchemaVersion;
    write_file("run_meta.json", meta.dump(2) + "\n");
}

}  // namespace persona
