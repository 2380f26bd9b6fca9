#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msvr/dataset.hpp"
#include "msvr/evaluation.hpp"
#include "msvr/input_selection.hpp"
#include "msvr/preprocessing.hpp"
#include "msvr/simulators.hpp"
#include "msvr/solver.hpp"
#include "msvr/tuning.hpp"

namespace msvr {

// Reads one series per column (header = ids) or, when the first header cell
// is "id"/"series"/"name", one series per row. Trailing blanks are allowed.
std::vector<TimeSeries> ingest_csv(const std::string& path);
std::vector<TimeSeries> parse_csv(const std::string& text, const std::string& origin = "<text>");
// Header t,<id> with full precision; t is 1-based.
std::string series_to_csv(const TimeSeries& s);

struct DatasetSpec {
    enum class Kind { Henon, MackeyGlass, Csv, Inline };
    Kind kind = Kind::MackeyGlass;
    std::vector<int> table_rows;            // benchmark rows, generators only
    std::vector<HenonConfig> henon;         // explicit configs
    std::vector<MackeyGlassConfig> mackey_glass;
    std::string path;                       // csv
    std::vector<TimeSeries> series;         // inline
    std::optional<int> period;              // applied to every series of the entry
};

struct ExperimentManifest {
    std::string name = "experiment";
    std::vector<DatasetSpec> datasets;
    int holdout_length = 18; // also the forecast horizon
    std::vector<Strategy> strategies{Strategy::Naive, Strategy::SeasonalNaive, Strategy::Iterated,
                                     Strategy::Direct, Strategy::Mimo};
    int replicates = 5;
    std::uint64_t seed = 1;
    int max_lag = 20;
    LagSearch lag_search = LagSearch::Windows;
    int folds = 5;
    PsoConfig pso;
    bool direct_per_horizon = false;       // run/tune: one PSO per horizon model
    bool bench_direct_per_horizon = true;  // bench: same budget for every fitted model
    PreprocessOptions preprocessing;
    SolverOptions solver;
    double alpha = 0.05;
    int threads = 1;
    std::string output_dir = "runs/experiment";

    void validate() const;
    [[nodiscard]] std::string to_json() const;
    // Relative csv paths resolve against base_dir.
    static ExperimentManifest from_json(const std::string& text, const std::string& base_dir = ".");
};

// Parses the file and applies MSVR_OUTPUT_DIR / MSVR_THREADS overrides.
ExperimentManifest load_manifest(const std::string& path);

std::vector<TimeSeries> materialize(const ExperimentManifest& m);

// Seed for one unit of work, derived from the top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, int replicate, int series, int strategy, int horizon = 0);

struct StrategyOutcome {
    Strategy strategy = Strategy::Naive;
    std::vector<double> forecast; // original scale
    SelectionResult selection;    // empty for naive models
    std::vector<TuningResult> tuning;
    std::vector<std::uint64_t> seeds;
    double train_ms = 0.0; // selection + tuning + final fit
    double predict_ms = 0.0;
};

struct SeriesOutcome {
    std::string id;
    PreprocessRecord record;
    int max_lag = 0; // after shrinking for short series
    std::vector<StrategyOutcome> strategies; // manifest order
    std::vector<std::string> notes;
};

// Everything a forecast may depend on: the estimation sample and the manifest.
SeriesOutcome run_series(const TimeSeries& estimation, const ExperimentManifest& m, int series_index,
                         int replicate, bool direct_per_horizon);

struct AnovaRow {
    Metric metric = Metric::Mape;
    int horizon = 1;
    std::optional<AnovaResult> result;
    std::optional<TukeyResult> tukey;
    std::string note;
};

struct TimingRecord {
    std::string series;
    Strategy strategy = Strategy::Naive;
    double train_ms = 0.0;
    double predict_ms = 0.0;
    [[nodiscard]] double total_ms() const { return train_ms + predict_ms; }
};

// Raw material for every table: forecasts[replicate][series][model][h-1].
struct Observations {
    std::vector<std::string> models;
    std::vector<std::string> series;
    std::vector<std::vector<double>> actuals; // [series][h-1]
    std::vector<double> scales;              // naive MAE of each estimation sample
    std::vector<std::vector<std::vector<std::vector<double>>>> forecasts;

    [[nodiscard]] std::string to_csv() const;
    static Observations from_csv(const std::string& text);
};

struct EvaluationReport {
    Observations observations;
    MetricTable table; // replicate mean
    std::vector<MetricTable> replicate_tables;
    std::vector<AnovaRow> tests;
    std::vector<TimingRecord> timings;       // per series and strategy, replicate mean
    std::vector<std::string> failures;       // "id: reason"
    std::vector<std::vector<SeriesOutcome>> outcomes; // [replicate][series], successful series only
};

// Metric tables, ANOVA and gated Tukey from observations alone.
EvaluationReport evaluate_observations(const Observations& obs, double alpha);

EvaluationReport run_experiment(const ExperimentManifest& m);

struct BenchSummary {
    std::vector<TimingRecord> timings;
    double iterated_ms = 0.0;
    double direct_ms = 0.0;
    double mimo_ms = 0.0;
    [[nodiscard]] double direct_over_iterated() const { return direct_ms / iterated_ms; }
    [[nodiscard]] double direct_over_mimo() const { return direct_ms / mimo_ms; }
    [[nodiscard]] std::string to_csv() const;
};

// One replicate of the three SVR strategies with equal per-model tuning budgets.
BenchSummary benchmark_strategies(const ExperimentManifest& m);

// File writers; `dir` is created if missing.
void write_report(const EvaluationReport& r, const ExperimentManifest& m, const std::string& dir);
void write_tables(const EvaluationReport& r, const std::string& dir);
std::string timing_csv(const std::vector<TimingRecord>& t);
std::string anova_csv(const std::vector<AnovaRow>& rows);
std::string tukey_text(const std::vector<AnovaRow>& rows);
std::string tukey_pairs_csv(const std::vector<AnovaRow>& rows, const std::vector<std::string>& models);
std::string replicate_metrics_csv(const std::vector<MetricTable>& tables);

} // namespace msvr
