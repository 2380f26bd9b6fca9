#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msvr {

enum class Metric { Mape, Smape, Mase };

std::string_view to_string(Metric m);
inline constexpr Metric all_metrics[] = {Metric::Mape, Metric::Smape, Metric::Mase};

// A metric averaged over series; terms with a zero denominator are dropped
// and counted. `value` is NaN when every term was dropped.
struct MetricValue {
    double value = 0.0;
    int included = 0;
    int excluded = 0;
};

// One-step naive MAE of an estimation sample, (1/(M-1)) sum |x_i - x_{i-1}|.
double naive_mae(const std::vector<double>& estimation);

// Per-series terms (percent for MAPE/SMAPE); std::nullopt marks an excluded term.
std::vector<std::optional<double>> metric_terms(Metric m, const std::vector<double>& actuals,
                                                const std::vector<double>& forecasts,
                                                const std::vector<double>& scales = {});

MetricValue mape(const std::vector<double>& actuals, const std::vector<double>& forecasts);
MetricValue smape(const std::vector<double>& actuals, const std::vector<double>& forecasts);
// `scales` holds each series' naive_mae.
MetricValue mase(const std::vector<double>& actuals, const std::vector<double>& forecasts,
                 const std::vector<double>& scales);
MetricValue mase(const std::vector<double>& actuals, const std::vector<double>& forecasts,
                 const std::vector<std::vector<double>>& estimation_samples);

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
    int df_between = 0;
    int df_within = 0;
    [[nodiscard]] double ms_within() const { return ss_within / df_within; }
};

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

// P(Q <= q) for the studentized range of k means with df degrees of freedom
// (df <= 0 or infinite means df = infinity).
double ptukey(double q, int k, double df);
double qtukey(double p, int k, double df);
// Reference upper 5% points for k = 2..6 and df in {5, 10, 20, 30, 60, inf}.
std::optional<double> tukey_q05_reference(int k, double df);

struct TukeyPair {
    int first = 0; // indices into the input group list
    int second = 0;
    double mean_difference = 0.0; // mean[second] - mean[first]
    double critical_difference = 0.0;
    bool significant = false;
};

struct TukeyResult {
    std::vector<std::string> ordered_models; // ascending group mean
    std::vector<double> ordered_means;
    std::vector<TukeyPair> pairs;
    std::vector<std::vector<bool>> significant; // symmetric, input order
    double q_critical = 0.0;
    double alpha = 0.05;
    std::string chain; // "A < B <* C": <* marks a significant step, = equal means
};

// Refuses with PostHocGateError unless the one-way ANOVA rejects at alpha.
TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                      double alpha = 0.05);
// The comparison itself, without the ANOVA gate.
TukeyResult tukey_hsd_ungated(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                              double alpha = 0.05);

// scores[model][horizon]; rank per horizon ascending with averaged ties, then
// averaged over horizons.
std::vector<double> average_rank(const std::vector<std::vector<double>>& scores);

// Metric values per (model, horizon) and the averages derived from them.
struct MetricTable {
    std::vector<std::string> models;
    int horizon = 0;
    // values[metric][model][h - 1]
    std::vector<std::vector<std::vector<double>>> values;
    // excluded terms per metric, summed over models and horizons
    std::vector<int> exclusions;

    MetricTable() = default;
    MetricTable(std::vector<std::string> model_names, int horizon);

    [[nodiscard]] double& at(Metric m, std::size_t model, int h);
    [[nodiscard]] double at(Metric m, std::size_t model, int h) const;
    // Mean over horizons from..to (1-based, inclusive).
    [[nodiscard]] double average(Metric m, std::size_t model, int from, int to) const;
    [[nodiscard]] std::vector<double> ranks(Metric m) const;
    // Blocks of six plus the full range, e.g. 1-6, 7-12, 13-18, 1-18.
    [[nodiscard]] std::vector<std::pair<int, int>> summary_ranges() const;
    // header model,horizon,mape,smape,mase
    [[nodiscard]] std::string to_csv() const;
};

// actuals[series][h-1], forecasts[model][series][h-1], scales[series].
MetricTable score_table(const std::vector<std::string>& models, const std::vector<std::vector<double>>& actuals,
                        const std::vector<std::vector<std::vector<double>>>& forecasts,
                        const std::vector<double>& scales);

// Elementwise mean of tables with identical layout (replicate averaging).
MetricTable mean_table(const std::vector<MetricTable>& tables);

std::string format_number(double v);

} // namespace msvr
