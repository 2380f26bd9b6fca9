#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msvr/dataset.hpp"

namespace msvr {

struct MinMax {
    double min = 0.0;
    double max = 1.0;
};

// Bounds of `values`; throws InputError on an empty or non-finite sample.
MinMax min_max_bounds(const std::vector<double>& values);
std::vector<double> normalize(const std::vector<double>& values, const MinMax& bounds);
std::vector<double> denormalize(const std::vector<double>& values, const MinMax& bounds);

// Classical multiplicative ratio-to-moving-average decomposition. Season of
// 0-based position i is (i mod period). Zeros are accepted; negative values
// or a non-positive moving average raise PreprocessingError.
struct SeasonalDecomposition {
    std::vector<double> adjusted;
    std::vector<double> indices; // length period, mean 1
};

SeasonalDecomposition deseasonalize(const std::vector<double>& values, int period);
// `first_position` is the 0-based series position of values[0].
std::vector<double> apply_seasonal(const std::vector<double>& values, const std::vector<double>& indices,
                                   int first_position, bool divide);
std::vector<double> reseasonalize(const std::vector<double>& adjusted, const std::vector<double>& indices,
                                  int first_position = 0);

struct MannKendallResult {
    long long s = 0;
    double variance = 0.0;
    double z = 0.0;
    bool trend_detected = false;
};

MannKendallResult mann_kendall(const std::vector<double>& values, double alpha = 0.05);

// Polynomial trend in 1-based time t, coefficients in ascending powers.
struct DetrendResult {
    std::vector<double> residuals;
    std::vector<double> coeffs;
};

DetrendResult detrend(const std::vector<double>& values, int degree);
double trend_at(const std::vector<double>& coeffs, double t);
std::vector<double> retrend(const std::vector<double>& residuals, const std::vector<double>& coeffs,
                            int first_position = 0);

struct PreprocessOptions {
    bool normalize = true;
    bool deseasonalize = true; // needs a period on the series
    bool detrend = true;       // only if Mann-Kendall fires
    int trend_degree = 1;
    double trend_alpha = 0.05;
};

struct PreprocessRecord {
    int estimation_length = 0;
    bool normalized = false;
    MinMax bounds;
    std::optional<int> period;
    std::optional<std::vector<double>> seasonal_indices;
    std::optional<MannKendallResult> trend_test;
    std::optional<std::vector<double>> trend_coeffs;
    std::vector<std::string> steps_applied; // in forward order
    std::vector<std::string> notes;         // skipped steps and why

    // Forward map for values at 0-based series positions first_position...
    [[nodiscard]] std::vector<double> transform(const std::vector<double>& values, int first_position) const;
    // Exact inverse of transform, steps undone in reverse order.
    [[nodiscard]] std::vector<double> invert(const std::vector<double>& values, int first_position) const;

    [[nodiscard]] std::string to_json() const;
    static PreprocessRecord from_json(const std::string& text);
};

struct Preprocessed {
    TimeSeries series; // transformed estimation sample
    PreprocessRecord record;
};

// Fits every statistic on `estimation` alone: normalize, deseasonalize,
// detrend, in that order.
Preprocessed preprocess(const TimeSeries& estimation, const PreprocessOptions& opts = {});

} // namespace msvr
