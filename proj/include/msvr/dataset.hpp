#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msvr {

// Ordered observations phi_1..phi_N. Index 0 in `values` is phi_1.
struct TimeSeries {
    std::vector<double> values;
    std::optional<int> period; // seasonal cycle length, e.g. 12 for monthly data
    std::string id;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    void validate() const;
};

enum class Strategy { Iterated, Direct, Mimo, Naive, SeasonalNaive };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

// Lag offsets relative to the anchor t: 0 is phi_t, 1 is phi_{t-1}, ...
// Always kept sorted ascending and free of duplicates.
using LagSet = std::vector<int>;

LagSet normalize_lags(LagSet lags);
LagSet contiguous_lags(int count);

// Input/output matrices from a lag embedding. Row r is anchored at series
// index anchors[r] (0-based); its outputs hold phi at anchor + first_horizon
// ... anchor + first_horizon + outputs.cols() - 1.
struct EmbeddedDataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;
    LagSet lags;
    int first_horizon = 1;
    std::vector<int> anchors;

    [[nodiscard]] Eigen::Index rows() const noexcept { return inputs.rows(); }
    [[nodiscard]] EmbeddedDataset subset(const std::vector<Eigen::Index>& row_ids) const;
};

} // namespace msvr
