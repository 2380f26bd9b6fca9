#include "msvr/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "msvr/error.hpp"

namespace msvr {

void TimeSeries::validate() const {
    if (values.size() < 2)
        throw InputError("series '" + id + "' needs at least 2 observations, has " +
                         std::to_string(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw InputError("series '" + id + "' has a non-finite value at index " + std::to_string(i));
    if (period && *period < 1)
        throw InputError("series '" + id + "' has non-positive period " + std::to_string(*period));
}

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::Iterated: return "ITER-SVR";
    case Strategy::Direct: return "DIR-SVR";
    case Strategy::Mimo: return "MIMO-SVR";
    case Strategy::Naive: return "Naive";
    case Strategy::SeasonalNaive: return "S-Naive";
    }
    return "?";
}

Strategy strategy_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "iterated" || lower == "iter" || lower == "iter-svr") return Strategy::Iterated;
    if (lower == "direct" || lower == "dir" || lower == "dir-svr") return Strategy::Direct;
    if (lower == "mimo" || lower == "mimo-svr") return Strategy::Mimo;
    if (lower == "naive") return Strategy::Naive;
    if (lower == "seasonal_naive" || lower == "seasonal-naive" || lower == "s-naive" || lower == "snaive")
        return Strategy::SeasonalNaive;
    throw InputError("unknown strategy '" + std::string(name) + "'");
}

LagSet normalize_lags(LagSet lags) {
    if (lags.empty()) throw InputError("lag set must not be empty");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    if (lags.front() < 0) throw InputError("lag offsets must be non-negative");
    return lags;
}

LagSet contiguous_lags(int count) {
    if (count < 1) throw InputError("contiguous lag window needs count >= 1");
    LagSet lags(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) lags[static_cast<std::size_t>(i)] = i;
    return lags;
}

EmbeddedDataset EmbeddedDataset::subset(const std::vector<Eigen::Index>& row_ids) const {
    EmbeddedDataset out;
    out.lags = lags;
    out.first_horizon = first_horizon;
    out.inputs.resize(static_cast<Eigen::Index>(row_ids.size()), inputs.cols());
    out.outputs.resize(static_cast<Eigen::Index>(row_ids.size()), outputs.cols());
    out.anchors.reserve(row_ids.size());
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        const auto src = row_ids[r];
        out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(src);
        out.outputs.row(static_cast<Eigen::Index>(r)) = outputs.row(src);
        if (!anchors.empty()) out.anchors.push_back(anchors[static_cast<std::size_t>(src)]);
    }
    return out;
}

} // namespace msvr
