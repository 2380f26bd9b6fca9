#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <functional>
#include <vector>

#include "msvr/dataset.hpp"
#include "msvr/solver.hpp"

namespace msvr {

// Maps one lag vector (ordered as the LagSet) to an output row.
using Predictor = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// The returned predictor references `model`; keep the model alive.
Predictor as_predictor(const MsvrModel& model);

struct ForecastResult {
    std::vector<double> point_forecasts; // phi_hat_{N+1} .. phi_hat_{N+H}
    Strategy strategy = Strategy::Naive;
    std::chrono::nanoseconds elapsed_train{0};
    std::chrono::nanoseconds elapsed_predict{0};
};

// Lag vector anchored at 0-based index `anchor` of `values`.
Eigen::VectorXd lag_vector(const std::vector<double>& values, int anchor, const LagSet& lags);

// Iterated: one dataset, target phi_{t+1}. Direct: H datasets, the h-th
// targeting phi_{t+h}. MIMO: one dataset with targets phi_{t+1..t+H}.
// Naive strategies have no embedding and are rejected.
std::vector<EmbeddedDataset> embed(const TimeSeries& series, const LagSet& lags, int horizon, Strategy mode);

// Single dataset whose outputs are phi_{t+first_horizon} .. phi_{t+first_horizon+width-1}.
EmbeddedDataset embed_block(const std::vector<double>& values, const LagSet& lags, int first_horizon, int width);

ForecastResult forecast_iterated(const Predictor& one_step, const TimeSeries& series, const LagSet& lags,
                                 int horizon);
ForecastResult forecast_iterated(const MsvrModel& model, const TimeSeries& series, const LagSet& lags,
                                 int horizon);

ForecastResult forecast_direct(const std::vector<Predictor>& per_horizon, const TimeSeries& series,
                               const LagSet& lags, int horizon);
ForecastResult forecast_direct(const std::vector<MsvrModel>& per_horizon, const TimeSeries& series,
                               const LagSet& lags, int horizon);

// `width` is the output width the predictor produces; must equal `horizon`.
ForecastResult forecast_mimo(const Predictor& model, Eigen::Index width, const TimeSeries& series,
                             const LagSet& lags, int horizon);
ForecastResult forecast_mimo(const MsvrModel& model, const TimeSeries& series, const LagSet& lags, int horizon);

ForecastResult forecast_naive(const TimeSeries& series, int horizon);
ForecastResult forecast_seasonal_naive(const TimeSeries& series, int horizon);

// Models for one SVR strategy, trained on the embedding of a series.
struct TrainedStrategy {
    Strategy strategy = Strategy::Mimo;
    LagSet lags;
    int horizon = 1;
    std::vector<MsvrModel> models; // 1 for iterated/MIMO, H for direct
    std::chrono::nanoseconds elapsed_train{0};
};

// `hyper` holds one entry shared by every model, or H entries (direct only).
TrainedStrategy train_strategy(const TimeSeries& series, const LagSet& lags, int horizon, Strategy mode,
                               const std::vector<Hyperparams>& hyper, const SolverOptions& opts = {});

ForecastResult forecast(const TrainedStrategy& trained, const TimeSeries& series);

} // namespace msvr
