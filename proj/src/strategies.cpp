#include "msvr/strategies.hpp"

#include <cmath>
#include <string>

#include "msvr/error.hpp"

namespace msvr {

namespace {

using Clock = std::chrono::steady_clock;

void check_lags_fit(const std::vector<double>& values, const LagSet& lags) {
    if (lags.empty()) throw InputError("lag set must not be empty");
    if (static_cast<std::size_t>(lags.back()) >= values.size())
        throw InputError("series of length " + std::to_string(values.size()) + " is too short for lag " +
                         std::to_string(lags.back()));
}

void check_horizon(int horizon) {
    if (horizon < 1) throw InputError("forecast horizon must be >= 1");
}

ForecastResult finish(std::vector<double> values, Strategy s, Clock::time_point start) {
    ForecastResult r;
    r.point_forecasts = std::move(values);
    r.strategy = s;
    r.elapsed_predict = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    for (double v : r.point_forecasts)
        if (!std::isfinite(v)) throw NumericError("forecast produced a non-finite value");
    return r;
}

} // namespace

Predictor as_predictor(const MsvrModel& model) {
    return [&model](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return predict(model, x.transpose()).row(0).transpose();
    };
}

Eigen::VectorXd lag_vector(const std::vector<double>& values, int anchor, const LagSet& lags) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(lags.size()));
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const int idx = anchor - lags[k];
        if (idx < 0 || static_cast<std::size_t>(idx) >= values.size())
            throw InputError("lag vector index " + std::to_string(idx) + " out of range");
        x[static_cast<Eigen::Index>(k)] = values[static_cast<std::size_t>(idx)];
    }
    return x;
}

EmbeddedDataset embed_block(const std::vector<double>& values, const LagSet& lags_in, int first_horizon,
                            int width) {
    const LagSet lags = normalize_lags(lags_in);
    if (first_horizon < 1 || width < 1) throw InputError("embedding needs first_horizon >= 1 and width >= 1");
    const int n = static_cast<int>(values.size());
    const int max_lag = lags.back();
    const int last_offset = first_horizon + width - 1;
    const int rows = n - max_lag - last_offset;
    if (rows < 1)
        throw InputError("series of length " + std::to_string(n) + " is too short: max lag " +
                         std::to_string(max_lag) + " plus horizon " + std::to_string(last_offset) + " needs at least " +
                         std::to_string(max_lag + last_offset + 1) + " observations (short by " +
                         std::to_string(1 - rows) + ")");
    EmbeddedDataset d;
    d.lags = lags;
    d.first_horizon = first_horizon;
    d.inputs.resize(rows, static_cast<Eigen::Index>(lags.size()));
    d.outputs.resize(rows, width);
    d.anchors.resize(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        const int t = max_lag + r;
        d.anchors[static_cast<std::size_t>(r)] = t;
        for (std::size_t k = 0; k < lags.size(); ++k)
            d.inputs(r, static_cast<Eigen::Index>(k)) = values[static_cast<std::size_t>(t - lags[k])];
        for (int c = 0; c < width; ++c) d.outputs(r, c) = values[static_cast<std::size_t>(t + first_horizon + c)];
    }
    return d;
}

std::vector<EmbeddedDataset> embed(const TimeSeries& series, const LagSet& lags, int horizon, Strategy mode) {
    series.validate();
    check_horizon(horizon);
    switch (mode) {
    case Strategy::Iterated:
        return {embed_block(series.values, lags, 1, 1)};
    case Strategy::Mimo:
        return {embed_block(series.values, lags, 1, horizon)};
    case Strategy::Direct: {
        std::vector<EmbeddedDataset> out;
        out.reserve(static_cast<std::size_t>(horizon));
        for (int h = 1; h <= horizon; ++h) out.push_back(embed_block(series.values, lags, h, 1));
        return out;
    }
    case Strategy::Naive:
    case Strategy::SeasonalNaive:
        break;
    }
    throw InputError("embed: naive strategies have no embedding");
}

ForecastResult forecast_iterated(const Predictor& one_step, const TimeSeries& series, const LagSet& lags_in,
                                 int horizon) {
    series.validate();
    check_horizon(horizon);
    const LagSet lags = normalize_lags(lags_in);
    check_lags_fit(series.values, lags);
    const auto start = Clock::now();

    // Real observations followed by predictions; lag lookups past N hit predictions.
    std::vector<double> path = series.values;
    path.reserve(series.size() + static_cast<std::size_t>(horizon));
    const int last = static_cast<int>(series.size()) - 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int h = 1; h <= horizon; ++h) {
        const Eigen::VectorXd y = one_step(lag_vector(path, last + h - 1, lags));
        if (y.size() != 1) throw InputError("iterated strategy needs a single-output model");
        path.push_back(y[0]);
        out.push_back(y[0]);
    }
    return finish(std::move(out), Strategy::Iterated, start);
}

ForecastResult forecast_iterated(const MsvrModel& model, const TimeSeries& series, const LagSet& lags,
                                 int horizon) {
    if (model.outputs() != 1) throw InputError("iterated strategy needs a single-output model");
    return forecast_iterated(as_predictor(model), series, lags, horizon);
}

ForecastResult forecast_direct(const std::vector<Predictor>& per_horizon, const TimeSeries& series,
                               const LagSet& lags_in, int horizon) {
    series.validate();
    check_horizon(horizon);
    if (per_horizon.size() != static_cast<std::size_t>(horizon))
        throw InputError("direct strategy needs " + std::to_string(horizon) + " models, got " +
                         std::to_string(per_horizon.size()));
    const LagSet lags = normalize_lags(lags_in);
    check_lags_fit(series.values, lags);
    const auto start = Clock::now();
    const Eigen::VectorXd x = lag_vector(series.values, static_cast<int>(series.size()) - 1, lags);
    std::vector<double> out;
    out.reserve(per_horizon.size());
    for (const auto& f : per_horizon) {
        const Eigen::VectorXd y = f(x);
        if (y.size() != 1) throw InputError("direct strategy needs single-output models");
        out.push_back(y[0]);
    }
    return finish(std::move(out), Strategy::Direct, start);
}

ForecastResult forecast_direct(const std::vector<MsvrModel>& per_horizon, const TimeSeries& series,
                               const LagSet& lags, int horizon) {
    std::vector<Predictor> fs;
    fs.reserve(per_horizon.size());
    for (const auto& m : per_horizon) {
        if (m.outputs() != 1) throw InputError("direct strategy needs single-output models");
        fs.push_back(as_predictor(m));
    }
    return forecast_direct(fs, series, lags, horizon);
}

ForecastResult forecast_mimo(const Predictor& model, Eigen::Index width, const TimeSeries& series,
                             const LagSet& lags_in, int horizon) {
    series.validate();
    check_horizon(horizon);
    if (width != horizon)
        throw InputError("MIMO model emits " + std::to_string(width) + " outputs but horizon is " +
                         std::to_string(horizon));
    const LagSet lags = normalize_lags(lags_in);
    check_lags_fit(series.values, lags);
    const auto start = Clock::now();
    const Eigen::VectorXd y = model(lag_vector(series.values, static_cast<int>(series.size()) - 1, lags));
    if (y.size() != horizon) throw InputError("MIMO model returned the wrong output width");
    return finish(std::vector<double>(y.data(), y.data() + y.size()), Strategy::Mimo, start);
}

ForecastResult forecast_mimo(const MsvrModel& model, const TimeSeries& series, const LagSet& lags, int horizon) {
    return forecast_mimo(as_predictor(model), model.outputs(), series, lags, horizon);
}

ForecastResult forecast_naive(const TimeSeries& series, int horizon) {
    series.validate();
    check_horizon(horizon);
    const auto start = Clock::now();
    return finish(std::vector<double>(static_cast<std::size_t>(horizon), series.values.back()), Strategy::Naive,
                  start);
}

ForecastResult forecast_seasonal_naive(const TimeSeries& series, int horizon) {
    series.validate();
    check_horizon(horizon);
    if (!series.period) throw InputError("seasonal naive forecast needs a period on series '" + series.id + "'");
    const int p = *series.period;
    const int n = static_cast<int>(series.size());
    if (p > n) throw InputError("seasonal period exceeds series length");
    const auto start = Clock::now();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int h = 1; h <= horizon; ++h) {
        // phi_{N + h - p*ceil(h/p)}: the matching position in the last observed cycle.
        const int cycles = (h + p - 1) / p;
        out.push_back(series.values[static_cast<std::size_t>(n - 1 + h - p * cycles)]);
    }
    return finish(std::move(out), Strategy::SeasonalNaive, start);
}

TrainedStrategy train_strategy(const TimeSeries& series, const LagSet& lags, int horizon, Strategy mode,
                               const std::vector<Hyperparams>& hyper, const SolverOptions& opts) {
    if (hyper.empty()) throw InputError("train_strategy: no hyperparameters given");
    if (hyper.size() != 1 && !(mode == Strategy::Direct && hyper.size() == static_cast<std::size_t>(horizon)))
        throw InputError("train_strategy: expected 1 hyperparameter set (or H for direct)");
    const auto start = Clock::now();
    TrainedStrategy t;
    t.strategy = mode;
    t.lags = normalize_lags(lags);
    t.horizon = horizon;
    const auto datasets = embed(series, t.lags, horizon, mode);
    t.models.reserve(datasets.size());
    for (std::size_t i = 0; i < datasets.size(); ++i)
        t.models.push_back(fit(datasets[i], hyper.size() == 1 ? hyper[0] : hyper[i], opts));
    t.elapsed_train = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    return t;
}

ForecastResult forecast(const TrainedStrategy& trained, const TimeSeries& series) {
    ForecastResult r;
    switch (trained.strategy) {
    case Strategy::Iterated:
        r = forecast_iterated(trained.models.at(0), series, trained.lags, trained.horizon);
        break;
    case Strategy::Direct:
        r = forecast_direct(trained.models, series, trained.lags, trained.horizon);
        break;
    case Strategy::Mimo:
        r = forecast_mimo(trained.models.at(0), series, trained.lags, trained.horizon);
        break;
    default:
        throw InputError("forecast: not an SVR strategy");
    }
    r.elapsed_train = trained.elapsed_train;
    return r;
}

} // namespace msvr
