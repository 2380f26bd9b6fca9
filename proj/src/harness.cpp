#include "msvr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>

#include "msvr/error.hpp"
#include "msvr/parallel.hpp"
#include "msvr/strategies.hpp"

namespace msvr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0, Clock::time_point t1) {
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

bool is_svr(Strategy s) { return s == Strategy::Iterated || s == Strategy::Direct || s == Strategy::Mimo; }

TimeSeries estimation_part(const TimeSeries& s, int holdout) {
    if (static_cast<int>(s.size()) <= holdout + 1)
        throw InputError("series '" + s.id + "' is not longer than the hold-out");
    TimeSeries e = s;
    e.values.resize(s.size() - static_cast<std::size_t>(holdout));
    return e;
}

std::vector<double> holdout_part(const TimeSeries& s, int holdout) {
    return {s.values.end() - holdout, s.values.end()};
}

} // namespace

SeriesOutcome run_series(const TimeSeries& estimation, const ExperimentManifest& m, int series_index, int replicate,
                         bool direct_per_horizon) {
    estimation.validate();
    const int horizon = m.holdout_length;
    const int n = static_cast<int>(estimation.size());

    SeriesOutcome out;
    out.id = estimation.id;
    const bool any_svr = std::any_of(m.strategies.begin(), m.strategies.end(), is_svr);
    Preprocessed pre;
    if (any_svr) {
        pre = preprocess(estimation, m.preprocessing);
        out.record = pre.record;
        // Enough MIMO rows for every fold to hold at least two.
        out.max_lag = std::min(m.max_lag, n - horizon + 1 - 2 * m.folds);
        if (out.max_lag < 1)
            throw InputError("series '" + estimation.id + "' is too short for the horizon and fold count");
        if (out.max_lag < m.max_lag)
            out.notes.push_back("max_lag reduced to " + std::to_string(out.max_lag) + " for a short series");
    }

    for (std::size_t si = 0; si < m.strategies.size(); ++si) {
        const Strategy s = m.strategies[si];
        StrategyOutcome so;
        so.strategy = s;
        if (s == Strategy::Naive || s == Strategy::SeasonalNaive) {
            const auto t0 = Clock::now();
            ForecastResult f;
            if (s == Strategy::SeasonalNaive && !estimation.period) {
                out.notes.push_back("S-Naive without a period falls back to Naive");
                f = forecast_naive(estimation, horizon);
            } else {
                f = s == Strategy::Naive ? forecast_naive(estimation, horizon)
                                         : forecast_seasonal_naive(estimation, horizon);
            }
            so.forecast = std::move(f.point_forecasts);
            so.predict_ms = ms_since(t0, Clock::now());
            out.strategies.push_back(std::move(so));
            continue;
        }

        const auto t0 = Clock::now();
        so.selection = select_inputs(pre.series, out.max_lag, horizon, s, m.lag_search);
        const auto data = embed(pre.series, so.selection.chosen_lags, horizon, s);
        std::vector<Hyperparams> hyper;
        auto tune_one = [&](const EmbeddedDataset& d, int h) {
            PsoConfig cfg = m.pso;
            cfg.seed = derive_seed(m.seed, replicate, series_index, static_cast<int>(si), h);
            so.seeds.push_back(cfg.seed);
            so.tuning.push_back(tune(d, cfg, m.folds, m.solver, 1));
            hyper.push_back(so.tuning.back().hyper);
        };
        if (s == Strategy::Direct && direct_per_horizon) {
            for (int h = 1; h <= horizon; ++h) tune_one(data[static_cast<std::size_t>(h - 1)], h);
        } else {
            tune_one(data.back(), 0); // the direct strategy shares the h = H tuning
        }
        const auto trained = train_strategy(pre.series, so.selection.chosen_lags, horizon, s, hyper, m.solver);
        const auto t1 = Clock::now();
        const auto f = forecast(trained, pre.series);
        so.forecast = pre.record.invert(f.point_forecasts, n);
        const auto t2 = Clock::now();
        for (double v : so.forecast)
            if (!std::isfinite(v)) throw NumericError("non-finite forecast for series '" + estimation.id + "'");
        so.train_ms = ms_since(t0, t1);
        so.predict_ms = ms_since(t1, t2);
        out.strategies.push_back(std::move(so));
    }
    return out;
}

EvaluationReport evaluate_observations(const Observations& obs, double alpha) {
    if (obs.forecasts.empty()) throw InputError("evaluate: no replicates");
    EvaluationReport r;
    r.observations = obs;
    for (const auto& rep : obs.forecasts) {
        std::vector<std::vector<std::vector<double>>> by_model(obs.models.size());
        for (std::size_t i = 0; i < obs.models.size(); ++i)
            for (std::size_t s = 0; s < obs.series.size(); ++s) by_model[i].push_back(rep.at(s).at(i));
        r.replicate_tables.push_back(score_table(obs.models, obs.actuals, by_model, obs.scales));
    }
    r.table = mean_table(r.replicate_tables);

    const int horizon = r.table.horizon;
    for (Metric metric : all_metrics) {
        for (int h = 1; h <= horizon; ++h) {
            AnovaRow row;
            row.metric = metric;
            row.horizon = h;
            // One observation per (replicate, series) term.
            std::vector<std::vector<double>> groups(obs.models.size());
            for (const auto& rep : obs.forecasts) {
                std::vector<double> a;
                for (const auto& act : obs.actuals) a.push_back(act[static_cast<std::size_t>(h - 1)]);
                for (std::size_t i = 0; i < obs.models.size(); ++i) {
                    std::vector<double> f;
                    for (std::size_t s = 0; s < obs.series.size(); ++s) f.push_back(rep[s][i][static_cast<std::size_t>(h - 1)]);
                    for (const auto& t : metric_terms(metric, a, f, obs.scales))
                        if (t) groups[i].push_back(*t);
                }
            }
            try {
                row.result = anova_oneway(groups);
                if (row.result->p < alpha) row.tukey = tukey_hsd_ungated(groups, obs.models, alpha);
                else row.note = "ANOVA not significant; Tukey not run";
            } catch (const Error& e) {
                row.note = std::string("skipped: ") + e.what();
            }
            r.tests.push_back(std::move(row));
        }
    }
    return r;
}

EvaluationReport run_experiment(const ExperimentManifest& m) {
    m.validate();
    const auto series = materialize(m);
    const auto ns = series.size();
    const auto nr = static_cast<std::size_t>(m.replicates);

    std::vector<std::vector<std::optional<SeriesOutcome>>> outcomes(nr, std::vector<std::optional<SeriesOutcome>>(ns));
    std::vector<std::string> errors(ns);
    std::mutex error_mutex;
    parallel_for(ns * nr, m.threads, [&](std::size_t unit) {
        const auto s = unit % ns, rep = unit / ns;
        try {
            outcomes[rep][s] = run_series(estimation_part(series[s], m.holdout_length), m, static_cast<int>(s),
                                          static_cast<int>(rep), m.direct_per_horizon);
        } catch (const Error& e) {
            std::lock_guard lock(error_mutex);
            if (errors[s].empty()) errors[s] = e.what();
        }
    });

    Observations obs;
    for (Strategy s : m.strategies) obs.models.emplace_back(to_string(s));
    std::vector<std::size_t> kept;
    std::vector<std::string> failures;
    for (std::size_t s = 0; s < ns; ++s) {
        if (!errors[s].empty()) {
            failures.push_back(series[s].id + ": " + errors[s]);
            continue;
        }
        kept.push_back(s);
        obs.series.push_back(series[s].id);
        obs.actuals.push_back(holdout_part(series[s], m.holdout_length));
        obs.scales.push_back(naive_mae(estimation_part(series[s], m.holdout_length).values));
    }
    if (kept.empty()) throw Error("every series failed; first: " + failures.front());

    obs.forecasts.resize(nr);
    for (std::size_t rep = 0; rep < nr; ++rep)
        for (auto s : kept) {
            std::vector<std::vector<double>> per_model;
            for (const auto& so : outcomes[rep][s]->strategies) per_model.push_back(so.forecast);
            obs.forecasts[rep].push_back(std::move(per_model));
        }

    auto report = evaluate_observations(obs, m.alpha);
    report.failures = std::move(failures);
    report.outcomes.resize(nr);
    for (std::size_t rep = 0; rep < nr; ++rep)
        for (auto s : kept) report.outcomes[rep].push_back(std::move(*outcomes[rep][s]));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        for (std::size_t i = 0; i < m.strategies.size(); ++i) {
            TimingRecord t;
            t.series = obs.series[k];
            t.strategy = m.strategies[i];
            for (std::size_t rep = 0; rep < nr; ++rep) {
                t.train_ms += report.outcomes[rep][k].strategies[i].train_ms / static_cast<double>(nr);
                t.predict_ms += report.outcomes[rep][k].strategies[i].predict_ms / static_cast<double>(nr);
            }
            report.timings.push_back(t);
        }
    }
    return report;
}

BenchSummary benchmark_strategies(const ExperimentManifest& manifest) {
    ExperimentManifest m = manifest;
    m.strategies.erase(std::remove_if(m.strategies.begin(), m.strategies.end(), [](Strategy s) { return !is_svr(s); }),
                       m.strategies.end());
    if (m.strategies.empty()) m.strategies = {Strategy::Iterated, Strategy::Direct, Strategy::Mimo};
    m.validate();
    const auto series = materialize(m);

    BenchSummary out;
    std::vector<std::optional<SeriesOutcome>> outcomes(series.size());
    parallel_for(series.size(), m.threads, [&](std::size_t s) {
        outcomes[s] = run_series(estimation_part(series[s], m.holdout_length), m, static_cast<int>(s), 0,
                                 m.bench_direct_per_horizon);
    });
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (const auto& so : outcomes[s]->strategies) {
            TimingRecord t{series[s].id, so.strategy, so.train_ms, so.predict_ms};
            out.timings.push_back(t);
            if (so.strategy == Strategy::Iterated) out.iterated_ms += t.total_ms();
            if (so.strategy == Strategy::Direct) out.direct_ms += t.total_ms();
            if (so.strategy == Strategy::Mimo) out.mimo_ms += t.total_ms();
        }
    }
    return out;
}

} // namespace msvr
