// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "msvr/error.hpp"
#include "msvr/evaluation.hpp"
#include "msvr/harness.hpp"
#include "msvr/preprocessing.hpp"
#include "msvr/simulators.hpp"
#include "msvr/solver.hpp"
#include "msvr/strategies.hpp"
#include "oracles.hpp"

using namespace msvr;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + what;
    }
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

Hyperparams hyper(double C, double eps, double gamma) {
    Hyperparams h;
    h.C = C;
    h.epsilon = eps;
    h.kernel.gamma = gamma;
    return h;
}

Outcome solver_correctness() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(8101);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 8, d = 1 + trial % 3;
        Eigen::MatrixXd x(n, d), y(n, 1);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = nd(rng);
            y(i, 0) = std::sin(x(i, 0)) + 0.3 * nd(rng);
        }
        const auto h = hyper(0.5 + 20 * ud(rng), 0.3 * ud(rng), 0.2 + 1.8 * ud(rng));
        const double got = fit(x, y, h).diagnostics.objective;
        const double ref = oracle::brute_force_msvr_min(x, y.col(0), h.C, h.epsilon, h.kernel.gamma);
        const double rel = std::abs(got - ref) / std::max(std::abs(ref), 1e-12);
        worst = std::max(worst, rel);
        require(o, rel <= 1e-3, "instance " + std::to_string(trial) + fmt(" off by %.3g relative", rel));
    }
    int monotone = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + trial % 15, d = 1 + trial % 3, outs = 2 + trial % 5;
        Eigen::MatrixXd x(n, d), y(n, outs);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = nd(rng);
            for (int j = 0; j < outs; ++j) y(i, j) = std::cos(x(i, 0) + 0.5 * j) + 0.2 * nd(rng);
        }
        const auto h = hyper(0.1 + 50 * ud(rng), 0.5 * ud(rng), 0.1 + 2 * ud(rng));
        const auto& tr = fit(x, y, h).diagnostics.objective_trace;
        bool ok = true;
        for (std::size_t k = 1; k < tr.size(); ++k) ok = ok && tr[k] <= tr[k - 1];
        monotone += ok;
    }
    require(o, monotone == 100, std::to_string(100 - monotone) + " objective sequences increased");
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    require(o, secs < 60.0, fmt("took %.1f s", secs));
    o.detail = fmt("worst relative gap %.2e, %.1f s", worst, secs) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome metric_oracles() {
    Outcome o;
    auto near = [&](double got, double want, const std::string& what) {
        require(o, std::abs(got - want) <= 1e-10, what + fmt(" = %.15g, expected %.15g", got, want));
    };
    near(mape({100}, {90}).value, 10.0, "MAPE(100->90)");
    near(mape({100, 200}, {90, 220}).value, 10.0, "MAPE two series");
    near(mape({5, 7}, {5, 7}).value, 0.0, "MAPE perfect");
    near(smape({100}, {90}).value, 1000.0 / 95.0, "SMAPE(100->90)");
    near(smape({90}, {100}).value, smape({100}, {90}).value, "SMAPE swap");
    near(smape({3}, {3}).value, 0.0, "SMAPE perfect");
    near(mase({4}, {1}, std::vector<std::vector<double>>{{1, 3, 2}}).value, 2.0, "MASE(1,3,2; 4->1)");
    near(mase({4}, {2.5}, std::vector<std::vector<double>>{{1, 3, 2}}).value, 1.0, "MASE unit error");

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(1, 10);
    std::vector<double> est(30), act(6), fc(6);
    for (auto& v : est) v = ud(rng);
    for (auto& v : act) v = ud(rng);
    for (auto& v : fc) v = ud(rng);
    const double base = mase(act, fc, std::vector<std::vector<double>>(6, est)).value;
    for (double c : {1e-3, 0.37, 250.0}) {
        auto sc = [c](std::vector<double> v) {
            for (auto& x : v) x *= c;
            return v;
        };
        near(mase(sc(act), sc(fc), std::vector<std::vector<double>>(6, sc(est))).value, base, fmt("MASE scaled by %g", c));
    }
    o.detail = fmt("SMAPE(100->90) = %.10f", smape({100}, {90}).value);
    return o;
}

Outcome statistical_tests() {
    Outcome o;
    const auto mk = mann_kendall({1, 2, 3, 4});
    require(o, mk.s == 6, "MK S != 6");
    require(o, std::abs(mk.z - 1.6984) < 5e-5, fmt("MK Z = %.6f", mk.z));
    require(o, !mk.trend_detected, "MK flagged a trend");

    const std::vector<std::vector<double>> groups{{1, 2, 3}, {2, 3, 4}, {0.5, 4, 9, 2}};
    double grand = 0.0, count = 0.0;
    for (const auto& g : groups)
        for (double v : g) grand += v, count += 1;
    grand /= count;
    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        double m = 0.0;
        for (double v : g) m += v;
        m /= static_cast<double>(g.size());
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    const double f_ref = (ssb / 2.0) / (ssw / (count - 3.0));
    const double f_got = anova_oneway(groups).f;
    require(o, std::abs(f_got - f_ref) <= 1e-10, fmt("ANOVA F %.15g vs %.15g", f_got, f_ref));
    require(o, std::abs(anova_oneway({{1, 2, 3}, {2, 3, 4}}).f - 1.5) <= 1e-10, "ANOVA F({1,2,3},{2,3,4}) != 1.5");

    double worst = 0.0;
    for (double df : {5.0, 10.0, 20.0, 30.0, 60.0, std::numeric_limits<double>::infinity()}) {
        const double want = *tukey_q05_reference(5, df);
        const double got = qtukey(0.95, 5, df);
        worst = std::max(worst, std::abs(got - want));
        require(o, std::abs(got - want) <= 1e-3, fmt("q(0.05; 5, %g)", df) + fmt(" = %.5f vs %.3f", got, want));
    }
    o.detail = fmt("Z = %.6f, worst q gap %.1e", mk.z, worst) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome simulator_properties() {
    Outcome o;
    MackeyGlassConfig c;
    c.length = 300;
    c.phi0 = 0.0;
    for (double v : mackey_glass_generate(c).values) require(o, v == 0.0, "history 0 drifted");
    c.phi0 = 1.0;
    for (double v : mackey_glass_generate(c).values) require(o, std::abs(v - 1.0) <= 1e-9, "history 1 drifted");

    // Forward Euler at dt = 0.001, delay read on the grid.
    const double dt = 0.001;
    const long lag = std::lround(17.0 / dt), steps = std::lround(50.0 / dt);
    std::vector<double> eu(static_cast<std::size_t>(steps + 1));
    eu[0] = 1.2;
    for (long k = 0; k < steps; ++k) {
        const double d = k - lag < 0 ? 1.2 : eu[static_cast<std::size_t>(k - lag)];
        eu[static_cast<std::size_t>(k + 1)] = eu[static_cast<std::size_t>(k)] +
                                               dt * (0.2 * d / (1 + std::pow(d, 10)) - 0.1 * eu[static_cast<std::size_t>(k)]);
    }
    MackeyGlassConfig r;
    r.phi0 = 1.2;
    r.tau = 17.0;
    r.dt = 0.1;
    r.sample_stride = 10;
    r.burn_in = 0;
    r.length = 51;
    const auto rk = mackey_glass_generate(r).values;
    double worst = 0.0;
    for (int k = 0; k <= 50; ++k)
        worst = std::max(worst, std::abs(rk[static_cast<std::size_t>(k)] - eu[static_cast<std::size_t>(k) * 1000]));
    require(o, worst < 1e-3, fmt("RK4 vs Euler gap %.3g", worst));

    const auto s1 = henon_step({0.0, 0.0});
    const auto s2 = henon_step(s1);
    require(o, s1.x == 1.0 && s1.y == 0.0, "first Henon iterate");
    require(o, s2.x == 1.0 - 1.4 && s2.y == 0.3, "second Henon iterate");
    o.detail = fmt("RK4 vs Euler %.2e", worst) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome strategy_coincidence() {
    Outcome o;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    TimeSeries s;
    for (int i = 0; i < 80; ++i) s.values.push_back(2.0 + std::sin(0.4 * i) + 0.05 * nd(rng));
    const LagSet lags{0, 1, 3};
    const auto h = hyper(5, 0.05, 0.5);
    const auto model = fit(embed(s, lags, 1, Strategy::Iterated)[0], h);
    const double it = forecast_iterated(model, s, lags, 1).point_forecasts[0];
    const double di = forecast_direct(std::vector<MsvrModel>{model}, s, lags, 1).point_forecasts[0];
    const double mi = forecast_mimo(model, s, lags, 1).point_forecasts[0];
    const double gap = std::max(std::abs(it - di), std::abs(it - mi));
    require(o, gap <= 1e-12, fmt("shared-model gap %.3g", gap));
    double trained_gap = 0.0;
    for (Strategy mode : {Strategy::Iterated, Strategy::Direct, Strategy::Mimo})
        trained_gap = std::max(trained_gap, std::abs(forecast(train_strategy(s, lags, 1, mode, {h}), s).point_forecasts[0] - it));
    require(o, trained_gap <= 1e-12, fmt("separately trained gap %.3g", trained_gap));
    o.detail = fmt("max gap %.1e", std::max(gap, trained_gap)) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome desk_ordering() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto m = load_manifest(MSVR_SOURCE_DIR "/manifests/mackey_glass_desk.json");
    const auto r = run_experiment(m);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const auto& t = r.table;
    auto index = [&](const std::string& name) {
        for (std::size_t i = 0; i < t.models.size(); ++i)
            if (t.models[i] == name) return i;
        throw InputError("model " + name + " missing from the desk manifest");
    };
    const auto mimo = index("MIMO-SVR"), iter = index("ITER-SVR"), naive = index("Naive"), snaive = index("S-Naive");
    const int hz = t.horizon;
    for (Metric metric : {Metric::Smape, Metric::Mase}) {
        const double v = t.average(metric, mimo, 1, hz);
        for (auto other : {naive, snaive}) {
            const double w = t.average(metric, other, 1, hz);
            require(o, v < w, std::string(to_string(metric)) + " MIMO " + fmt("%.4g not below ", v) + t.models[other] +
                                   fmt(" %.4g", w));
        }
    }
    int wins = 0;
    for (const auto& rt : r.replicate_tables) wins += rt.average(Metric::Smape, mimo, 1, hz) <= rt.average(Metric::Smape, iter, 1, hz);
    require(o, wins >= 2, "MIMO beat ITER in " + std::to_string(wins) + " of " + std::to_string(r.replicate_tables.size()));
    require(o, r.failures.empty(), std::to_string(r.failures.size()) + " series failed");
    require(o, secs < 1200.0, fmt("took %.0f s", secs));
    char buf[256];
    std::snprintf(buf, sizeof buf, "SMAPE 1-%d: MIMO %.4g, ITER %.4g, S-Naive %.4g, Naive %.4g; MIMO <= ITER in %d/%zu; %.0f s",
                  hz, t.average(Metric::Smape, mimo, 1, hz), t.average(Metric::Smape, iter, 1, hz),
                  t.average(Metric::Smape, snaive, 1, hz), t.average(Metric::Smape, naive, 1, hz), wins,
                  r.replicate_tables.size(), secs);
    o.detail = buf + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome cost_ordering() {
    Outcome o;
    const auto m = load_manifest(MSVR_SOURCE_DIR "/manifests/bench.json");
    require(o, m.holdout_length == 18, "bench horizon is not 18");
    const auto b = benchmark_strategies(m);
    const double di = b.direct_over_iterated(), dm = b.direct_over_mimo();
    const double im = std::max(b.iterated_ms, b.mimo_ms) / std::min(b.iterated_ms, b.mimo_ms);
    require(o, di >= 3.0, fmt("DIR/ITER %.2f", di));
    require(o, dm >= 3.0, fmt("DIR/MIMO %.2f", dm));
    require(o, im <= 3.0, fmt("ITER vs MIMO %.2f apart", im));
    char buf[160];
    std::snprintf(buf, sizeof buf, "DIR/ITER %.2f, DIR/MIMO %.2f, ITER:MIMO spread %.2f", di, dm, im);
    o.detail = buf + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

ExperimentManifest small_manifest(const std::vector<double>& a, const std::vector<double>& b) {
    ExperimentManifest m;
    DatasetSpec d;
    d.kind = DatasetSpec::Kind::Inline;
    d.series = {TimeSeries{a, std::nullopt, "a"}, TimeSeries{b, std::nullopt, "b"}};
    d.period = 6;
    m.datasets = {d};
    m.holdout_length = 4;
    m.replicates = 2;
    m.seed = 9;
    m.max_lag = 5;
    m.folds = 3;
    m.pso.swarm_size = 4;
    m.pso.iterations = 2;
    return m;
}

Outcome pipeline_integrity() {
    Outcome o;
    std::vector<double> raw;
    for (int t = 0; t < 96; ++t) raw.push_back((20.0 + 0.3 * t) * (1.0 + 0.25 * std::sin(2 * M_PI * t / 12.0)));
    TimeSeries est{raw, 12, "seasonal"};
    const auto pre = preprocess(est);
    const auto back = pre.record.invert(pre.series.values, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) worst = std::max(worst, std::abs(back[i] - raw[i]));
    require(o, pre.record.steps_applied.size() == 3, "not every preprocessing step ran");
    require(o, worst <= 1e-10, fmt("round trip gap %.3g", worst));

    auto mg = [](int row, std::size_t n) {
        auto v = mackey_glass_generate(benchmark_mackey_glass(row)).values;
        v.resize(n);
        return v;
    };
    const auto a = mg(2, 70), b = mg(3, 70);
    auto poisoned = b;
    for (std::size_t i = poisoned.size() - 4; i < poisoned.size(); ++i) poisoned[i] = -1e6;
    const auto clean = run_experiment(small_manifest(a, b));
    const auto dirty = run_experiment(small_manifest(a, poisoned));
    require(o, clean.observations.forecasts == dirty.observations.forecasts, "hold-out values changed the forecasts");
    require(o, clean.observations.actuals != dirty.observations.actuals, "perturbation did not reach the hold-out");

    const auto again = run_experiment(small_manifest(a, b));
    const bool same = clean.table.to_csv() == again.table.to_csv() &&
                      replicate_metrics_csv(clean.replicate_tables) == replicate_metrics_csv(again.replicate_tables) &&
                      anova_csv(clean.tests) == anova_csv(again.tests) && tukey_text(clean.tests) == tukey_text(again.tests) &&
                      clean.observations.to_csv() == again.observations.to_csv();
    require(o, same, "identical seeds gave different reports");
    o.detail = fmt("round trip %.1e", worst) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"solver correctness", solver_correctness},
        {"metric oracles", metric_oracles},
        {"statistical tests", statistical_tests},
        {"simulator properties", simulator_properties},
        {"strategy coincidence", strategy_coincidence},
        {"desk-scale ordering", desk_ordering},
        {"computational-cost ordering", cost_ordering},
        {"pipeline integrity", pipeline_integrity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        failed += !o.pass;
        std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
