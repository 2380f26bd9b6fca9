#include "msvr/preprocessing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "json_util.hpp"
#include "msvr/error.hpp"

namespace msvr {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite value");
}

int season_of(long position, int period) {
    const long r = position % period;
    return static_cast<int>(r < 0 ? r + period : r);
}

} // namespace

MinMax min_max_bounds(const std::vector<double>& values) {
    if (values.empty()) throw InputError("min_max_bounds: empty sample");
    require_finite(values, "min_max_bounds");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

std::vector<double> normalize(const std::vector<double>& values, const MinMax& b) {
    if (!(b.max > b.min)) throw PreprocessingError("normalize: max must exceed min");
    std::vector<double> out(values.size());
    const double width = b.max - b.min;
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - b.min) / width; });
    return out;
}

std::vector<double> denormalize(const std::vector<double>& values, const MinMax& b) {
    if (!(b.max > b.min)) throw PreprocessingError("denormalize: max must exceed min");
    std::vector<double> out(values.size());
    const double width = b.max - b.min;
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return v * width + b.min; });
    return out;
}

SeasonalDecomposition deseasonalize(const std::vector<double>& values, int period) {
    if (period < 2) throw InputError("deseasonalize: period must be >= 2");
    const auto n = static_cast<long>(values.size());
    if (n < 2L * period) throw InputError("deseasonalize: need at least two full cycles");
    require_finite(values, "deseasonalize");
    if (std::any_of(values.begin(), values.end(), [](double v) { return v < 0.0; }))
        throw PreprocessingError("deseasonalize: multiplicative model needs non-negative values");

    // Centred moving average; the even case is the 2xp average with half weights at both ends.
    const int half = period / 2;
    std::vector<double> ratio_sum(static_cast<std::size_t>(period), 0.0);
    std::vector<int> ratio_count(static_cast<std::size_t>(period), 0);
    for (long t = half; t + half < n; ++t) {
        double cma = 0.0;
        if (period % 2 == 1) {
            for (long k = t - half; k <= t + half; ++k) cma += values[static_cast<std::size_t>(k)];
            cma /= period;
        } else {
            cma = 0.5 * (values[static_cast<std::size_t>(t - half)] + values[static_cast<std::size_t>(t + half)]);
            for (long k = t - half + 1; k < t + half; ++k) cma += values[static_cast<std::size_t>(k)];
            cma /= period;
        }
        if (!(cma > 0.0)) throw PreprocessingError("deseasonalize: non-positive moving average");
        const auto s = static_cast<std::size_t>(season_of(t, period));
        ratio_sum[s] += values[static_cast<std::size_t>(t)] / cma;
        ratio_count[s] += 1;
    }

    SeasonalDecomposition out;
    out.indices.resize(static_cast<std::size_t>(period));
    for (std::size_t s = 0; s < out.indices.size(); ++s) out.indices[s] = ratio_sum[s] / ratio_count[s];
    const double mean = std::accumulate(out.indices.begin(), out.indices.end(), 0.0) / period;
    if (!(mean > 0.0)) throw PreprocessingError("deseasonalize: degenerate seasonal indices");
    for (double& ix : out.indices) {
        ix /= mean;
        if (!(ix > 0.0)) throw PreprocessingError("deseasonalize: a seasonal index is not positive");
    }
    out.adjusted = apply_seasonal(values, out.indices, 0, true);
    return out;
}

std::vector<double> apply_seasonal(const std::vector<double>& values, const std::vector<double>& indices,
                                   int first_position, bool divide) {
    if (indices.empty()) throw InputError("apply_seasonal: no indices");
    const int p = static_cast<int>(indices.size());
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double ix = indices[static_cast<std::size_t>(season_of(first_position + static_cast<long>(i), p))];
        out[i] = divide ? values[i] / ix : values[i] * ix;
    }
    return out;
}

std::vector<double> reseasonalize(const std::vector<double>& adjusted, const std::vector<double>& indices,
                                  int first_position) {
    return apply_seasonal(adjusted, indices, first_position, false);
}

MannKendallResult mann_kendall(const std::vector<double>& values, double alpha) {
    const auto n = static_cast<long long>(values.size());
    if (n < 4) throw InputError("mann_kendall: need at least 4 observations");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("mann_kendall: alpha must lie in (0, 1)");
    require_finite(values, "mann_kendall");

    MannKendallResult r;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            r.s += (values[j] > values[i]) - (values[j] < values[i]);

    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * (t - 1) * (2 * t + 5);
        i = j;
    }
    const double nd = static_cast<double>(n);
    r.variance = (nd * (nd - 1) * (2 * nd + 5) - tie_term) / 18.0;
    if (r.variance <= 0.0 || r.s == 0) {
        r.z = 0.0;
    } else {
        const double sd = std::sqrt(r.variance);
        r.z = r.s > 0 ? (static_cast<double>(r.s) - 1) / sd : (static_cast<double>(r.s) + 1) / sd;
    }
    const double critical = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
    r.trend_detected = std::abs(r.z) > critical;
    return r;
}

DetrendResult detrend(const std::vector<double>& values, int degree) {
    if (degree < 1 || degree > 2) throw InputError("detrend: degree must be 1 or 2");
    const auto n = static_cast<Eigen::Index>(values.size());
    if (degree >= n) throw InputError("detrend: degree must be below the sample size");
    require_finite(values, "detrend");

    Eigen::MatrixXd design(n, degree + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        double tp = 1.0;
        for (int k = 0; k <= degree; ++k, tp *= static_cast<double>(i + 1)) design(i, k) = tp;
    }
    const Eigen::Map<const Eigen::VectorXd> y(values.data(), n);
    const auto qr = design.colPivHouseholderQr();
    if (qr.rank() < degree + 1) throw InputError("detrend: rank-deficient design");
    const Eigen::VectorXd c = qr.solve(y);

    DetrendResult out;
    out.coeffs.assign(c.data(), c.data() + c.size());
    out.residuals.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.residuals[i] = values[i] - trend_at(out.coeffs, static_cast<double>(i + 1));
    return out;
}

double trend_at(const std::vector<double>& coeffs, double t) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
}

std::vector<double> retrend(const std::vector<double>& residuals, const std::vector<double>& coeffs,
                            int first_position) {
    std::vector<double> out(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i)
        out[i] = residuals[i] + trend_at(coeffs, static_cast<double>(first_position) + static_cast<double>(i) + 1.0);
    return out;
}

std::vector<double> PreprocessRecord::transform(const std::vector<double>& values, int first_position) const {
    auto v = values;
    if (normalized) v = normalize(v, bounds);
    if (seasonal_indices) v = apply_seasonal(v, *seasonal_indices, first_position, true);
    if (trend_coeffs)
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] -= trend_at(*trend_coeffs, static_cast<double>(first_position) + static_cast<double>(i) + 1.0);
    return v;
}

std::vector<double> PreprocessRecord::invert(const std::vector<double>& values, int first_position) const {
    auto v = values;
    if (trend_coeffs) v = retrend(v, *trend_coeffs, first_position);
    if (seasonal_indices) v = reseasonalize(v, *seasonal_indices, first_position);
    if (normalized) v = denormalize(v, bounds);
    return v;
}

Preprocessed preprocess(const TimeSeries& estimation, const PreprocessOptions& opts) {
    estimation.validate();
    if (opts.trend_degree < 1 || opts.trend_degree > 2) throw InputError("preprocess: trend degree must be 1 or 2");
    Preprocessed out;
    auto& rec = out.record;
    rec.estimation_length = static_cast<int>(estimation.size());
    rec.period = estimation.period;
    std::vector<double> v = estimation.values;

    if (opts.normalize) {
        rec.bounds = min_max_bounds(v);
        if (rec.bounds.max > rec.bounds.min) {
            rec.normalized = true;
            v = normalize(v, rec.bounds);
            rec.steps_applied.emplace_back("normalize");
        } else {
            rec.bounds = {};
            rec.notes.emplace_back("normalize skipped: constant estimation sample, identity recorded");
        }
    }

    if (opts.deseasonalize && estimation.period && *estimation.period >= 2) {
        const int p = *estimation.period;
        const bool positive =
            std::all_of(estimation.values.begin(), estimation.values.end(), [](double x) { return x > 0.0; });
        if (!positive) {
            rec.notes.emplace_back("deseasonalize skipped: non-positive raw values");
        } else if (estimation.size() < 2 * static_cast<std::size_t>(p)) {
            rec.notes.emplace_back("deseasonalize skipped: fewer than two cycles");
        } else {
            auto d = deseasonalize(v, p);
            v = std::move(d.adjusted);
            rec.seasonal_indices = std::move(d.indices);
            rec.steps_applied.emplace_back("deseasonalize");
        }
    }

    if (opts.detrend) {
        if (v.size() < 4) {
            rec.notes.emplace_back("detrend skipped: fewer than 4 observations for the trend test");
        } else {
            rec.trend_test = mann_kendall(v, opts.trend_alpha);
            if (rec.trend_test->trend_detected) {
                auto d = detrend(v, opts.trend_degree);
                v = std::move(d.residuals);
                rec.trend_coeffs = std::move(d.coeffs);
                rec.steps_applied.emplace_back("detrend");
            }
        }
    }

    out.series = estimation;
    out.series.values = std::move(v);
    return out;
}

std::string PreprocessRecord::to_json() const {
    nlohmann::json j;
    j["format"] = "msvr-preprocess";
    j["version"] = 1;
    j["estimation_length"] = estimation_length;
    j["normalized"] = normalized;
    j["min"] = bounds.min;
    j["max"] = bounds.max;
    j["period"] = period ? nlohmann::json(*period) : nlohmann::json(nullptr);
    j["seasonal_method"] = "classical ratio-to-moving-average";
    j["seasonal_indices"] = seasonal_indices ? nlohmann::json(*seasonal_indices) : nlohmann::json(nullptr);
    if (trend_test)
        j["trend_test"] = {{"s", trend_test->s},
                           {"variance", trend_test->variance},
                           {"z", trend_test->z},
                           {"trend_detected", trend_test->trend_detected}};
    else
        j["trend_test"] = nullptr;
    j["trend_coeffs"] = trend_coeffs ? nlohmann::json(*trend_coeffs) : nlohmann::json(nullptr);
    j["steps_applied"] = steps_applied;
    j["notes"] = notes;
    return j.dump(2);
}

PreprocessRecord PreprocessRecord::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "msvr-preprocess") throw InputError("not a preprocessing record");
        PreprocessRecord r;
        r.estimation_length = j.at("estimation_length").get<int>();
        r.normalized = j.at("normalized").get<bool>();
        r.bounds = {j.at("min").get<double>(), j.at("max").get<double>()};
        if (!j.at("period").is_null()) r.period = j.at("period").get<int>();
        if (!j.at("seasonal_indices").is_null()) r.seasonal_indices = j.at("seasonal_indices").get<std::vector<double>>();
        if (!j.at("trend_test").is_null()) {
            const auto& t = j.at("trend_test");
            r.trend_test = MannKendallResult{t.at("s").get<long long>(), t.at("variance").get<double>(),
                                             t.at("z").get<double>(), t.at("trend_detected").get<bool>()};
        }
        if (!j.at("trend_coeffs").is_null()) r.trend_coeffs = j.at("trend_coeffs").get<std::vector<double>>();
        r.steps_applied = j.at("steps_applied").get<std::vector<std::string>>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed preprocessing record: ") + e.what());
    }
}

} // namespace msvr
