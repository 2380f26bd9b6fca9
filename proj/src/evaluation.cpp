#include "msvr/evaluation.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include "msvr/error.hpp"

namespace msvr {

std::string_view to_string(Metric m) {
    switch (m) {
    case Metric::Mape: return "mape";
    case Metric::Smape: return "smape";
    case Metric::Mase: return "mase";
    }
    return "?";
}

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

void check_pair(const std::vector<double>& a, const std::vector<double>& f) {
    if (a.size() != f.size()) throw InputError("metric: actuals and forecasts differ in length");
    if (a.empty()) throw InputError("metric: no series");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(f[i])) throw NumericError("metric: non-finite actual or forecast");
}

MetricValue summarize(const std::vector<std::optional<double>>& terms) {
    MetricValue v;
    double acc = 0.0;
    for (const auto& t : terms) {
        if (t) {
            acc += *t;
            ++v.included;
        } else {
            ++v.excluded;
        }
    }
    v.value = v.included > 0 ? acc / v.included : nan_v;
    return v;
}

} // namespace

double naive_mae(const std::vector<double>& x) {
    if (x.size() < 2) throw InputError("naive_mae: need at least 2 observations");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += std::abs(x[i] - x[i - 1]);
    return acc / static_cast<double>(x.size() - 1);
}

std::vector<std::optional<double>> metric_terms(Metric m, const std::vector<double>& a, const std::vector<double>& f,
                                                const std::vector<double>& scales) {
    check_pair(a, f);
    if (m == Metric::Mase && scales.size() != a.size()) throw InputError("mase: one scale per series required");
    std::vector<std::optional<double>> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double err = std::abs(a[i] - f[i]);
        switch (m) {
        case Metric::Mape:
            if (a[i] != 0.0) out[i] = err / std::abs(a[i]) * 100.0;
            break;
        case Metric::Smape: {
            const double den = (a[i] + f[i]) / 2.0;
            if (den != 0.0) out[i] = err / den * 100.0;
            break;
        }
        case Metric::Mase:
            if (scales[i] > 0.0) out[i] = err / scales[i];
            break;
        }
    }
    return out;
}

MetricValue mape(const std::vector<double>& a, const std::vector<double>& f) {
    return summarize(metric_terms(Metric::Mape, a, f));
}

MetricValue smape(const std::vector<double>& a, const std::vector<double>& f) {
    return summarize(metric_terms(Metric::Smape, a, f));
}

MetricValue mase(const std::vector<double>& a, const std::vector<double>& f, const std::vector<double>& scales) {
    return summarize(metric_terms(Metric::Mase, a, f, scales));
}

MetricValue mase(const std::vector<double>& a, const std::vector<double>& f,
                 const std::vector<std::vector<double>>& estimation_samples) {
    std::vector<double> scales;
    for (const auto& s : estimation_samples) scales.push_back(naive_mae(s));
    return mase(a, f, scales);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw InputError("anova: need at least 2 groups");
    std::vector<double> means;
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw InputError("anova: every group needs at least 2 observations");
        for (double x : g)
            if (!std::isfinite(x)) throw NumericError("anova: non-finite observation");
        const double s = std::accumulate(g.begin(), g.end(), 0.0);
        means.push_back(s / static_cast<double>(g.size()));
        total += s;
        n += g.size();
    }
    const double grand = total / static_cast<double>(n);
    AnovaResult r;
    r.df_between = static_cast<int>(groups.size()) - 1;
    r.df_within = static_cast<int>(n - groups.size());
    const bool equal_means = std::all_of(means.begin(), means.end(), [&](double m) { return m == means[0]; });
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (!equal_means) r.ss_between += static_cast<double>(groups[i].size()) * (means[i] - grand) * (means[i] - grand);
        for (double x : groups[i]) r.ss_within += (x - means[i]) * (x - means[i]);
    }
    if (r.ss_within == 0.0) {
        r.f = r.ss_between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        r.p = r.ss_between > 0.0 ? 0.0 : 1.0;
        return r;
    }
    r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
    r.p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(r.df_between, r.df_within), r.f));
    return r;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

// P(range of k standard normals <= w).
double range_cdf_normal(double w, int k) {
    if (w <= 0.0) return 0.0;
    const double rt2 = std::sqrt(2.0);
    const auto integrand = [&](double z) {
        const double inner = 0.5 * (std::erfc(-z / rt2) - std::erfc(-(z - w) / rt2));
        return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI) * std::pow(std::max(inner, 0.0), k - 1);
    };
    const double v = gauss_kronrod<double, 31>::integrate(integrand, -9.0, 9.0 + w, 12, 1e-13);
    return std::clamp(k * v, 0.0, 1.0);
}

} // namespace

double ptukey(double q, int k, double df) {
    if (k < 2) throw InputError("ptukey: k must be >= 2");
    if (std::isnan(q)) throw InputError("ptukey: q is NaN");
    if (q <= 0.0) return 0.0;
    if (!(df > 0.0) || std::isinf(df)) return range_cdf_normal(q, k);

    // Mix over s = sqrt(chi2_df / df).
    const boost::math::chi_squared chi(df);
    const double lo = std::sqrt(boost::math::quantile(chi, 1e-14) / df);
    const double hi = std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-14)) / df);
    const double log_norm = 0.5 * df * std::log(df) - boost::math::lgamma(0.5 * df) - (0.5 * df - 1) * std::log(2.0);
    const auto integrand = [&](double s) {
        const double log_dens = log_norm + (df - 1) * std::log(s) - 0.5 * df * s * s;
        return std::exp(log_dens) * range_cdf_normal(q * s, k);
    };
    const double v = gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 12, 1e-12);
    return std::clamp(v, 0.0, 1.0);
}

double qtukey(double p, int k, double df) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("qtukey: p must lie in (0, 1)");
    if (!(df > 0.0)) df = std::numeric_limits<double>::infinity();
    // Each quantile costs a few hundred nested quadratures; runs reuse a handful.
    static std::mutex cache_mutex;
    static std::map<std::tuple<double, int, double>, double> cache;
    const auto key = std::make_tuple(p, k, df);
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const auto f = [&](double q) { return ptukey(q, k, df) - p; };
    double lo = 1e-3, hi = 10.0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e4) throw NumericError("qtukey: failed to bracket the quantile");
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(45), iters);
    const double q = 0.5 * (r.first + r.second);
    std::lock_guard lock(cache_mutex);
    cache.emplace(key, q);
    return q;
}

std::optional<double> tukey_q05_reference(int k, double df) {
    static const double table[5][6] = {
        {3.6354, 3.1511, 2.9500, 2.8882, 2.8288, 2.7718},
        {4.6017, 3.8768, 3.5779, 3.4864, 3.3987, 3.3145},
        {5.2183, 4.3266, 3.9583, 3.8454, 3.7371, 3.6332},
        {5.6731, 4.6543, 4.2319, 4.1021, 3.9774, 3.8577},
        {6.0329, 4.9120, 4.4452, 4.3015, 4.1632, 4.0301},
    };
    static const double dfs[5] = {5, 10, 20, 30, 60};
    if (k < 2 || k > 6) return std::nullopt;
    if (!(df > 0.0) || std::isinf(df)) return table[k - 2][5];
    for (int c = 0; c < 5; ++c)
        if (df == dfs[c]) return table[k - 2][c];
    return std::nullopt;
}

TukeyResult tukey_hsd_ungated(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                              double alpha) {
    if (names.size() != groups.size()) throw InputError("tukey: one name per group required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("tukey: alpha must lie in (0, 1)");
    const auto anova = anova_oneway(groups);
    const int k = static_cast<int>(groups.size());
    std::vector<double> means;
    for (const auto& g : groups) means.push_back(std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size()));

    TukeyResult r;
    r.alpha = alpha;
    r.q_critical = qtukey(1.0 - alpha, k, anova.df_within);
    const double msw = anova.ms_within();
    r.significant.assign(groups.size(), std::vector<bool>(groups.size(), false));
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            TukeyPair p;
            p.first = i;
            p.second = j;
            p.mean_difference = means[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(i)];
            p.critical_difference =
                r.q_critical * std::sqrt(msw / 2.0 *
                                         (1.0 / static_cast<double>(groups[static_cast<std::size_t>(i)].size()) +
                                          1.0 / static_cast<double>(groups[static_cast<std::size_t>(j)].size())));
            p.significant = std::abs(p.mean_difference) > p.critical_difference;
            r.significant[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p.significant;
            r.significant[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = p.significant;
            r.pairs.push_back(p);
        }
    }

    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
    std::ostringstream chain;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto m = order[pos];
        if (pos > 0) {
            const auto prev = order[pos - 1];
            const char* link = r.significant[prev][m] ? " <* " : (means[prev] == means[m] ? " = " : " < ");
            chain << link;
        }
        chain << names[m];
        r.ordered_models.push_back(names[m]);
        r.ordered_means.push_back(means[m]);
    }
    r.chain = chain.str();
    return r;
}

TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                      double alpha) {
    if (names.size() != groups.size()) throw InputError("tukey: one name per group required");
    const auto anova = anova_oneway(groups);
    if (!(anova.p < alpha))
        throw PostHocGateError("tukey: ANOVA p = " + format_number(anova.p) + " is not below alpha; post-hoc refused");
    return tukey_hsd_ungated(groups, names, alpha);
}

std::vector<double> average_rank(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) throw InputError("average_rank: no models");
    const std::size_t horizons = scores[0].size();
    if (horizons == 0) throw InputError("average_rank: no horizons");
    for (const auto& s : scores) {
        if (s.size() != horizons) throw InputError("average_rank: every model needs every horizon");
        for (double v : s)
            if (std::isnan(v)) throw InputError("average_rank: missing score");
    }
    const std::size_t m = scores.size();
    std::vector<double> acc(m, 0.0);
    for (std::size_t h = 0; h < horizons; ++h) {
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t below = 0, equal = 0;
            for (std::size_t j = 0; j < m; ++j) {
                if (scores[j][h] < scores[i][h]) ++below;
                else if (scores[j][h] == scores[i][h]) ++equal;
            }
            acc[i] += static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
        }
    }
    for (double& a : acc) a /= static_cast<double>(horizons);
    return acc;
}

MetricTable::MetricTable(std::vector<std::string> model_names, int h) : models(std::move(model_names)), horizon(h) {
    if (horizon < 1) throw InputError("metric table: horizon must be >= 1");
    values.assign(3, std::vector<std::vector<double>>(models.size(), std::vector<double>(static_cast<std::size_t>(h), 0.0)));
    exclusions.assign(3, 0);
}

double& MetricTable::at(Metric m, std::size_t model, int h) {
    return values.at(static_cast<std::size_t>(m)).at(model).at(static_cast<std::size_t>(h - 1));
}

double MetricTable::at(Metric m, std::size_t model, int h) const {
    return values.at(static_cast<std::size_t>(m)).at(model).at(static_cast<std::size_t>(h - 1));
}

double MetricTable::average(Metric m, std::size_t model, int from, int to) const {
    if (from < 1 || to > horizon || from > to) throw InputError("metric table: bad horizon range");
    double acc = 0.0;
    for (int h = from; h <= to; ++h) acc += at(m, model, h);
    return acc / (to - from + 1);
}

std::vector<double> MetricTable::ranks(Metric m) const { return average_rank(values.at(static_cast<std::size_t>(m))); }

std::vector<std::pair<int, int>> MetricTable::summary_ranges() const {
    std::vector<std::pair<int, int>> out;
    if (horizon > 6)
        for (int a = 1; a <= horizon; a += 6) out.emplace_back(a, std::min(a + 5, horizon));
    out.emplace_back(1, horizon);
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string MetricTable::to_csv() const {
    std::ostringstream out;
    out << "model,horizon,mape,smape,mase\n";
    const bool rankable = std::none_of(values.begin(), values.end(), [](const auto& per_model) {
        return std::any_of(per_model.begin(), per_model.end(), [](const auto& row) {
            return std::any_of(row.begin(), row.end(), [](double v) { return std::isnan(v); });
        });
    });
    std::vector<std::vector<double>> rank(3);
    if (rankable)
        for (Metric m : all_metrics) rank[static_cast<std::size_t>(m)] = ranks(m);
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (int h = 1; h <= horizon; ++h) {
            out << models[i] << ',' << h;
            for (Metric m : all_metrics) out << ',' << format_number(at(m, i, h));
            out << '\n';
        }
        for (const auto& [a, b] : summary_ranges()) {
            out << models[i] << ',' << a << '-' << b;
            for (Metric m : all_metrics) out << ',' << format_number(average(m, i, a, b));
            out << '\n';
        }
        out << models[i] << ",rank";
        for (Metric m : all_metrics) out << ',' << (rankable ? format_number(rank[static_cast<std::size_t>(m)][i]) : "nan");
        out << '\n';
    }
    return out.str();
}

MetricTable score_table(const std::vector<std::string>& models, const std::vector<std::vector<double>>& actuals,
                        const std::vector<std::vector<std::vector<double>>>& forecasts,
                        const std::vector<double>& scales) {
    if (forecasts.size() != models.size()) throw InputError("score_table: one forecast block per model");
    if (actuals.empty()) throw InputError("score_table: no series");
    if (scales.size() != actuals.size()) throw InputError("score_table: one scale per series");
    const int horizon = static_cast<int>(actuals[0].size());
    MetricTable t(models, horizon);
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (forecasts[i].size() != actuals.size()) throw InputError("score_table: forecast series count mismatch");
        for (int h = 1; h <= horizon; ++h) {
            std::vector<double> a, f;
            for (std::size_t s = 0; s < actuals.size(); ++s) {
                if (static_cast<int>(actuals[s].size()) != horizon ||
                    static_cast<int>(forecasts[i][s].size()) != horizon)
                    throw InputError("score_table: ragged horizon");
                a.push_back(actuals[s][static_cast<std::size_t>(h - 1)]);
                f.push_back(forecasts[i][s][static_cast<std::size_t>(h - 1)]);
            }
            for (Metric m : all_metrics) {
                const auto v = summarize(metric_terms(m, a, f, scales));
                t.at(m, i, h) = v.value;
                t.exclusions[static_cast<std::size_t>(m)] += v.excluded;
            }
        }
    }
    return t;
}

MetricTable mean_table(const std::vector<MetricTable>& tables) {
    if (tables.empty()) throw InputError("mean_table: no tables");
    MetricTable out(tables[0].models, tables[0].horizon);
    for (const auto& t : tables) {
        if (t.models != out.models || t.horizon != out.horizon) throw InputError("mean_table: layouts differ");
        for (Metric m : all_metrics) {
            out.exclusions[static_cast<std::size_t>(m)] += t.exclusions[static_cast<std::size_t>(m)];
            for (std::size_t i = 0; i < out.models.size(); ++i)
                for (int h = 1; h <= out.horizon; ++h) out.at(m, i, h) += t.at(m, i, h);
        }
    }
    for (auto& per_model : out.values)
        for (auto& row : per_model)
            for (double& v : row) v /= static_cast<double>(tables.size());
    return out;
}

} // namespace msvr
