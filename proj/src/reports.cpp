#include <algorithm>
#include <cctype>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "msvr/error.hpp"
#include "msvr/harness.hpp"

namespace msvr {

namespace {

namespace fs = std::filesystem;

std::string file_safe(const std::string& id) {
    std::string out = id;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
    return out.empty() ? "series" : out;
}

std::string lags_text(const LagSet& lags) {
    std::string out;
    for (std::size_t i = 0; i < lags.size(); ++i) out += (i ? " " : "") + std::to_string(lags[i]);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

} // namespace

std::string Observations::to_csv() const {
    std::ostringstream out;
    out << "replicate,series,model,horizon,actual,forecast,scale\n";
    for (std::size_t r = 0; r < forecasts.size(); ++r)
        for (std::size_t s = 0; s < series.size(); ++s)
            for (std::size_t i = 0; i < models.size(); ++i)
                for (std::size_t h = 0; h < actuals[s].size(); ++h)
                    out << r + 1 << ',' << series[s] << ',' << models[i] << ',' << h + 1 << ','
                        << format_number(actuals[s][h]) << ',' << format_number(forecasts[r][s][i][h]) << ','
                        << format_number(scales[s]) << '\n';
    return out.str();
}

Observations Observations::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "replicate,series,model,horizon,actual,forecast,scale")
        throw InputError("observations: unexpected header");
    Observations o;
    std::map<std::string, std::size_t> series_ix, model_ix;
    struct Cell {
        std::size_t r, s, m, h;
        double forecast;
    };
    std::vector<Cell> cells;
    std::size_t replicates = 0, horizon = 0, row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto c = split(line, ',');
        if (c.size() != 7) throw InputError("observations: row " + std::to_string(row) + " needs 7 cells");
        try {
            const auto r = std::stoul(c[0]), h = std::stoul(c[3]);
            if (r < 1 || h < 1) throw InputError("observations: indices are 1-based");
            auto [sit, new_series] = series_ix.emplace(c[1], o.series.size());
            if (new_series) {
                o.series.push_back(c[1]);
                o.actuals.emplace_back();
                o.scales.push_back(std::stod(c[6]));
            }
            auto [mit, new_model] = model_ix.emplace(c[2], o.models.size());
            if (new_model) o.models.push_back(c[2]);
            auto& act = o.actuals[sit->second];
            if (act.size() < h) act.resize(h, std::numeric_limits<double>::quiet_NaN());
            act[h - 1] = std::stod(c[4]);
            cells.push_back({r - 1, sit->second, mit->second, h - 1, std::stod(c[5])});
            replicates = std::max<std::size_t>(replicates, r);
            horizon = std::max<std::size_t>(horizon, h);
        } catch (const std::logic_error&) {
            throw InputError("observations: unparseable row " + std::to_string(row));
        }
    }
    if (cells.empty()) throw InputError("observations: no rows");
    o.forecasts.assign(replicates, std::vector<std::vector<std::vector<double>>>(
                                       o.series.size(), std::vector<std::vector<double>>(
                                                            o.models.size(), std::vector<double>(horizon, std::numeric_limits<double>::quiet_NaN()))));
    for (const auto& c : cells) o.forecasts[c.r][c.s][c.m][c.h] = c.forecast;
    if (cells.size() != replicates * o.series.size() * o.models.size() * horizon)
        throw InputError("observations: incomplete replicate x series x model x horizon grid");
    return o;
}

std::string timing_csv(const std::vector<TimingRecord>& t) {
    std::ostringstream out;
    out << "series,strategy,train_ms,predict_ms\n";
    for (const auto& r : t)
        out << r.series << ',' << to_string(r.strategy) << ',' << format_number(r.train_ms) << ','
            << format_number(r.predict_ms) << '\n';
    return out.str();
}

std::string BenchSummary::to_csv() const {
    std::ostringstream out;
    out << "strategy,total_ms\n";
    out << "ITER-SVR," << format_number(iterated_ms) << '\n';
    out << "DIR-SVR," << format_number(direct_ms) << '\n';
    out << "MIMO-SVR," << format_number(mimo_ms) << '\n';
    out << "DIR/ITER," << format_number(direct_over_iterated()) << '\n';
    out << "DIR/MIMO," << format_number(direct_over_mimo()) << '\n';
    return out.str();
}

std::string anova_csv(const std::vector<AnovaRow>& rows) {
    std::ostringstream out;
    out << "metric,horizon,f,p,df_between,df_within,tukey,note\n";
    for (const auto& r : rows) {
        out << to_string(r.metric) << ',' << r.horizon << ',';
        if (r.result)
            out << format_number(r.result->f) << ',' << format_number(r.result->p) << ',' << r.result->df_between
                << ',' << r.result->df_within;
        else
            out << ",,,";
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << ',' << (r.tukey ? "yes" : "no") << ',' << note << '\n';
    }
    return out.str();
}

std::string tukey_text(const std::vector<AnovaRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        out << to_string(r.metric) << " h=" << r.horizon << ": ";
        if (r.tukey) out << r.tukey->chain;
        else out << "(" << r.note << ")";
        out << '\n';
    }
    return out.str();
}

std::string tukey_pairs_csv(const std::vector<AnovaRow>& rows, const std::vector<std::string>& models) {
    std::ostringstream out;
    out << "metric,horizon,model_a,model_b,mean_difference,critical_difference,significant\n";
    for (const auto& r : rows) {
        if (!r.tukey) continue;
        for (const auto& p : r.tukey->pairs)
            out << to_string(r.metric) << ',' << r.horizon << ',' << models[static_cast<std::size_t>(p.first)] << ','
                << models[static_cast<std::size_t>(p.second)] << ',' << format_number(p.mean_difference) << ','
                << format_number(p.critical_difference) << ',' << (p.significant ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string replicate_metrics_csv(const std::vector<MetricTable>& tables) {
    std::ostringstream out;
    out << "replicate,model,horizon,mape,smape,mase\n";
    for (std::size_t r = 0; r < tables.size(); ++r) {
        std::istringstream in(tables[r].to_csv());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) out << r + 1 << ',' << line << '\n';
    }
    return out.str();
}

void write_tables(const EvaluationReport& r, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path d(dir);
    detail::write_text_file((d / "observations.csv").string(), r.observations.to_csv());
    detail::write_text_file((d / "metrics.csv").string(), r.table.to_csv());
    detail::write_text_file((d / "replicate_metrics.csv").string(), replicate_metrics_csv(r.replicate_tables));
    detail::write_text_file((d / "anova.csv").string(), anova_csv(r.tests));
    detail::write_text_file((d / "tukey.txt").string(), tukey_text(r.tests));
    detail::write_text_file((d / "tukey_pairs.csv").string(), tukey_pairs_csv(r.tests, r.observations.models));
}

void write_report(const EvaluationReport& r, const ExperimentManifest& m, const std::string& dir) {
    write_tables(r, dir);
    const fs::path d(dir);
    detail::write_text_file((d / "timing.csv").string(), timing_csv(r.timings));

    nlohmann::json repro;
    repro["format"] = "msvr-run";
    repro["experiment"] = nlohmann::json::parse(m.to_json());
    repro["decisions"] = {
        {"seasonal_method", "classical ratio-to-moving-average, indices rescaled to mean 1"},
        {"pipeline_order", "normalize, deseasonalize, detrend (fitted on the estimation sample only)"},
        {"input_selection", "delta test, nearest neighbour ties to the lowest index"},
        {"lag_search", std::string(to_string(m.lag_search))},
        {"cv_folds", "contiguous blocks of embedding rows"},
        {"pso_space", "log10 of (C, epsilon, gamma)"},
        {"pso_rng", "mt19937_64 per (iteration, particle) from the derived seed"},
        {"direct_tuning", m.direct_per_horizon ? "per_horizon" : "shared, tuned on the h = H dataset"},
        {"naive_models", "fitted on the raw estimation sample"},
        {"mase_scale", "in-sample one-step naive MAE of the raw estimation sample"},
        {"anova_observations", "one term per (replicate, series) and model"},
        {"timing", "train_ms = input selection + tuning + final fit; predict_ms = forecast + rollback"}};
    auto seeds = nlohmann::json::array();
    auto series_info = nlohmann::json::array();
    for (std::size_t rep = 0; rep < r.outcomes.size(); ++rep) {
        for (const auto& so : r.outcomes[rep]) {
            for (const auto& st : so.strategies) {
                for (std::size_t k = 0; k < st.seeds.size(); ++k)
                    seeds.push_back({{"replicate", rep + 1},
                                     {"series", so.id},
                                     {"strategy", std::string(to_string(st.strategy))},
                                     {"unit", k},
                                     {"seed", st.seeds[k]}});
            }
            if (rep == 0)
                series_info.push_back({{"id", so.id},
                                       {"max_lag", so.max_lag},
                                       {"steps_applied", so.record.steps_applied},
                                       {"preprocessing_notes", so.record.notes},
                                       {"notes", so.notes}});
        }
    }
    repro["derived_seeds"] = seeds;
    repro["series"] = series_info;
    repro["failures"] = r.failures;
    detail::write_text_file((d / "manifest.json").string(), repro.dump(2));

    // Per-series artifacts.
    for (std::size_t rep = 0; rep < r.outcomes.size(); ++rep) {
        for (const auto& so : r.outcomes[rep]) {
            const fs::path sd = d / "series" / file_safe(so.id);
            fs::create_directories(sd);
            if (rep == 0) {
                detail::write_text_file((sd / "preprocess.json").string(), so.record.to_json());
                std::ostringstream sel;
                sel << "strategy,lags,delta,chosen\n";
                for (const auto& st : so.strategies)
                    for (const auto& c : st.selection.candidates)
                        sel << to_string(st.strategy) << ',' << lags_text(c.lags) << ',' << format_number(c.delta) << ','
                            << (c.lags == st.selection.chosen_lags ? 1 : 0) << '\n';
                detail::write_text_file((sd / "selection.csv").string(), sel.str());
            }
            for (const auto& st : so.strategies) {
                if (st.tuning.empty()) continue;
                auto arr = nlohmann::json::array();
                for (std::size_t k = 0; k < st.tuning.size(); ++k) {
                    PsoConfig cfg = m.pso;
                    cfg.seed = st.seeds[k];
                    arr.push_back(nlohmann::json::parse(tuning_to_json(st.tuning[k], cfg)));
                }
                std::string name = "tuning_" + file_safe(std::string(to_string(st.strategy))) + "_r" +
                                   std::to_string(rep + 1) + ".json";
                detail::write_text_file((sd / name).string(), arr.dump(2));
            }
        }
    }
}

} // namespace msvr
