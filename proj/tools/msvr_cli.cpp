#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "msvr/error.hpp"
#include "msvr/harness.hpp"
#include "msvr/strategies.hpp"

using namespace msvr;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "1-5,8" -> {1, 2, 3, 4, 5, 8}
std::vector<int> parse_rows(const std::string& spec) {
    std::vector<int> rows;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        const int a = std::stoi(part.substr(0, dash));
        const int b = dash == std::string::npos ? a : std::stoi(part.substr(dash + 1));
        for (int r = a; r <= b; ++r) rows.push_back(r);
    }
    return rows;
}

std::vector<std::pair<int, TimeSeries>> pick_series(const ExperimentManifest& m, const std::string& only) {
    std::vector<std::pair<int, TimeSeries>> out;
    const auto all = materialize(m);
    for (std::size_t i = 0; i < all.size(); ++i)
        if (only.empty() || all[i].id == only) out.emplace_back(static_cast<int>(i), all[i]);
    if (out.empty()) throw InputError("no series named '" + only + "'");
    return out;
}

TimeSeries estimation_of(const TimeSeries& s, int holdout) {
    if (static_cast<int>(s.size()) <= holdout + 1) throw InputError("series '" + s.id + "' is shorter than the hold-out");
    TimeSeries e = s;
    e.values.resize(s.size() - static_cast<std::size_t>(holdout));
    return e;
}

void print_summary(const MetricTable& t) {
    std::cout << "model";
    for (const auto& [a, b] : t.summary_ranges())
        for (Metric m : all_metrics) std::cout << ',' << to_string(m) << '_' << a << '-' << b;
    std::cout << '\n';
    for (std::size_t i = 0; i < t.models.size(); ++i) {
        std::cout << t.models[i];
        for (const auto& [a, b] : t.summary_ranges())
            for (Metric m : all_metrics) std::cout << ',' << format_number(t.average(m, i, a, b));
        std::cout << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-step-ahead forecasting with multi-output SVR"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Write simulated series as t,<id> CSV files");
    std::string system = "mackey_glass", rows_spec = "1-20", out_dir = "data";
    gen->add_option("--system", system, "henon or mackey_glass")->check(CLI::IsMember({"henon", "mackey_glass"}));
    gen->add_option("--rows", rows_spec, "benchmark rows, e.g. 1-5,8");
    gen->add_option("--out", out_dir, "output directory");

    auto* ing = app.add_subcommand("ingest", "Validate a CSV file of series");
    std::string csv_path;
    ing->add_option("csv", csv_path)->required();

    std::string manifest_path, series_id, strategy_name = "MIMO-SVR";
    auto* sel = app.add_subcommand("select-inputs", "Delta test scores per candidate lag set");
    sel->add_option("--manifest", manifest_path)->required();
    sel->add_option("--series", series_id, "restrict to one series id");
    sel->add_option("--strategy", strategy_name);

    auto* tun = app.add_subcommand("tune", "PSO + cross-validation for one strategy");
    int replicate = 1;
    tun->add_option("--manifest", manifest_path)->required();
    tun->add_option("--series", series_id);
    tun->add_option("--strategy", strategy_name);
    tun->add_option("--replicate", replicate)->check(CLI::PositiveNumber);
    std::string tune_out;
    tun->add_option("--out", tune_out, "directory for tuning JSON (default: stdout)");

    auto* run = app.add_subcommand("run", "Full experiment: forecasts, metrics, tests, timing");
    std::string run_out;
    run->add_option("--manifest", manifest_path)->required();
    run->add_option("--out", run_out, "overrides the manifest output directory");

    auto* bench = app.add_subcommand("bench", "Elapsed-time comparison of the SVR strategies");
    bench->add_option("--manifest", manifest_path)->required();
    bench->add_option("--out", run_out);

    auto* rep = app.add_subcommand("report", "Re-render tables from a run directory's observations.csv");
    std::string run_dir;
    double alpha = 0.05;
    rep->add_option("--dir", run_dir)->required();
    rep->add_option("--alpha", alpha);
    rep->add_option("--out", run_out, "write tables here instead of --dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            for (int r : parse_rows(rows_spec)) {
                const auto s = system == "henon" ? henon_generate(benchmark_henon(r))
                                                 : mackey_glass_generate(benchmark_mackey_glass(r));
                write_file(fs::path(out_dir) / (s.id + ".csv"), series_to_csv(s));
                std::cout << s.id << ',' << s.size() << '\n';
            }
        } else if (ing->parsed()) {
            const auto all = ingest_csv(csv_path);
            std::cout << "series,length\n";
            for (const auto& s : all) std::cout << s.id << ',' << s.size() << '\n';
        } else if (sel->parsed()) {
            const auto m = load_manifest(manifest_path);
            const Strategy st = strategy_from_string(strategy_name);
            std::cout << "series,strategy,lags,delta,chosen\n";
            for (const auto& [ix, s] : pick_series(m, series_id)) {
                const auto pre = preprocess(estimation_of(s, m.holdout_length), m.preprocessing);
                const auto r = select_inputs(pre.series, m.max_lag, m.holdout_length, st, m.lag_search);
                for (const auto& c : r.candidates) {
                    std::cout << s.id << ',' << to_string(st) << ',';
                    for (std::size_t k = 0; k < c.lags.size(); ++k) std::cout << (k ? " " : "") << c.lags[k];
                    std::cout << ',' << format_number(c.delta) << ',' << (c.lags == r.chosen_lags) << '\n';
                }
            }
        } else if (tun->parsed()) {
            auto m = load_manifest(manifest_path);
            m.strategies = {strategy_from_string(strategy_name)};
            for (const auto& [ix, s] : pick_series(m, series_id)) {
                const auto out = run_series(estimation_of(s, m.holdout_length), m, ix, replicate - 1,
                                            m.direct_per_horizon);
                const auto& so = out.strategies.front();
                for (std::size_t k = 0; k < so.tuning.size(); ++k) {
                    PsoConfig cfg = m.pso;
                    cfg.seed = so.seeds[k];
                    const auto text = tuning_to_json(so.tuning[k], cfg);
                    if (tune_out.empty()) {
                        std::cout << text << '\n';
                    } else {
                        const auto name = s.id + "_" + std::string(to_string(so.strategy)) + "_" + std::to_string(k) + ".json";
                        write_file(fs::path(tune_out) / name, text);
                    }
                }
            }
        } else if (run->parsed()) {
            auto m = load_manifest(manifest_path);
            if (!run_out.empty()) m.output_dir = run_out;
            const auto r = run_experiment(m);
            write_report(r, m, m.output_dir);
            print_summary(r.table);
            for (const auto& f : r.failures) std::cerr << "failed: " << f << '\n';
            std::cout << "wrote " << m.output_dir << '\n';
        } else if (bench->parsed()) {
            auto m = load_manifest(manifest_path);
            if (!run_out.empty()) m.output_dir = run_out;
            const auto b = benchmark_strategies(m);
            write_file(fs::path(m.output_dir) / "timing.csv", timing_csv(b.timings));
            write_file(fs::path(m.output_dir) / "bench_summary.csv", b.to_csv());
            std::cout << b.to_csv();
        } else if (rep->parsed()) {
            const auto obs = Observations::from_csv(read_file(fs::path(run_dir) / "observations.csv"));
            const auto r = evaluate_observations(obs, alpha);
            write_tables(r, run_out.empty() ? run_dir : run_out);
            print_summary(r.table);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
