#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>

#include "json_util.hpp"
#include "msvr/error.hpp"
#include "msvr/harness.hpp"

namespace msvr {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InputError(where + ": unknown key '" + key + "'");
}

std::string kind_name(DatasetSpec::Kind k) {
    switch (k) {
    case DatasetSpec::Kind::Henon: return "henon";
    case DatasetSpec::Kind::MackeyGlass: return "mackey_glass";
    case DatasetSpec::Kind::Csv: return "csv";
    case DatasetSpec::Kind::Inline: return "inline";
    }
    return "?";
}

HenonConfig henon_from_json(const json& j) {
    reject_unknown(j, {"x0", "y0", "length", "burn_in", "id"}, "henon config");
    HenonConfig c;
    c.x0 = j.value("x0", c.x0);
    c.y0 = j.value("y0", c.y0);
    c.length = j.value("length", c.length);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.id = j.value("id", c.id);
    return c;
}

MackeyGlassConfig mackey_glass_from_json(const json& j) {
    reject_unknown(j, {"phi0", "tau", "length", "dt", "sample_stride", "burn_in", "id"}, "mackey_glass config");
    MackeyGlassConfig c;
    c.phi0 = j.value("phi0", c.phi0);
    c.tau = j.value("tau", c.tau);
    c.length = j.value("length", c.length);
    c.dt = j.value("dt", c.dt);
    c.sample_stride = j.value("sample_stride", c.sample_stride);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.id = j.value("id", c.id);
    return c;
}

DatasetSpec dataset_from_json(const json& j, const std::string& base_dir) {
    reject_unknown(j, {"generator", "table_rows", "configs", "csv", "series", "period"}, "dataset");
    DatasetSpec d;
    if (j.contains("period") && !j.at("period").is_null()) d.period = j.at("period").get<int>();
    if (j.contains("generator")) {
        const auto g = j.at("generator").get<std::string>();
        if (g == "henon") d.kind = DatasetSpec::Kind::Henon;
        else if (g == "mackey_glass") d.kind = DatasetSpec::Kind::MackeyGlass;
        else throw InputError("dataset: unknown generator '" + g + "'");
        d.table_rows = j.value("table_rows", std::vector<int>{});
        for (const auto& c : j.value("configs", json::array())) {
            if (d.kind == DatasetSpec::Kind::Henon) d.henon.push_back(henon_from_json(c));
            else d.mackey_glass.push_back(mackey_glass_from_json(c));
        }
    } else if (j.contains("csv")) {
        d.kind = DatasetSpec::Kind::Csv;
        const std::filesystem::path p = j.at("csv").get<std::string>();
        d.path = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).lexically_normal().string();
    } else if (j.contains("series")) {
        d.kind = DatasetSpec::Kind::Inline;
        for (const auto& s : j.at("series")) {
            TimeSeries t;
            t.id = s.at("id").get<std::string>();
            t.values = s.at("values").get<std::vector<double>>();
            d.series.push_back(std::move(t));
        }
    } else {
        throw InputError("dataset: needs one of generator, csv, series");
    }
    return d;
}

json dataset_to_json(const DatasetSpec& d) {
    json j;
    switch (d.kind) {
    case DatasetSpec::Kind::Henon:
    case DatasetSpec::Kind::MackeyGlass: {
        j["generator"] = kind_name(d.kind);
        j["table_rows"] = d.table_rows;
        auto cfgs = json::array();
        for (const auto& c : d.henon)
            cfgs.push_back({{"x0", c.x0}, {"y0", c.y0}, {"length", c.length}, {"burn_in", c.burn_in}, {"id", c.id}});
        for (const auto& c : d.mackey_glass)
            cfgs.push_back({{"phi0", c.phi0},
                            {"tau", c.tau},
                            {"length", c.length},
                            {"dt", c.dt},
                            {"sample_stride", c.sample_stride},
                            {"burn_in", c.burn_in},
                            {"id", c.id}});
        j["configs"] = cfgs;
        break;
    }
    case DatasetSpec::Kind::Csv: j["csv"] = d.path; break;
    case DatasetSpec::Kind::Inline: {
        auto arr = json::array();
        for (const auto& s : d.series) arr.push_back({{"id", s.id}, {"values", s.values}});
        j["series"] = arr;
        break;
    }
    }
    j["period"] = d.period ? json(*d.period) : json(nullptr);
    return j;
}

} // namespace

void ExperimentManifest::validate() const {
    if (datasets.empty()) throw InputError("manifest: no datasets");
    if (holdout_length < 1) throw InputError("manifest: holdout_length must be >= 1");
    if (replicates < 1) throw InputError("manifest: replicates must be >= 1");
    if (strategies.empty()) throw InputError("manifest: no strategies");
    if (max_lag < 1) throw InputError("manifest: max_lag must be >= 1");
    if (folds < 2) throw InputError("manifest: folds must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("manifest: alpha must lie in (0, 1)");
    if (threads < 1) throw InputError("manifest: threads must be >= 1");
    pso.validate();
    if (pso.bounds.size() != 3) throw InputError("manifest: PSO bounds must cover (C, epsilon, gamma)");
    std::set<Strategy> seen;
    for (Strategy s : strategies)
        if (!seen.insert(s).second) throw InputError("manifest: duplicate strategy " + std::string(to_string(s)));
}

std::string ExperimentManifest::to_json() const {
    json j;
    j["format"] = "msvr-experiment";
    j["name"] = name;
    auto ds = json::array();
    for (const auto& d : datasets) ds.push_back(dataset_to_json(d));
    j["datasets"] = ds;
    j["holdout_length"] = holdout_length;
    auto st = json::array();
    for (Strategy s : strategies) st.push_back(std::string(to_string(s)));
    j["strategies"] = st;
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["max_lag"] = max_lag;
    j["lag_search"] = std::string(to_string(lag_search));
    j["folds"] = folds;
    auto bounds = json::array();
    for (const auto& b : pso.bounds) bounds.push_back({b.low, b.high});
    j["pso"] = {{"swarm_size", pso.swarm_size},
                {"iterations", pso.iterations},
                {"cognitive_coeff", pso.cognitive_coeff},
                {"social_coeff", pso.social_coeff},
                {"inertia_initial", pso.inertia_initial},
                {"inertia_final", pso.inertia_final},
                {"velocity_fraction", pso.velocity_fraction},
                {"bounds_log10", bounds}};
    j["direct_tuning"] = direct_per_horizon ? "per_horizon" : "shared";
    j["bench_direct_tuning"] = bench_direct_per_horizon ? "per_horizon" : "shared";
    j["preprocessing"] = {{"normalize", preprocessing.normalize},
                          {"deseasonalize", preprocessing.deseasonalize},
                          {"detrend", preprocessing.detrend},
                          {"trend_degree", preprocessing.trend_degree},
                          {"trend_alpha", preprocessing.trend_alpha}};
    j["solver"] = {{"max_iterations", solver.max_iterations},
                   {"tolerance", solver.tolerance},
                   {"min_step", solver.min_step},
                   {"jitter", solver.jitter}};
    j["alpha"] = alpha;
    j["threads"] = threads;
    j["output_dir"] = output_dir;
    return j.dump(2);
}

ExperimentManifest ExperimentManifest::from_json(const std::string& text, const std::string& base_dir) {
    ExperimentManifest m;
    try {
        const auto j = json::parse(text);
        reject_unknown(j,
                       {"format", "name", "datasets", "holdout_length", "strategies", "replicates", "seed", "max_lag",
                        "lag_search", "folds", "pso", "direct_tuning", "bench_direct_tuning", "preprocessing",
                        "solver", "alpha", "threads", "output_dir"},
                       "manifest");
        m.name = j.value("name", m.name);
        for (const auto& d : j.at("datasets")) m.datasets.push_back(dataset_from_json(d, base_dir));
        m.holdout_length = j.value("holdout_length", m.holdout_length);
        if (j.contains("strategies")) {
            m.strategies.clear();
            for (const auto& s : j.at("strategies")) m.strategies.push_back(strategy_from_string(s.get<std::string>()));
        }
        m.replicates = j.value("replicates", m.replicates);
        m.seed = j.value("seed", m.seed);
        m.max_lag = j.value("max_lag", m.max_lag);
        m.lag_search = lag_search_from_string(j.value("lag_search", std::string(to_string(m.lag_search))));
        m.folds = j.value("folds", m.folds);
        if (j.contains("pso")) {
            const auto& p = j.at("pso");
            reject_unknown(p,
                           {"swarm_size", "iterations", "cognitive_coeff", "social_coeff", "inertia_initial",
                            "inertia_final", "velocity_fraction", "bounds_log10"},
                           "pso");
            m.pso.swarm_size = p.value("swarm_size", m.pso.swarm_size);
            m.pso.iterations = p.value("iterations", m.pso.iterations);
            m.pso.cognitive_coeff = p.value("cognitive_coeff", m.pso.cognitive_coeff);
            m.pso.social_coeff = p.value("social_coeff", m.pso.social_coeff);
            m.pso.inertia_initial = p.value("inertia_initial", m.pso.inertia_initial);
            m.pso.inertia_final = p.value("inertia_final", m.pso.inertia_final);
            m.pso.velocity_fraction = p.value("velocity_fraction", m.pso.velocity_fraction);
            if (p.contains("bounds_log10")) {
                m.pso.bounds.clear();
                for (const auto& b : p.at("bounds_log10")) m.pso.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
            }
        }
        auto tuning_mode = [](const std::string& s) {
            if (s == "per_horizon") return true;
            if (s == "shared") return false;
            throw InputError("manifest: direct tuning must be 'shared' or 'per_horizon'");
        };
        m.direct_per_horizon = tuning_mode(j.value("direct_tuning", std::string("shared")));
        m.bench_direct_per_horizon = tuning_mode(j.value("bench_direct_tuning", std::string("per_horizon")));
        if (j.contains("preprocessing")) {
            const auto& p = j.at("preprocessing");
            reject_unknown(p, {"normalize", "deseasonalize", "detrend", "trend_degree", "trend_alpha"}, "preprocessing");
            m.preprocessing.normalize = p.value("normalize", m.preprocessing.normalize);
            m.preprocessing.deseasonalize = p.value("deseasonalize", m.preprocessing.deseasonalize);
            m.preprocessing.detrend = p.value("detrend", m.preprocessing.detrend);
            m.preprocessing.trend_degree = p.value("trend_degree", m.preprocessing.trend_degree);
            m.preprocessing.trend_alpha = p.value("trend_alpha", m.preprocessing.trend_alpha);
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            reject_unknown(s, {"max_iterations", "tolerance", "min_step", "jitter"}, "solver");
            m.solver.max_iterations = s.value("max_iterations", m.solver.max_iterations);
            m.solver.tolerance = s.value("tolerance", m.solver.tolerance);
            m.solver.min_step = s.value("min_step", m.solver.min_step);
            m.solver.jitter = s.value("jitter", m.solver.jitter);
        }
        m.alpha = j.value("alpha", m.alpha);
        m.threads = j.value("threads", m.threads);
        m.output_dir = j.value("output_dir", "runs/" + m.name);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
    m.validate();
    return m;
}

ExperimentManifest load_manifest(const std::string& path) {
    const auto base = std::filesystem::path(path).parent_path().string();
    auto m = ExperimentManifest::from_json(detail::read_text_file(path), base.empty() ? "." : base);
    if (const char* dir = std::getenv("MSVR_OUTPUT_DIR"); dir && *dir) m.output_dir = dir;
    if (const char* t = std::getenv("MSVR_THREADS"); t && *t) {
        try {
            m.threads = std::stoi(t);
        } catch (const std::exception&) {
            throw InputError("MSVR_THREADS must be an integer");
        }
        if (m.threads < 1) throw InputError("MSVR_THREADS must be >= 1");
    }
    return m;
}

std::vector<TimeSeries> materialize(const ExperimentManifest& m) {
    std::vector<TimeSeries> out;
    for (const auto& d : m.datasets) {
        std::vector<TimeSeries> batch;
        switch (d.kind) {
        case DatasetSpec::Kind::Henon:
            for (int r : d.table_rows) batch.push_back(henon_generate(benchmark_henon(r)));
            for (const auto& c : d.henon) batch.push_back(henon_generate(c));
            break;
        case DatasetSpec::Kind::MackeyGlass:
            for (int r : d.table_rows) batch.push_back(mackey_glass_generate(benchmark_mackey_glass(r)));
            for (const auto& c : d.mackey_glass) batch.push_back(mackey_glass_generate(c));
            break;
        case DatasetSpec::Kind::Csv: batch = ingest_csv(d.path); break;
        case DatasetSpec::Kind::Inline: batch = d.series; break;
        }
        for (auto& s : batch) {
            if (d.period) s.period = d.period;
            out.push_back(std::move(s));
        }
    }
    std::set<std::string> ids;
    for (const auto& s : out)
        if (!ids.insert(s.id).second) throw InputError("manifest: duplicate series id '" + s.id + "'");
    if (out.empty()) throw InputError("manifest: datasets produced no series");
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, int replicate, int series, int strategy, int horizon) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(series),
                      static_cast<std::uint32_t>(strategy), static_cast<std::uint32_t>(horizon)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

} // namespace msvr
