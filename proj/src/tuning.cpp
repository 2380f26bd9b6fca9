#include "msvr/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "json_util.hpp"
#include "msvr/error.hpp"
#include "msvr/parallel.hpp"

namespace msvr {

void PsoConfig::validate() const {
    if (swarm_size < 2) throw InputError("pso: swarm_size must be >= 2");
    if (iterations < 1) throw InputError("pso: iterations must be >= 1");
    if (!(inertia_initial >= inertia_final)) throw InputError("pso: inertia must not increase");
    if (!(cognitive_coeff >= 0 && social_coeff >= 0)) throw InputError("pso: coefficients must be >= 0");
    if (!(velocity_fraction > 0)) throw InputError("pso: velocity_fraction must be > 0");
    if (bounds.empty()) throw InputError("pso: no dimensions");
    for (const auto& b : bounds)
        if (!(std::isfinite(b.low) && std::isfinite(b.high) && b.low < b.high))
            throw InputError("pso: bounds must be finite with low < high");
}

double PsoConfig::inertia(int iteration) const {
    if (iterations == 1) return inertia_initial;
    return inertia_initial - (inertia_initial - inertia_final) * iteration / (iterations - 1);
}

namespace {

// Independent stream per (iteration, particle) so evaluation order is irrelevant.
std::mt19937_64 stream(std::uint64_t seed, int iteration, int particle) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(iteration + 1), static_cast<std::uint32_t>(particle)};
    return std::mt19937_64(seq);
}

} // namespace

PsoResult pso_search(const Fitness& fitness, const PsoConfig& cfg, int threads, const PsoObserver& observer) {
    cfg.validate();
    const auto dims = static_cast<Eigen::Index>(cfg.bounds.size());
    const auto np = static_cast<std::size_t>(cfg.swarm_size);
    Eigen::VectorXd low(dims), high(dims), vmax(dims);
    for (Eigen::Index d = 0; d < dims; ++d) {
        low[d] = cfg.bounds[static_cast<std::size_t>(d)].low;
        high[d] = cfg.bounds[static_cast<std::size_t>(d)].high;
        vmax[d] = cfg.velocity_fraction * (high[d] - low[d]);
    }

    std::vector<Eigen::VectorXd> pos(np), vel(np, Eigen::VectorXd::Zero(dims)), pbest(np);
    std::vector<double> fit(np), pbest_fit(np);
    PsoResult out;
    std::atomic<int> non_finite{0};

    auto evaluate_all = [&](int iteration) {
        parallel_for(np, threads, [&](std::size_t p) {
            double f = fitness(pos[p]);
            if (!std::isfinite(f)) {
                f = std::numeric_limits<double>::infinity();
                ++non_finite;
            }
            fit[p] = f;
        });
        out.evaluations += cfg.swarm_size;
        if (observer)
            for (std::size_t p = 0; p < np; ++p) observer(iteration, static_cast<int>(p), pos[p], fit[p]);
    };

    for (std::size_t p = 0; p < np; ++p) {
        auto rng = stream(cfg.seed, -1, static_cast<int>(p));
        pos[p].resize(dims);
        for (Eigen::Index d = 0; d < dims; ++d) pos[p][d] = std::uniform_real_distribution<double>(low[d], high[d])(rng);
    }
    evaluate_all(-1);
    std::size_t g = 0;
    for (std::size_t p = 0; p < np; ++p) {
        pbest[p] = pos[p];
        pbest_fit[p] = fit[p];
        if (fit[p] < fit[g]) g = p;
    }
    Eigen::VectorXd gbest = pbest[g];
    double gbest_fit = pbest_fit[g];

    for (int it = 0; it < cfg.iterations; ++it) {
        const double w = cfg.inertia(it);
        for (std::size_t p = 0; p < np; ++p) {
            auto rng = stream(cfg.seed, it, static_cast<int>(p));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (Eigen::Index d = 0; d < dims; ++d) {
                const double r1 = u(rng), r2 = u(rng);
                double v = w * vel[p][d] + cfg.cognitive_coeff * r1 * (pbest[p][d] - pos[p][d]) +
                           cfg.social_coeff * r2 * (gbest[d] - pos[p][d]);
                v = std::clamp(v, -vmax[d], vmax[d]);
                vel[p][d] = v;
                pos[p][d] = std::clamp(pos[p][d] + v, low[d], high[d]);
            }
        }
        evaluate_all(it);
        for (std::size_t p = 0; p < np; ++p) {
            if (fit[p] < pbest_fit[p]) {
                pbest_fit[p] = fit[p];
                pbest[p] = pos[p];
            }
            if (pbest_fit[p] < gbest_fit) {
                gbest_fit = pbest_fit[p];
                gbest = pbest[p];
            }
        }
        out.trace.push_back(gbest_fit);
    }

    out.best_position = gbest;
    out.best_fitness = gbest_fit;
    out.non_finite = non_finite.load();
    return out;
}

Hyperparams hyper_from_position(const Eigen::VectorXd& x, KernelKind kind) {
    if (x.size() != 3) throw InputError("hyper_from_position: expected (log10 C, log10 eps, log10 gamma)");
    Hyperparams h;
    h.C = std::pow(10.0, x[0]);
    h.epsilon = std::pow(10.0, x[1]);
    h.kernel.kind = kind;
    h.kernel.gamma = std::pow(10.0, x[2]);
    return h;
}

double cv_fitness(const EmbeddedDataset& data, const Hyperparams& hyper, int folds, const SolverOptions& opts) {
    if (folds < 2) throw InputError("cv_fitness: need at least 2 folds");
    const Eigen::Index n = data.rows();
    if (n < folds) throw InputError("cv_fitness: fewer rows than folds");
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index lo = n * f / folds, hi = n * (f + 1) / folds;
        std::vector<Eigen::Index> train, held;
        for (Eigen::Index r = 0; r < n; ++r) (r >= lo && r < hi ? held : train).push_back(r);
        const auto tr = data.subset(train);
        const auto te = data.subset(held);
        const auto model = fit(tr, hyper, opts);
        const Eigen::MatrixXd err = predict(model, te.inputs) - te.outputs;
        total += err.squaredNorm() / static_cast<double>(err.size());
    }
    return total / folds;
}

TuningResult tune(const EmbeddedDataset& data, const PsoConfig& cfg, int folds, const SolverOptions& opts,
                  int threads) {
    if (cfg.bounds.size() != 3) throw InputError("tune: PSO bounds must cover (C, epsilon, gamma)");
    std::atomic<int> failed{0};
    const Fitness fitness = [&](const Eigen::VectorXd& x) {
        try {
            return cv_fitness(data, hyper_from_position(x), folds, opts);
        } catch (const SolverError&) {
            ++failed;
            return std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            ++failed;
            return std::numeric_limits<double>::infinity();
        }
    };
    TuningResult r;
    r.folds = folds;
    r.search = pso_search(fitness, cfg, threads);
    r.hyper = hyper_from_position(r.search.best_position);
    r.failed_fits = failed.load();
    return r;
}

std::string tuning_to_json(const TuningResult& r, const PsoConfig& cfg) {
    nlohmann::json j;
    j["format"] = "msvr-tuning";
    j["version"] = 1;
    j["C"] = r.hyper.C;
    j["epsilon"] = r.hyper.epsilon;
    j["gamma"] = r.hyper.kernel.gamma;
    j["best_position_log10"] = detail::to_json(r.search.best_position);
    j["best_fitness"] = r.search.best_fitness;
    j["trace"] = r.search.trace;
    j["evaluations"] = r.search.evaluations;
    j["non_finite"] = r.search.non_finite;
    j["failed_fits"] = r.failed_fits;
    j["folds"] = r.folds;
    j["fold_layout"] = "contiguous";
    j["pso"] = {{"swarm_size", cfg.swarm_size},         {"iterations", cfg.iterations},
                {"cognitive_coeff", cfg.cognitive_coeff}, {"social_coeff", cfg.social_coeff},
                {"inertia_initial", cfg.inertia_initial}, {"inertia_final", cfg.inertia_final},
                {"seed", cfg.seed},                       {"velocity_fraction", cfg.velocity_fraction}};
    auto b = nlohmann::json::array();
    for (const auto& x : cfg.bounds) b.push_back({x.low, x.high});
    j["pso"]["bounds_log10"] = b;
    return j.dump(2);
}

} // namespace msvr
