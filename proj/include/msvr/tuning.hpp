#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msvr/dataset.hpp"
#include "msvr/solver.hpp"

namespace msvr {

struct Bounds {
    double low = 0.0;
    double high = 1.0;
};

// Global-best PSO. Positions live in log10 space of (C, epsilon, gamma) by default.
struct PsoConfig {
    int swarm_size = 20;
    int iterations = 100;
    double cognitive_coeff = 2.0;
    double social_coeff = 2.0;
    double inertia_initial = 0.9;
    double inertia_final = 0.4;
    std::uint64_t seed = 0;
    std::vector<Bounds> bounds{{-2.0, 4.0}, {-4.0, 0.0}, {-4.0, 2.0}};
    double velocity_fraction = 0.5; // |v_d| <= fraction * (high_d - low_d)

    void validate() const;
    [[nodiscard]] double inertia(int iteration) const;
};

using Fitness = std::function<double(const Eigen::VectorXd&)>;

struct PsoResult {
    Eigen::VectorXd best_position;
    double best_fitness = 0.0;
    std::vector<double> trace; // global best after each iteration
    int evaluations = 0;
    int non_finite = 0; // evaluations replaced by +inf
};

// Called once per evaluated position, in (iteration, particle) order; the
// initial swarm is iteration -1.
using PsoObserver = std::function<void(int iteration, int particle, const Eigen::VectorXd& position, double fitness)>;

// `threads` only parallelises evaluations within an iteration; results do
// not depend on it.
PsoResult pso_search(const Fitness& fitness, const PsoConfig& cfg, int threads = 1, const PsoObserver& observer = {});

Hyperparams hyper_from_position(const Eigen::VectorXd& log10_position, KernelKind kind = KernelKind::Rbf);

// Mean over `folds` contiguous row blocks of the held-out MSE (averaged over
// all outputs) of a model fitted on the remaining rows.
double cv_fitness(const EmbeddedDataset& data, const Hyperparams& hyper, int folds,
                  const SolverOptions& opts = {});

struct TuningResult {
    Hyperparams hyper;
    PsoResult search;
    int folds = 5;
    int failed_fits = 0; // solver errors scored as +inf
};

TuningResult tune(const EmbeddedDataset& data, const PsoConfig& cfg, int folds = 5,
                  const SolverOptions& opts = {}, int threads = 1);

std::string tuning_to_json(const TuningResult& r, const PsoConfig& cfg);

} // namespace msvr
