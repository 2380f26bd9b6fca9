#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "msvr/dataset.hpp"
#include "msvr/kernels.hpp"

namespace msvr {

struct Hyperparams {
    double C = 1.0;       // regularization trade-off
    double epsilon = 0.0; // radius of the insensitive zone on the residual norm
    KernelConfig kernel;

    void validate() const;
};

enum class Termination { Converged, StepUnderflow, MaxIterations, ZeroLoss };

std::string_view to_string(Termination t);

struct SolverOptions {
    int max_iterations = 200;
    double tolerance = 1e-8; // on |obj_k - obj_{k+1}| / (1 + obj_k)
    double min_step = 1e-12; // backtracking gives up below this multiplier
    double jitter = 1e-8;    // diagonal regularization for singular systems
};

// Snapshot handed to SolverOptions observers after every accepted iteration.
struct IrwlsState {
    int iteration = 0;
    const Eigen::MatrixXd* beta = nullptr;
    const Eigen::VectorXd* intercept = nullptr;
    const Eigen::VectorXd* residual_norms = nullptr; // u_i
    const Eigen::VectorXd* weights = nullptr;        // a_i
    double objective = 0.0;
    double step_size = 0.0;
};

using IrwlsObserver = std::function<void(const IrwlsState&)>;

struct FitDiagnostics {
    double objective = 0.0;
    int iterations = 0;
    Termination termination = Termination::Converged;
    std::vector<double> objective_trace; // accepted objective values, starting at (0, 0)
    bool jitter_applied = false;
};

// Trained multi-output regressor: f_j(x) = sum_i beta(i, j) k(x, x_i) + intercept(j).
struct MsvrModel {
    Eigen::MatrixXd beta;         // n x H
    Eigen::VectorXd intercept;    // H
    Eigen::MatrixXd train_inputs; // n x d
    Hyperparams hyper;
    FitDiagnostics diagnostics;

    [[nodiscard]] Eigen::Index outputs() const noexcept { return beta.cols(); }
    [[nodiscard]] Eigen::Index input_dim() const noexcept { return train_inputs.cols(); }
};

double quad_eps_loss(double u, double epsilon);

// Row norms of E = Y - K beta - 1 b^T.
Eigen::VectorXd residual_norms(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept,
                               const GramMatrix& k, const Eigen::MatrixXd& targets);

// 1/2 sum_j beta_j^T K beta_j + C sum_i L(u_i).
double objective(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept, const GramMatrix& k,
                 const Eigen::MatrixXd& targets, const Hyperparams& hyper);
double objective(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept,
                 const EmbeddedDataset& data, const Hyperparams& hyper);

// a_i = 0 for u_i < eps, 2C(u_i - eps)/u_i otherwise; a_i = 2C at u_i = eps = 0.
Eigen::VectorXd irwls_weights(const Eigen::VectorXd& u, double epsilon, double C);

struct WeightedSolution {
    Eigen::MatrixXd beta;      // n x H, zero rows where a_i == 0
    Eigen::VectorXd intercept; // H
    bool jitter_applied = false;
};

// Per output j, solves over the active set A = {i : a_i > 0}
//   [K_AA + D_a^-1   1  ] [beta_A^j]   [y_A^j    ]
//   [a_A^T K_AA    1^T a] [b^j     ] = [a_A^T y^j]
WeightedSolution solve_weighted_system(const GramMatrix& k, const Eigen::VectorXd& a,
                                       const Eigen::MatrixXd& targets, double jitter = 1e-8);

MsvrModel fit(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const Hyperparams& hyper,
              const SolverOptions& opts = {}, const IrwlsObserver& observer = {});
MsvrModel fit(const EmbeddedDataset& data, const Hyperparams& hyper, const SolverOptions& opts = {},
              const IrwlsObserver& observer = {});

Eigen::MatrixXd predict(const MsvrModel& model, const Eigen::MatrixXd& inputs);

// Self-describing JSON text; doubles round-trip exactly.
std::string model_to_json(const MsvrModel& model);
MsvrModel model_from_json(const std::string& text);
void save_model(const MsvrModel& model, const std::string& path);
MsvrModel load_model(const std::string& path);

} // namespace msvr
