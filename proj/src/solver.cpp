#include "msvr/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "json_util.hpp"
#include "msvr/error.hpp"

namespace msvr {

void Hyperparams::validate() const {
    if (!(C > 0.0 && std::isfinite(C))) throw InputError("hyperparameter C must be finite and > 0");
    if (!(epsilon >= 0.0 && std::isfinite(epsilon))) throw InputError("hyperparameter epsilon must be finite and >= 0");
    kernel.validate();
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::Converged: return "converged";
    case Termination::StepUnderflow: return "step_underflow";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::ZeroLoss: return "zero_loss";
    }
    return "?";
}

namespace {

Termination termination_from_string(const std::string& s) {
    if (s == "converged") return Termination::Converged;
    if (s == "step_underflow") return Termination::StepUnderflow;
    if (s == "max_iterations") return Termination::MaxIterations;
    if (s == "zero_loss") return Termination::ZeroLoss;
    throw InputError("unknown termination '" + s + "'");
}

double loss_sum(const Eigen::VectorXd& u, double epsilon) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) acc += quad_eps_loss(u[i], epsilon);
    return acc;
}

// 1/2 sum_j beta_j^T K beta_j given K beta; clamped at zero against rounding.
double norm_term(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& k_beta) {
    return std::max(0.0, 0.5 * beta.cwiseProduct(k_beta).sum());
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

} // namespace

double quad_eps_loss(double u, double epsilon) {
    if (u < 0.0) throw InputError("quad_eps_loss: residual norm must be non-negative");
    if (u < epsilon) return 0.0;
    return u * u - 2.0 * u * epsilon + epsilon * epsilon;
}

Eigen::VectorXd residual_norms(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept,
                               const GramMatrix& k, const Eigen::MatrixXd& targets) {
    Eigen::MatrixXd e = targets - k.entries() * beta;
    e.rowwise() -= intercept.transpose();
    return e.rowwise().norm();
}

double objective(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept, const GramMatrix& k,
                 const Eigen::MatrixXd& targets, const Hyperparams& hyper) {
    if (beta.rows() != k.rows() || k.rows() != k.cols() || targets.rows() != k.rows() ||
        beta.cols() != targets.cols() || intercept.size() != targets.cols())
        throw InputError("objective: inconsistent shapes");
    if (!beta.allFinite() || !intercept.allFinite() || !targets.allFinite() || !k.entries().allFinite())
        throw NumericError("objective: non-finite input");
    const Eigen::MatrixXd k_beta = k.entries() * beta;
    Eigen::MatrixXd e = targets - k_beta;
    e.rowwise() -= intercept.transpose();
    return norm_term(beta, k_beta) + hyper.C * loss_sum(e.rowwise().norm(), hyper.epsilon);
}

double objective(const Eigen::MatrixXd& beta, const Eigen::VectorXd& intercept,
                 const EmbeddedDataset& data, const Hyperparams& hyper) {
    return objective(beta, intercept, gram(data.inputs, hyper.kernel), data.outputs, hyper);
}

Eigen::VectorXd irwls_weights(const Eigen::VectorXd& u, double epsilon, double C) {
    Eigen::VectorXd a(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0) throw InputError("irwls_weights: residual norms must be non-negative");
        if (u[i] < epsilon)
            a[i] = 0.0;
        else if (u[i] == 0.0) // only reachable with epsilon == 0: limit of 2C(u - eps)/u
            a[i] = 2.0 * C;
        else
            a[i] = 2.0 * C * (u[i] - epsilon) / u[i];
    }
    return a;
}

WeightedSolution solve_weighted_system(const GramMatrix& k, const Eigen::VectorXd& a,
                                       const Eigen::MatrixXd& targets, double jitter) {
    const Eigen::Index n = k.rows();
    if (k.cols() != n || a.size() != n || targets.rows() != n)
        throw InputError("solve_weighted_system: inconsistent shapes");

    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i)
        if (a[i] > 0.0) active.push_back(i);
    if (active.empty()) throw InputError("solve_weighted_system: needs at least one positive weight");

    const auto m = static_cast<Eigen::Index>(active.size());
    const Eigen::Index outputs = targets.cols();
    const Eigen::MatrixXd& kk = k.entries();

    Eigen::MatrixXd system(m + 1, m + 1);
    Eigen::MatrixXd rhs(m + 1, outputs);
    double weight_sum = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = active[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m; ++c) system(r, c) = kk(i, active[static_cast<std::size_t>(c)]);
        system(r, r) += 1.0 / a[i];
        system(r, m) = 1.0;
        rhs.row(r) = targets.row(i);
        weight_sum += a[i];
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) {
            const Eigen::Index i = active[static_cast<std::size_t>(r)];
            acc += a[i] * kk(i, active[static_cast<std::size_t>(c)]);
        }
        system(m, c) = acc;
    }
    system(m, m) = weight_sum;
    rhs.row(m).setZero();
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = active[static_cast<std::size_t>(r)];
        rhs.row(m) += a[i] * targets.row(i);
    }
    // The intercept equation scales with sum(a); normalize it so large C
    // does not wreck the conditioning. Same solution set.
    system.row(m) /= weight_sum;
    rhs.row(m) /= weight_sum;

    auto try_solve = [&](const Eigen::MatrixXd& lhs, Eigen::MatrixXd& out) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
        if (!(lu.rcond() > 1e-15)) return false;
        out = lu.solve(rhs);
        return out.allFinite();
    };

    WeightedSolution sol;
    Eigen::MatrixXd x;
    if (!try_solve(system, x)) {
        Eigen::MatrixXd regularized = system;
        for (Eigen::Index r = 0; r < m; ++r) regularized(r, r) += jitter;
        if (!try_solve(regularized, x))
            throw SolverError("weighted least-squares system is singular even after jitter");
        sol.jitter_applied = true;
    }

    sol.beta = Eigen::MatrixXd::Zero(n, outputs);
    for (Eigen::Index r = 0; r < m; ++r) sol.beta.row(active[static_cast<std::size_t>(r)]) = x.row(r);
    sol.intercept = x.row(m).transpose();
    return sol;
}

MsvrModel fit(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const Hyperparams& hyper,
              const SolverOptions& opts, const IrwlsObserver& observer) {
    hyper.validate();
    if (inputs.rows() == 0 || targets.cols() == 0) throw InputError("fit: empty dataset");
    if (inputs.rows() != targets.rows()) throw InputError("fit: inputs and targets differ in row count");
    require_finite(inputs, "fit: inputs");
    require_finite(targets, "fit: targets");

    const Eigen::Index n = inputs.rows();
    const Eigen::Index outputs = targets.cols();
    const GramMatrix k = gram(inputs, hyper.kernel);

    MsvrModel model;
    model.train_inputs = inputs;
    model.hyper = hyper;
    model.beta = Eigen::MatrixXd::Zero(n, outputs);
    model.intercept = Eigen::VectorXd::Zero(outputs);
    auto& diag = model.diagnostics;

    Eigen::MatrixXd k_beta = Eigen::MatrixXd::Zero(n, outputs);
    Eigen::MatrixXd resid = targets;
    Eigen::VectorXd u = resid.rowwise().norm();
    Eigen::VectorXd a = irwls_weights(u, hyper.epsilon, hyper.C);
    double obj = hyper.C * loss_sum(u, hyper.epsilon);
    diag.objective_trace.push_back(obj);

    if ((a.array() == 0.0).all()) {
        // Every residual is already inside the tube, so (0, 0) has zero
        // objective. Prefer the centered intercept when it is equally optimal.
        const Eigen::VectorXd means = targets.colwise().mean().transpose();
        Eigen::MatrixXd centered = targets.rowwise() - means.transpose();
        if (loss_sum(centered.rowwise().norm(), hyper.epsilon) == 0.0) model.intercept = means;
        diag.objective = 0.0;
        diag.termination = Termination::ZeroLoss;
        return model;
    }

    Eigen::MatrixXd& beta = model.beta;
    Eigen::VectorXd& b = model.intercept;
    diag.termination = Termination::MaxIterations;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        Eigen::MatrixXd beta_s;
        Eigen::VectorXd b_s;
        if ((a.array() > 0.0).any()) {
            auto sol = solve_weighted_system(k, a, targets, opts.jitter);
            diag.jitter_applied = diag.jitter_applied || sol.jitter_applied;
            beta_s = std::move(sol.beta);
            b_s = std::move(sol.intercept);
        } else {
            // No sample outside the tube: the subproblem only penalizes |w|.
            beta_s = Eigen::MatrixXd::Zero(n, outputs);
            b_s = b;
        }

        const Eigen::MatrixXd dir_beta = beta_s - beta;
        const Eigen::VectorXd dir_b = b_s - b;
        if (dir_beta.isZero(0.0) && dir_b.isZero(0.0)) {
            diag.termination = Termination::Converged;
            break;
        }
        const Eigen::MatrixXd k_dir = k.entries() * dir_beta;
        Eigen::MatrixXd resid_dir = k_dir;
        resid_dir.rowwise() += dir_b.transpose();

        const double n0 = beta.cwiseProduct(k_beta).sum();
        const double n1 = beta.cwiseProduct(k_dir).sum();
        const double n2 = dir_beta.cwiseProduct(k_dir).sum();

        double eta = 1.0;
        double candidate_obj = obj;
        Eigen::MatrixXd candidate_resid;
        Eigen::VectorXd candidate_u;
        bool accepted = false;
        while (eta >= opts.min_step) {
            candidate_resid = resid - eta * resid_dir;
            candidate_u = candidate_resid.rowwise().norm();
            const double norm = std::max(0.0, 0.5 * (n0 + 2.0 * eta * n1 + eta * eta * n2));
            candidate_obj = norm + hyper.C * loss_sum(candidate_u, hyper.epsilon);
            if (candidate_obj < obj) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            diag.termination = Termination::StepUnderflow;
            break;
        }

        beta += eta * dir_beta;
        b += eta * dir_b;
        k_beta += eta * k_dir;
        resid = std::move(candidate_resid);
        u = std::move(candidate_u);
        a = irwls_weights(u, hyper.epsilon, hyper.C);
        const double decrease = (obj - candidate_obj) / (1.0 + obj);
        obj = candidate_obj;
        diag.objective_trace.push_back(obj);
        diag.iterations = iter;
        if (!std::isfinite(obj)) throw NumericError("fit: objective became non-finite");

        if (observer) {
            IrwlsState state;
            state.iteration = iter;
            state.beta = &beta;
            state.intercept = &b;
            state.residual_norms = &u;
            state.weights = &a;
            state.objective = obj;
            state.step_size = eta;
            observer(state);
        }
        if (decrease < opts.tolerance) {
            diag.termination = Termination::Converged;
            break;
        }
    }
    diag.objective = obj;
    return model;
}

MsvrModel fit(const EmbeddedDataset& data, const Hyperparams& hyper, const SolverOptions& opts,
              const IrwlsObserver& observer) {
    return fit(data.inputs, data.outputs, hyper, opts, observer);
}

Eigen::MatrixXd predict(const MsvrModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != model.input_dim())
        throw InputError("predict: input dimension " + std::to_string(inputs.cols()) + " does not match model (" +
                         std::to_string(model.input_dim()) + ")");
    Eigen::MatrixXd out = gram(inputs, model.train_inputs, model.hyper.kernel).entries() * model.beta;
    out.rowwise() += model.intercept.transpose();
    return out;
}

std::string model_to_json(const MsvrModel& model) {
    nlohmann::json j;
    j["format"] = "msvr-model";
    j["version"] = 1;
    j["beta"] = detail::to_json(model.beta);
    j["intercept"] = detail::to_json(model.intercept);
    j["train_inputs"] = detail::to_json(model.train_inputs);
    j["hyper"] = {{"C", model.hyper.C},
                  {"epsilon", model.hyper.epsilon},
                  {"kernel",
                   {{"kind", model.hyper.kernel.kind == KernelKind::Rbf ? "rbf" : "linear"},
                    {"gamma", model.hyper.kernel.gamma}}}};
    const auto& d = model.diagnostics;
    j["diagnostics"] = {{"objective", d.objective},
                        {"iterations", d.iterations},
                        {"termination", std::string(to_string(d.termination))},
                        {"objective_trace", d.objective_trace},
                        {"jitter_applied", d.jitter_applied}};
    return j.dump(1);
}

MsvrModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != "msvr-model") throw InputError("not an msvr-model document");
    try {
        MsvrModel m;
        m.beta = detail::matrix_from_json(j.at("beta"), static_cast<Eigen::Index>(j.at("intercept").size()));
        m.intercept = detail::vector_from_json(j.at("intercept"));
        m.train_inputs = detail::matrix_from_json(j.at("train_inputs"));
        const auto& h = j.at("hyper");
        m.hyper.C = h.at("C").get<double>();
        m.hyper.epsilon = h.at("epsilon").get<double>();
        const auto kind = h.at("kernel").at("kind").get<std::string>();
        if (kind == "rbf")
            m.hyper.kernel.kind = KernelKind::Rbf;
        else if (kind == "linear")
            m.hyper.kernel.kind = KernelKind::Linear;
        else
            throw InputError("unknown kernel kind '" + kind + "'");
        m.hyper.kernel.gamma = h.at("kernel").at("gamma").get<double>();
        const auto& d = j.at("diagnostics");
        m.diagnostics.objective = d.at("objective").get<double>();
        m.diagnostics.iterations = d.at("iterations").get<int>();
        m.diagnostics.termination = termination_from_string(d.at("termination").get<std::string>());
        m.diagnostics.objective_trace = d.at("objective_trace").get<std::vector<double>>();
        m.diagnostics.jitter_applied = d.at("jitter_applied").get<bool>();
        if (m.beta.rows() != m.train_inputs.rows() || m.beta.cols() != m.intercept.size())
            throw InputError("model document has inconsistent shapes");
        m.hyper.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const MsvrModel& model, const std::string& path) {
    detail::write_text_file(path, model_to_json(model));
}

MsvrModel load_model(const std::string& path) { return model_from_json(detail::read_text_file(path)); }

} // namespace msvr
