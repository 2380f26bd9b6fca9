#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "msvr/error.hpp"
#include "msvr/solver.hpp"
#include "oracles.hpp"

using namespace msvr;

namespace {

struct Instance {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
};

Instance random_instance(std::mt19937_64& rng, int n, int d, int h) {
    std::normal_distribution<double> nd;
    Instance in{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, h)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) in.x(i, j) = nd(rng);
        for (int j = 0; j < h; ++j) in.y(i, j) = std::sin(in.x(i, 0) + j) + 0.3 * nd(rng);
    }
    return in;
}

Hyperparams hyper(double C, double eps, double gamma) {
    Hyperparams h;
    h.C = C;
    h.epsilon = eps;
    h.kernel.gamma = gamma;
    return h;
}

} // namespace

TEST_CASE("quadratic epsilon-insensitive loss") {
    CHECK(quad_eps_loss(0.5, 1.0) == 0.0);
    CHECK(quad_eps_loss(1.0, 0.0) == 1.0);
    CHECK(quad_eps_loss(3.0, 1.0) == 4.0);
    CHECK_THROWS_AS(quad_eps_loss(-0.1, 1.0), InputError);
}

TEST_CASE("irwls weights") {
    CHECK(irwls_weights(Eigen::Vector2d(0.1, 0.2), 0.5, 3.0) == Eigen::Vector2d(0, 0));
    Eigen::VectorXd u(1);
    u << 2.0;
    CHECK(irwls_weights(u, 1.0, 1.0)[0] == 1.0);

    // a_i u_i equals C dL/du; checked against a central difference of the loss.
    const double C = 2.5, eps = 0.3;
    for (double ui : {0.31, 0.5, 1.0, 4.2}) {
        Eigen::VectorXd uv(1);
        uv << ui;
        const double step = 1e-6;
        const double fd = C * (quad_eps_loss(ui + step, eps) - quad_eps_loss(ui - step, eps)) / (2 * step);
        CHECK(std::abs(irwls_weights(uv, eps, C)[0] * ui - fd) < 1e-6);
    }

    // Zero residual with eps == 0 takes the limiting value 2C (kernel ridge behaviour).
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    CHECK(irwls_weights(zero, 0.0, 1.5)[0] == 3.0);
    CHECK_THROWS_AS(irwls_weights(-zero.array() - 1.0, 0.0, 1.0), InputError);
}

TEST_CASE("objective examples") {
    std::mt19937_64 rng(3);
    auto in = random_instance(rng, 4, 2, 2);
    const auto h = hyper(3.0, 0.2, 0.8);

    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(4, 2);
    EmbeddedDataset flat;
    flat.inputs = in.x;
    flat.outputs = Eigen::MatrixXd::Zero(4, 2);
    CHECK(objective(zeros, Eigen::VectorXd::Zero(2), flat, h) == 0.0);

    EmbeddedDataset tube;
    tube.inputs = in.x;
    tube.outputs = Eigen::MatrixXd::Constant(4, 2, 1.0);
    tube.outputs(0, 0) += 0.05;
    const Eigen::VectorXd means = tube.outputs.colwise().mean().transpose();
    CHECK(objective(zeros, means, tube, h) == 0.0);

    Eigen::MatrixXd beta(4, 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) beta(i, j) = std::normal_distribution<double>()(rng);
    Eigen::VectorXd b(2);
    b << 0.3, -0.2;
    EmbeddedDataset data;
    data.inputs = in.x;
    data.outputs = in.y;
    const double got = objective(beta, b, data, h);
    const double want = oracle::msvr_objective(beta, b, in.x, in.y, h.C, h.epsilon, h.kernel.gamma);
    CHECK(std::abs(got - want) < 1e-10);

    Eigen::MatrixXd bad = beta;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(objective(bad, b, data, h), NumericError);
}

TEST_CASE("weighted system") {
    std::mt19937_64 rng(5);
    const KernelConfig kc{KernelKind::Rbf, 0.7};

    SUBCASE("constant targets give beta = 0, b = c") {
        auto in = random_instance(rng, 6, 2, 1);
        const auto sol = solve_weighted_system(gram(in.x, kc), Eigen::VectorXd::Constant(6, 1.7),
                                               Eigen::MatrixXd::Constant(6, 1, 2.5));
        CHECK(sol.beta.cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(sol.intercept[0] - 2.5) < 1e-8);
    }

    SUBCASE("solution satisfies the assembled system") {
        auto in = random_instance(rng, 3, 2, 1);
        const auto k = gram(in.x, kc);
        Eigen::Vector3d a(0.5, 2.0, 1.2);
        const auto sol = solve_weighted_system(k, a, in.y);
        // Plug back: (K + D^-1) beta + b 1 = y ; a^T K beta + (1^T a) b = a^T y.
        Eigen::VectorXd top = (k.entries() + Eigen::MatrixXd(a.cwiseInverse().asDiagonal())) * sol.beta.col(0);
        top.array() += sol.intercept[0];
        const double bottom = a.dot(k.entries() * sol.beta.col(0)) + a.sum() * sol.intercept[0];
        Eigen::VectorXd res(4);
        res << top - in.y.col(0), bottom - a.dot(in.y.col(0));
        CHECK(res.norm() < 1e-8);
    }

    SUBCASE("inactive rows get zero coefficients") {
        auto in = random_instance(rng, 5, 2, 2);
        Eigen::VectorXd a(5);
        a << 0.0, 1.0, 0.0, 2.0, 0.5;
        const auto sol = solve_weighted_system(gram(in.x, kc), a, in.y);
        CHECK(sol.beta.row(0).isZero(0.0));
        CHECK(sol.beta.row(2).isZero(0.0));
    }

    SUBCASE("outputs decouple for fixed weights") {
        auto in = random_instance(rng, 5, 2, 2);
        const auto k = gram(in.x, kc);
        Eigen::VectorXd a(5);
        a << 0.3, 1.0, 0.9, 2.0, 0.5;
        const auto joint = solve_weighted_system(k, a, in.y);
        for (int j = 0; j < 2; ++j) {
            const auto single = solve_weighted_system(k, a, in.y.col(j));
            CHECK((joint.beta.col(j) - single.beta.col(0)).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(std::abs(joint.intercept[j] - single.intercept[0]) < 1e-10);
        }
    }

    SUBCASE("duplicate inputs trigger jitter instead of failure") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
        Eigen::MatrixXd y(4, 1);
        y << 1, 2, 3, 4;
        // Huge weights make D^-1 negligible so K_AA (all ones) dominates.
        const auto sol = solve_weighted_system(gram(x, kc), Eigen::VectorXd::Constant(4, 1e20), y);
        CHECK(sol.jitter_applied);
        CHECK(sol.beta.allFinite());

        // Starting from all-zero targets inside the tube never needs a solve.
        const auto m = fit(x, Eigen::MatrixXd::Zero(4, 1), hyper(1.0, 0.1, 1.0));
        CHECK(m.diagnostics.termination == Termination::ZeroLoss);
    }

    SUBCASE("no active weights is an input error") {
        auto in = random_instance(rng, 3, 1, 1);
        CHECK_THROWS_AS(solve_weighted_system(gram(in.x, kc), Eigen::VectorXd::Zero(3), in.y), InputError);
    }
}

TEST_CASE("fit: targets inside the tube") {
    std::mt19937_64 rng(9);
    auto in = random_instance(rng, 8, 2, 2);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(8, 2, 3.0);
    std::uniform_real_distribution<double> ud(-0.05, 0.05);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 2; ++j) y(i, j) += ud(rng);
    const auto h = hyper(10.0, 0.2, 1.0);
    const auto m = fit(in.x, y, h);
    // Any intercept keeping every target inside the tube is optimal; the
    // solver lands on one with (numerically) zero objective.
    CHECK(m.beta.cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::VectorXd means = y.colwise().mean().transpose();
    CHECK((m.intercept - means).norm() < h.epsilon);
    CHECK(m.diagnostics.objective < 1e-10);

    const Eigen::MatrixXd pred = predict(m, in.x);
    for (int i = 0; i < 8; ++i) CHECK((pred.row(i).transpose() - means).norm() < h.epsilon);
}

TEST_CASE("fit matches a derivative-free minimizer on the desk instance") {
    std::mt19937_64 rng(2024);
    auto in = random_instance(rng, 8, 2, 1);
    const auto h = hyper(10.0, 0.1, 1.0);
    const auto m = fit(in.x, in.y, h);
    const double bf = oracle::brute_force_msvr_min(in.x, in.y.col(0), h.C, h.epsilon, h.kernel.gamma);
    CHECK(std::abs(m.diagnostics.objective - bf) < 1e-4);
    CHECK(m.diagnostics.objective <= objective(Eigen::MatrixXd::Zero(8, 1), Eigen::VectorXd::Zero(1),
                                               gram(in.x, h.kernel), in.y, h));
}

TEST_CASE("fit invariants on random instances") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ud(0, 1);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + trial % 12, d = 1 + trial % 3, hdim = 1 + trial % 4;
        auto in = random_instance(rng, n, d, hdim);
        const auto h = hyper(0.1 + 20 * ud(rng), 0.5 * ud(rng), 0.1 + 2 * ud(rng));
        bool weights_ok = true;
        const auto m = fit(in.x, in.y, h, {}, [&](const IrwlsState& s) {
            const Eigen::VectorXd expect = irwls_weights(*s.residual_norms, h.epsilon, h.C);
            weights_ok = weights_ok && (expect.array() == s.weights->array()).all();
            for (Eigen::Index i = 0; i < s.residual_norms->size(); ++i)
                if (((*s.residual_norms)[i] < h.epsilon) != ((*s.weights)[i] == 0.0)) weights_ok = false;
        });
        CHECK(weights_ok);
        const auto& tr = m.diagnostics.objective_trace;
        for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr[k] <= tr[k - 1] + 1e-12);
        CHECK(std::isfinite(m.diagnostics.objective));
        CHECK(m.diagnostics.objective >= 0.0);
        CHECK(m.beta.rows() == in.x.rows());
        CHECK(m.intercept.size() == m.beta.cols());
        CHECK(std::abs(m.diagnostics.objective - objective(m.beta, m.intercept, gram(in.x, h.kernel), in.y, h)) <
              1e-9 * (1 + m.diagnostics.objective));
    }
}

TEST_CASE("epsilon = 0 reduces to kernel ridge regression") {
    std::mt19937_64 rng(12);
    auto in = random_instance(rng, 7, 2, 2);
    const auto h = hyper(4.0, 0.0, 0.9);
    const auto m = fit(in.x, in.y, h);
    // Ridge stationarity with intercept: beta = 2C (y - K beta - b), sum(beta) = 0.
    const auto k = gram(in.x, h.kernel);
    Eigen::MatrixXd e = in.y - k.entries() * m.beta;
    e.rowwise() -= m.intercept.transpose();
    CHECK((m.beta - 2.0 * h.C * e).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.beta.colwise().sum().cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(31);
    auto in = random_instance(rng, 9, 2, 3);
    const auto h = hyper(5.0, 0.15, 0.6);
    const auto m = fit(in.x, in.y, h);
    std::vector<int> perm{4, 0, 8, 2, 6, 1, 7, 3, 5};
    Eigen::MatrixXd xp(9, 2), yp(9, 3);
    for (int i = 0; i < 9; ++i) {
        xp.row(i) = in.x.row(perm[static_cast<std::size_t>(i)]);
        yp.row(i) = in.y.row(perm[static_cast<std::size_t>(i)]);
    }
    const auto mp = fit(xp, yp, h);
    for (int i = 0; i < 9; ++i)
        CHECK((mp.beta.row(i) - m.beta.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff() < 1e-8);
    auto probe = random_instance(rng, 5, 2, 1).x;
    CHECK((predict(m, probe) - predict(mp, probe)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("predict") {
    MsvrModel m;
    m.train_inputs = Eigen::MatrixXd::Zero(3, 2);
    m.beta = Eigen::MatrixXd::Zero(3, 2);
    m.intercept = Eigen::Vector2d(1.5, -2.0);
    Eigen::MatrixXd probe = Eigen::MatrixXd::Random(4, 2);
    const auto out = predict(m, probe);
    for (int r = 0; r < 4; ++r) CHECK(out.row(r) == Eigen::RowVector2d(1.5, -2.0));
    CHECK_THROWS_AS(predict(m, Eigen::MatrixXd::Zero(1, 3)), InputError);

    MsvrModel one;
    one.train_inputs = Eigen::MatrixXd::Constant(1, 1, 0.4);
    one.beta = Eigen::MatrixXd::Constant(1, 1, 2.25);
    one.intercept = Eigen::VectorXd::Constant(1, -0.5);
    CHECK(predict(one, one.train_inputs)(0, 0) == 2.25 * 1.0 - 0.5);
}

TEST_CASE("fit input errors") {
    const auto h = hyper(1.0, 0.1, 1.0);
    CHECK_THROWS_AS(fit(Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 1), h), InputError);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 1);
    y(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit(x, y, h), InputError);
    CHECK_THROWS_AS(fit(x, Eigen::MatrixXd::Zero(2, 1), h), InputError);
    CHECK_THROWS_AS(fit(x, Eigen::MatrixXd::Zero(3, 1), hyper(0.0, 0.1, 1.0)), InputError);
}

TEST_CASE("model persistence is bit-faithful") {
    std::mt19937_64 rng(44);
    auto in = random_instance(rng, 6, 3, 2);
    const auto m = fit(in.x, in.y, hyper(3.3, 0.12, 0.77));
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.beta == m.beta);
    CHECK(back.intercept == m.intercept);
    CHECK(back.train_inputs == m.train_inputs);
    CHECK(back.hyper.C == m.hyper.C);
    CHECK(back.hyper.epsilon == m.hyper.epsilon);
    CHECK(back.hyper.kernel.gamma == m.hyper.kernel.gamma);
    CHECK(back.diagnostics.objective == m.diagnostics.objective);
    CHECK(back.diagnostics.objective_trace == m.diagnostics.objective_trace);

    const std::string path = "test_solver_model.json";
    save_model(m, path);
    CHECK(load_model(path).beta == m.beta);
    std::remove(path.c_str());

    CHECK_THROWS_AS(model_from_json("{\"format\":\"other\"}"), InputError);
    CHECK_THROWS_AS(model_from_json("not json"), InputError);
}
