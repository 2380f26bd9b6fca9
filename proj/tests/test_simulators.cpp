#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msvr/error.hpp"
#include "msvr/simulators.hpp"

using namespace msvr;

namespace {

// Forward Euler with the delay read at grid points; tau / dt must be integral.
std::vector<double> euler_mackey_glass(double phi0, double tau, double dt, double t_end) {
    const long lag = std::lround(tau / dt), steps = std::lround(t_end / dt);
    std::vector<double> v(static_cast<std::size_t>(steps + 1));
    v[0] = phi0;
    for (long n = 0; n < steps; ++n) {
        const double d = n - lag < 0 ? phi0 : v[static_cast<std::size_t>(n - lag)];
        v[static_cast<std::size_t>(n + 1)] =
            v[static_cast<std::size_t>(n)] + dt * (0.2 * d / (1 + std::pow(d, 10)) - 0.1 * v[static_cast<std::size_t>(n)]);
    }
    return v;
}

// Richardson-extrapolated Euler sampled at integer times 0..t_end.
std::vector<double> fine_reference(double phi0, double tau, double t_end) {
    const double dt = 1e-4;
    const auto coarse = euler_mackey_glass(phi0, tau, dt, t_end);
    const auto fine = euler_mackey_glass(phi0, tau, dt / 2, t_end);
    std::vector<double> out;
    for (int k = 0; k <= static_cast<int>(t_end); ++k)
        out.push_back(2 * fine[static_cast<std::size_t>(k) * 20000] - coarse[static_cast<std::size_t>(k) * 10000]);
    return out;
}

TimeSeries mg_unit_samples(double phi0, double tau, double dt, int length) {
    MackeyGlassConfig c;
    c.phi0 = phi0;
    c.tau = tau;
    c.dt = dt;
    c.sample_stride = static_cast<int>(std::lround(1.0 / dt));
    c.burn_in = 0;
    c.length = length;
    return mackey_glass_generate(c);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("henon map iterates") {
    const auto s1 = henon_step({0.0, 0.0});
    CHECK(s1.x == 1.0);
    CHECK(s1.y == 0.0);
    const auto s2 = henon_step(s1);
    CHECK(s2.x == 1.0 - 1.4);
    CHECK(s2.y == 0.3);

    HenonConfig c;
    c.x0 = 0;
    c.y0 = 0;
    c.burn_in = 0;
    c.length = 3;
    const auto s = henon_generate(c);
    CHECK(s.values == std::vector<double>{0.0, 1.0, 1.0 - 1.4});
}

TEST_CASE("henon benchmark rows stay on the attractor") {
    const auto row1 = henon_generate(benchmark_henon(1));
    CHECK(row1.size() == 205);
    for (double v : row1.values) CHECK(std::abs(v) < 2.0);

    for (int r = 1; r <= benchmark_rows(); ++r) {
        auto cfg = benchmark_henon(r);
        CHECK(cfg.burn_in >= 100);
        const auto s = henon_generate(cfg);
        CHECK(static_cast<int>(s.size()) == cfg.length);
        double worst = 0.0;
        for (double v : s.values) worst = std::max(worst, std::abs(v));
        CHECK(worst <= 1.5);
    }
}

TEST_CASE("henon divergence is reported") {
    HenonConfig c;
    c.x0 = 5.0;
    c.y0 = 0.0;
    c.burn_in = 0;
    c.length = 50;
    CHECK_THROWS_AS(henon_generate(c), SimulatorError);
    c.length = 0;
    CHECK_THROWS_AS(henon_generate(c), InputError);
}

TEST_CASE("mackey-glass equilibria") {
    MackeyGlassConfig c;
    c.phi0 = 0.0;
    c.length = 300;
    for (double v : mackey_glass_generate(c).values) CHECK(v == 0.0);
    c.phi0 = 1.0;
    for (double tau : {15.0, 17.0, 18.0}) {
        c.tau = tau;
        for (double v : mackey_glass_generate(c).values) CHECK(std::abs(v - 1.0) <= 1e-9);
    }
}

TEST_CASE("mackey-glass RK4 agrees with a fine Euler integration") {
    const auto rk = mg_unit_samples(1.2, 17.0, 0.1, 51);
    const auto eu = euler_mackey_glass(1.2, 17.0, 0.001, 50.0);
    double worst = 0.0;
    for (int k = 0; k <= 50; ++k) worst = std::max(worst, std::abs(rk.values[static_cast<std::size_t>(k)] - eu[static_cast<std::size_t>(k) * 1000]));
    CHECK(worst < 1e-3);
}

TEST_CASE("mackey-glass RK4 is fourth order") {
    const auto ref = fine_reference(1.2, 17.0, 50.0);
    const double e1 = max_abs_diff(mg_unit_samples(1.2, 17.0, 0.5, 51).values, ref);
    const double e2 = max_abs_diff(mg_unit_samples(1.2, 17.0, 0.25, 51).values, ref);
    const double ratio = e1 / e2;
    MESSAGE("error ratio on halving dt: " << ratio);
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("mackey-glass configuration and determinism") {
    MackeyGlassConfig c = benchmark_mackey_glass(2);
    CHECK(c.phi0 == 1.2);
    CHECK(c.tau == 15.0);
    CHECK(c.length == 246);
    const auto a = mackey_glass_generate(c);
    const auto b = mackey_glass_generate(c);
    CHECK(a.values == b.values);
    CHECK(a.size() == 246);

    c.dt = 0.3; // 15 / 0.3 = 50 is fine
    CHECK_NOTHROW(mackey_glass_generate(c));
    c.dt = 0.7;
    CHECK_THROWS_AS(mackey_glass_generate(c), InputError);
    c.dt = 0.1;
    c.tau = 0.0;
    CHECK_THROWS_AS(mackey_glass_generate(c), InputError);
    CHECK_THROWS_AS(benchmark_mackey_glass(21), InputError);
}
