#pragma once

#include <string>

#include "msvr/dataset.hpp"

namespace msvr {

struct HenonConfig {
    double x0 = 0.1;
    double y0 = 0.1;
    int length = 205;
    int burn_in = 100; // states discarded before the first emitted sample
    std::string id = "henon";

    void validate() const;
};

struct HenonState {
    double x = 0.0;
    double y = 0.0;
};

// x' = 1 + y - 1.4 x^2, y' = 0.3 x
HenonState henon_step(HenonState s);

// Emits the x-coordinate of states burn_in .. burn_in + length - 1, where
// state 0 is (x0, y0).
TimeSeries henon_generate(const HenonConfig& cfg);

struct MackeyGlassConfig {
    double phi0 = 1.2; // constant history value on [-tau, 0]
    double tau = 17.0;
    int length = 205;
    double dt = 0.1;
    int sample_stride = 10; // integrator steps per emitted sample
    int burn_in = 100;      // emitted samples discarded
    std::string id = "mackey_glass";

    void validate() const;
};

// Integrates dphi/dt = 0.2 phi(t - tau) / (1 + phi(t - tau)^10) - 0.1 phi(t)
// with classical RK4; delayed values at half steps come from cubic Hermite
// interpolation over the stored grid (values and derivatives).
TimeSeries mackey_glass_generate(const MackeyGlassConfig& cfg);

double mackey_glass_rhs(double phi, double phi_delayed);

// Initial conditions and sample sizes of the bundled benchmark sets, rows 1..20.
HenonConfig benchmark_henon(int row);
MackeyGlassConfig benchmark_mackey_glass(int row);
int benchmark_rows();

} // namespace msvr
