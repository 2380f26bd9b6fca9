#include "msvr/simulators.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "msvr/error.hpp"

namespace msvr {

void HenonConfig::validate() const {
    if (length < 1) throw InputError("henon: length must be >= 1");
    if (burn_in < 0) throw InputError("henon: burn_in must be >= 0");
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw InputError("henon: initial state must be finite");
}

HenonState henon_step(HenonState s) { return {1.0 + s.y - 1.4 * s.x * s.x, 0.3 * s.x}; }

TimeSeries henon_generate(const HenonConfig& cfg) {
    cfg.validate();
    TimeSeries out;
    out.id = cfg.id;
    out.values.reserve(static_cast<std::size_t>(cfg.length));
    HenonState s{cfg.x0, cfg.y0};
    const long total = static_cast<long>(cfg.burn_in) + cfg.length;
    for (long step = 0; step < total; ++step) {
        if (!std::isfinite(s.x) || std::abs(s.x) > 1e6)
            throw SimulatorError("henon trajectory diverged at step " + std::to_string(step));
        if (step >= cfg.burn_in) out.values.push_back(s.x);
        s = henon_step(s);
    }
    return out;
}

void MackeyGlassConfig::validate() const {
    if (!(tau > 0.0)) throw InputError("mackey-glass: tau must be > 0");
    if (!(dt > 0.0)) throw InputError("mackey-glass: dt must be > 0");
    if (length < 1) throw InputError("mackey-glass: length must be >= 1");
    if (sample_stride < 1) throw InputError("mackey-glass: sample_stride must be >= 1");
    if (burn_in < 0) throw InputError("mackey-glass: burn_in must be >= 0");
    if (!std::isfinite(phi0)) throw InputError("mackey-glass: phi0 must be finite");
    const double ratio = tau / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw InputError("mackey-glass: tau / dt must be an integer");
}

double mackey_glass_rhs(double phi, double phi_delayed) {
    return 0.2 * phi_delayed / (1.0 + std::pow(phi_delayed, 10)) - 0.1 * phi;
}

namespace {

// Last `delay + 1` grid values and derivatives; grid indices below zero
// belong to the constant history.
class DelayLine {
public:
    DelayLine(long delay, double history) : delay_(delay), history_(history), phi_(delay + 1), dphi_(delay + 1) {}

    void store(long n, double phi, double dphi) {
        phi_[slot(n)] = phi;
        dphi_[slot(n)] = dphi;
    }

    [[nodiscard]] double value(long j) const { return j < 0 ? history_ : phi_[slot(j)]; }
    [[nodiscard]] double derivative(long j) const { return j < 0 ? 0.0 : dphi_[slot(j)]; }

    // phi at the midpoint of grid cell [j, j+1], cubic Hermite.
    [[nodiscard]] double midpoint(long j, double dt) const {
        if (j < 0) return history_;
        return 0.5 * (value(j) + value(j + 1)) + dt * (derivative(j) - derivative(j + 1)) / 8.0;
    }

    [[nodiscard]] long delay() const noexcept { return delay_; }

private:
    [[nodiscard]] std::size_t slot(long n) const { return static_cast<std::size_t>(n % (delay_ + 1)); }

    long delay_;
    double history_;
    std::vector<double> phi_;
    std::vector<double> dphi_;
};

} // namespace

TimeSeries mackey_glass_generate(const MackeyGlassConfig& cfg) {
    cfg.validate();
    const long delay = std::lround(cfg.tau / cfg.dt);
    const double dt = cfg.dt;
    DelayLine line(delay, cfg.phi0);

    TimeSeries out;
    out.id = cfg.id;
    out.values.reserve(static_cast<std::size_t>(cfg.length));
    const long samples = static_cast<long>(cfg.burn_in) + cfg.length;
    const long last_step = (samples - 1) * cfg.sample_stride;

    double phi = cfg.phi0;
    for (long n = 0;; ++n) {
        if (!std::isfinite(phi)) throw SimulatorError("mackey-glass state became non-finite at step " + std::to_string(n));
        const long j = n - delay;
        const double k1 = mackey_glass_rhs(phi, line.value(j));
        line.store(n, phi, k1);
        if (n % cfg.sample_stride == 0 && n / cfg.sample_stride >= cfg.burn_in) out.values.push_back(phi);
        if (n == last_step) break;

        const double mid_delayed = line.midpoint(j, dt);
        const double k2 = mackey_glass_rhs(phi + 0.5 * dt * k1, mid_delayed);
        const double k3 = mackey_glass_rhs(phi + 0.5 * dt * k2, mid_delayed);
        const double k4 = mackey_glass_rhs(phi + dt * k3, line.value(j + 1));
        phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

namespace {

struct BenchmarkRow {
    double henon_x0, henon_y0, mg_phi0, mg_tau;
    int sample_size;
};

constexpr std::array<BenchmarkRow, 20> kBenchmarkRows{{
    {0.1, 0.1, 1.0, 15, 205}, {0.1, 0.3, 1.2, 15, 246}, {0.1, 0.5, 1.4, 15, 297}, {0.1, 0.7, 1.6, 15, 341},
    {0.1, 0.9, 1.8, 15, 389}, {0.3, 0.1, 2.0, 15, 428}, {0.3, 0.3, 1.0, 16, 489}, {0.3, 0.5, 1.2, 16, 534},
    {0.3, 0.7, 1.4, 16, 584}, {0.3, 0.9, 1.6, 16, 648}, {0.5, 0.1, 1.8, 16, 685}, {0.5, 0.3, 2.0, 16, 718},
    {0.5, 0.5, 1.0, 17, 745}, {0.5, 0.7, 1.2, 17, 784}, {0.5, 0.9, 1.4, 17, 804}, {0.7, 0.1, 1.6, 17, 834},
    {0.7, 0.3, 1.8, 17, 879}, {0.7, 0.5, 2.0, 17, 915}, {0.7, 0.7, 1.0, 18, 957}, {0.7, 0.9, 1.2, 18, 986},
}};

const BenchmarkRow& table_row(int row) {
    if (row < 1 || row > static_cast<int>(kBenchmarkRows.size()))
        throw InputError("benchmark table row must be in 1..20, got " + std::to_string(row));
    return kBenchmarkRows[static_cast<std::size_t>(row - 1)];
}

} // namespace

int benchmark_rows() { return static_cast<int>(kBenchmarkRows.size()); }

HenonConfig benchmark_henon(int row) {
    const auto& r = table_row(row);
    // The second column is the previous x value (delay form x' = 1 - 1.4x^2 + 0.3x_prev);
    // the canonical y state is 0.3 times it. Read literally as y, 8 of 20 rows escape.
    HenonConfig c;
    c.x0 = r.henon_x0;
    c.y0 = 0.3 * r.henon_y0;
    c.length = r.sample_size;
    c.id = "henon_" + std::to_string(row);
    return c;
}

MackeyGlassConfig benchmark_mackey_glass(int row) {
    const auto& r = table_row(row);
    MackeyGlassConfig c;
    c.phi0 = r.mg_phi0;
    c.tau = r.mg_tau;
    c.length = r.sample_size;
    c.id = "mackey_glass_" + std::to_string(row);
    return c;
}

} // namespace msvr
