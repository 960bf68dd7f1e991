#include "mfboost/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mfboost/controller.hpp"
#include "mfboost/plant.hpp"
#include "mfboost/scenario_io.hpp"
#include "mfboost/sim.hpp"

namespace mfboost {

namespace {

BoostParams reference_design(double resistance) {
    BoostParams p;
    p.resistance = resistance;
    return p;
}

std::string describe(double measured, double expected) {
    std::ostringstream out;
    out << "measured " << format_double(measured) << ", expected " << format_double(expected);
    return out.str();
}

CheckResult ccm_equilibrium() {
    const BoostParams p = reference_design(50.0);
    const auto run = run_open_loop(p, 0.5, 0.1, {0.0, p.input_voltage}, 20);
    const double expected = p.input_voltage * ccm_static_gain(0.5);
    const double v = run.back().v_out;
    return {"ccm_equilibrium", std::abs(v - expected) <= 0.01 * expected, describe(v, expected)};
}

CheckResult dcm_equilibrium() {
    const BoostParams p = reference_design(2000.0);
    const auto point = dcm_static_output(0.2, p);
    const auto run = run_open_loop(p, 0.2, 0.1, {0.0, p.input_voltage}, 20);
    const double v = run.back().v_out;
    const bool ok = point.valid && std::abs(v - point.voltage) <= 0.01 * point.voltage;
    return {"dcm_equilibrium", ok, describe(v, point.voltage)};
}

CheckResult averaged_vs_switched() {
    const BoostParams p = reference_design(50.0);
    const double d1 = 0.5;
    const int substeps = 20;
    const std::size_t periods = period_count(0.05, p.period());
    PlantState averaged{0.0, p.input_voltage};
    PlantState switched = averaged;
    double worst = 0.0;
    const double h = p.period() / substeps;
    auto rate = [&](const PlantState& s, double) { return averaged_dynamics(s, d1, p).rate; };
    for (std::size_t k = 0; k < periods; ++k) {
        const double t = static_cast<double>(k) * p.period();
        double area = 0.0;
        for (int j = 0; j < substeps; ++j) {
            const PlantState next = rk4_step(rate, averaged, t + j * h, h);
            area += 0.5 * (averaged.capacitor_voltage + next.capacitor_voltage) * h;
            averaged = next;
        }
        const auto cycle = switched_period(switched, p, d1, 100);
        switched = cycle.end;
        if (t >= 0.01) {
            const double mean_avg = area / p.period();
            worst = std::max(worst, std::abs(cycle.mean.capacitor_voltage - mean_avg) / mean_avg);
        }
    }
    std::ostringstream detail;
    detail << "worst relative gap " << format_double(worst);
    return {"averaged_vs_switched", worst <= 0.02, detail.str()};
}

CheckResult rk4_order() {
    const double order = rk4_observed_order(4);
    std::ostringstream detail;
    detail << "observed order " << format_double(order);
    return {"rk4_order", order >= 3.5, detail.str()};
}

CheckResult control_law(const ValidationOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> volts(0.0, 40.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> gain(0.0, 20.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        IpiConfig cfg;
        cfg.alpha = 1.0 + 99.0 * unit(rng);
        cfg.kp = gain(rng);
        cfg.ki = gain(rng);
        cfg.tc = 1e-5 + 1e-3 * unit(rng);
        cfg.u_min = 0.0;
        cfg.u_max = 1.0;
        const double y1 = volts(rng), y2 = volts(rng), y3 = volts(rng);
        const double r1 = volts(rng), r2 = volts(rng), r3 = volts(rng);
        const double u_prev = unit(rng);
        const double integral = 1e-3 * (unit(rng) - 0.5);

        // Direct evaluation with a wide clamp window so nothing saturates.
        const double e = r1 - y1;
        const double i_next = integral + e * cfg.tc;
        const double expected =
            u_prev -
            ((y1 - 2 * y2 + y3) - (r1 - 2 * r2 + r3)) / (cfg.alpha * cfg.tc * cfg.tc) +
            cfg.kp * e + cfg.ki * i_next;

        IpiConfig wide = cfg;
        wide.alpha *= 1.0 + options.alpha_perturbation;
        wide.u_min = -1e300;
        wide.u_max = 1e300;
        ControllerState state;
        state.y_hist = {y2, y3, 0.0};
        state.yref_hist = {r2, r3, 0.0};
        state.integral = integral;
        state.u_prev = u_prev;
        const double got = ipi_step(state, wide, y1, r1).duty;
        const double scale = std::max(std::abs(expected), 1.0);
        worst = std::max(worst, std::abs(got - expected) / scale);
    }
    std::ostringstream detail;
    detail << "worst relative error " << format_double(worst) << " over 1000 cases";
    return {"control_law_oracle", worst <= 1e-12, detail.str()};
}

}  // namespace

double rk4_observed_order(int levels) {
    const BoostParams p = reference_design(50.0);
    const double d1 = 0.5;
    const PlantState x0{0.9, 20.0};
    const double t_end = 0.002;
    auto final_state = [&](int substeps) {
        return run_open_loop(p, d1, t_end, x0, substeps).back();
    };
    const auto exact = final_state(1 << (levels + 6));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < levels; ++j) {
        const int substeps = 1 << j;
        const auto r = final_state(substeps);
        const double err = std::hypot(r.v_out - exact.v_out, r.i_l - exact.i_l);
        const double x = std::log(p.period() / substeps);
        const double y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = levels;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
    return {ccm_equilibrium(), dcm_equilibrium(), averaged_vs_switched(), rk4_order(),
            control_law(options)};
}

}  // namespace mfboost
