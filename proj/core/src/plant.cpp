#include "mfboost/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfboost {

namespace {

constexpr double voltage_guard = 1e-9;
constexpr double tie_tolerance = 1e-12;

void require_duty(double d1) {
    if (!(d1 >= 0.0 && d1 < 1.0)) throw std::invalid_argument("duty must lie in [0, 1)");
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

OffDuty select(double d1, double dcm_branch) {
    const double ccm_branch = 1.0 - d1;
    if (ccm_branch <= dcm_branch + tie_tolerance) return {ccm_branch, ConductionMode::ccm};
    return {std::max(dcm_branch, 0.0), ConductionMode::dcm};
}

}  // namespace

std::string_view to_string(ConductionMode mode) {
    return mode == ConductionMode::ccm ? "CCM" : "DCM";
}

std::vector<Violation> check(const BoostParams& p) {
    std::vector<Violation> out;
    if (!positive(p.inductance)) out.push_back({"l", "inductance must be > 0"});
    if (!positive(p.capacitance)) out.push_back({"c", "capacitance must be > 0"});
    if (!positive(p.resistance)) out.push_back({"r", "load resistance must be > 0"});
    if (!positive(p.input_voltage)) out.push_back({"e", "input voltage must be > 0"});
    if (!positive(p.switching_frequency)) {
        out.push_back({"fc", "switching frequency must be > 0"});
    }
    return out;
}

void validate(const BoostParams& params) {
    if (auto v = check(params); !v.empty()) throw std::invalid_argument(v.front().message);
}

OffDuty effective_off_duty(double d1, double capacitor_voltage, const BoostParams& params) {
    require_duty(d1);
    const double e = params.input_voltage;
    if (capacitor_voltage <= e + voltage_guard) return {1.0 - d1, ConductionMode::ccm};
    return select(d1, e * d1 / (capacitor_voltage - e));
}

OffDuty full_order_off_duty(double d1, const PlantState& state, const BoostParams& params) {
    require_duty(d1);
    const double e = params.input_voltage;
    if (state.capacitor_voltage <= e + voltage_guard) return {1.0 - d1, ConductionMode::ccm};
    if (d1 == 0.0) {
        // No on-interval: the diode only conducts while current is still flowing.
        if (state.inductor_current > 0.0) return {1.0, ConductionMode::ccm};
        return {0.0, ConductionMode::dcm};
    }
    const double ripple_term =
        2.0 * params.inductance * params.switching_frequency * state.inductor_current / (e * d1);
    return select(d1, ripple_term - d1);
}

PlantDerivative averaged_dynamics(const PlantState& state, double d1, const BoostParams& params) {
    const auto [d2, mode] = full_order_off_duty(d1, state, params);
    const double l = params.inductance;
    const double c = params.capacitance;
    const double r = params.resistance;
    const double e = params.input_voltage;
    const double active = d1 + d2;
    const double correction = active > 0.0 ? d2 / active : 0.0;
    return {
        {
            -(d2 / l) * state.capacitor_voltage + (active / l) * e,
            correction * state.inductor_current / c - state.capacitor_voltage / (r * c),
        },
        mode,
    };
}

double ccm_static_gain(double d1) {
    require_duty(d1);
    return 1.0 / (1.0 - d1);
}

DcmOperatingPoint dcm_static_output(double d1, const BoostParams& params) {
    require_duty(d1);
    validate(params);
    const double e = params.input_voltage;
    const double k = e * e * d1 * d1 * params.resistance /
                     (2.0 * params.inductance * params.switching_frequency);
    const double v = 0.5 * (e + std::sqrt(e * e + 4.0 * k));
    if (!(v > e)) return {v, false};
    const double d2 = e * d1 / (v - e);
    return {v, d2 < 1.0 - d1};
}

namespace {

// Piecewise-linear circuit integrated over one period with sub-steps and
// running trapezoidal averages.
class SwitchedIntegrator {
public:
    SwitchedIntegrator(const BoostParams& p, PlantState x, double h)
        : p_(p), x_(x), h_(h), tau_(p.resistance * p.capacitance) {}

    void on_interval(double duration) {
        for_each_substep(duration, [this](double dt) {
            advance(dt, [this](const PlantState& s) {
                return PlantState{p_.input_voltage / p_.inductance, -s.capacitor_voltage / tau_};
            });
        });
    }

    void off_interval(double duration) {
        for_each_substep(duration, [this](double dt) { off_substep(dt); });
    }

    PlantState end() const { return x_; }

    PlantState mean(double period) const {
        return {current_area_ / period, voltage_area_ / period};
    }

private:
    template <class Step>
    void for_each_substep(double duration, Step&& step) {
        if (duration <= 0.0) return;
        const int n = std::max(1, static_cast<int>(std::ceil(duration / h_ - 1e-9)));
        const double dt = duration / n;
        for (int i = 0; i < n; ++i) step(dt);
    }

    bool conducting(const PlantState& s) const {
        return s.inductor_current > 0.0 || p_.input_voltage > s.capacitor_voltage;
    }

    PlantState off_rate(const PlantState& s) const {
        return {(p_.input_voltage - s.capacitor_voltage) / p_.inductance,
                s.inductor_current / p_.capacitance - s.capacitor_voltage / tau_};
    }

    PlantState idle_rate(const PlantState& s) const { return {0.0, -s.capacitor_voltage / tau_}; }

    void off_substep(double dt) {
        if (!conducting(x_)) {
            advance(dt, [this](const PlantState& s) { return idle_rate(s); });
            return;
        }
        const PlantState trial = rk4(x_, dt, [this](const PlantState& s) { return off_rate(s); });
        if (trial.inductor_current >= 0.0) {
            accumulate(x_, trial, dt);
            x_ = trial;
            return;
        }
        // Zero crossing of i_L: locate it by linear interpolation, finish the
        // conducting part there and idle for the remainder.
        const double i0 = x_.inductor_current;
        const double theta = i0 / (i0 - trial.inductor_current);
        const double first = theta * dt;
        PlantState at_zero = rk4(x_, first, [this](const PlantState& s) { return off_rate(s); });
        at_zero.inductor_current = 0.0;
        accumulate(x_, at_zero, first);
        x_ = at_zero;
        const double rest = dt - first;
        if (rest > 0.0) {
            if (conducting(x_)) {
                advance(rest, [this](const PlantState& s) { return off_rate(s); });
                x_.inductor_current = std::max(x_.inductor_current, 0.0);
            } else {
                advance(rest, [this](const PlantState& s) { return idle_rate(s); });
            }
        }
    }

    template <class Rate>
    static PlantState rk4(const PlantState& x, double dt, Rate&& f) {
        auto at = [&](double s, const PlantState& k) {
            return PlantState{x.inductor_current + s * k.inductor_current,
                              x.capacitor_voltage + s * k.capacitor_voltage};
        };
        const PlantState k1 = f(x);
        const PlantState k2 = f(at(dt / 2, k1));
        const PlantState k3 = f(at(dt / 2, k2));
        const PlantState k4 = f(at(dt, k3));
        return {x.inductor_current + dt / 6 *
                                         (k1.inductor_current + 2 * k2.inductor_current +
                                          2 * k3.inductor_current + k4.inductor_current),
                x.capacitor_voltage + dt / 6 *
                                          (k1.capacitor_voltage + 2 * k2.capacitor_voltage +
                                           2 * k3.capacitor_voltage + k4.capacitor_voltage)};
    }

    template <class Rate>
    void advance(double dt, Rate&& f) {
        const PlantState next = rk4(x_, dt, f);
        accumulate(x_, next, dt);
        x_ = next;
    }

    void accumulate(const PlantState& a, const PlantState& b, double dt) {
        current_area_ += 0.5 * (a.inductor_current + b.inductor_current) * dt;
        voltage_area_ += 0.5 * (a.capacitor_voltage + b.capacitor_voltage) * dt;
    }

    const BoostParams& p_;
    PlantState x_;
    double h_;
    double tau_;
    double current_area_ = 0.0;
    double voltage_area_ = 0.0;
};

}  // namespace

SwitchedPeriod switched_period(const PlantState& state, const BoostParams& params, double d1,
                               int substeps) {
    require_duty(d1);
    validate(params);
    if (substeps < 10) throw std::invalid_argument("switched_step needs at least 10 sub-steps");
    const double period = params.period();
    SwitchedIntegrator integrator(params, state, period / substeps);
    integrator.on_interval(d1 * period);
    integrator.off_interval((1.0 - d1) * period);
    return {integrator.end(), integrator.mean(period)};
}

PlantState switched_step(const PlantState& state, const BoostParams& params, double d1,
                         int substeps) {
    return switched_period(state, params, d1, substeps).end;
}

}  // namespace mfboost
