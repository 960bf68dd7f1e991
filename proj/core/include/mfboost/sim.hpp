#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mfboost/controller.hpp"
#include "mfboost/plant.hpp"

namespace mfboost {

/// Raised when the integration produces a non-finite state.
class SimulationAbort : public std::runtime_error {
public:
    SimulationAbort(const std::string& what, double time);
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct ConstantReference {
    double level = 24.0;
    bool operator==(const ConstantReference&) const = default;
};

/// First-order approach vf + (v0 - vf) exp(-t / tau).
struct ExponentialReference {
    double v0 = 12.0;
    double vf = 24.0;
    double tau = 0.01;
    bool operator==(const ExponentialReference&) const = default;
};

using ReferenceSpec = std::variant<ConstantReference, ExponentialReference>;

double reference_at(const ReferenceSpec& spec, double t);

struct LoadEvent {
    double time;
    double resistance;
    bool operator==(const LoadEvent&) const = default;
};

struct Scenario {
    BoostParams plant;
    IpiConfig controller;
    ReferenceSpec reference = ConstantReference{};
    std::vector<LoadEvent> events;
    double t_end = 0.1;
    PlantState x0{0.0, 12.0};
    int substeps_per_period = 20;

    bool operator==(const Scenario&) const = default;
};

std::vector<Violation> check(const Scenario& scenario);
void validate(const Scenario& scenario);

struct TimeSeriesRecord {
    double t;
    double v_ref;
    double v_out;
    double i_l;
    double duty;
    ConductionMode mode;
    double resistance;

    bool operator==(const TimeSeriesRecord&) const = default;
};

/// Classical RK4 step for the averaged plant; i_L is clipped at zero after
/// the update. `derivative(state, t)` returns (di_L/dt, dv_C/dt).
template <class Derivative>
PlantState rk4_step(Derivative&& derivative, const PlantState& x, double t, double h) {
    auto axpy = [](const PlantState& a, double s, const PlantState& k) {
        return PlantState{a.inductor_current + s * k.inductor_current,
                          a.capacitor_voltage + s * k.capacitor_voltage};
    };
    auto checked = [t](const PlantState& k) {
        if (!std::isfinite(k.inductor_current) || !std::isfinite(k.capacitor_voltage)) {
            throw SimulationAbort("non-finite plant derivative", t);
        }
        return k;
    };
    const PlantState k1 = checked(derivative(x, t));
    const PlantState k2 = checked(derivative(axpy(x, h / 2, k1), t + h / 2));
    const PlantState k3 = checked(derivative(axpy(x, h / 2, k2), t + h / 2));
    const PlantState k4 = checked(derivative(axpy(x, h, k3), t + h));
    PlantState next{
        x.inductor_current +
            h / 6 * (k1.inductor_current + 2 * k2.inductor_current + 2 * k3.inductor_current +
                     k4.inductor_current),
        x.capacitor_voltage +
            h / 6 * (k1.capacitor_voltage + 2 * k2.capacitor_voltage + 2 * k3.capacitor_voltage +
                     k4.capacitor_voltage),
    };
    if (next.inductor_current < 0.0) next.inductor_current = 0.0;
    return next;
}

/// Number of control periods covering [0, t_end].
std::size_t period_count(double t_end, double tc);

struct ClosedLoopResult {
    std::vector<TimeSeriesRecord> records;
    ControllerState controller;  ///< state after the final sample
    std::size_t integral_holds = 0;
    std::size_t saturated_steps = 0;
};

/// Sampled-data loop: each period the controller samples v_C, the duty is
/// held while the averaged model is integrated with RK4 sub-steps. Load
/// events take effect from the first period with t_k >= event time.
ClosedLoopResult simulate_closed_loop(const Scenario& scenario);

std::vector<TimeSeriesRecord> run_closed_loop(const Scenario& scenario);

/// Fixed-duty integration of the averaged model, one record per switching
/// period. There is no reference; v_ref is recorded as 0.
std::vector<TimeSeriesRecord> run_open_loop(const BoostParams& params, double d1, double t_end,
                                            const PlantState& x0, int substeps);

struct Summary {
    double steady_state_error;         ///< mean relative error over the final 10 %
    std::optional<double> settled_at;  ///< nullopt: never held the band to the end
    double max_deviation;              ///< after the last event (or from start)
    std::vector<double> event_times;
    std::vector<double> event_deviation;  ///< per event, up to the next one
    std::size_t mode_switches;
};

/// Load events are recovered from changes of the recorded resistance.
/// Throws std::invalid_argument for an empty series or band outside (0, 1).
Summary metrics(std::span<const TimeSeriesRecord> series, double band);

}  // namespace mfboost
