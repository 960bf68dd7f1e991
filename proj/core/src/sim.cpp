#include "mfboost/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfboost {

SimulationAbort::SimulationAbort(const std::string& what, double time)
    : std::runtime_error(what + " at t = " + std::to_string(time) + " s"), time_(time) {}

double reference_at(const ReferenceSpec& spec, double t) {
    if (const auto* c = std::get_if<ConstantReference>(&spec)) return c->level;
    const auto& e = std::get<ExponentialReference>(spec);
    return e.vf + (e.v0 - e.vf) * std::exp(-t / e.tau);
}

std::vector<Violation> check(const Scenario& s) {
    std::vector<Violation> out;
    for (auto& v : check(s.plant)) out.push_back({"plant." + v.key, v.message});
    for (auto& v : check(s.controller)) out.push_back({"controller." + v.key, v.message});

    if (const auto* c = std::get_if<ConstantReference>(&s.reference)) {
        if (!std::isfinite(c->level)) out.push_back({"reference.level", "level must be finite"});
    } else {
        const auto& e = std::get<ExponentialReference>(s.reference);
        if (!std::isfinite(e.v0)) out.push_back({"reference.v0", "v0 must be finite"});
        if (!std::isfinite(e.vf)) out.push_back({"reference.vf", "vf must be finite"});
        if (!std::isfinite(e.tau) || e.tau <= 0.0) {
            out.push_back({"reference.tau", "tau must be > 0"});
        }
    }

    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const auto& ev = s.events[i];
        if (!std::isfinite(ev.time) || ev.time < 0.0) {
            out.push_back({"events", "event time must be >= 0"});
        }
        if (!std::isfinite(ev.resistance) || ev.resistance <= 0.0) {
            out.push_back({"events", "event load must be > 0"});
        }
        if (i > 0 && !(ev.time > s.events[i - 1].time)) {
            out.push_back({"events", "event times must be strictly increasing"});
        }
    }

    if (!std::isfinite(s.t_end) || s.t_end < 0.0) {
        out.push_back({"sim.t_end", "t_end must be >= 0"});
    }
    if (s.substeps_per_period < 2) {
        out.push_back({"sim.substeps_per_period", "substeps_per_period must be >= 2"});
    }
    if (!std::isfinite(s.x0.inductor_current) || s.x0.inductor_current < 0.0) {
        out.push_back({"sim.x0_il", "initial inductor current must be finite and >= 0"});
    }
    if (!std::isfinite(s.x0.capacitor_voltage)) {
        out.push_back({"sim.x0_vc", "initial capacitor voltage must be finite"});
    }
    if (std::isfinite(s.controller.tc) && std::isfinite(s.plant.switching_frequency) &&
        s.plant.switching_frequency > 0.0) {
        const double period = 1.0 / s.plant.switching_frequency;
        if (std::abs(s.controller.tc - period) > 1e-9 * period) {
            out.push_back({"controller.tc", "tc must equal 1/fc"});
        }
    }
    return out;
}

void validate(const Scenario& scenario) {
    if (auto v = check(scenario); !v.empty()) {
        throw std::invalid_argument(v.front().key + ": " + v.front().message);
    }
}

std::size_t period_count(double t_end, double tc) {
    if (t_end <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(t_end / tc - 1e-9));
}

namespace {

void require_finite(const PlantState& x, double t) {
    if (!std::isfinite(x.inductor_current) || !std::isfinite(x.capacitor_voltage)) {
        throw SimulationAbort("non-finite plant state", t);
    }
}

PlantState integrate_period(PlantState x, double duty, const BoostParams& params, double t0,
                            double tc, int substeps) {
    const double h = tc / substeps;
    auto rate = [&](const PlantState& s, double) {
        return averaged_dynamics(s, duty, params).rate;
    };
    for (int j = 0; j < substeps; ++j) {
        const double t = t0 + j * h;
        x = rk4_step(rate, x, t, h);
        require_finite(x, t + h);
    }
    return x;
}

}  // namespace

ClosedLoopResult simulate_closed_loop(const Scenario& scenario) {
    validate(scenario);
    const IpiConfig& config = scenario.controller;
    const double tc = config.tc;
    const std::size_t periods = period_count(scenario.t_end, tc);

    BoostParams params = scenario.plant;
    PlantState x = scenario.x0;
    ControllerState controller = ipi_init(config, x.capacitor_voltage,
                                          reference_at(scenario.reference, 0.0), config.u_min);

    ClosedLoopResult result;
    result.records.reserve(periods + 1);
    std::size_t next_event = 0;

    for (std::size_t k = 0; k <= periods; ++k) {
        const double t = static_cast<double>(k) * tc;
        while (next_event < scenario.events.size() &&
               scenario.events[next_event].time <= t + 1e-9 * tc) {
            params.resistance = scenario.events[next_event].resistance;
            ++next_event;
        }

        auto sample = filter_output(std::move(controller), config, x.capacitor_voltage);
        const double v_ref = reference_at(scenario.reference, t);
        auto step = ipi_step(std::move(sample.state), config, sample.value, v_ref);
        controller = std::move(step.state);
        result.saturated_steps += step.saturated ? 1 : 0;
        result.integral_holds += step.integral_held ? 1 : 0;

        const PlantState at_sample = x;
        if (k < periods) {
            x = integrate_period(x, step.duty, params, t, tc, scenario.substeps_per_period);
        }
        const ConductionMode mode = averaged_dynamics(x, step.duty, params).mode;
        result.records.push_back({t, v_ref, at_sample.capacitor_voltage,
                                  at_sample.inductor_current, step.duty, mode,
                                  params.resistance});
    }
    result.controller = std::move(controller);
    return result;
}

std::vector<TimeSeriesRecord> run_closed_loop(const Scenario& scenario) {
    return simulate_closed_loop(scenario).records;
}

std::vector<TimeSeriesRecord> run_open_loop(const BoostParams& params, double d1, double t_end,
                                            const PlantState& x0, int substeps) {
    validate(params);
    if (!(d1 >= 0.0 && d1 < 1.0)) throw std::invalid_argument("duty must lie in [0, 1)");
    if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    const double tc = params.period();
    const std::size_t periods = period_count(t_end, tc);

    std::vector<TimeSeriesRecord> records;
    records.reserve(periods + 1);
    PlantState x = x0;
    for (std::size_t k = 0; k <= periods; ++k) {
        const double t = static_cast<double>(k) * tc;
        const PlantState at_sample = x;
        if (k < periods) x = integrate_period(x, d1, params, t, tc, substeps);
        records.push_back({t, 0.0, at_sample.capacitor_voltage, at_sample.inductor_current, d1,
                           averaged_dynamics(x, d1, params).mode, params.resistance});
    }
    return records;
}

Summary metrics(std::span<const TimeSeriesRecord> series, double band) {
    if (series.empty()) throw std::invalid_argument("metrics needs a non-empty series");
    if (!(band > 0.0 && band < 1.0)) throw std::invalid_argument("band must lie in (0, 1)");

    Summary summary{};
    auto deviation = [](const TimeSeriesRecord& r) { return std::abs(r.v_ref - r.v_out); };

    const double t_first = series.front().t;
    const double t_last = series.back().t;
    const double tail_start = t_last - 0.1 * (t_last - t_first);
    double error_sum = 0.0;
    std::size_t tail = 0;
    for (const auto& r : series) {
        if (r.t >= tail_start) {
            error_sum += deviation(r) / std::abs(r.v_ref);
            ++tail;
        }
    }
    summary.steady_state_error = error_sum / static_cast<double>(tail);

    std::vector<std::size_t> event_index;
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].resistance != series[i - 1].resistance) event_index.push_back(i);
        if (series[i].mode != series[i - 1].mode) ++summary.mode_switches;
    }
    for (std::size_t e = 0; e < event_index.size(); ++e) {
        const std::size_t begin = event_index[e];
        const std::size_t end = e + 1 < event_index.size() ? event_index[e + 1] : series.size();
        double worst = 0.0;
        for (std::size_t i = begin; i < end; ++i) worst = std::max(worst, deviation(series[i]));
        summary.event_times.push_back(series[begin].t);
        summary.event_deviation.push_back(worst);
    }

    const std::size_t start = event_index.empty() ? 0 : event_index.back();
    summary.max_deviation = 0.0;
    for (std::size_t i = start; i < series.size(); ++i) {
        summary.max_deviation = std::max(summary.max_deviation, deviation(series[i]));
    }

    std::size_t settle = start;
    for (std::size_t i = start; i < series.size(); ++i) {
        if (deviation(series[i]) > band * std::abs(series[i].v_ref)) settle = i + 1;
    }
    if (settle < series.size()) summary.settled_at = series[settle].t;
    return summary;
}

}  // namespace mfboost
