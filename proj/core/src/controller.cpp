#include "mfboost/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mfboost {

std::vector<Violation> check(const IpiConfig& config) {
    std::vector<Violation> out;
    if (!std::isfinite(config.alpha) || config.alpha == 0.0) {
        out.push_back({"alpha", "alpha must be nonzero"});
    }
    if (!std::isfinite(config.kp) || config.kp < 0.0) out.push_back({"kp", "kp must be >= 0"});
    if (!std::isfinite(config.ki) || config.ki < 0.0) out.push_back({"ki", "ki must be >= 0"});
    if (!std::isfinite(config.tc) || config.tc <= 0.0) out.push_back({"tc", "tc must be > 0"});
    if (!std::isfinite(config.u_min) || config.u_min < 0.0) {
        out.push_back({"u_min", "u_min must be >= 0"});
    }
    if (!std::isfinite(config.u_max) || config.u_max > 1.0) {
        out.push_back({"u_max", "u_max must be <= 1"});
    }
    if (!(config.u_min < config.u_max)) {
        out.push_back({"u_max", "u_min must be below u_max"});
    }
    return out;
}

void validate(const IpiConfig& config) {
    if (auto v = check(config); !v.empty()) throw std::invalid_argument(v.front().message);
}

ControllerState ipi_init(const IpiConfig& config, double y0, double yref0, double u0) {
    validate(config);
    if (!std::isfinite(y0) || !std::isfinite(yref0)) {
        throw std::invalid_argument("initial output and reference must be finite");
    }
    if (!(u0 >= config.u_min && u0 <= config.u_max)) {
        throw std::invalid_argument("initial duty outside [u_min, u_max]");
    }
    ControllerState state;
    state.y_hist.fill(y0);
    state.yref_hist.fill(yref0);
    state.integral = 0.0;
    state.u_prev = u0;
    return state;
}

namespace {

void push(std::array<double, 3>& hist, double value) {
    hist[2] = hist[1];
    hist[1] = hist[0];
    hist[0] = value;
}

double second_difference(const std::array<double, 3>& h) { return h[0] - 2.0 * h[1] + h[2]; }

}  // namespace

IpiStep ipi_step(ControllerState state, const IpiConfig& config, double y, double y_ref) {
    if (!std::isfinite(y) || !std::isfinite(y_ref)) {
        throw std::invalid_argument("controller input must be finite");
    }
    push(state.y_hist, y);
    push(state.yref_hist, y_ref);

    const double error = state.yref_hist[0] - state.y_hist[0];
    const double previous_integral = state.integral;
    state.integral += error * config.tc;

    const double derivative_gap =
        second_difference(state.y_hist) - second_difference(state.yref_hist);
    const double raw = state.u_prev - derivative_gap / (config.alpha * config.tc * config.tc) +
                       config.kp * error + config.ki * state.integral;

    const double duty = std::clamp(raw, config.u_min, config.u_max);
    const bool high = raw > config.u_max;
    const bool low = raw < config.u_min;
    // Conditional integration: drop this step's accumulation when it would
    // drive the command further into the active limit.
    const bool hold = (high && error > 0.0) || (low && error < 0.0);
    if (hold) state.integral = previous_integral;

    state.u_prev = duty;
    return {duty, std::move(state), high || low, hold};
}

std::optional<double> moving_average(std::span<const double> samples, std::size_t window) {
    if (window == 0) return std::nullopt;
    if (samples.empty()) throw std::invalid_argument("moving_average needs at least one sample");
    const std::size_t n = std::min(window, samples.size());
    const auto recent = samples.last(n);
    return std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(n);
}

FilteredSample filter_output(ControllerState state, const IpiConfig& config, double raw) {
    if (config.filter_window == 0) return {raw, std::move(state)};
    state.raw_hist.push_back(raw);
    while (state.raw_hist.size() > config.filter_window) state.raw_hist.pop_front();
    const std::vector<double> samples(state.raw_hist.begin(), state.raw_hist.end());
    return {*moving_average(samples, config.filter_window), std::move(state)};
}

}  // namespace mfboost
