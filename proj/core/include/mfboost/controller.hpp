#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfboost {

/// Tuning of the sampled intelligent-PI law for the second-order ultra-local
/// model y'' = F + alpha * u.
struct IpiConfig {
    double alpha = 30.0;
    double kp = 2.0;
    double ki = 10.0;
    double tc = 1e-4;  ///< control period [s]
    double u_min = 0.01;
    double u_max = 0.95;
    std::size_t filter_window = 0;  ///< moving-average length, 0 disables

    bool operator==(const IpiConfig&) const = default;
};

/// A single broken invariant, keyed by the config field responsible.
struct Violation {
    std::string key;
    std::string message;
};

std::vector<Violation> check(const IpiConfig& config);

/// Throws std::invalid_argument on the first violation.
void validate(const IpiConfig& config);

/// Histories are newest-first: index 0 is y_{k-1}, index 2 is y_{k-3}.
struct ControllerState {
    std::array<double, 3> y_hist{};
    std::array<double, 3> yref_hist{};
    double integral = 0.0;
    double u_prev = 0.0;
    std::deque<double> raw_hist;

    bool operator==(const ControllerState&) const = default;
};

ControllerState ipi_init(const IpiConfig& config, double y0, double yref0, double u0);

struct IpiStep {
    double duty;
    ControllerState state;
    bool saturated;     ///< raw command was clipped
    bool integral_held; ///< conditional integration reverted the integral update
};

/// One sample of the discrete law
///   u_k = u_{k-1} - ((y_{k-1} - 2y_{k-2} + y_{k-3}) - (y*_{k-1} - 2y*_{k-2} + y*_{k-3})) / (alpha tc^2)
///         + kp e + ki I,        e = y*_{k-1} - y_{k-1},  I += e tc
/// after pushing (y, y_ref) as the newest history pair.
IpiStep ipi_step(ControllerState state, const IpiConfig& config, double y, double y_ref);

/// Mean of the newest min(window, size) samples (newest at the back).
/// Returns nullopt for window == 0, meaning the filter is disabled.
std::optional<double> moving_average(std::span<const double> samples, std::size_t window);

struct FilteredSample {
    double value;
    ControllerState state;
};

/// Records a raw measurement in the filter buffer and returns what the
/// control law should see: the moving average, or the raw value when the
/// filter is disabled.
FilteredSample filter_output(ControllerState state, const IpiConfig& config, double raw);

}  // namespace mfboost
