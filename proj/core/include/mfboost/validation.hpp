#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfboost {

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

struct ValidationOptions {
    /// Relative perturbation applied to alpha on the implementation side of
    /// the control-law check only. Nonzero values exist to prove the check
    /// can fail.
    double alpha_perturbation = 0.0;
    std::uint64_t seed = 20130501;
};

/// Cross-model oracle checks: CCM and DCM equilibria against the static
/// relations, averaged model against the switched circuit, RK4 order, and
/// the discrete control law against a direct evaluation.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

/// Least-squares slope of log(error) against log(step) for the averaged
/// model at fixed duty, using `levels` successive halvings of the sub-step
/// starting from one step per switching period.
double rk4_observed_order(int levels = 4);

}  // namespace mfboost
