#pragma once

#include <string_view>
#include <vector>

#include "mfboost/controller.hpp"

namespace mfboost {

enum class ConductionMode { ccm, dcm };

std::string_view to_string(ConductionMode mode);

/// Ideal boost converter. Defaults are the reference design (10 mH, 47 uF,
/// 10 kHz) at a 100 ohm load from a 12 V source.
struct BoostParams {
    double inductance = 10e-3;          ///< [H]
    double capacitance = 47e-6;         ///< [F]
    double resistance = 100.0;          ///< load [ohm]
    double input_voltage = 12.0;        ///< [V]
    double switching_frequency = 1e4;   ///< [Hz]

    double period() const { return 1.0 / switching_frequency; }

    bool operator==(const BoostParams&) const = default;
};

std::vector<Violation> check(const BoostParams& params);
void validate(const BoostParams& params);

/// Averaged state (<i_L>, <v_C>). Also used to carry time derivatives.
struct PlantState {
    double inductor_current = 0.0;
    double capacitor_voltage = 0.0;

    bool operator==(const PlantState&) const = default;
};

struct OffDuty {
    double d2;
    ConductionMode mode;
};

/// Off-conduction duty from the volt-second relation d2 = E d1 / (v_C - E),
/// combined with the CCM branch 1 - d1 by d2 = min(1 - d1, .).
/// Ties resolve to CCM; v_C <= E (plus 1e-9 V) always reports CCM.
OffDuty effective_off_duty(double d1, double capacitor_voltage, const BoostParams& params);

/// Off-conduction duty of the full-order averaged model, where the DCM
/// branch follows from the inductor current, d2 = 2 L fc i_L / (E d1) - d1.
/// At equilibrium it coincides with effective_off_duty.
OffDuty full_order_off_duty(double d1, const PlantState& state, const BoostParams& params);

struct PlantDerivative {
    PlantState rate;  ///< (di_L/dt, dv_C/dt)
    ConductionMode mode;
};

/// Corrected averaged model
///   di_L/dt = -(d2/L) v_C + ((d1 + d2)/L) E
///   dv_C/dt = d2/(C (d1 + d2)) i_L - v_C/(R C)
/// with d2 from full_order_off_duty and d2/(d1+d2) := 0 when d1 + d2 == 0.
PlantDerivative averaged_dynamics(const PlantState& state, double d1, const BoostParams& params);

/// V/E = 1/(1 - d1).
double ccm_static_gain(double d1);

struct DcmOperatingPoint {
    double voltage;
    bool valid;  ///< the implied d2 leaves a non-empty idle interval
};

/// Positive root of v^2 - E v - E^2 d1^2 R / (2 L fc) = 0, i.e. the DCM
/// steady state with the source-side current read as the load current v/R.
DcmOperatingPoint dcm_static_output(double d1, const BoostParams& params);

/// Advances one switching period through the on, off-conducting and idle
/// intervals of the switched circuit. The off interval ends early when i_L
/// crosses zero.
PlantState switched_step(const PlantState& state, const BoostParams& params, double d1,
                         int substeps);

struct SwitchedPeriod {
    PlantState end;
    PlantState mean;  ///< time average over the period
};

/// As switched_step, also returning the period average of both states.
SwitchedPeriod switched_period(const PlantState& state, const BoostParams& params, double d1,
                               int substeps);

}  // namespace mfboost
