#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gearopt/coefficients.hpp"
#include "gearopt/drivecycle.hpp"
#include "gearopt/motor.hpp"
#include "gearopt/vehicle.hpp"

namespace gearopt {

struct RatioBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct BoundsOptions {
    // Let braking steps constrain the ratio from below by |T_mw|/T_max as
    // well. Off by default: torque beyond the motor's capability during
    // braking goes to the friction brakes.
    bool strict_torque = false;
};

// Per-step admissible ratio interval. Moving steps: lower = max(0,
// |T_mw|/T_max on traction steps, gamma_cvt_min for CVT), upper =
// min(omega_max*r_w/v, gamma_cvt_max for CVT). Stationary steps get (0, inf)
// for FGT/MGT and the CVT limits for a CVT. Throws InfeasibleError naming the
// first step with lower > upper.
RatioBounds per_step_bounds(const EmDemand& demand, const MotorLimits& limits,
                            const TransmissionSpec& spec, const DriveCycle& cycle, double r_w,
                            BoundsOptions options = {});

void apply_bounds(StepCoefficients& coeffs, const RatioBounds& bounds);

// Lowest ratio satisfying the stand-still towing requirement on slope alpha0.
double towing_ratio_floor(const VehicleParams& params, double vehicle_mass, const MotorLimits& limits,
                          double eta);

// Minimiser over gamma in [lo, hi] of the aggregated loss with coefficients
// (c0, c1, c2) in `form`. When the loss does not depend on gamma the
// fallback (clamped) is returned. Throws InfeasibleError if lo > hi or the
// minimiser is unbounded.
double clamp_minimizer(LossForm form, double c0, double c1, double c2, double lo, double hi,
                       double fallback);

struct Cost {
    double J = 0.0;      // loss + shift, J
    double loss = 0.0;   // J
    double shift = 0.0;  // J
};

struct GearTrajectory {
    std::vector<int> gear;  // 0-based gear index per step
    int shifts = 0;

    static int count_shifts(std::span<const int> gear) noexcept;
};

// Sum of step losses times dt plus c_shift per gear change.
Cost objective(const GearTrajectory& trajectory, std::span<const double> ratios,
               const StepCoefficients& coeffs, double c_shift);
// Ratio trajectory without shift cost (CVT, FGT).
Cost objective(std::span<const double> gamma, const StepCoefficients& coeffs);

struct DesignSolution {
    TransmissionSpec spec;
    std::vector<double> ratios;     // FGT: one, MGT: n_gears (ascending), CVT: empty
    std::vector<double> gamma;      // ratio in use at every step
    std::vector<int> gear;          // MGT only, 0-based
    std::vector<double> step_loss;  // model loss per step, W
    int shifts = 0;
    Cost cost;
    double mechanical_energy = 0.0;  // sum P_m dt, J
    double total_energy = 0.0;       // sum (P_m + P_loss) dt, J
    double vehicle_mass = 0.0;       // kg
    double p_max = 0.0;              // W
    double eta = 1.0;                // transmission efficiency used
    double scale = 1.0;
    double towing_floor = 0.0;
    int iterations = 0;
    std::vector<double> history;     // J after every half step (MGT)
};

DesignSolution optimize_cvt(const StepCoefficients& coeffs);

// Closed-form single ratio over the aggregated coefficients. Throws
// InfeasibleError naming the binding constraints when the interval is empty.
DesignSolution optimize_fgt(const StepCoefficients& coeffs, double towing_floor);

// Optimal gear per step for fixed ratios. With c_shift = 0 this is the
// per-step argmin; otherwise an exact value recursion over the gear state.
// Ties go to the lowest gear index. `initial_gear` is the gear engaged before
// the first step; a change into the first step's gear is then charged.
GearTrajectory gearshift_dp(std::span<const double> ratios, const StepCoefficients& coeffs,
                            double c_shift, std::optional<int> initial_gear = std::nullopt);

// Closed-form ratio per gear for a fixed trajectory. The towing floor binds
// the gear holding the largest previous ratio; unused gears keep their
// previous value.
std::vector<double> ratio_update(const GearTrajectory& trajectory, const StepCoefficients& coeffs,
                                 double towing_floor, std::span<const double> previous);

// Geometric spread between the ratio a top-speed step allows and the ratio
// the heaviest torque step (or the towing floor) demands.
std::vector<double> initial_ratios(int n_gears, const StepCoefficients& coeffs, double towing_floor);

struct MgtOptions {
    double epsilon = 1e-6;
    int max_iterations = 500;
    std::vector<double> init;  // empty: initial_ratios(), plus restarts if multi_start
    bool multi_start = true;
};

// Alternates gearshift_dp and ratio_update until |J - J_prev| <= eps*|J|.
// Without init, also descends from geometric spreads between quantiles of
// the per-step CVT optima and keeps the lowest J (first start wins ties);
// history and iterations describe the returned run. The largest start ratio
// is raised to the towing floor when below it.
// Throws InternalError if a half step increases J beyond 1e-9 relative.
DesignSolution optimize_mgt(int n_gears, const StepCoefficients& coeffs, double c_shift,
                            double towing_floor, const MgtOptions& options = {});

} // namespace gearopt
