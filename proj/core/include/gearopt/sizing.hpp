#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gearopt/drivecycle.hpp"
#include "gearopt/motor.hpp"
#include "gearopt/optimizer.hpp"
#include "gearopt/vehicle.hpp"

namespace gearopt {

struct DesignOptions {
    double c_shift = 0.0;
    double epsilon = 1e-6;
    BoundsOptions bounds;
    // Overrides the vehicle mass model when > 0 (used to equalise vehicles).
    double fixed_mass = 0.0;
    // Overrides the technology efficiency when > 0.
    double fixed_eta = 0.0;
};

// Full chain for one motor scale: scale the base model, compute mass,
// wheel and motor demand, ratio bounds, step coefficients, then run the
// optimizer matching `spec`. Energies and mass are filled in.
DesignSolution design_at_scale(const DriveCycle& cycle, const VehicleParams& params,
                               const TransmissionSpec& spec, const LossModel& base_model, double s,
                               const DesignOptions& options = {});

// Intermediate products of design_at_scale, exposed for the oracle and tests.
struct DesignProblem {
    double vehicle_mass = 0.0;
    double eta = 1.0;
    MotorLimits limits;
    EmDemand demand;
    StepCoefficients coeffs;
    double towing_floor = 0.0;
};

DesignProblem build_problem(const DriveCycle& cycle, const VehicleParams& params,
                            const TransmissionSpec& spec, const LossModel& base_model, double s,
                            const DesignOptions& options = {});

struct SweepRow {
    double s = 0.0;
    double p_max = 0.0;
    double mass = 0.0;
    bool feasible = false;
    std::string reason;
    DesignSolution solution;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t best = 0;  // index into rows

    const DesignSolution& best_solution() const { return rows.at(best).solution; }
};

// n_sizes uniform scales over [s_min, s_max]; infeasible sizes are recorded,
// not thrown. Best = minimum total electric energy (ties: smaller s). Throws
// InfeasibleError if no size is feasible.
SweepResult size_sweep(const TransmissionSpec& spec, const LossModel& base_model, double s_min,
                       double s_max, int n_sizes, const DriveCycle& cycle, const VehicleParams& params,
                       const DesignOptions& options = {});

// `s,P_m_max_kW,mass_kg,J_J,loss_J,total_energy_J,feasible,ratios`, ratios
// separated by ';'.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

} // namespace gearopt
