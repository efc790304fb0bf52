#pragma once

#include <iosfwd>
#include <vector>

#include "gearopt/drivecycle.hpp"
#include "gearopt/motor.hpp"
#include "gearopt/optimizer.hpp"
#include "gearopt/vehicle.hpp"

namespace gearopt {

struct SimulationReport {
    double total_energy = 0.0;       // sum (P_m + P_loss) dt, J
    double loss_energy = 0.0;        // J
    double mechanical_energy = 0.0;  // J
    double brake_energy = 0.0;       // friction brakes, J (<= 0)
    double shift_cost = 0.0;         // J, copied from the design
    double model_loss_energy = 0.0;  // design's predicted loss, J

    std::vector<double> t, v, gamma, omega, torque, power, loss_model, loss_sim;
};

// Replays the design on the nonlinear map. The base map is scaled by the
// design's motor scale. Traction steps must lie inside the map envelope
// (EnvelopeError naming the step otherwise); braking steps regenerate up to
// the envelope edge and the rest goes to the friction brakes.
SimulationReport simulate(const DesignSolution& design, const DriveCycle& cycle,
                          const VehicleParams& params, const MotorMap& base_map);

// `t,v,gamma,omega,T_m,P_m,P_loss_model,P_loss_sim`
void write_trace_csv(std::ostream& out, const SimulationReport& report);

} // namespace gearopt
