#include "gearopt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "gearopt/error.hpp"

namespace gearopt {

SimulationReport simulate(const DesignSolution& design, const DriveCycle& cycle, const VehicleParams& params,
                          const MotorMap& base_map)
{
    cycle.validate();
    const std::size_t n = cycle.size();
    if (design.gamma.size() != n) {
        throw ValidationError("design has " + std::to_string(design.gamma.size()) + " steps, cycle has " +
                              std::to_string(n));
    }
    const MotorMap map = base_map.scaled(design.scale);
    const MotorLimits& lim = map.limits();
    const double eta = design.eta;
    const WheelDemand wheel = wheel_demand(cycle, design.vehicle_mass, params);

    SimulationReport r;
    r.shift_cost = design.cost.shift;
    r.model_loss_energy = design.cost.loss;
    for (auto* vec : {&r.t, &r.v, &r.gamma, &r.omega, &r.torque, &r.power, &r.loss_model, &r.loss_sim}) {
        vec->resize(n);
    }
    for (std::size_t t = 0; t < n; ++t) {
        const double pt = wheel.power[t];
        const double v = cycle.v[t];
        const double gamma = design.gamma[t];
        const double omega = gamma * v / params.r_w;
        double pm = pt >= 0.0 ? pt / eta : pt * eta;
        if (pm < 0.0) {
            // regenerate up to the envelope edge, friction brakes take the rest
            const double cap = std::min({-pm, lim.T_max * omega, lim.P_max});
            if (cap < -pm) {
                r.brake_energy += (pt - (-cap) / eta) * cycle.dt;
            }
            pm = -cap;
        }
        if (!map.contains(omega, pm)) {
            throw EnvelopeError("step " + std::to_string(t) + " leaves the motor envelope (omega " +
                                    std::to_string(omega) + " rad/s, power " + std::to_string(pm) + " W)",
                                t);
        }
        const double loss = map.interpolate(omega, pm);
        r.t[t] = static_cast<double>(t) * cycle.dt;
        r.v[t] = v;
        r.gamma[t] = gamma;
        r.omega[t] = omega;
        r.torque[t] = omega > 0.0 ? pm / omega : 0.0;
        r.power[t] = pm;
        r.loss_model[t] = t < design.step_loss.size() ? design.step_loss[t] : 0.0;
        r.loss_sim[t] = loss;
        r.mechanical_energy += pm * cycle.dt;
        r.loss_energy += loss * cycle.dt;
    }
    r.total_energy = r.mechanical_energy + r.loss_energy;
    return r;
}

void write_trace_csv(std::ostream& out, const SimulationReport& report)
{
    std::ostringstream os;
    os << std::setprecision(12) << "t,v,gamma,omega,T_m,P_m,P_loss_model,P_loss_sim\n";
    for (std::size_t k = 0; k < report.t.size(); ++k) {
        os << report.t[k] << ',' << report.v[k] << ',' << report.gamma[k] << ',' << report.omega[k] << ','
           << report.torque[k] << ',' << report.power[k] << ',' << report.loss_model[k] << ',' << report.loss_sim[k]
           << '\n';
    }
    out << os.str();
}

} // namespace gearopt
