#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gearopt/drivecycle.hpp"

namespace gearopt {

struct MotorLimits;

struct VehicleParams {
    double m0 = 1450.0;        // kg, base mass
    double m_g0 = 50.0;        // kg, FGT/MGT gearbox base mass
    double m_gw = 5.0;         // kg per gear
    double m_cvt = 80.0;       // kg
    double eta_fgt = 0.98;
    double eta_mgt = 0.98;
    double eta_cvt = 0.96;
    double r_w = 0.316;        // m
    double c_d = 0.29;
    double A_f = 0.725;        // m^2
    double rho_air = 1.25;     // kg/m^3
    double c_r = 0.02;
    double g = 9.81;           // m/s^2
    double alpha0 = 0.4363323129985824;  // rad (25 deg)
    double c_shift = 300.0;    // J per gear change
    double epsilon = 1e-6;     // relative J tolerance (0.0001 %)
    double rho_m = 0.9;        // kg/kW, specific motor mass
    double gamma_cvt_min = 3.0;
    double gamma_cvt_max = 20.0;

    void validate() const;
};

// File format mirrors the parameter table: angles in degrees, epsilon in
// percent. Unknown keys are rejected.
VehicleParams load_vehicle_params(std::istream& in);
VehicleParams load_vehicle_params_file(const std::string& path);
std::string vehicle_params_to_json(const VehicleParams& params);

enum class TransmissionKind { fgt, mgt, cvt };

struct TransmissionSpec {
    TransmissionKind kind = TransmissionKind::fgt;
    int n_gears = 1;
    double gamma_cvt_min = 0.0;
    double gamma_cvt_max = 0.0;

    static TransmissionSpec fgt() { return {TransmissionKind::fgt, 1, 0.0, 0.0}; }
    static TransmissionSpec mgt(int n) { return {TransmissionKind::mgt, n, 0.0, 0.0}; }
    static TransmissionSpec cvt(double lo, double hi) { return {TransmissionKind::cvt, 1, lo, hi}; }
    static TransmissionSpec cvt(const VehicleParams& p) { return cvt(p.gamma_cvt_min, p.gamma_cvt_max); }

    // "fgt", "cvt" or "mgt:N"; CVT limits come from `params`.
    static TransmissionSpec parse(const std::string& text, const VehicleParams& params);
    std::string to_string() const;

    double efficiency(const VehicleParams& p) const;
    void validate() const;
};

struct EmDemand {
    std::vector<double> power;        // P_m, W
    std::vector<double> wheel_torque; // T_m,w, N m (motor torque referred to the wheel)
    std::vector<double> brake_power;  // P_brake, W, <= 0
    std::vector<double> wheel_power;  // P_t, W, kept for bookkeeping
    double eta = 1.0;
};

// m_v = m0 + m_g + rho_m * P_m_max[kW].
double gearbox_mass(const VehicleParams& params, const TransmissionSpec& spec);
double total_mass(const VehicleParams& params, const TransmissionSpec& spec, double p_max);

// Applies transmission efficiency then regenerative saturation. Throws
// InfeasibleError when a traction step exceeds limits.P_max.
EmDemand em_demand(const WheelDemand& demand, const TransmissionSpec& spec,
                   const VehicleParams& params, const MotorLimits& limits);

// Clamps braking power at -P_max and moves the remainder to the friction
// brakes. Idempotent.
EmDemand saturate_braking(EmDemand demand, double p_max);

} // namespace gearopt
