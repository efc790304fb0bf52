#include "gearopt/vehicle.hpp"

#include <cmath>
#include <fstream>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include <json.hpp>

#include "gearopt/error.hpp"
#include "gearopt/motor.hpp"

namespace gearopt {

namespace {

constexpr double deg = std::numbers::pi / 180.0;

struct Field {
    const char* key;
    double VehicleParams::*member;
    double to_file;  // file value = member * to_file
};

// epsilon is stored in percent, alpha0 in degrees
const Field fields[] = {
    {"m0", &VehicleParams::m0, 1.0},
    {"m_cvt", &VehicleParams::m_cvt, 1.0},
    {"m_g0", &VehicleParams::m_g0, 1.0},
    {"m_gw", &VehicleParams::m_gw, 1.0},
    {"eta_cvt", &VehicleParams::eta_cvt, 1.0},
    {"eta_fgt", &VehicleParams::eta_fgt, 1.0},
    {"eta_mgt", &VehicleParams::eta_mgt, 1.0},
    {"r_w", &VehicleParams::r_w, 1.0},
    {"c_d", &VehicleParams::c_d, 1.0},
    {"A_f", &VehicleParams::A_f, 1.0},
    {"rho_air", &VehicleParams::rho_air, 1.0},
    {"c_r", &VehicleParams::c_r, 1.0},
    {"g", &VehicleParams::g, 1.0},
    {"alpha0_deg", &VehicleParams::alpha0, 1.0 / deg},
    {"c_shift", &VehicleParams::c_shift, 1.0},
    {"epsilon_percent", &VehicleParams::epsilon, 100.0},
    {"rho_m", &VehicleParams::rho_m, 1.0},
    {"gamma_cvt_min", &VehicleParams::gamma_cvt_min, 1.0},
    {"gamma_cvt_max", &VehicleParams::gamma_cvt_max, 1.0},
};

double eta_power(double value, double eta)
{
    if (value > 0.0) {
        return value / eta;
    }
    if (value < 0.0) {
        return value * eta;
    }
    return value;
}

} // namespace

void VehicleParams::validate() const
{
    for (double m : {m0, m_g0, m_gw, m_cvt, rho_m}) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw ValidationError("vehicle masses must be non-negative");
        }
    }
    for (double eta : {eta_fgt, eta_mgt, eta_cvt}) {
        if (!(eta > 0.0 && eta <= 1.0)) {
            throw ValidationError("transmission efficiencies must lie in (0, 1]");
        }
    }
    if (!(r_w > 0.0)) {
        throw ValidationError("wheel radius must be positive");
    }
    if (!(epsilon > 0.0)) {
        throw ValidationError("epsilon must be positive");
    }
    if (!(c_shift >= 0.0)) {
        throw ValidationError("shift cost must be non-negative");
    }
    if (!(c_d >= 0.0 && A_f >= 0.0 && rho_air >= 0.0 && c_r >= 0.0 && g > 0.0)) {
        throw ValidationError("resistance parameters must be non-negative");
    }
    if (!(gamma_cvt_min > 0.0 && gamma_cvt_min <= gamma_cvt_max)) {
        throw ValidationError("CVT ratio limits must satisfy 0 < min <= max");
    }
}

VehicleParams load_vehicle_params(std::istream& in)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("vehicle parameters: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("vehicle parameters must be a JSON object");
    }
    VehicleParams p;
    for (const auto& [key, value] : j.items()) {
        const Field* match = nullptr;
        for (const auto& f : fields) {
            if (key == f.key) {
                match = &f;
            }
        }
        if (!match) {
            throw ParseError("unknown vehicle parameter '" + key + "'");
        }
        if (!value.is_number()) {
            throw ParseError("vehicle parameter '" + key + "' must be a number");
        }
        p.*(match->member) = value.get<double>() / match->to_file;
    }
    p.validate();
    return p;
}

VehicleParams load_vehicle_params_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open vehicle file '" + path + "'");
    }
    return load_vehicle_params(in);
}

std::string vehicle_params_to_json(const VehicleParams& params)
{
    nlohmann::ordered_json j;
    for (const auto& f : fields) {
        // 15 significant digits hide the unit conversion's last-bit noise
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.15g", params.*(f.member) * f.to_file);
        j[f.key] = std::strtod(buf, nullptr);
    }
    return j.dump(2);
}

TransmissionSpec TransmissionSpec::parse(const std::string& text, const VehicleParams& params)
{
    if (text == "fgt") {
        return fgt();
    }
    if (text == "cvt") {
        return cvt(params);
    }
    if (text.rfind("mgt:", 0) == 0) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(text.substr(4), &used);
            if (used == text.size() - 4) {
                auto spec = mgt(n);
                spec.validate();
                return spec;
            }
        } catch (const std::logic_error&) {
        }
    }
    throw ParseError("transmission must be fgt, cvt or mgt:N, got '" + text + "'");
}

std::string TransmissionSpec::to_string() const
{
    switch (kind) {
    case TransmissionKind::fgt: return "fgt";
    case TransmissionKind::cvt: return "cvt";
    case TransmissionKind::mgt: return "mgt:" + std::to_string(n_gears);
    }
    return "?";
}

double TransmissionSpec::efficiency(const VehicleParams& p) const
{
    switch (kind) {
    case TransmissionKind::fgt: return p.eta_fgt;
    case TransmissionKind::mgt: return p.eta_mgt;
    case TransmissionKind::cvt: return p.eta_cvt;
    }
    return 1.0;
}

void TransmissionSpec::validate() const
{
    if (kind == TransmissionKind::mgt && n_gears < 1) {
        throw ValidationError("MGT needs at least one gear");
    }
    if (kind == TransmissionKind::cvt && !(gamma_cvt_min > 0.0 && gamma_cvt_min <= gamma_cvt_max)) {
        throw ValidationError("CVT ratio limits must satisfy 0 < min <= max");
    }
}

double gearbox_mass(const VehicleParams& params, const TransmissionSpec& spec)
{
    switch (spec.kind) {
    case TransmissionKind::fgt: return params.m_g0 + params.m_gw;
    case TransmissionKind::mgt: return params.m_g0 + params.m_gw * spec.n_gears;
    case TransmissionKind::cvt: return params.m_cvt;
    }
    return 0.0;
}

double total_mass(const VehicleParams& params, const TransmissionSpec& spec, double p_max)
{
    if (!(p_max > 0.0)) {
        throw ValidationError("maximum motor power must be positive");
    }
    return params.m0 + gearbox_mass(params, spec) + params.rho_m * p_max / 1000.0;
}

EmDemand em_demand(const WheelDemand& demand, const TransmissionSpec& spec, const VehicleParams& params,
                   const MotorLimits& limits)
{
    limits.validate();
    const double eta = spec.efficiency(params);
    const std::size_t n = demand.power.size();
    EmDemand out;
    out.eta = eta;
    out.wheel_power = demand.power;
    out.power.resize(n);
    out.wheel_torque.resize(n);
    out.brake_power.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        out.power[t] = eta_power(demand.power[t], eta);
        out.wheel_torque[t] = eta_power(demand.torque[t], eta);
        if (demand.power[t] > 0.0 && out.power[t] > limits.P_max) {
            throw InfeasibleError("motor underpowered for cycle: step " + std::to_string(t) + " needs " +
                                      std::to_string(out.power[t] / 1000.0) + " kW",
                                  t);
        }
    }
    return saturate_braking(std::move(out), limits.P_max);
}

EmDemand saturate_braking(EmDemand demand, double p_max)
{
    for (std::size_t t = 0; t < demand.power.size(); ++t) {
        if (demand.power[t] < -p_max) {
            const double factor = -p_max / demand.power[t];
            demand.power[t] = -p_max;
            demand.wheel_torque[t] *= factor;
            demand.brake_power[t] = demand.wheel_power[t] - demand.power[t] / demand.eta;
        }
    }
    return demand;
}

} // namespace gearopt
