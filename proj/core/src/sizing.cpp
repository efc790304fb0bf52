#include "gearopt/sizing.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gearopt/error.hpp"
#include "gearopt/parallel.hpp"

namespace gearopt {

namespace {

VehicleParams with_efficiency(VehicleParams p, double eta)
{
    p.eta_fgt = p.eta_mgt = p.eta_cvt = eta;
    return p;
}

} // namespace

DesignProblem build_problem(const DriveCycle& cycle, const VehicleParams& params, const TransmissionSpec& spec,
                            const LossModel& base_model, double s, const DesignOptions& options)
{
    cycle.validate();
    params.validate();
    spec.validate();
    const LossModel model = scale(base_model, s);
    const VehicleParams p = options.fixed_eta > 0.0 ? with_efficiency(params, options.fixed_eta) : params;
    DesignProblem prob;
    prob.limits = model.limits();
    prob.eta = spec.efficiency(p);
    prob.vehicle_mass = options.fixed_mass > 0.0 ? options.fixed_mass : total_mass(p, spec, prob.limits.P_max);
    const WheelDemand wheel = wheel_demand(cycle, prob.vehicle_mass, p);
    prob.demand = em_demand(wheel, spec, p, prob.limits);
    const RatioBounds bounds = per_step_bounds(prob.demand, prob.limits, spec, cycle, p.r_w, options.bounds);
    prob.coeffs = step_coefficients(model, prob.demand.power, cycle.v, p.r_w, cycle.dt);
    apply_bounds(prob.coeffs, bounds);
    prob.towing_floor = towing_ratio_floor(p, prob.vehicle_mass, prob.limits, prob.eta);
    return prob;
}

DesignSolution design_at_scale(const DriveCycle& cycle, const VehicleParams& params, const TransmissionSpec& spec,
                               const LossModel& base_model, double s, const DesignOptions& options)
{
    const DesignProblem prob = build_problem(cycle, params, spec, base_model, s, options);
    DesignSolution sol;
    switch (spec.kind) {
    case TransmissionKind::fgt:
        sol = optimize_fgt(prob.coeffs, prob.towing_floor);
        break;
    case TransmissionKind::mgt: {
        MgtOptions mo;
        mo.epsilon = options.epsilon;
        sol = optimize_mgt(spec.n_gears, prob.coeffs, options.c_shift, prob.towing_floor, mo);
        break;
    }
    case TransmissionKind::cvt:
        if (prob.towing_floor > spec.gamma_cvt_max) {
            throw InfeasibleError("towing on the reference slope needs gamma >= " + std::to_string(prob.towing_floor) +
                                  ", above the CVT limit " + std::to_string(spec.gamma_cvt_max));
        }
        sol = optimize_cvt(prob.coeffs);
        sol.towing_floor = prob.towing_floor;
        break;
    }
    sol.spec = spec;
    sol.vehicle_mass = prob.vehicle_mass;
    sol.p_max = prob.limits.P_max;
    sol.eta = prob.eta;
    sol.scale = s;
    double mech = 0.0;
    for (double pm : prob.demand.power) {
        mech += pm * cycle.dt;
    }
    sol.mechanical_energy = mech;
    sol.total_energy = mech + sol.cost.loss;
    return sol;
}

SweepResult size_sweep(const TransmissionSpec& spec, const LossModel& base_model, double s_min, double s_max,
                       int n_sizes, const DriveCycle& cycle, const VehicleParams& params, const DesignOptions& options)
{
    if (n_sizes < 1 || !(s_min > 0.0) || s_max < s_min) {
        throw ValidationError("size sweep needs 0 < s_min <= s_max and at least one size");
    }
    SweepResult result;
    result.rows.resize(static_cast<std::size_t>(n_sizes));
    parallel_for(result.rows.size(), [&](std::size_t k) {
        const double s =
            n_sizes == 1 ? s_min : s_min + (s_max - s_min) * (static_cast<double>(k) / (n_sizes - 1));
        SweepRow& row = result.rows[k];
        row.s = s;
        row.p_max = base_model.limits().P_max * s;
        row.mass = options.fixed_mass > 0.0 ? options.fixed_mass : total_mass(params, spec, row.p_max);
        try {
            row.solution = design_at_scale(cycle, params, spec, base_model, s, options);
            row.feasible = true;
        } catch (const InfeasibleError& e) {
            row.reason = e.what();
        }
    });
    bool any = false;
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        const auto& row = result.rows[k];
        if (row.feasible && (!any || row.solution.total_energy < result.rows[result.best].solution.total_energy)) {
            result.best = k;
            any = true;
        }
    }
    if (!any) {
        throw InfeasibleError("no motor size in [" + std::to_string(s_min) + ", " + std::to_string(s_max) +
                              "] is feasible for " + spec.to_string() + ": " + result.rows.back().reason);
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result)
{
    std::ostringstream os;
    os << std::setprecision(12);
    os << "s,P_m_max_kW,mass_kg,J_J,loss_J,total_energy_J,feasible,ratios\n";
    for (const auto& row : result.rows) {
        os << row.s << ',' << row.p_max / 1000.0 << ',' << row.mass << ',';
        if (row.feasible) {
            const auto& sol = row.solution;
            os << sol.cost.J << ',' << sol.cost.loss << ',' << sol.total_energy << ",1,";
            for (std::size_t i = 0; i < sol.ratios.size(); ++i) {
                os << (i ? ";" : "") << sol.ratios[i];
            }
        } else {
            os << ",,,0,";
        }
        os << '\n';
    }
    out << os.str();
}

} // namespace gearopt
