#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gearopt/drivecycle.hpp"
#include "gearopt/error.hpp"
#include "gearopt/motor.hpp"
#include "gearopt/optimizer.hpp"
#include "gearopt/oracle.hpp"
#include "gearopt/simulate.hpp"
#include "gearopt/sizing.hpp"
#include "gearopt/vehicle.hpp"

namespace gearopt::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* version = "0.1.0";

// Writes `text` to `path`, or to `out` when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ValidationError("cannot write '" + path + "'");
    }
    f << text;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

VehicleParams vehicle_from(const std::string& path)
{
    return path.empty() ? VehicleParams{} : load_vehicle_params_file(path);
}

std::pair<double, double> parse_range(const std::string& text, const char* what)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ParseError(std::string(what) + " must look like lo:hi, got '" + text + "'");
    }
    try {
        std::size_t used_lo = 0, used_hi = 0;
        const std::string lo_s = text.substr(0, colon), hi_s = text.substr(colon + 1);
        const double lo = std::stod(lo_s, &used_lo);
        const double hi = std::stod(hi_s, &used_hi);
        if (used_lo != lo_s.size() || used_hi != hi_s.size()) {
            throw std::invalid_argument(text);
        }
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw ParseError(std::string(what) + " must look like lo:hi, got '" + text + "'");
    }
}

json cost_json(const Cost& c)
{
    return {{"J", c.J}, {"loss", c.loss}, {"shift_cost", c.shift}};
}

json solution_json(const DesignSolution& s)
{
    json j;
    j["transmission"] = s.spec.to_string();
    j["ratios"] = s.ratios;
    j["J"] = s.cost.J;
    j["loss"] = s.cost.loss;
    j["shift_cost"] = s.cost.shift;
    j["shifts"] = s.shifts;
    j["mechanical_energy"] = s.mechanical_energy;
    j["total_energy"] = s.total_energy;
    j["vehicle_mass"] = s.vehicle_mass;
    j["P_m_max"] = s.p_max;
    j["scale"] = s.scale;
    j["eta"] = s.eta;
    j["towing_floor"] = s.towing_floor;
    if (s.spec.kind == TransmissionKind::mgt) {
        j["iterations"] = s.iterations;
        j["history"] = s.history;
    }
    return j;
}

json trajectory_json(const DesignSolution& s, const DriveCycle& cycle)
{
    json j;
    std::vector<double> t(cycle.size());
    json stationary = json::array();
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        t[k] = static_cast<double>(k) * cycle.dt;
        stationary.push_back(cycle.v[k] <= 0.0);
    }
    j["t"] = t;
    j["v"] = cycle.v;
    j["gamma"] = s.gamma;
    if (!s.gear.empty()) {
        std::vector<int> gear(s.gear);
        for (int& g : gear) {
            ++g;  // 1-based in files
        }
        j["gear"] = gear;
    }
    j["loss"] = s.step_loss;
    j["stationary"] = std::move(stationary);
    return j;
}

void write_design_trace(std::ostream& out, const DesignSolution& s, const DriveCycle& cycle, double r_w)
{
    std::ostringstream os;
    os << std::setprecision(12) << "t,v,gamma,gear,omega,P_loss_model,stationary\n";
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        os << static_cast<double>(k) * cycle.dt << ',' << cycle.v[k] << ',' << s.gamma[k] << ','
           << (s.gear.empty() ? 0 : s.gear[k] + 1) << ',' << s.gamma[k] * cycle.v[k] / r_w << ',' << s.step_loss[k]
           << ',' << (cycle.v[k] <= 0.0 ? 1 : 0) << '\n';
    }
    out << os.str();
}

DesignSolution design_from_json(const json& j, const VehicleParams& params)
{
    try {
        const auto& sol = j.at("solution");
        const auto& traj = j.at("trajectory");
        DesignSolution d;
        d.spec = TransmissionSpec::parse(sol.at("transmission").get<std::string>(), params);
        d.ratios = sol.at("ratios").get<std::vector<double>>();
        d.cost.J = sol.at("J").get<double>();
        d.cost.loss = sol.at("loss").get<double>();
        d.cost.shift = sol.at("shift_cost").get<double>();
        d.shifts = sol.at("shifts").get<int>();
        d.mechanical_energy = sol.at("mechanical_energy").get<double>();
        d.total_energy = sol.at("total_energy").get<double>();
        d.vehicle_mass = sol.at("vehicle_mass").get<double>();
        d.p_max = sol.at("P_m_max").get<double>();
        d.scale = sol.at("scale").get<double>();
        d.eta = sol.at("eta").get<double>();
        d.gamma = traj.at("gamma").get<std::vector<double>>();
        d.step_loss = traj.at("loss").get<std::vector<double>>();
        if (traj.contains("gear")) {
            d.gear = traj.at("gear").get<std::vector<int>>();
            for (int& g : d.gear) {
                --g;
            }
        }
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed design JSON: ") + e.what());
    }
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed JSON in '" + path + "': " + e.what());
    }
}

// Options shared by the commands that optimise a design.
struct DesignArgs {
    std::string cycle, vehicle, motor, transmission;
    std::optional<double> shift_cost;
    std::optional<double> power_kw;
    bool strict_torque = false;

    void add_to(CLI::App* app)
    {
        app->add_option("--cycle", cycle, "Drive cycle CSV (t,v,alpha_deg[,a])")->required();
        app->add_option("--vehicle", vehicle, "Vehicle parameter JSON (default: built-in parameters)");
        app->add_option("--motor", motor, "Fitted loss model JSON")->required();
        app->add_option("--transmission", transmission, "fgt, cvt or mgt:N")->required();
        app->add_option("--shift-cost", shift_cost, "Energy per gear change in J (default: vehicle c_shift)");
        app->add_flag("--strict-torque", strict_torque, "Let braking torque bound the ratio from below");
    }

    void add_power(CLI::App* app)
    {
        app->add_option("--power", power_kw, "Fix the motor's maximum power in kW (no sizing)");
    }

    struct Resolved {
        DriveCycle cycle;
        VehicleParams params;
        TransmissionSpec spec;
        LossModel model;
        DesignOptions options;
        double scale = 1.0;
    };

    Resolved resolve() const
    {
        Resolved r;
        r.params = vehicle_from(vehicle);
        r.cycle = load_cycle_file(cycle);
        r.model = load_model_file(motor);
        r.spec = TransmissionSpec::parse(transmission, r.params);
        r.options.c_shift = shift_cost.value_or(r.params.c_shift);
        r.options.epsilon = r.params.epsilon;
        r.options.bounds.strict_torque = strict_torque;
        if (r.options.c_shift < 0.0) {
            throw ValidationError("shift cost must be non-negative");
        }
        if (power_kw) {
            if (!(*power_kw > 0.0)) {
                throw ValidationError("--power must be positive");
            }
            r.scale = *power_kw * 1000.0 / r.model.limits().P_max;
        }
        return r;
    }

    json config(const Resolved& r) const
    {
        json c;
        c["cycle"] = cycle;
        c["cycle_steps"] = r.cycle.size();
        c["cycle_dt"] = r.cycle.dt;
        c["motor"] = motor;
        c["transmission"] = r.spec.to_string();
        c["shift_cost"] = r.options.c_shift;
        c["strict_torque"] = strict_torque;
        c["epsilon"] = r.options.epsilon;
        c["vehicle"] = json::parse(vehicle_params_to_json(r.params));
        return c;
    }
};

json header(const char* command)
{
    return {{"tool", "gearopt"}, {"version", version}, {"command", command}};
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Energy-optimal transmission design for electric vehicles", "gearopt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    // synth-cycle
    std::string preset = "urban";
    int duration = 1800;
    std::uint64_t seed = 0;
    std::string cycle_out;
    auto* sc = app.add_subcommand("synth-cycle", "Generate a synthetic drive cycle CSV");
    sc->add_option("--preset", preset, "urban, highway or mixed")->capture_default_str();
    sc->add_option("--duration", duration, "Duration in seconds (dt = 1 s)")->capture_default_str();
    sc->add_option("--seed", seed, "Random seed")->capture_default_str();
    sc->add_option("--out", cycle_out, "Output CSV (default: stdout)");

    // synth-map
    std::string truth = "mixed";
    MotorLimits limits;
    double p_max_kw = limits.P_max / 1000.0;
    MapResolution res;
    std::string map_out;
    auto* sm = app.add_subcommand("synth-map", "Sample a ground-truth loss function into a motor map CSV");
    sm->add_option("--truth", truth, "mixed, fractional, quadratic or zero")->capture_default_str();
    sm->add_option("--omega-max", limits.omega_max, "Maximum speed in rad/s")->capture_default_str();
    sm->add_option("--t-max", limits.T_max, "Maximum torque in N m")->capture_default_str();
    sm->add_option("--p-max", p_max_kw, "Maximum power in kW")->capture_default_str();
    sm->add_option("--power-intervals", res.power_intervals, "Power levels minus one (even)")->capture_default_str();
    sm->add_option("--speed-intervals", res.speed_intervals, "Speed nodes per level minus one")->capture_default_str();
    sm->add_option("--out", map_out, "Output CSV (default: stdout)");

    // fit-motor
    std::string map_path, form_name = "fractional", model_out;
    int grid_points = 101;
    auto* fm = app.add_subcommand("fit-motor", "Fit a convex loss model to a motor map");
    fm->add_option("--map", map_path, "Motor map CSV (omega,torque,loss)")->required();
    fm->add_option("--model", form_name, "fractional or quadratic")
        ->check(CLI::IsMember({"fractional", "quadratic"}))
        ->capture_default_str();
    fm->add_option("--grid", grid_points, "Number of power levels fitted over [-P_max, P_max]")->capture_default_str();
    fm->add_option("--out", model_out, "Output model JSON")->required();

    // optimize
    DesignArgs opt_args;
    std::string opt_out, opt_trace;
    auto* op = app.add_subcommand("optimize", "Optimise transmission design and control at one motor size");
    opt_args.add_to(op);
    opt_args.add_power(op);
    op->add_option("--out", opt_out, "Output design JSON (default: stdout)");
    op->add_option("--trace", opt_trace, "Per-step trace CSV");

    // size-sweep
    DesignArgs sw_args;
    int sizes = 100;
    std::string range = "0.3:1.2";
    std::string sw_out, sw_table;
    auto* ss = app.add_subcommand("size-sweep", "Brute-force the motor size jointly with the transmission");
    sw_args.add_to(ss);
    ss->add_option("--sizes", sizes, "Number of motor sizes")->capture_default_str();
    ss->add_option("--range", range, "Scale range s_min:s_max relative to the base motor")->capture_default_str();
    ss->add_option("--out", sw_out, "Output JSON with the best design (default: stdout)");
    ss->add_option("--table", sw_table, "Sweep table CSV");

    // oracle
    DesignArgs or_args;
    double grid_res = 0.05;
    std::string ratio_range;
    double budget = 1e6;
    std::string or_out;
    auto* orc = app.add_subcommand("oracle", "Exhaustive ratio-grid search compared with the iterative solver");
    or_args.add_to(orc);
    or_args.add_power(orc);
    orc->add_option("--grid-res", grid_res, "Ratio grid resolution")->capture_default_str();
    orc->add_option("--ratio-range", ratio_range, "Ratio interval lo:hi (default: dominance envelope)");
    orc->add_option("--budget", budget, "Maximum number of grid tuples")->capture_default_str();
    orc->add_option("--out", or_out, "Output JSON (default: stdout)");

    // simulate
    std::string design_path, sim_map, sim_cycle, sim_vehicle, sim_out, sim_trace;
    auto* si = app.add_subcommand("simulate", "Replay a design on the nonlinear motor map");
    si->add_option("--design", design_path, "Design JSON from optimize or size-sweep")->required();
    si->add_option("--map", sim_map, "Base motor map CSV")->required();
    si->add_option("--cycle", sim_cycle, "Override the cycle recorded in the design");
    si->add_option("--vehicle", sim_vehicle, "Override the vehicle parameters recorded in the design");
    si->add_option("--out", sim_out, "Output report JSON (default: stdout)");
    si->add_option("--trace", sim_trace, "Per-step trace CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : parse_failure;
    }

    try {
        if (*sc) {
            const DriveCycle cycle = synthesize_cycle(preset, duration, seed);
            std::ostringstream os;
            write_cycle(os, cycle);
            emit(cycle_out, os.str(), out);
        } else if (*sm) {
            limits.P_max = p_max_kw * 1000.0;
            const MotorMap map = synth_map(named_loss(truth), limits, res);
            std::ostringstream os;
            write_map(os, map);
            emit(map_out, os.str(), out);
        } else if (*fm) {
            const MotorMap map = load_map_file(map_path);
            const LossForm form = form_name == "quadratic" ? LossForm::quadratic : LossForm::fractional;
            const auto grid = uniform_power_grid(map.limits().P_max, grid_points);
            const LossModel model = fit_model(form, map, grid);
            emit(model_out, model_to_json(model) + "\n", out);
            std::ostringstream os;
            os << std::setprecision(6) << "normalized RMSE: " << 100.0 * normalized_rmse(model, map)
               << " % of DC power\n";
            out << os.str();
        } else if (*op) {
            const auto r = opt_args.resolve();
            const DesignSolution s = design_at_scale(r.cycle, r.params, r.spec, r.model, r.scale, r.options);
            json j = header("optimize");
            j["config"] = opt_args.config(r);
            j["config"]["scale"] = r.scale;
            j["solution"] = solution_json(s);
            j["trajectory"] = trajectory_json(s, r.cycle);
            emit(opt_out, dump(j), out);
            if (!opt_trace.empty()) {
                std::ostringstream os;
                write_design_trace(os, s, r.cycle, r.params.r_w);
                emit(opt_trace, os.str(), out);
            }
        } else if (*ss) {
            const auto r = sw_args.resolve();
            const auto [s_min, s_max] = parse_range(range, "--range");
            const SweepResult sweep =
                size_sweep(r.spec, r.model, s_min, s_max, sizes, r.cycle, r.params, r.options);
            const DesignSolution& best = sweep.best_solution();
            json j = header("size-sweep");
            j["config"] = sw_args.config(r);
            j["config"]["sizes"] = sizes;
            j["config"]["range"] = {s_min, s_max};
            j["solution"] = solution_json(best);
            j["trajectory"] = trajectory_json(best, r.cycle);
            json rows = json::array();
            for (const auto& row : sweep.rows) {
                json jr = {{"s", row.s}, {"P_m_max", row.p_max}, {"mass", row.mass}, {"feasible", row.feasible}};
                if (row.feasible) {
                    jr["J"] = row.solution.cost.J;
                    jr["loss"] = row.solution.cost.loss;
                    jr["total_energy"] = row.solution.total_energy;
                    jr["ratios"] = row.solution.ratios;
                } else {
                    jr["reason"] = row.reason;
                }
                rows.push_back(std::move(jr));
            }
            j["sweep"] = std::move(rows);
            emit(sw_out, dump(j), out);
            if (!sw_table.empty()) {
                std::ostringstream os;
                write_sweep_csv(os, sweep);
                emit(sw_table, os.str(), out);
            }
        } else if (*orc) {
            const auto r = or_args.resolve();
            if (r.spec.kind == TransmissionKind::cvt) {
                throw ValidationError("the oracle covers fgt and mgt:N transmissions");
            }
            const int n = r.spec.kind == TransmissionKind::fgt ? 1 : r.spec.n_gears;
            const DesignProblem prob = build_problem(r.cycle, r.params, r.spec, r.model, r.scale, r.options);
            double lo, hi;
            if (ratio_range.empty()) {
                std::tie(lo, hi) = ratio_envelope(prob.coeffs, prob.towing_floor);
                lo = std::floor(lo / grid_res) * grid_res;
                hi = std::ceil(hi / grid_res) * grid_res;
                lo = std::max(lo, grid_res);
            } else {
                std::tie(lo, hi) = parse_range(ratio_range, "--ratio-range");
            }
            const auto grid = ratio_grid(lo, hi, grid_res);
            OracleOptions oo;
            oo.budget = budget;
            const double c_shift = r.spec.kind == TransmissionKind::fgt ? 0.0 : r.options.c_shift;
            const DesignSolution best = brute_force_mgt(prob.coeffs, n, grid, c_shift, prob.towing_floor, oo);
            MgtOptions mo;
            mo.epsilon = r.options.epsilon;
            const DesignSolution alg = r.spec.kind == TransmissionKind::fgt
                                           ? optimize_fgt(prob.coeffs, prob.towing_floor)
                                           : optimize_mgt(n, prob.coeffs, c_shift, prob.towing_floor, mo);
            const double gap = (alg.cost.J - best.cost.J) / std::abs(best.cost.J);
            json j = header("oracle");
            j["config"] = or_args.config(r);
            j["config"]["scale"] = r.scale;
            j["config"]["grid_res"] = grid_res;
            j["config"]["ratio_range"] = {lo, hi};
            j["config"]["grid_points"] = grid.size();
            j["oracle"] = {{"ratios", best.ratios}, {"cost", cost_json(best.cost)}, {"shifts", best.shifts}};
            j["algorithm"] = {{"ratios", alg.ratios},
                              {"cost", cost_json(alg.cost)},
                              {"shifts", alg.shifts},
                              {"iterations", alg.iterations}};
            j["gap"] = gap;
            emit(or_out, dump(j), out);
            std::ostringstream os;
            os << std::setprecision(6) << "oracle J " << best.cost.J << " J, algorithm J " << alg.cost.J
               << " J, gap " << 100.0 * gap << " %\n";
            (or_out.empty() || or_out == "-" ? err : out) << os.str();
        } else if (*si) {
            const json dj = read_json_file(design_path);
            VehicleParams params;
            std::string cycle_path = sim_cycle;
            if (!sim_vehicle.empty()) {
                params = load_vehicle_params_file(sim_vehicle);
            } else if (dj.contains("config") && dj["config"].contains("vehicle")) {
                std::istringstream vs(dj["config"]["vehicle"].dump());
                params = load_vehicle_params(vs);
            }
            if (cycle_path.empty()) {
                if (!dj.contains("config") || !dj["config"].contains("cycle")) {
                    throw ParseError("design JSON records no cycle; pass --cycle");
                }
                cycle_path = dj["config"]["cycle"].get<std::string>();
            }
            const DriveCycle cycle = load_cycle_file(cycle_path);
            const DesignSolution design = design_from_json(dj, params);
            const MotorMap map = load_map_file(sim_map);
            const SimulationReport rep = simulate(design, cycle, params, map);
            json j = header("simulate");
            j["config"] = {{"design", design_path},
                           {"map", sim_map},
                           {"cycle", cycle_path},
                           {"vehicle", json::parse(vehicle_params_to_json(params))}};
            const double predicted = design.mechanical_energy + design.cost.loss;
            j["report"] = {{"total_energy", rep.total_energy},
                           {"loss_energy", rep.loss_energy},
                           {"mechanical_energy", rep.mechanical_energy},
                           {"brake_energy", rep.brake_energy},
                           {"shift_cost", rep.shift_cost},
                           {"model_loss_energy", rep.model_loss_energy},
                           {"model_total_energy", predicted},
                           {"relative_difference", (rep.total_energy - predicted) / std::abs(predicted)}};
            emit(sim_out, dump(j), out);
            if (!sim_trace.empty()) {
                std::ostringstream os;
                write_trace_csv(os, rep);
                emit(sim_trace, os.str(), out);
            }
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return parse_failure;
    } catch (const FitError& e) {
        err << "error: " << e.what() << '\n';
        return fit_failure;
    } catch (const InfeasibleError& e) {
        err << "error: infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const EnvelopeError& e) {
        err << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return internal_failure;
    }
    return ok;
}

} // namespace gearopt::cli
