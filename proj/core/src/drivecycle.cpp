#include "gearopt/drivecycle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "gearopt/error.hpp"
#include "gearopt/vehicle.hpp"

namespace gearopt {

namespace {

using detail::parse_number;
using detail::split;
using detail::trim;

constexpr double deg = std::numbers::pi / 180.0;

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

struct PhaseShape {
    double v_top;      // m/s, reached on the phase's first trip
    double v_low;      // fraction of v_top for later trips
    double idle_min, idle_max;
    double hold_min, hold_max;
    bool stop_between_trips;
};

// Speed-target follower: trips of (idle, accelerate, hold with small
// fluctuation, decelerate), then capped by a stopping envelope so the phase
// ends at standstill.
void append_phase(std::vector<double>& v, int steps, const PhaseShape& shape, Rng& rng)
{
    constexpr double accel_power = 17.0;  // m^2/s^3, caps a*v
    constexpr double stop_decel = 1.0;    // m/s^2
    std::vector<double> phase;
    phase.reserve(steps);
    double speed = v.empty() ? 0.0 : v.back();
    bool first_trip = true;
    while (static_cast<int>(phase.size()) < steps) {
        if (shape.stop_between_trips || first_trip) {
            const int idle = static_cast<int>(std::lround(rng.uniform(shape.idle_min, shape.idle_max)));
            for (int k = 0; k < idle && speed <= 0.0; ++k) {
                phase.push_back(0.0);
            }
        }
        const double target = first_trip ? shape.v_top : shape.v_top * rng.uniform(shape.v_low, 1.0);
        const double a_up = rng.uniform(0.6, 1.1);
        const double a_dn = rng.uniform(0.5, 1.0);
        first_trip = false;
        // accelerate or decelerate towards target
        while (std::abs(speed - target) > 1e-9 && static_cast<int>(phase.size()) < steps) {
            if (speed < target) {
                const double a = std::min(a_up, accel_power / std::max(speed, 1.0));
                speed = std::min(target, speed + a);
            } else {
                speed = std::max(target, speed - a_dn);
            }
            phase.push_back(speed);
        }
        const int hold = static_cast<int>(std::lround(rng.uniform(shape.hold_min, shape.hold_max)));
        const double wobble_period = rng.uniform(8.0, 20.0);
        const double wobble = 0.03 * target;
        for (int k = 0; k < hold && static_cast<int>(phase.size()) < steps; ++k) {
            phase.push_back(target - wobble * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / wobble_period)));
        }
        speed = phase.empty() ? 0.0 : phase.back();
        if (shape.stop_between_trips) {
            while (speed > 0.0 && static_cast<int>(phase.size()) < steps) {
                speed = std::max(0.0, speed - a_dn);
                phase.push_back(speed);
            }
        }
    }
    phase.resize(steps);
    // stop at the end of the phase
    for (int k = 0; k < steps; ++k) {
        const double remaining = static_cast<double>(steps - 1 - k);
        phase[k] = std::clamp(phase[k], 0.0, stop_decel * remaining);
    }
    v.insert(v.end(), phase.begin(), phase.end());
}

std::uint64_t preset_salt(std::string_view preset)
{
    std::uint64_t h = 1469598103934665603ull;
    for (char c : preset) {
        h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
    }
    return h;
}

} // namespace

void DriveCycle::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("cycle time step must be positive");
    }
    if (v.size() < 2) {
        throw ValidationError("cycle needs at least two samples");
    }
    if (a.size() != v.size() || alpha.size() != v.size()) {
        throw ValidationError("cycle trajectories differ in length");
    }
    for (std::size_t t = 0; t < v.size(); ++t) {
        if (!std::isfinite(v[t]) || !std::isfinite(a[t]) || !std::isfinite(alpha[t])) {
            throw ValidationError("non-finite cycle value at sample " + std::to_string(t));
        }
        if (v[t] < 0.0) {
            throw ValidationError("negative speed at sample " + std::to_string(t));
        }
    }
}

std::vector<double> finite_difference(const std::vector<double>& v, double dt)
{
    const std::size_t n = v.size();
    std::vector<double> a(n, 0.0);
    if (n < 2) {
        return a;
    }
    a.front() = (v[1] - v[0]) / dt;
    a.back() = (v[n - 1] - v[n - 2]) / dt;
    for (std::size_t t = 1; t + 1 < n; ++t) {
        a[t] = (v[t + 1] - v[t - 1]) / (2.0 * dt);
    }
    return a;
}

DriveCycle load_cycle(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    int col_t = -1, col_v = -1, col_alpha = -1, col_a = -1;
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        n_cols = fields.size();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& f = fields[i];
            const int idx = static_cast<int>(i);
            if (f == "t") col_t = idx;
            else if (f == "v") col_v = idx;
            else if (f == "alpha_deg") col_alpha = idx;
            else if (f == "a") col_a = idx;
            else throw ParseError("unknown column '" + std::string(f) + "'", line_no);
        }
        break;
    }
    if (col_t < 0 || col_v < 0 || col_alpha < 0) {
        throw ParseError("header must contain t, v and alpha_deg", line_no);
    }

    std::vector<double> t, v, alpha, a;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != n_cols) {
            throw ParseError("expected " + std::to_string(n_cols) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        t.push_back(parse_number(fields[col_t], line_no));
        v.push_back(parse_number(fields[col_v], line_no));
        alpha.push_back(parse_number(fields[col_alpha], line_no) * deg);
        if (col_a >= 0) {
            a.push_back(parse_number(fields[col_a], line_no));
        }
    }
    if (t.size() < 2) {
        throw ValidationError("cycle needs at least two samples");
    }

    DriveCycle cycle;
    cycle.dt = t[1] - t[0];
    if (!(cycle.dt > 0.0)) {
        throw ValidationError("timestamps must increase");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double step = t[k] - t[k - 1];
        if (std::abs(step - cycle.dt) > 1e-6 * std::max(1.0, cycle.dt)) {
            throw ValidationError("non-uniform timestamps at sample " + std::to_string(k));
        }
    }
    cycle.v = std::move(v);
    cycle.alpha = std::move(alpha);
    cycle.a = col_a >= 0 ? std::move(a) : finite_difference(cycle.v, cycle.dt);
    cycle.validate();
    return cycle;
}

DriveCycle load_cycle_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open cycle file '" + path + "'");
    }
    return load_cycle(in);
}

void write_cycle(std::ostream& out, const DriveCycle& cycle)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "t,v,alpha_deg,a\n";
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        os << static_cast<double>(k) * cycle.dt << ',' << cycle.v[k] << ',' << cycle.alpha[k] / deg << ','
           << cycle.a[k] << '\n';
    }
    out << os.str();
}

WheelDemand wheel_demand(const DriveCycle& cycle, double vehicle_mass, const VehicleParams& params)
{
    if (!(vehicle_mass > 0.0)) {
        throw ValidationError("vehicle mass must be positive");
    }
    const std::size_t n = cycle.size();
    WheelDemand d;
    d.power.resize(n);
    d.force.resize(n);
    d.torque.resize(n);
    const double drag = 0.5 * params.rho_air * params.c_d * params.A_f;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = cycle.v[t];
        const double alpha = cycle.alpha[t];
        const double inertial =
            vehicle_mass * (params.c_r * params.g * std::cos(alpha) + params.g * std::sin(alpha) + cycle.a[t]);
        d.power[t] = inertial * v + drag * v * v * v;
        d.force[t] = inertial + drag * v * v;
        d.torque[t] = d.force[t] * params.r_w;
    }
    return d;
}

DriveCycle synthesize_cycle(std::string_view preset, int duration, std::uint64_t seed)
{
    if (duration < 2) {
        throw ValidationError("synthetic cycle duration must be at least 2 s");
    }
    Rng rng(seed ^ preset_salt(preset));
    const int steps = duration + 1;
    std::vector<double> v;
    v.reserve(steps);
    std::vector<double> alpha(steps, 0.0);

    if (preset == "urban") {
        append_phase(v, steps, {13.0, 0.45, 4.0, 15.0, 8.0, 35.0, true}, rng);
    } else if (preset == "highway") {
        append_phase(v, steps, {34.0, 0.75, 4.0, 6.0, 40.0, 120.0, false}, rng);
        const double period = rng.uniform(300.0, 600.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int k = 0; k < steps; ++k) {
            alpha[k] = 1.5 * deg * std::sin(2.0 * std::numbers::pi * k / period + phase);
        }
    } else if (preset == "mixed") {
        // low / medium / high / extra-high phases with WLTC-like proportions
        const double fractions[4] = {589.0 / 1800.0, 433.0 / 1800.0, 455.0 / 1800.0, 323.0 / 1800.0};
        const PhaseShape shapes[4] = {
            {15.7, 0.35, 5.0, 20.0, 6.0, 25.0, true},
            {21.3, 0.45, 4.0, 15.0, 10.0, 35.0, true},
            {27.1, 0.55, 4.0, 12.0, 15.0, 45.0, true},
            {36.4, 0.70, 3.0, 8.0, 20.0, 60.0, false},
        };
        int used = 0;
        for (int p = 0; p < 4; ++p) {
            const int len = p == 3 ? steps - used : static_cast<int>(std::lround(fractions[p] * steps));
            append_phase(v, len, shapes[p], rng);
            used += len;
        }
    } else {
        throw ValidationError("unknown cycle preset '" + std::string(preset) + "'");
    }

    DriveCycle cycle;
    cycle.dt = 1.0;
    cycle.v = std::move(v);
    cycle.alpha = std::move(alpha);
    cycle.a = finite_difference(cycle.v, cycle.dt);
    cycle.validate();
    return cycle;
}

} // namespace gearopt
