#pragma once

// Fixtures and independent reference computations shared by the tests.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "gearopt/coefficients.hpp"
#include "gearopt/drivecycle.hpp"
#include "gearopt/motor.hpp"
#include "gearopt/vehicle.hpp"

namespace testing {

class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("gearopt-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

inline bool close_rel(double a, double b, double rel, double abs = 0.0)
{
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs;
}

// Random fractional-form step coefficients with wide, overlapping bounds.
inline gearopt::StepCoefficients random_steps(std::mt19937_64& rng, std::size_t T, double dt = 1.0,
                                              gearopt::LossForm form = gearopt::LossForm::fractional)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    gearopt::StepCoefficients c;
    c.form = form;
    c.dt = dt;
    c.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (form == gearopt::LossForm::fractional) {
            c.d0[t] = 50.0 + 2000.0 * u(rng);
            c.d1[t] = 100.0 + 500.0 * u(rng);
            c.d2[t] = 1.0 + 40.0 * u(rng);
        } else {
            c.d0[t] = 100.0 + 500.0 * u(rng);
            c.d1[t] = -200.0 + 150.0 * u(rng);
            c.d2[t] = 1.0 + 30.0 * u(rng);
        }
        c.gamma_min[t] = 1.0 + 5.0 * u(rng);
        c.gamma_max[t] = c.gamma_min[t] + 1.0 + 15.0 * u(rng);
    }
    return c;
}

// Loss energy and shift count of an explicit gear sequence, evaluated from
// scratch (no library objective).
inline double trajectory_cost(const std::vector<int>& gear, const std::vector<double>& ratios,
                              const gearopt::StepCoefficients& c, double c_shift)
{
    double J = 0.0;
    for (std::size_t t = 0; t < gear.size(); ++t) {
        const double g = ratios[gear[t]];
        if (g < c.gamma_min[t] || g > c.gamma_max[t]) {
            return std::numeric_limits<double>::infinity();
        }
        const double loss = c.form == gearopt::LossForm::fractional ? c.d0[t] / g + c.d1[t] + c.d2[t] * g
                                                                     : c.d0[t] + c.d1[t] * g + c.d2[t] * g * g;
        J += loss * c.dt;
        if (t > 0 && gear[t] != gear[t - 1]) {
            J += c_shift;
        }
    }
    return J;
}

// Minimum over all n^T gear sequences.
inline double enumerate_min(const std::vector<double>& ratios, const gearopt::StepCoefficients& c, double c_shift)
{
    const std::size_t T = c.size();
    const int n = static_cast<int>(ratios.size());
    std::vector<int> gear(T, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        best = std::min(best, trajectory_cost(gear, ratios, c, c_shift));
        std::size_t k = 0;
        while (k < T && ++gear[k] == n) {
            gear[k] = 0;
            ++k;
        }
        if (k == T) {
            break;
        }
    }
    return best;
}

// Term-by-term wheel power with independently written physics.
inline double reference_wheel_power(double m, double v, double a, double alpha, const gearopt::VehicleParams& p)
{
    const double rolling = m * p.c_r * p.g * std::cos(alpha) * v;
    const double grade = m * p.g * std::sin(alpha) * v;
    const double inertia = m * a * v;
    const double drag = 0.5 * p.rho_air * p.c_d * p.A_f * v * v * v;
    return rolling + grade + inertia + drag;
}

inline gearopt::DriveCycle constant_cycle(std::size_t samples, double v, double dt = 1.0)
{
    gearopt::DriveCycle c;
    c.dt = dt;
    c.v.assign(samples, v);
    c.a.assign(samples, 0.0);
    c.alpha.assign(samples, 0.0);
    return c;
}

// Samples [begin, begin + count) of a cycle.
inline gearopt::DriveCycle slice(const gearopt::DriveCycle& c, std::size_t begin, std::size_t count)
{
    gearopt::DriveCycle out;
    out.dt = c.dt;
    const auto b = static_cast<std::ptrdiff_t>(begin);
    const auto e = static_cast<std::ptrdiff_t>(begin + count);
    out.v.assign(c.v.begin() + b, c.v.begin() + e);
    out.a.assign(c.a.begin() + b, c.a.begin() + e);
    out.alpha.assign(c.alpha.begin() + b, c.alpha.begin() + e);
    return out;
}

// Scaled-down pipeline used by several suites: mixed ground-truth map, both
// fitted models and a mixed synthetic cycle.
struct Pipeline {
    gearopt::MotorMap map;
    gearopt::LossModel fractional;
    gearopt::LossModel quadratic;
    gearopt::DriveCycle cycle;
    gearopt::VehicleParams params;

    static const Pipeline& get()
    {
        static const Pipeline p = [] {
            Pipeline q;
            q.map = gearopt::synth_map(gearopt::mixed_loss(), gearopt::MotorLimits{});
            const auto grid = gearopt::uniform_power_grid(q.map.limits().P_max, 101);
            q.fractional = gearopt::fit_fractional(q.map, grid);
            q.quadratic = gearopt::fit_quadratic(q.map, grid);
            q.cycle = gearopt::synthesize_cycle("mixed", 1800, 1);
            return q;
        }();
        return p;
    }
};

} // namespace testing
