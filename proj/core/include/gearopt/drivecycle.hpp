#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gearopt {

struct VehicleParams;

// Uniformly sampled drive cycle with T+1 samples.
struct DriveCycle {
    double dt = 1.0;            // s
    std::vector<double> v;      // m/s
    std::vector<double> a;      // m/s^2
    std::vector<double> alpha;  // rad

    std::size_t size() const noexcept { return v.size(); }

    // Throws ValidationError if any invariant is broken.
    void validate() const;
};

struct WheelDemand {
    std::vector<double> power;   // P_t, W
    std::vector<double> force;   // F_t, N
    std::vector<double> torque;  // wheel torque F_t * r_w, N m
};

// Parses the cycle CSV (`t,v,alpha_deg[,a]`). Missing acceleration is
// reconstructed with finite_difference().
DriveCycle load_cycle(std::istream& in);
DriveCycle load_cycle_file(const std::string& path);

// Writes `t,v,alpha_deg,a` with round-trip precision.
void write_cycle(std::ostream& out, const DriveCycle& cycle);

// Central differences inside, one-sided at the ends.
std::vector<double> finite_difference(const std::vector<double>& v, double dt);

WheelDemand wheel_demand(const DriveCycle& cycle, double vehicle_mass, const VehicleParams& params);

// Deterministic synthetic cycle. Presets: "urban", "highway", "mixed"
// (four-phase low/medium/high/extra-high). `duration` in seconds, sampled at
// 1 s, so the cycle has duration+1 samples.
DriveCycle synthesize_cycle(std::string_view preset, int duration, std::uint64_t seed);

} // namespace gearopt
