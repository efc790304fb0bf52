#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gearopt/coefficients.hpp"

namespace gearopt {

struct MotorLimits {
    double omega_max = 1200.0;  // rad/s
    double T_max = 312.5;       // N m
    double P_max = 100e3;       // W

    void validate() const;
    // Lowest speed at which |power| is reachable under the torque limit.
    double min_speed(double power) const noexcept;
};

MotorLimits scale(const MotorLimits& limits, double s);

struct MapSample {
    double omega;   // rad/s
    double torque;  // N m
    double loss;    // W
};

// Motor loss map organised as constant-power levels. Each level holds loss
// samples at increasing speeds spanning [|P|/T_max, omega_max]; the envelope
// (constant-torque and constant-power regions) is thus exactly covered.
//
// Interpolation is bilinear in (power, normalised speed): the query speed is
// mapped to its fraction u of the local speed span, each bracketing level is
// evaluated at that fraction (linear between speed nodes), and the two
// results are blended linearly in power. Nodes are reproduced exactly and
// queries outside the envelope raise EnvelopeError.
class MotorMap {
public:
    struct Level {
        double power = 0.0;
        std::vector<double> omega;
        std::vector<double> loss;
    };

    MotorMap() = default;
    MotorMap(std::vector<Level> levels, MotorLimits limits);

    // Groups scattered (omega, torque, loss) samples into power levels
    // (relative tolerance 1e-9 on omega*torque). Limits are taken from the
    // samples' extent.
    static MotorMap from_samples(std::span<const MapSample> samples);

    const std::vector<Level>& levels() const noexcept { return levels_; }
    const MotorLimits& limits() const noexcept { return limits_; }
    std::vector<MapSample> samples() const;

    // Nullptr when no level matches `power` within tolerance.
    const Level* find_level(double power) const noexcept;

    double interpolate(double omega, double power) const;
    bool contains(double omega, double power) const noexcept;

    // Loss and power axes scaled by s, speeds unchanged.
    MotorMap scaled(double s) const;

private:
    std::vector<Level> levels_;
    MotorLimits limits_;
};

MotorMap load_map(std::istream& in);
MotorMap load_map_file(const std::string& path);
void write_map(std::ostream& out, const MotorMap& map);

struct LossCoefficients {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

// Power-indexed loss model. For the fractional form (c0, c1, c2) are
// (p0, p1, p2) of loss = p0/omega + p1 + p2*omega; for the quadratic form they
// are (q1, q2, q3) of loss = q1 + q2*omega + q3*omega^2. Coefficients are
// interpolated linearly in power between grid points.
class LossModel {
public:
    LossModel() = default;
    LossModel(LossForm form, std::vector<double> power_grid, std::vector<LossCoefficients> coeffs,
              MotorLimits limits);

    LossForm form() const noexcept { return form_; }
    const std::vector<double>& power_grid() const noexcept { return power_; }
    const std::vector<LossCoefficients>& grid_coefficients() const noexcept { return coeffs_; }
    const MotorLimits& limits() const noexcept { return limits_; }

    // Throws EnvelopeError outside [power_grid.front(), power_grid.back()].
    LossCoefficients coefficients(double power) const;

    // Loss in W. Fractional form at omega = 0 returns p1 when p0 vanishes and
    // +inf otherwise.
    double loss(double power, double omega) const;

    void validate() const;

private:
    LossForm form_ = LossForm::fractional;
    std::vector<double> power_;
    std::vector<LossCoefficients> coeffs_;
    MotorLimits limits_;
};

// Coefficients, power grid and limits scaled linearly by s (omega_max fixed).
LossModel scale(const LossModel& model, double s);

std::string model_to_json(const LossModel& model);
LossModel model_from_json(std::istream& in);
LossModel load_model_file(const std::string& path);

// `points` >= 2 uniformly spaced values over [-p_max, p_max].
std::vector<double> uniform_power_grid(double p_max, int points);

struct ContourFit {
    LossCoefficients coeffs;
    double residual = 0.0;  // sum of squared errors, W^2
};

// Least squares on one constant-power contour subject to the form's sign
// constraints (fractional: c0 >= 0, c2 >= 0; quadratic: c2 >= 0). With
// `pin_c0` the fractional c0 is fixed at zero. Exact active-set enumeration.
ContourFit fit_contour(LossForm form, std::span<const double> omega, std::span<const double> loss,
                       bool pin_c0);

// Same basis without sign constraints (used to compare residuals).
ContourFit fit_contour_unconstrained(LossForm form, std::span<const double> omega,
                                     std::span<const double> loss, bool pin_c0);

// Fits one contour per grid power; each needs >= 3 map samples on a matching
// level, otherwise FitError naming the power.
LossModel fit_fractional(const MotorMap& map, std::span<const double> power_grid);
LossModel fit_quadratic(const MotorMap& map, std::span<const double> power_grid);
LossModel fit_model(LossForm form, const MotorMap& map, std::span<const double> power_grid);

// RMS of (model - map) loss over all map samples divided by the mean |P_dc|,
// with P_dc = P + loss of the map.
double normalized_rmse(const LossModel& model, const MotorMap& map);

// Per-step coefficients in gamma: with wheel speed w = v/r_w,
//   fractional: d0 = p0/w, d1 = p1, d2 = p2*w
//   quadratic:  d0 = q1,   d1 = q2*w, d2 = q3*w^2
// Steps with v = 0 are marked stationary with loss at P_m = 0. Bounds are
// left at (0, inf).
StepCoefficients step_coefficients(const LossModel& model, std::span<const double> p_m,
                                   std::span<const double> v, double r_w, double dt);

// Ground-truth loss as a function of (omega, power).
using LossFunction = std::function<double(double omega, double power)>;

// Stand-in for measured machine data: constant (inverter) + iron (omega) +
// eddy (omega^2) + windage (omega^3) + copper (torque^2).
struct MixedLossParams {
    double constant = 150.0;
    double iron = 0.5;
    double eddy = 3e-4;
    double windage = 0.0;
    double copper = 0.045;
};

LossFunction mixed_loss(const MixedLossParams& params = {});
// A member of the fractional class with power-dependent coefficients.
LossFunction fractional_loss_default();
// A member of the quadratic class with power-dependent coefficients.
LossFunction quadratic_loss_default();
LossFunction zero_loss();
// Named lookup: "mixed", "fractional", "quadratic", "zero".
LossFunction named_loss(const std::string& name);

struct MapResolution {
    int power_intervals = 100;  // even, so that P = 0 is a level
    int speed_intervals = 60;
};

// Samples `truth` on `power_intervals + 1` uniform levels over
// [-P_max, P_max], each with `speed_intervals + 1` speeds over
// [|P|/T_max, omega_max]. Doubling both interval counts yields a strict
// superset of the sample locations. Negative losses raise ValidationError.
MotorMap synth_map(const LossFunction& truth, const MotorLimits& limits, MapResolution resolution = {});

} // namespace gearopt
