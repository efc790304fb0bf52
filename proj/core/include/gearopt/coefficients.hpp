#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace gearopt {

// Functional form of the per-step loss as a function of the ratio gamma.
//   fractional: d0/gamma + d1 + d2*gamma
//   quadratic:  d0 + d1*gamma + d2*gamma^2
enum class LossForm { fractional, quadratic };

const char* to_string(LossForm form) noexcept;

// Per-step loss coefficients in gamma plus per-step ratio bounds.
//
// Stationary steps (v = 0) carry only a gamma-independent term: d1 for the
// fractional form, d0 for the quadratic form, all other coefficients zero.
// That keeps them neutral in every ratio sum without special casing.
struct StepCoefficients {
    LossForm form = LossForm::fractional;
    double dt = 1.0;
    std::vector<double> d0;
    std::vector<double> d1;
    std::vector<double> d2;
    std::vector<double> gamma_min;
    std::vector<double> gamma_max;
    std::vector<std::uint8_t> stationary;

    std::size_t size() const noexcept { return d0.size(); }

    // Allocates n steps with zero coefficients and (0, inf) bounds.
    void resize(std::size_t n);

    // Loss in W at step t for ratio gamma. Fractional form at gamma <= 0 with
    // d0 > 0 yields +inf.
    double loss(std::size_t t, double gamma) const noexcept;

    bool feasible(std::size_t t, double gamma) const noexcept
    {
        return gamma >= gamma_min[t] && gamma <= gamma_max[t];
    }

    // Sign constraints on d0/d2 (fractional) or d2 (quadratic), equal lengths,
    // dt > 0. Throws ValidationError.
    void validate() const;
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

} // namespace gearopt
