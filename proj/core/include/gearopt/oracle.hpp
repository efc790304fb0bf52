#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gearopt/coefficients.hpp"
#include "gearopt/optimizer.hpp"

namespace gearopt {

// Argmin of the scalar loss on `points` uniform samples of [lo, hi]; ties go
// to the smallest gamma.
double grid_oracle_scalar(LossForm form, double c0, double c1, double c2, double lo, double hi,
                          int points);

// Ratio interval that contains an optimal design: outside it every gear can
// be moved towards it without raising any step's loss or breaking a bound.
std::pair<double, double> ratio_envelope(const StepCoefficients& coeffs, double towing_floor);

// lo, lo + res, ... up to hi (inclusive when it lands on the grid).
std::vector<double> ratio_grid(double lo, double hi, double resolution);

struct OracleOptions {
    double budget = 1e6;      // max grid.size()^n_gears
    bool sorted_only = true;  // enumerate ascending tuples only
};

// Exhaustive search over ratio tuples on `grid`, each solved with the exact
// gearshift_dp. The highest ratio of a tuple must meet the towing floor.
// Throws BudgetError when grid.size()^n_gears exceeds the budget or n_gears > 3.
DesignSolution brute_force_mgt(const StepCoefficients& coeffs, int n_gears,
                               std::span<const double> grid, double c_shift, double towing_floor,
                               const OracleOptions& options = {});

} // namespace gearopt
