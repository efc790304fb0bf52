#include "gearopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gearopt/error.hpp"
#include "gearopt/parallel.hpp"

namespace gearopt {

double grid_oracle_scalar(LossForm form, double c0, double c1, double c2, double lo, double hi, int points)
{
    if (points < 2 || !std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        throw ValidationError("scalar oracle needs a finite interval and at least 2 points");
    }
    auto f = [&](double g) {
        if (form == LossForm::fractional) {
            return g > 0.0 ? c0 / g + c1 + c2 * g : (c0 > 0.0 ? infinity : c1);
        }
        return c0 + (c1 + c2 * g) * g;
    };
    double best_g = lo;
    double best = f(lo);
    for (int k = 1; k < points; ++k) {
        const double g = lo + (hi - lo) * (static_cast<double>(k) / (points - 1));
        const double v = f(g);
        if (v < best) {
            best = v;
            best_g = g;
        }
    }
    return best_g;
}

std::pair<double, double> ratio_envelope(const StepCoefficients& coeffs, double towing_floor)
{
    double lo = infinity;
    double hi = towing_floor;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (coeffs.stationary[t]) {
            continue;
        }
        const double d0 = coeffs.d0[t], d1 = coeffs.d1[t], d2 = coeffs.d2[t];
        double m;
        if (coeffs.form == LossForm::fractional) {
            if (d0 == 0.0 && d2 == 0.0) continue;
            m = d2 == 0.0 ? infinity : std::sqrt(d0 / d2);
        } else {
            if (d1 == 0.0 && d2 == 0.0) continue;
            m = d2 > 0.0 ? -d1 / (2.0 * d2) : (d1 > 0.0 ? -infinity : infinity);
        }
        const double c = std::clamp(m, coeffs.gamma_min[t], coeffs.gamma_max[t]);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    if (!std::isfinite(lo)) {
        lo = std::min(hi, 1.0);
    }
    return {lo, hi};
}

std::vector<double> ratio_grid(double lo, double hi, double resolution)
{
    if (!(resolution > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        throw ValidationError("ratio grid needs a finite interval and a positive resolution");
    }
    std::vector<double> grid;
    for (long k = 0;; ++k) {
        const double g = lo + static_cast<double>(k) * resolution;
        if (g > hi + 1e-9 * resolution) {
            break;
        }
        grid.push_back(g);
    }
    return grid;
}

namespace {

// Exact DP cost on a precomputed stage table; same recursion as gearshift_dp.
double dp_cost(const std::vector<double>& table, std::size_t T, const int* idx, int n, double c_shift,
               std::vector<double>& V, std::vector<double>& next)
{
    // V_t(i) = L_t(i) + min(V_{t-1}(i), c + min_j V_{t-1}(j))
    for (int i = 0; i < n; ++i) {
        V[i] = table[static_cast<std::size_t>(idx[i]) * T];
    }
    for (std::size_t t = 1; t < T; ++t) {
        double best = V[0];
        for (int i = 1; i < n; ++i) {
            best = std::min(best, V[i]);
        }
        const double sw = best + c_shift;
        for (int i = 0; i < n; ++i) {
            next[i] = table[static_cast<std::size_t>(idx[i]) * T + t] + std::min(V[i], sw);
        }
        std::swap(V, next);
    }
    double J = V[0];
    for (int i = 1; i < n; ++i) {
        J = std::min(J, V[i]);
    }
    return J;
}

} // namespace

DesignSolution brute_force_mgt(const StepCoefficients& coeffs, int n_gears, std::span<const double> grid,
                               double c_shift, double towing_floor, const OracleOptions& options)
{
    coeffs.validate();
    if (n_gears < 1 || n_gears > 3) {
        throw BudgetError("brute force supports 1 to 3 gears, got " + std::to_string(n_gears), 0.0);
    }
    if (grid.empty()) {
        throw ValidationError("ratio grid is empty");
    }
    const double required = std::pow(static_cast<double>(grid.size()), n_gears);
    if (required > options.budget) {
        throw BudgetError("brute force needs " + std::to_string(required) + " evaluations, budget is " +
                              std::to_string(options.budget),
                          required);
    }
    const std::size_t T = coeffs.size();
    const std::size_t G = grid.size();
    std::vector<double> table(G * T);
    parallel_for(G, [&](std::size_t g) {
        for (std::size_t t = 0; t < T; ++t) {
            table[g * T + t] = coeffs.feasible(t, grid[g]) ? coeffs.loss(t, grid[g]) * coeffs.dt : infinity;
        }
    });
    const double floor_tol = 1e-12 * std::max(1.0, towing_floor);

    struct Best {
        double J = infinity;
        std::vector<int> idx;
    };
    // one slot per leading index, reduced in enumeration order afterwards
    std::vector<Best> per_lead(G);
    parallel_for(G, [&](std::size_t lead) {
        std::vector<double> V(n_gears), next(n_gears);
        int idx[3] = {static_cast<int>(lead), 0, 0};
        Best& best = per_lead[lead];
        auto consider = [&] {
            double top = grid[idx[0]];
            for (int i = 1; i < n_gears; ++i) {
                top = std::max(top, grid[idx[i]]);
            }
            if (top < towing_floor - floor_tol || T == 0) {
                return;
            }
            const double J = dp_cost(table, T, idx, n_gears, c_shift, V, next);
            if (J < best.J) {
                best.J = J;
                best.idx.assign(idx, idx + n_gears);
            }
        };
        const int start1 = options.sorted_only ? idx[0] : 0;
        if (n_gears == 1) {
            consider();
            return;
        }
        for (int i1 = start1; i1 < static_cast<int>(G); ++i1) {
            idx[1] = i1;
            if (n_gears == 2) {
                consider();
                continue;
            }
            const int start2 = options.sorted_only ? i1 : 0;
            for (int i2 = start2; i2 < static_cast<int>(G); ++i2) {
                idx[2] = i2;
                consider();
            }
        }
    });
    const Best* winner = nullptr;
    for (const auto& b : per_lead) {
        if (std::isfinite(b.J) && (!winner || b.J < winner->J)) {
            winner = &b;
        }
    }
    if (!winner) {
        throw InfeasibleError("no ratio tuple on the grid admits the cycle");
    }
    DesignSolution s;
    s.spec = TransmissionSpec::mgt(n_gears);
    s.towing_floor = towing_floor;
    for (int i : winner->idx) {
        s.ratios.push_back(grid[i]);
    }
    std::sort(s.ratios.begin(), s.ratios.end());
    const auto traj = gearshift_dp(s.ratios, coeffs, c_shift);
    s.gear = traj.gear;
    s.shifts = traj.shifts;
    s.cost = objective(traj, s.ratios, coeffs, c_shift);
    s.gamma.resize(T);
    s.step_loss.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        s.gamma[t] = s.ratios[s.gear[t]];
        s.step_loss[t] = coeffs.loss(t, s.gamma[t]);
    }
    return s;
}

} // namespace gearopt
