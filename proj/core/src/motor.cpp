#include "gearopt/motor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "gearopt/error.hpp"
#include "gearopt/parallel.hpp"

namespace gearopt {

// ---------------------------------------------------------------------------
// StepCoefficients

const char* to_string(LossForm form) noexcept
{
    return form == LossForm::fractional ? "fractional" : "quadratic";
}

void StepCoefficients::resize(std::size_t n)
{
    d0.assign(n, 0.0);
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    gamma_min.assign(n, 0.0);
    gamma_max.assign(n, infinity);
    stationary.assign(n, 0);
}

double StepCoefficients::loss(std::size_t t, double gamma) const noexcept
{
    if (form == LossForm::fractional) {
        if (gamma <= 0.0) {
            return d0[t] > 0.0 ? infinity : d1[t];
        }
        return d0[t] / gamma + d1[t] + d2[t] * gamma;
    }
    return d0[t] + (d1[t] + d2[t] * gamma) * gamma;
}

void StepCoefficients::validate() const
{
    const std::size_t n = d0.size();
    if (d1.size() != n || d2.size() != n || gamma_min.size() != n || gamma_max.size() != n ||
        stationary.size() != n) {
        throw ValidationError("step coefficient arrays differ in length");
    }
    if (!(dt > 0.0)) {
        throw ValidationError("step coefficients need dt > 0");
    }
    for (std::size_t t = 0; t < n; ++t) {
        const bool signs_ok = form == LossForm::fractional ? (d0[t] >= 0.0 && d2[t] >= 0.0) : d2[t] >= 0.0;
        if (!signs_ok) {
            throw ValidationError("step coefficients violate convexity at step " + std::to_string(t));
        }
    }
}

// ---------------------------------------------------------------------------
// MotorLimits

void MotorLimits::validate() const
{
    if (!(omega_max > 0.0 && T_max > 0.0 && P_max > 0.0) || !std::isfinite(omega_max) ||
        !std::isfinite(T_max) || !std::isfinite(P_max)) {
        throw ValidationError("motor limits must be positive and finite");
    }
}

double MotorLimits::min_speed(double power) const noexcept
{
    return std::abs(power) / T_max;
}

MotorLimits scale(const MotorLimits& limits, double s)
{
    if (!(s > 0.0)) {
        throw ValidationError("motor scale must be positive");
    }
    return {limits.omega_max, limits.T_max * s, limits.P_max * s};
}

// ---------------------------------------------------------------------------
// MotorMap

namespace {

double power_tolerance(const MotorLimits& limits)
{
    return 1e-9 * std::max(1.0, limits.P_max);
}

double speed_tolerance(const MotorLimits& limits)
{
    return 1e-9 * std::max(1.0, limits.omega_max);
}

} // namespace

MotorMap::MotorMap(std::vector<Level> levels, MotorLimits limits)
    : levels_(std::move(levels)), limits_(limits)
{
    limits_.validate();
    std::sort(levels_.begin(), levels_.end(), [](const Level& a, const Level& b) { return a.power < b.power; });
    for (auto& level : levels_) {
        if (level.omega.size() != level.loss.size() || level.omega.empty()) {
            throw ValidationError("map level at " + std::to_string(level.power) + " W is malformed");
        }
        std::vector<std::size_t> order(level.omega.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return level.omega[a] < level.omega[b]; });
        Level sorted{level.power, {}, {}};
        for (std::size_t i : order) {
            if (!sorted.omega.empty() && level.omega[i] == sorted.omega.back()) {
                throw ValidationError("duplicate map sample at omega " + std::to_string(level.omega[i]) +
                                      " on the " + std::to_string(level.power) + " W level");
            }
            if (!(level.loss[i] >= 0.0) || !std::isfinite(level.loss[i])) {
                throw ValidationError("map losses must be non-negative and finite");
            }
            if (level.omega[i] < 0.0) {
                throw ValidationError("map speeds must be non-negative");
            }
            sorted.omega.push_back(level.omega[i]);
            sorted.loss.push_back(level.loss[i]);
        }
        level = std::move(sorted);
    }
    for (std::size_t k = 1; k < levels_.size(); ++k) {
        if (levels_[k].power - levels_[k - 1].power <= power_tolerance(limits_)) {
            throw ValidationError("map power levels are not distinct");
        }
    }
}

MotorMap MotorMap::from_samples(std::span<const MapSample> samples)
{
    if (samples.empty()) {
        throw ValidationError("motor map has no samples");
    }
    MotorLimits limits{0.0, 0.0, 0.0};
    std::vector<std::pair<double, std::size_t>> by_power;
    by_power.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double p = s.omega * s.torque;
        limits.omega_max = std::max(limits.omega_max, s.omega);
        limits.T_max = std::max(limits.T_max, std::abs(s.torque));
        limits.P_max = std::max(limits.P_max, std::abs(p));
        by_power.emplace_back(p, i);
    }
    limits.validate();
    std::stable_sort(by_power.begin(), by_power.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const double tol = power_tolerance(limits);
    std::vector<Level> levels;
    for (const auto& [p, i] : by_power) {
        if (levels.empty() || p - levels.back().power > tol) {
            // snap to an exact zero level when the samples carry no torque
            levels.push_back({std::abs(p) <= tol ? 0.0 : p, {}, {}});
        }
        levels.back().omega.push_back(samples[i].omega);
        levels.back().loss.push_back(samples[i].loss);
    }
    return MotorMap(std::move(levels), limits);
}

std::vector<MapSample> MotorMap::samples() const
{
    std::vector<MapSample> out;
    for (const auto& level : levels_) {
        for (std::size_t j = 0; j < level.omega.size(); ++j) {
            const double w = level.omega[j];
            out.push_back({w, w > 0.0 ? level.power / w : 0.0, level.loss[j]});
        }
    }
    return out;
}

const MotorMap::Level* MotorMap::find_level(double power) const noexcept
{
    const double tol = power_tolerance(limits_);
    auto it = std::lower_bound(levels_.begin(), levels_.end(), power - tol,
                               [](const Level& l, double p) { return l.power < p; });
    if (it != levels_.end() && std::abs(it->power - power) <= tol) {
        return &*it;
    }
    return nullptr;
}

namespace {

// Piecewise-linear evaluation along one level; nullopt outside its span.
std::optional<double> eval_level(const MotorMap::Level& level, double omega, double tol)
{
    const auto& w = level.omega;
    if (omega < w.front() - tol || omega > w.back() + tol) {
        return std::nullopt;
    }
    if (w.size() == 1) {
        return level.loss.front();
    }
    omega = std::clamp(omega, w.front(), w.back());
    auto it = std::upper_bound(w.begin(), w.end(), omega);
    std::size_t j = static_cast<std::size_t>(it - w.begin());
    j = std::min(j, w.size() - 1);
    const std::size_t i = j - 1;
    const double f = (omega - w[i]) / (w[j] - w[i]);
    if (f == 0.0) {
        return level.loss[i];
    }
    return (1.0 - f) * level.loss[i] + f * level.loss[j];
}

std::optional<double> try_interpolate(const std::vector<MotorMap::Level>& levels, const MotorLimits& limits,
                                      double omega, double power)
{
    if (levels.empty()) {
        return std::nullopt;
    }
    const double ptol = power_tolerance(limits);
    const double wtol = speed_tolerance(limits);
    if (power < levels.front().power - ptol || power > levels.back().power + ptol) {
        return std::nullopt;
    }
    auto hi = std::lower_bound(levels.begin(), levels.end(), power,
                               [](const MotorMap::Level& l, double p) { return l.power < p; });
    if (hi != levels.end() && std::abs(hi->power - power) <= ptol) {
        return eval_level(*hi, omega, wtol);
    }
    if (hi != levels.begin() && std::abs(std::prev(hi)->power - power) <= ptol) {
        return eval_level(*std::prev(hi), omega, wtol);
    }
    if (hi == levels.end() || hi == levels.begin()) {
        return std::nullopt;
    }
    const auto& upper = *hi;
    const auto& lower = *std::prev(hi);
    const double wgt = (power - lower.power) / (upper.power - lower.power);
    const double lo_w = (1.0 - wgt) * lower.omega.front() + wgt * upper.omega.front();
    const double hi_w = (1.0 - wgt) * lower.omega.back() + wgt * upper.omega.back();
    if (omega < lo_w - wtol || omega > hi_w + wtol) {
        return std::nullopt;
    }
    const double u = hi_w > lo_w ? std::clamp((omega - lo_w) / (hi_w - lo_w), 0.0, 1.0) : 0.0;
    auto at_u = [&](const MotorMap::Level& l) {
        const double w = l.omega.front() + u * (l.omega.back() - l.omega.front());
        return eval_level(l, w, wtol);
    };
    const auto a = at_u(lower);
    const auto b = at_u(upper);
    if (!a || !b) {
        return std::nullopt;
    }
    return (1.0 - wgt) * *a + wgt * *b;
}

} // namespace

double MotorMap::interpolate(double omega, double power) const
{
    const auto value = try_interpolate(levels_, limits_, omega, power);
    if (!value) {
        throw EnvelopeError("operating point (omega " + std::to_string(omega) + " rad/s, power " +
                            std::to_string(power) + " W) outside the motor map envelope");
    }
    return *value;
}

bool MotorMap::contains(double omega, double power) const noexcept
{
    return try_interpolate(levels_, limits_, omega, power).has_value();
}

MotorMap MotorMap::scaled(double s) const
{
    auto levels = levels_;
    for (auto& level : levels) {
        level.power *= s;
        for (double& l : level.loss) {
            l *= s;
        }
    }
    return MotorMap(std::move(levels), scale(limits_, s));
}

// ---------------------------------------------------------------------------
// LossModel

LossModel::LossModel(LossForm form, std::vector<double> power_grid, std::vector<LossCoefficients> coeffs,
                     MotorLimits limits)
    : form_(form), power_(std::move(power_grid)), coeffs_(std::move(coeffs)), limits_(limits)
{
    validate();
}

void LossModel::validate() const
{
    limits_.validate();
    if (power_.empty() || power_.size() != coeffs_.size()) {
        throw ValidationError("loss model grid and coefficients differ in length");
    }
    for (std::size_t k = 0; k < power_.size(); ++k) {
        if (k > 0 && !(power_[k] > power_[k - 1])) {
            throw ValidationError("loss model power grid must be strictly increasing");
        }
        const auto& c = coeffs_[k];
        if (!std::isfinite(c.c0) || !std::isfinite(c.c1) || !std::isfinite(c.c2)) {
            throw ValidationError("loss model coefficients must be finite");
        }
        if (c.c2 < 0.0) {
            throw ValidationError("loss model violates the non-negative speed-linear term at grid power " +
                                  std::to_string(power_[k]));
        }
        if (form_ == LossForm::fractional) {
            if (c.c0 < 0.0) {
                throw ValidationError("fractional model has p0 < 0 at grid power " + std::to_string(power_[k]));
            }
            if (power_[k] == 0.0 && c.c0 != 0.0) {
                throw ValidationError("fractional model needs p0(0) = 0");
            }
        }
    }
}

LossCoefficients LossModel::coefficients(double power) const
{
    const double tol = 1e-9 * std::max(1.0, limits_.P_max);
    if (power < power_.front() - tol || power > power_.back() + tol) {
        throw EnvelopeError("power " + std::to_string(power) + " W outside the loss model grid [" +
                            std::to_string(power_.front()) + ", " + std::to_string(power_.back()) + "]");
    }
    if (power_.size() == 1) {
        return coeffs_.front();
    }
    power = std::clamp(power, power_.front(), power_.back());
    auto it = std::upper_bound(power_.begin(), power_.end(), power);
    std::size_t j = std::min(static_cast<std::size_t>(it - power_.begin()), power_.size() - 1);
    const std::size_t i = j - 1;
    const double f = (power - power_[i]) / (power_[j] - power_[i]);
    if (f == 0.0) {
        return coeffs_[i];
    }
    if (f == 1.0) {
        return coeffs_[j];
    }
    const auto& a = coeffs_[i];
    const auto& b = coeffs_[j];
    return {(1.0 - f) * a.c0 + f * b.c0, (1.0 - f) * a.c1 + f * b.c1, (1.0 - f) * a.c2 + f * b.c2};
}

double LossModel::loss(double power, double omega) const
{
    if (omega < 0.0) {
        throw ValidationError("motor speed must be non-negative");
    }
    const auto c = coefficients(power);
    if (form_ == LossForm::fractional) {
        if (omega == 0.0) {
            return c.c0 == 0.0 ? c.c1 : infinity;
        }
        return c.c0 / omega + c.c1 + c.c2 * omega;
    }
    return c.c0 + (c.c1 + c.c2 * omega) * omega;
}

LossModel scale(const LossModel& model, double s)
{
    if (!(s > 0.0)) {
        throw ValidationError("motor scale must be positive");
    }
    auto power = model.power_grid();
    auto coeffs = model.grid_coefficients();
    for (double& p : power) {
        p *= s;
    }
    for (auto& c : coeffs) {
        c = {c.c0 * s, c.c1 * s, c.c2 * s};
    }
    return LossModel(model.form(), std::move(power), std::move(coeffs), scale(model.limits(), s));
}

std::vector<double> uniform_power_grid(double p_max, int points)
{
    if (points < 2) {
        throw FitError("insufficient contours: the power grid needs at least 2 levels, got " +
                       std::to_string(points));
    }
    std::vector<double> grid(points);
    const int intervals = points - 1;
    for (int k = 0; k < points; ++k) {
        grid[k] = p_max * (static_cast<double>(2 * k - intervals) / static_cast<double>(intervals));
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

double basis(LossForm form, int column, double omega)
{
    if (form == LossForm::fractional) {
        switch (column) {
        case 0: return 1.0 / omega;
        case 1: return 1.0;
        default: return omega;
        }
    }
    switch (column) {
    case 0: return 1.0;
    case 1: return omega;
    default: return omega * omega;
    }
}

double residual(LossForm form, const LossCoefficients& c, std::span<const double> omega,
                std::span<const double> loss, bool c0_used)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        double model = c.c1 * basis(form, 1, omega[i]) + c.c2 * basis(form, 2, omega[i]);
        if (c0_used) {
            model += c.c0 * basis(form, 0, omega[i]);
        }
        const double r = model - loss[i];
        sum += r * r;
    }
    return sum;
}

// Least squares over the columns flagged in `free_cols`; others are zero.
LossCoefficients solve_subset(LossForm form, std::span<const double> omega, std::span<const double> loss,
                              const std::array<bool, 3>& free_cols)
{
    std::array<int, 3> cols{};
    int n_free = 0;
    for (int c = 0; c < 3; ++c) {
        if (free_cols[c]) {
            cols[n_free++] = c;
        }
    }
    LossCoefficients out;
    if (n_free == 0) {
        return out;
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(omega.size());
    Eigen::MatrixXd A(rows, n_free);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (int k = 0; k < n_free; ++k) {
            A(i, k) = basis(form, cols[k], omega[i]);
        }
        b(i) = loss[i];
    }
    // column equilibration keeps 1/omega, 1, omega and omega^2 comparable
    Eigen::VectorXd norms = A.colwise().norm().transpose();
    for (int k = 0; k < n_free; ++k) {
        if (norms(k) == 0.0) {
            norms(k) = 1.0;
        }
        A.col(k) /= norms(k);
    }
    const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(b).cwiseQuotient(norms);
    double* dst[3] = {&out.c0, &out.c1, &out.c2};
    for (int k = 0; k < n_free; ++k) {
        *dst[cols[k]] = x(k);
    }
    return out;
}

void check_contour(LossForm form, std::span<const double> omega, std::span<const double> loss, bool pin_c0)
{
    if (omega.size() != loss.size()) {
        throw FitError("contour speed and loss arrays differ in length");
    }
    if (omega.size() < 3) {
        throw FitError("insufficient data: contour has " + std::to_string(omega.size()) +
                       " samples, need at least 3");
    }
    if (form == LossForm::fractional && !pin_c0) {
        for (double w : omega) {
            if (!(w > 0.0)) {
                throw FitError("fractional fit needs positive speeds unless p0 is pinned");
            }
        }
    }
}

} // namespace

ContourFit fit_contour_unconstrained(LossForm form, std::span<const double> omega, std::span<const double> loss,
                                     bool pin_c0)
{
    check_contour(form, omega, loss, pin_c0);
    const bool c0_free = !(pin_c0 && form == LossForm::fractional);
    ContourFit fit;
    fit.coeffs = solve_subset(form, omega, loss, {c0_free, true, true});
    fit.residual = residual(form, fit.coeffs, omega, loss, c0_free);
    return fit;
}

ContourFit fit_contour(LossForm form, std::span<const double> omega, std::span<const double> loss, bool pin_c0)
{
    check_contour(form, omega, loss, pin_c0);
    const bool pinned = pin_c0 && form == LossForm::fractional;
    // sign-constrained columns: fractional {c0, c2}, quadratic {c2}
    const bool c0_constrained = form == LossForm::fractional && !pinned;
    std::optional<ContourFit> best;
    for (int mask = 0; mask < 4; ++mask) {
        const bool drop_c0 = (mask & 1) != 0;
        const bool drop_c2 = (mask & 2) != 0;
        if (drop_c0 && !c0_constrained) {
            continue;
        }
        std::array<bool, 3> free_cols{!(pinned || drop_c0), true, !drop_c2};
        LossCoefficients c = solve_subset(form, omega, loss, free_cols);
        if (c.c2 < 0.0 || (form == LossForm::fractional && c.c0 < 0.0)) {
            continue;
        }
        const double r = residual(form, c, omega, loss, free_cols[0]);
        if (!best || r < best->residual) {
            best = ContourFit{c, r};
        }
    }
    // the all-dropped face is always feasible, so best is set
    return *best;
}

LossModel fit_model(LossForm form, const MotorMap& map, std::span<const double> power_grid)
{
    if (power_grid.size() < 2) {
        throw FitError("insufficient contours: the power grid needs at least 2 levels");
    }
    std::vector<LossCoefficients> coeffs(power_grid.size());
    const double tol = 1e-9 * std::max(1.0, map.limits().P_max);
    parallel_for(power_grid.size(), [&](std::size_t k) {
        const double p = power_grid[k];
        const auto* level = map.find_level(p);
        if (!level || level->omega.size() < 3) {
            throw FitError("insufficient data on the " + std::to_string(p) + " W contour: " +
                           std::to_string(level ? level->omega.size() : 0) + " samples, need at least 3");
        }
        const bool at_zero = std::abs(p) <= tol;
        coeffs[k] = fit_contour(form, level->omega, level->loss, at_zero).coeffs;
        if (at_zero && form == LossForm::fractional) {
            coeffs[k].c0 = 0.0;
        }
    });
    std::vector<double> grid(power_grid.begin(), power_grid.end());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(grid[k]) <= tol) {
            grid[k] = 0.0;
        }
    }
    return LossModel(form, std::move(grid), std::move(coeffs), map.limits());
}

LossModel fit_fractional(const MotorMap& map, std::span<const double> power_grid)
{
    return fit_model(LossForm::fractional, map, power_grid);
}

LossModel fit_quadratic(const MotorMap& map, std::span<const double> power_grid)
{
    return fit_model(LossForm::quadratic, map, power_grid);
}

double normalized_rmse(const LossModel& model, const MotorMap& map)
{
    double sq = 0.0;
    double dc = 0.0;
    std::size_t n = 0;
    const double lo = model.power_grid().front();
    const double hi = model.power_grid().back();
    for (const auto& level : map.levels()) {
        if (level.power < lo || level.power > hi) {
            continue;
        }
        for (std::size_t j = 0; j < level.omega.size(); ++j) {
            const double predicted = model.loss(level.power, level.omega[j]);
            if (!std::isfinite(predicted)) {
                continue;
            }
            const double r = predicted - level.loss[j];
            sq += r * r;
            dc += std::abs(level.power + level.loss[j]);
            ++n;
        }
    }
    if (n == 0 || dc == 0.0) {
        return 0.0;
    }
    return std::sqrt(sq / static_cast<double>(n)) / (dc / static_cast<double>(n));
}

StepCoefficients step_coefficients(const LossModel& model, std::span<const double> p_m, std::span<const double> v,
                                   double r_w, double dt)
{
    if (p_m.size() != v.size()) {
        throw ValidationError("power and speed trajectories differ in length");
    }
    StepCoefficients out;
    out.form = model.form();
    out.dt = dt;
    out.resize(v.size());
    const bool fractional = model.form() == LossForm::fractional;
    for (std::size_t t = 0; t < v.size(); ++t) {
        if (v[t] <= 0.0) {
            out.stationary[t] = 1;
            const auto c = model.coefficients(0.0);
            (fractional ? out.d1[t] : out.d0[t]) = fractional ? c.c1 : c.c0;
            continue;
        }
        LossCoefficients c;
        try {
            c = model.coefficients(p_m[t]);
        } catch (const EnvelopeError& e) {
            throw EnvelopeError(std::string(e.what()) + " at step " + std::to_string(t), t);
        }
        const double w = v[t] / r_w;
        if (fractional) {
            out.d0[t] = c.c0 / w;
            out.d1[t] = c.c1;
            out.d2[t] = c.c2 * w;
        } else {
            out.d0[t] = c.c0;
            out.d1[t] = c.c1 * w;
            out.d2[t] = c.c2 * w * w;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic maps

LossFunction mixed_loss(const MixedLossParams& p)
{
    return [p](double omega, double power) {
        if (omega <= 0.0) {
            return power == 0.0 ? p.constant : infinity;
        }
        const double torque = power / omega;
        return p.constant + p.iron * omega + p.eddy * omega * omega + p.windage * omega * omega * omega +
               p.copper * torque * torque;
    };
}

LossFunction fractional_loss_default()
{
    return [](double omega, double power) {
        const double ap = std::abs(power);
        const double p1 = 150.0 + 0.004 * ap;
        const double p2 = 0.45 + 2e-6 * ap;
        if (power == 0.0) {
            return p1 + p2 * omega;
        }
        if (omega <= 0.0) {
            return infinity;
        }
        const double p0 = 1.2e-4 * power * power;
        return p0 / omega + p1 + p2 * omega;
    };
}

LossFunction quadratic_loss_default()
{
    return [](double omega, double power) {
        const double ap = std::abs(power);
        return 150.0 + 0.01 * ap + 0.4 * omega + (3e-4 + 2e-9 * ap) * omega * omega;
    };
}

LossFunction zero_loss()
{
    return [](double, double) { return 0.0; };
}

LossFunction named_loss(const std::string& name)
{
    if (name == "mixed") return mixed_loss();
    if (name == "fractional") return fractional_loss_default();
    if (name == "quadratic") return quadratic_loss_default();
    if (name == "zero") return zero_loss();
    throw ValidationError("unknown ground-truth loss '" + name + "'");
}

MotorMap synth_map(const LossFunction& truth, const MotorLimits& limits, MapResolution resolution)
{
    limits.validate();
    if (resolution.power_intervals < 2 || resolution.power_intervals % 2 != 0) {
        throw ValidationError("power_intervals must be even and >= 2");
    }
    if (resolution.speed_intervals < 2) {
        throw ValidationError("speed_intervals must be >= 2");
    }
    const int L = resolution.power_intervals;
    const int M = resolution.speed_intervals;
    std::vector<MotorMap::Level> levels;
    for (int k = 0; k <= L; ++k) {
        const double power = limits.P_max * (static_cast<double>(2 * k - L) / static_cast<double>(L));
        const double w_lo = limits.min_speed(power);
        if (w_lo >= limits.omega_max) {
            continue;
        }
        MotorMap::Level level{power, {}, {}};
        for (int j = 0; j <= M; ++j) {
            const double w = w_lo + (limits.omega_max - w_lo) * (static_cast<double>(j) / static_cast<double>(M));
            const double l = truth(w, power);
            if (!(l >= 0.0) || !std::isfinite(l)) {
                throw ValidationError("ground truth produced an invalid loss " + std::to_string(l) + " W at omega " +
                                      std::to_string(w) + ", power " + std::to_string(power));
            }
            level.omega.push_back(w);
            level.loss.push_back(l);
        }
        levels.push_back(std::move(level));
    }
    return MotorMap(std::move(levels), limits);
}

} // namespace gearopt
