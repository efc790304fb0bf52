#include "gearopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "gearopt/error.hpp"

namespace gearopt {

namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

double bound_slack(double x)
{
    return 1e-12 * std::max(1.0, std::abs(x));
}

} // namespace

RatioBounds per_step_bounds(const EmDemand& demand, const MotorLimits& limits, const TransmissionSpec& spec,
                            const DriveCycle& cycle, double r_w, BoundsOptions options)
{
    const std::size_t n = cycle.size();
    if (demand.power.size() != n || demand.wheel_torque.size() != n) {
        throw ValidationError("demand and cycle differ in length");
    }
    const bool cvt = spec.kind == TransmissionKind::cvt;
    RatioBounds b;
    b.lower.resize(n);
    b.upper.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double v = cycle.v[t];
        if (v <= 0.0) {
            b.lower[t] = cvt ? spec.gamma_cvt_min : 0.0;
            b.upper[t] = cvt ? spec.gamma_cvt_max : infinity;
            continue;
        }
        double lo = 0.0;
        if (demand.power[t] > 0.0 || options.strict_torque) {
            lo = std::abs(demand.wheel_torque[t]) / limits.T_max;
        }
        double hi = limits.omega_max * r_w / v;
        if (cvt) {
            lo = std::max(lo, spec.gamma_cvt_min);
            hi = std::min(hi, spec.gamma_cvt_max);
        }
        if (lo > hi + bound_slack(hi)) {
            throw InfeasibleError("no admissible ratio at step " + std::to_string(t) + ": torque needs gamma >= " +
                                      fmt(lo) + ", speed allows gamma <= " + fmt(hi),
                                  t);
        }
        b.lower[t] = std::min(lo, hi);
        b.upper[t] = hi;
    }
    return b;
}

void apply_bounds(StepCoefficients& coeffs, const RatioBounds& bounds)
{
    if (bounds.lower.size() != coeffs.size() || bounds.upper.size() != coeffs.size()) {
        throw ValidationError("bounds and coefficients differ in length");
    }
    coeffs.gamma_min = bounds.lower;
    coeffs.gamma_max = bounds.upper;
}

double towing_ratio_floor(const VehicleParams& params, double vehicle_mass, const MotorLimits& limits, double eta)
{
    return vehicle_mass * params.g * std::sin(params.alpha0) * params.r_w / (limits.T_max * eta);
}

double clamp_minimizer(LossForm form, double c0, double c1, double c2, double lo, double hi, double fallback)
{
    if (lo > hi + bound_slack(hi)) {
        throw InfeasibleError("empty ratio interval [" + fmt(lo) + ", " + fmt(hi) + "]");
    }
    hi = std::max(lo, hi);
    auto unbounded = [&] {
        if (!std::isfinite(hi)) {
            throw InfeasibleError("loss keeps decreasing with the ratio and no upper ratio bound applies");
        }
        return hi;
    };
    double x;
    if (form == LossForm::fractional) {
        if (c0 > 0.0 && c2 > 0.0) {
            x = std::sqrt(c0 / c2);
        } else if (c0 > 0.0) {
            x = unbounded();
        } else if (c2 > 0.0) {
            x = lo;
        } else {
            x = fallback;
        }
    } else {
        if (c2 > 0.0) {
            x = -c1 / (2.0 * c2);
        } else if (c1 < 0.0) {
            x = unbounded();
        } else if (c1 > 0.0) {
            x = lo;
        } else {
            x = fallback;
        }
    }
    return std::clamp(x, lo, hi);
}

int GearTrajectory::count_shifts(std::span<const int> gear) noexcept
{
    int shifts = 0;
    for (std::size_t t = 1; t < gear.size(); ++t) {
        shifts += gear[t] != gear[t - 1] ? 1 : 0;
    }
    return shifts;
}

Cost objective(const GearTrajectory& trajectory, std::span<const double> ratios, const StepCoefficients& coeffs,
               double c_shift)
{
    if (trajectory.gear.size() != coeffs.size()) {
        throw ValidationError("trajectory and coefficients differ in length");
    }
    Cost c;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        c.loss += coeffs.loss(t, ratios[trajectory.gear[t]]) * coeffs.dt;
    }
    c.shift = c_shift * GearTrajectory::count_shifts(trajectory.gear);
    c.J = c.loss + c.shift;
    return c;
}

Cost objective(std::span<const double> gamma, const StepCoefficients& coeffs)
{
    if (gamma.size() != coeffs.size()) {
        throw ValidationError("ratio trajectory and coefficients differ in length");
    }
    Cost c;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        c.loss += coeffs.loss(t, gamma[t]) * coeffs.dt;
    }
    c.J = c.loss;
    return c;
}

namespace {

void fill_ratio_solution(DesignSolution& s, const StepCoefficients& coeffs)
{
    s.step_loss.resize(coeffs.size());
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        s.step_loss[t] = coeffs.loss(t, s.gamma[t]);
    }
}

} // namespace

DesignSolution optimize_cvt(const StepCoefficients& coeffs)
{
    coeffs.validate();
    DesignSolution s;
    s.spec.kind = TransmissionKind::cvt;
    s.gamma.resize(coeffs.size());
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        const double lo = coeffs.gamma_min[t];
        const double hi = coeffs.gamma_max[t];
        try {
            s.gamma[t] = clamp_minimizer(coeffs.form, coeffs.d0[t], coeffs.d1[t], coeffs.d2[t], lo, hi, lo);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError(std::string(e.what()) + " at step " + std::to_string(t), t);
        }
    }
    s.cost = objective(s.gamma, coeffs);
    fill_ratio_solution(s, coeffs);
    return s;
}

DesignSolution optimize_fgt(const StepCoefficients& coeffs, double towing_floor)
{
    coeffs.validate();
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    double lo = 0.0, hi = infinity;
    std::size_t lo_step = InfeasibleError::no_step, hi_step = InfeasibleError::no_step;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        e0 += coeffs.d0[t];
        e1 += coeffs.d1[t];
        e2 += coeffs.d2[t];
        if (coeffs.gamma_min[t] > lo) {
            lo = coeffs.gamma_min[t];
            lo_step = t;
        }
        if (coeffs.gamma_max[t] < hi) {
            hi = coeffs.gamma_max[t];
            hi_step = t;
        }
    }
    const bool towing_binds = towing_floor > lo;
    lo = std::max(lo, towing_floor);
    if (lo > hi + bound_slack(hi)) {
        const std::string need = towing_binds ? "towing on the reference slope needs gamma >= " + fmt(lo)
                                              : "torque at step " + std::to_string(lo_step) +
                                                    " needs gamma >= " + fmt(lo);
        throw InfeasibleError("no single ratio fits: " + need + ", speed at step " + std::to_string(hi_step) +
                                  " allows gamma <= " + fmt(hi),
                              towing_binds ? hi_step : lo_step);
    }
    DesignSolution s;
    s.spec = TransmissionSpec::fgt();
    const double gamma = clamp_minimizer(coeffs.form, e0, e1, e2, lo, hi, lo);
    s.ratios = {gamma};
    s.gamma.assign(coeffs.size(), gamma);
    s.towing_floor = towing_floor;
    s.cost = objective(s.gamma, coeffs);
    fill_ratio_solution(s, coeffs);
    return s;
}

GearTrajectory gearshift_dp(std::span<const double> ratios, const StepCoefficients& coeffs, double c_shift,
                            std::optional<int> initial_gear)
{
    const std::size_t T = coeffs.size();
    const std::size_t n = ratios.size();
    if (n == 0) {
        throw ValidationError("gearshift needs at least one ratio");
    }
    if (c_shift < 0.0) {
        throw ValidationError("shift cost must be non-negative");
    }
    if (initial_gear && (*initial_gear < 0 || static_cast<std::size_t>(*initial_gear) >= n)) {
        throw ValidationError("initial gear out of range");
    }
    // stage[t*n + i]: loss energy of gear i at step t, +inf when infeasible
    std::vector<double> stage(T * n);
    for (std::size_t t = 0; t < T; ++t) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ratios[i];
            const bool ok = coeffs.feasible(t, r);
            stage[t * n + i] = ok ? coeffs.loss(t, r) * coeffs.dt : infinity;
            any = any || ok;
        }
        if (!any) {
            throw InfeasibleError("no gear admissible at step " + std::to_string(t) + " (ratio bounds [" +
                                      fmt(coeffs.gamma_min[t]) + ", " + fmt(coeffs.gamma_max[t]) + "])",
                                  t);
        }
    }
    GearTrajectory traj;
    traj.gear.resize(T);
    if (T == 0) {
        return traj;
    }
    auto argmin = [n](const double* row) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (row[i] < row[best]) {
                best = i;
            }
        }
        return best;
    };

    if (c_shift == 0.0 && !initial_gear) {
        for (std::size_t t = 0; t < T; ++t) {
            traj.gear[t] = static_cast<int>(argmin(&stage[t * n]));
        }
        traj.shifts = GearTrajectory::count_shifts(traj.gear);
        return traj;
    }

    // cost-to-go W_t(i) = L_t(i) + min(W_{t+1}(i), c + min_j W_{t+1}(j))
    std::vector<double> W(T * n);
    std::copy_n(&stage[(T - 1) * n], n, &W[(T - 1) * n]);
    for (std::size_t t = T - 1; t-- > 0;) {
        const double* next = &W[(t + 1) * n];
        const double switch_cost = c_shift + next[argmin(next)];
        for (std::size_t i = 0; i < n; ++i) {
            W[t * n + i] = stage[t * n + i] + std::min(next[i], switch_cost);
        }
    }
    std::size_t g;
    if (initial_gear) {
        const auto s = static_cast<std::size_t>(*initial_gear);
        const std::size_t best = argmin(&W[0]);
        g = W[s] <= c_shift + W[best] ? s : best;
    } else {
        g = argmin(&W[0]);
    }
    traj.gear[0] = static_cast<int>(g);
    for (std::size_t t = 1; t < T; ++t) {
        const double* row = &W[t * n];
        const std::size_t best = argmin(row);
        if (!(row[g] <= c_shift + row[best])) {
            g = best;
        }
        traj.gear[t] = static_cast<int>(g);
    }
    traj.shifts = GearTrajectory::count_shifts(traj.gear);
    return traj;
}

std::vector<double> ratio_update(const GearTrajectory& trajectory, const StepCoefficients& coeffs,
                                 double towing_floor, std::span<const double> previous)
{
    const std::size_t n = previous.size();
    if (trajectory.gear.size() != coeffs.size()) {
        throw ValidationError("trajectory and coefficients differ in length");
    }
    std::vector<double> f0(n, 0.0), f1(n, 0.0), f2(n, 0.0), lo(n, 0.0), hi(n, infinity);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        const auto i = static_cast<std::size_t>(trajectory.gear[t]);
        f0[i] += coeffs.d0[t];
        f1[i] += coeffs.d1[t];
        f2[i] += coeffs.d2[t];
        lo[i] = std::max(lo[i], coeffs.gamma_min[t]);
        hi[i] = std::min(hi[i], coeffs.gamma_max[t]);
        ++count[i];
    }
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (previous[i] >= previous[top]) {
            top = i;
        }
    }
    std::vector<double> out(previous.begin(), previous.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (i == top) {
            lo[i] = std::max(lo[i], towing_floor);
        }
        if (count[i] == 0) {
            if (i == top) {
                out[i] = std::max(out[i], towing_floor);
            }
            continue;
        }
        out[i] = clamp_minimizer(coeffs.form, f0[i], f1[i], f2[i], lo[i], hi[i], previous[i]);
    }
    return out;
}

namespace {

// Ratios hitting every step interval, greedy by right endpoint; minimal count.
std::vector<double> stabbing_ratios(const StepCoefficients& coeffs)
{
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (!coeffs.stationary[t]) {
            order.push_back(t);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return coeffs.gamma_max[a] < coeffs.gamma_max[b]; });
    std::vector<double> points;
    for (std::size_t t : order) {
        if (points.empty() || coeffs.gamma_min[t] > points.back()) {
            points.push_back(coeffs.gamma_max[t]);
        }
    }
    return points;
}

bool covers(std::span<const double> ratios, const StepCoefficients& coeffs)
{
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        bool ok = false;
        for (double r : ratios) {
            ok = ok || coeffs.feasible(t, r);
        }
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::vector<double> geometric(double lo, double hi, int n)
{
    std::vector<double> r(n);
    if (n == 1) {
        r[0] = std::sqrt(lo * hi);
        return r;
    }
    for (int i = 0; i < n; ++i) {
        r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    r.back() = hi;
    return r;
}

} // namespace

std::vector<double> initial_ratios(int n_gears, const StepCoefficients& coeffs, double towing_floor)
{
    if (n_gears < 1) {
        throw ValidationError("need at least one gear");
    }
    double a = infinity;
    double b = towing_floor;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (coeffs.stationary[t]) {
            continue;
        }
        a = std::min(a, coeffs.gamma_max[t]);
        b = std::max(b, coeffs.gamma_min[t]);
    }
    if (!std::isfinite(a)) {
        return std::vector<double>(n_gears, std::max(b, 1.0));
    }
    if (!(b > 0.0)) {
        b = a;
    }
    auto candidate = geometric(std::min(a, b), std::max(a, b), n_gears);
    if (covers(candidate, coeffs) && candidate.back() >= towing_floor) {
        return candidate;
    }
    // the spread misses some steps: start from a minimal hitting set instead
    auto points = stabbing_ratios(coeffs);
    if (points.empty() || points.back() < towing_floor) {
        points.push_back(towing_floor);
    }
    if (points.size() > static_cast<std::size_t>(n_gears)) {
        throw InfeasibleError("cycle needs at least " + std::to_string(points.size()) + " distinct ratios, have " +
                              std::to_string(n_gears));
    }
    while (points.size() < static_cast<std::size_t>(n_gears)) {
        std::size_t gap = 0;
        double widest = -1.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i) {
            const double w = points[i + 1] / points[i];
            if (w > widest) {
                widest = w;
                gap = i;
            }
        }
        if (points.size() == 1) {
            points.push_back(points[0]);
            continue;
        }
        points.insert(points.begin() + static_cast<std::ptrdiff_t>(gap) + 1,
                      std::sqrt(points[gap] * points[gap + 1]));
    }
    return points;
}

namespace {

// One run of the alternating descent from `ratios`.
DesignSolution descend(int n_gears, const StepCoefficients& coeffs, double c_shift, double towing_floor,
                       std::vector<double> ratios, const MgtOptions& options)
{
    // start from a set that already meets the towing floor
    auto top = std::max_element(ratios.begin(), ratios.end());
    *top = std::max(*top, towing_floor);
    DesignSolution s;
    s.spec = TransmissionSpec::mgt(n_gears);
    s.towing_floor = towing_floor;
    auto increased = [](double now, double before) {
        return std::isfinite(before) && now > before + 1e-9 * std::abs(before) + 1e-12;
    };
    GearTrajectory traj;
    double J_prev = infinity;
    double J_half = infinity;
    int it = 0;
    while (it < options.max_iterations) {
        ++it;
        traj = gearshift_dp(ratios, coeffs, c_shift);
        const double J_dp = objective(traj, ratios, coeffs, c_shift).J;
        if (increased(J_dp, J_half)) {
            throw InternalError("objective increased in the gear step: " + fmt(J_half) + " -> " + fmt(J_dp));
        }
        ratios = ratio_update(traj, coeffs, towing_floor, ratios);
        const double J_r = objective(traj, ratios, coeffs, c_shift).J;
        if (increased(J_r, J_dp)) {
            throw InternalError("objective increased in the ratio step: " + fmt(J_dp) + " -> " + fmt(J_r));
        }
        s.history.push_back(J_dp);
        s.history.push_back(J_r);
        J_half = J_r;
        if (std::abs(J_r - J_prev) <= options.epsilon * std::abs(J_r)) {
            break;
        }
        J_prev = J_r;
    }
    // present gears in ascending ratio order
    std::vector<int> order(n_gears);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ratios[a] < ratios[b]; });
    std::vector<int> rank(n_gears);
    for (int k = 0; k < n_gears; ++k) {
        rank[order[k]] = k;
    }
    s.ratios.resize(n_gears);
    for (int k = 0; k < n_gears; ++k) {
        s.ratios[k] = ratios[order[k]];
    }
    for (int& g : traj.gear) {
        g = rank[g];
    }
    traj.shifts = GearTrajectory::count_shifts(traj.gear);
    s.gear = traj.gear;
    s.shifts = traj.shifts;
    s.gamma.resize(coeffs.size());
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        s.gamma[t] = s.ratios[s.gear[t]];
    }
    s.cost = objective(traj, s.ratios, coeffs, c_shift);
    s.iterations = it;
    fill_ratio_solution(s, coeffs);
    return s;
}

// Geometric spreads between quantiles of the per-step CVT optima.
std::vector<std::vector<double>> quantile_starts(int n_gears, const StepCoefficients& coeffs)
{
    const auto cvt = optimize_cvt(coeffs);
    std::vector<double> m;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (!coeffs.stationary[t] && std::isfinite(cvt.gamma[t]) && cvt.gamma[t] > 0.0) {
            m.push_back(cvt.gamma[t]);
        }
    }
    std::vector<std::vector<double>> starts;
    if (m.empty()) {
        return starts;
    }
    std::sort(m.begin(), m.end());
    auto q = [&](double p) {
        return m[static_cast<std::size_t>(std::lround(p * static_cast<double>(m.size() - 1)))];
    };
    static constexpr double levels[] = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98};
    for (std::size_t i = 0; i < std::size(levels); ++i) {
        for (std::size_t j = i + 1; j < std::size(levels); ++j) {
            starts.push_back(geometric(q(levels[i]), q(levels[j]), n_gears));
        }
    }
    return starts;
}

} // namespace

DesignSolution optimize_mgt(int n_gears, const StepCoefficients& coeffs, double c_shift, double towing_floor,
                            const MgtOptions& options)
{
    coeffs.validate();
    if (n_gears < 1) {
        throw ValidationError("need at least one gear");
    }
    if (!(options.epsilon > 0.0)) {
        throw ValidationError("convergence tolerance must be positive");
    }
    if (!options.init.empty()) {
        if (options.init.size() != static_cast<std::size_t>(n_gears)) {
            throw ValidationError("initial ratios must have one entry per gear");
        }
        return descend(n_gears, coeffs, c_shift, towing_floor, options.init, options);
    }
    std::optional<DesignSolution> best;
    std::optional<InfeasibleError> first_error;
    try {
        best = descend(n_gears, coeffs, c_shift, towing_floor, initial_ratios(n_gears, coeffs, towing_floor),
                       options);
    } catch (const InfeasibleError& e) {
        first_error = e;
    }
    if (options.multi_start && n_gears > 1) {
        for (auto& start : quantile_starts(n_gears, coeffs)) {
            try {
                auto s = descend(n_gears, coeffs, c_shift, towing_floor, std::move(start), options);
                if (!best || s.cost.J < best->cost.J) {
                    best = std::move(s);
                }
            } catch (const InfeasibleError&) {
                // this start leaves some step without a usable gear
            }
        }
    }
    if (!best) {
        throw *first_error;
    }
    return *best;
}

} // namespace gearopt
