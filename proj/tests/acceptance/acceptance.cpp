// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

#include "gearopt/error.hpp"
#include "gearopt/optimizer.hpp"
#include "gearopt/oracle.hpp"
#include "gearopt/simulate.hpp"
#include "gearopt/sizing.hpp"

#ifdef GEAROPT_WITH_CLI
#include "cli.hpp"
#endif

using namespace gearopt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double scalar(LossForm form, double c0, double c1, double c2, double g)
{
    return form == LossForm::fractional ? c0 / g + c1 + c2 * g : c0 + c1 * g + c2 * g * g;
}

// Grid argmin and minimum value, written independently of the library.
std::pair<double, double> grid_min(LossForm form, double c0, double c1, double c2, double lo, double hi, int n)
{
    double best = lo, best_v = scalar(form, c0, c1, c2, lo);
    for (int k = 1; k < n; ++k) {
        const double g = lo + (hi - lo) * k / (n - 1);
        const double v = scalar(form, c0, c1, c2, g);
        if (v < best_v) {
            best_v = v;
            best = g;
        }
    }
    return {best, best_v};
}

bool history_monotone(const DesignSolution& s)
{
    for (std::size_t k = 1; k < s.history.size(); ++k) {
        if (s.history[k] > s.history[k - 1] + 1e-9 * std::abs(s.history[k - 1])) return false;
    }
    return true;
}

// Every optimize_mgt result produced during the run, for criterion 5.
struct MgtLog {
    int runs = 0;
    int max_iterations = 0;
    long total_iterations = 0;
    int non_monotone = 0;

    void add(const DesignSolution& s)
    {
        if (s.history.empty()) return;
        ++runs;
        max_iterations = std::max(max_iterations, s.iterations);
        total_iterations += s.iterations;
        if (!history_monotone(s)) ++non_monotone;
    }
};

MgtLog mgt_log;

// ---------------------------------------------------------------------------

Outcome cvt_exactness()
{
    std::mt19937_64 rng(101);
    const int points = 10000;
    int off_cell = 0, worse = 0;
    for (const auto form : {LossForm::fractional, LossForm::quadratic}) {
        const auto c = testing::random_steps(rng, 1000, 1.0, form);
        const auto s = optimize_cvt(c);
        for (std::size_t t = 0; t < c.size(); ++t) {
            const double lo = c.gamma_min[t], hi = c.gamma_max[t];
            const auto [g, v] = grid_min(form, c.d0[t], c.d1[t], c.d2[t], lo, hi, points);
            if (std::abs(s.gamma[t] - g) > (hi - lo) / (points - 1)) ++off_cell;
            if (c.loss(t, s.gamma[t]) > v + 1e-12 * std::abs(v)) ++worse;
        }
    }
    return {off_cell == 0 && worse == 0,
            fmt("2x1000 steps: %d outside one grid cell, %d above the grid minimum", off_cell, worse)};
}

Outcome fgt_exactness()
{
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int points = 10000;
    int off_cell = 0, worse = 0, clamped = 0, clamp_wrong = 0;
    for (int inst = 0; inst < 100; ++inst) {
        auto c = testing::random_steps(rng, 30);
        const double L = 1.0 + 3.0 * u(rng), H = 12.0 + 13.0 * u(rng);
        double e0 = 0, e2 = 0;
        for (std::size_t t = 0; t < c.size(); ++t) {
            c.gamma_min[t] = L * (0.5 + 0.5 * u(rng));
            c.gamma_max[t] = H * (1.0 + 0.5 * u(rng));
            e0 += c.d0[t];
            e2 += c.d2[t];
        }
        const double free = std::sqrt(e0 / e2);
        double floor = 0.0, expect = 0.0;
        if (inst < 10) {
            // upper bounds below the free optimum
            for (std::size_t t = 0; t < c.size(); ++t) {
                c.gamma_min[t] = std::min(c.gamma_min[t], 0.4 * free);
                c.gamma_max[t] = 0.7 * free * (1.0 + 0.2 * u(rng));
            }
            expect = *std::min_element(c.gamma_max.begin(), c.gamma_max.end());
        } else if (inst < 20) {
            // towing floor above the free optimum
            floor = 1.4 * free;
            for (std::size_t t = 0; t < c.size(); ++t) {
                c.gamma_min[t] = std::min(c.gamma_min[t], free);
                c.gamma_max[t] = std::max(c.gamma_max[t], 2.0 * free);
            }
            expect = floor;
        }
        const double lo = std::max(*std::max_element(c.gamma_min.begin(), c.gamma_min.end()), floor);
        const double hi = *std::min_element(c.gamma_max.begin(), c.gamma_max.end());
        const auto s = optimize_fgt(c, floor);
        const auto [g, v] = grid_min(c.form, e0, 0.0, e2, lo, hi, points);
        const double J = objective(std::vector<double>(c.size(), s.ratios[0]), c).J;
        double e1 = 0.0;
        for (double d : c.d1) e1 += d;
        if (std::abs(s.ratios[0] - g) > (hi - lo) / (points - 1)) ++off_cell;
        if (J > v + e1 + 1e-12 * std::abs(J)) ++worse;
        if (inst < 20) {
            ++clamped;
            if (s.ratios[0] != expect) ++clamp_wrong;
        }
    }
    return {off_cell == 0 && worse == 0 && clamp_wrong == 0,
            fmt("100 instances: %d outside one grid cell, %d above the grid minimum, %d/%d clamped returns wrong",
                off_cell, worse, clamp_wrong, clamped)};
}

Outcome dp_exactness()
{
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> gears(1, 3), len(1, 10);
    std::uniform_real_distribution<double> ratio(1.0, 20.0);
    int mismatches = 0, comparisons = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto form = trial % 2 ? LossForm::quadratic : LossForm::fractional;
        auto c = testing::random_steps(rng, static_cast<std::size_t>(len(rng)), 1.0, form);
        std::vector<double> ratios(static_cast<std::size_t>(gears(rng)));
        for (double& r : ratios) r = ratio(rng);
        for (std::size_t t = 0; t < c.size(); ++t) {
            bool ok = false;
            for (double r : ratios) ok = ok || c.feasible(t, r);
            if (!ok) {
                const double r = ratios[rng() % ratios.size()];
                c.gamma_min[t] = std::min(c.gamma_min[t], r);
                c.gamma_max[t] = std::max(c.gamma_max[t], r);
            }
        }
        for (const double cs : {0.0, 300.0}) {
            ++comparisons;
            const double dp = objective(gearshift_dp(ratios, c, cs), ratios, c, cs).J;
            if (!testing::close_rel(dp, testing::enumerate_min(ratios, c, cs), 1e-12, 1e-9)) ++mismatches;
        }
    }
    return {mismatches == 0, fmt("%d comparisons, %d mismatches", comparisons, mismatches)};
}

Outcome oracle_gap()
{
    const auto& pl = testing::Pipeline::get();
    const std::array<const char*, 3> presets{"urban", "highway", "mixed"};
    const double res = 0.05;
    double worst = -infinity;
    std::size_t max_grid = 0;
    int over = 0;
    for (int k = 0; k < 50; ++k) {
        const auto cycle = synthesize_cycle(presets[k % 3], 199, static_cast<std::uint64_t>(k + 1));
        DesignOptions opt;
        opt.c_shift = k % 2 ? 300.0 : 0.0;
        const auto prob = build_problem(cycle, pl.params, TransmissionSpec::mgt(2), pl.fractional, 0.6, opt);
        MgtOptions mo;
        mo.epsilon = opt.epsilon;
        const auto alg = optimize_mgt(2, prob.coeffs, opt.c_shift, prob.towing_floor, mo);
        mgt_log.add(alg);
        const auto [elo, ehi] = ratio_envelope(prob.coeffs, prob.towing_floor);
        const auto grid = ratio_grid(std::max(res, std::floor(elo / res) * res), std::ceil(ehi / res) * res, res);
        max_grid = std::max(max_grid, grid.size());
        OracleOptions oo;
        oo.budget = 1e8;
        const auto best = brute_force_mgt(prob.coeffs, 2, grid, opt.c_shift, prob.towing_floor, oo);
        const double gap = (alg.cost.J - best.cost.J) / std::abs(best.cost.J);
        worst = std::max(worst, gap);
        if (gap > 1e-3) ++over;
    }
    return {over == 0, fmt("50 instances, worst gap %.4f %% (negative: below the grid optimum), largest grid %zu points",
                           100.0 * worst, max_grid)};
}

Outcome fit_fidelity()
{
    const auto truth_map = synth_map(fractional_loss_default(), MotorLimits{});
    const auto grid = uniform_power_grid(truth_map.limits().P_max, 101);
    const auto model = fit_fractional(truth_map, grid);
    double worst = 0.0;
    for (const double P : grid) {
        const double ap = std::abs(P);
        const auto c = model.coefficients(P);
        const std::array<double, 3> ref{P == 0.0 ? 0.0 : 1.2e-4 * P * P, 150.0 + 0.004 * ap, 0.45 + 2e-6 * ap};
        const std::array<double, 3> got{c.c0, c.c1, c.c2};
        for (int i = 0; i < 3; ++i) {
            const double scale = std::max(std::abs(ref[i]), 1e-300);
            if (P == 0.0 && i == 0) {
                worst = std::max(worst, std::abs(got[i]));
            } else {
                worst = std::max(worst, std::abs(got[i] - ref[i]) / scale);
            }
        }
    }
    const auto& pl = testing::Pipeline::get();
    const double rmse = normalized_rmse(pl.fractional, pl.map);
    return {worst <= 1e-6 && rmse <= 0.005,
            fmt("coefficient recovery max rel error %.2e, mixed-map normalized RMSE %.3f %%", worst, 100.0 * rmse)};
}

struct TableRow {
    std::string name;
    DesignSolution best;
};

// Sweeps of criterion 9, reused by criterion 7.
std::map<double, std::vector<TableRow>> table;

std::vector<TransmissionSpec> technologies(const VehicleParams& p)
{
    return {TransmissionSpec::fgt(), TransmissionSpec::mgt(2), TransmissionSpec::mgt(3), TransmissionSpec::mgt(4),
            TransmissionSpec::mgt(5), TransmissionSpec::cvt(p)};
}

std::string tech_name(const TransmissionSpec& s)
{
    if (s.kind == TransmissionKind::fgt) return "FGT";
    if (s.kind == TransmissionKind::cvt) return "CVT";
    return std::to_string(s.n_gears) + "-MGT";
}

Outcome closed_loop()
{
    const auto& pl = testing::Pipeline::get();
    DesignOptions opt;
    opt.c_shift = pl.params.c_shift;

    // model form matching the map
    const auto fmap = synth_map(fractional_loss_default(), MotorLimits{});
    const auto fmodel = fit_fractional(fmap, uniform_power_grid(fmap.limits().P_max, 101));
    double worst_matched = 0.0;
    int matched = 0;
    for (const auto& spec : technologies(pl.params)) {
        for (const double s : {0.5, 0.8, 1.1}) {
            DesignSolution d;
            try {
                d = design_at_scale(pl.cycle, pl.params, spec, fmodel, s, opt);
            } catch (const InfeasibleError&) {
                continue;
            }
            mgt_log.add(d);
            const auto r = simulate(d, pl.cycle, pl.params, fmap);
            worst_matched = std::max(worst_matched, std::abs(r.total_energy - d.total_energy) / d.total_energy);
            ++matched;
        }
    }

    // sweep-optimal designs on the mixed map
    double worst_mixed = 0.0;
    for (const auto& row : table.at(pl.params.c_shift)) {
        const auto r = simulate(row.best, pl.cycle, pl.params, pl.map);
        worst_mixed = std::max(worst_mixed, std::abs(r.total_energy - row.best.total_energy) / row.best.total_energy);
    }

    // fractional vs quadratic designs of the same vehicle
    int pairs = 0, frac_worse = 0;
    for (const auto& spec : technologies(pl.params)) {
        for (int k = 0; k < 10; ++k) {
            const double s = 0.3 + 0.1 * k;
            DesignSolution a, b;
            try {
                a = design_at_scale(pl.cycle, pl.params, spec, pl.fractional, s, opt);
                b = design_at_scale(pl.cycle, pl.params, spec, pl.quadratic, s, opt);
            } catch (const InfeasibleError&) {
                continue;
            }
            mgt_log.add(a);
            mgt_log.add(b);
            const double ea = simulate(a, pl.cycle, pl.params, pl.map).total_energy;
            const double eb = simulate(b, pl.cycle, pl.params, pl.map).total_energy;
            ++pairs;
            if (ea > eb * (1.0 + 1e-6)) ++frac_worse;
        }
    }
    return {worst_matched <= 0.01 && worst_mixed <= 0.01 && frac_worse == 0 && matched > 0 && pairs > 0,
            fmt("matched map: worst %.4f %% over %d designs; mixed map sweep optima: worst %.3f %%; "
                "fractional worse than quadratic in %d/%d pairs",
                100.0 * worst_matched, matched, 100.0 * worst_mixed, frac_worse, pairs)};
}

Outcome nesting()
{
    const auto& pl = testing::Pipeline::get();
    int broken = 0, chains = 0;
    std::string sample;
    for (const char* preset : {"urban", "highway", "mixed"}) {
        const auto cycle = synthesize_cycle(preset, 1800, 1);
        for (const double s : {0.7, 1.0}) {
            DesignOptions opt;
            opt.c_shift = 0.0;
            opt.fixed_mass = total_mass(pl.params, TransmissionSpec::mgt(3), s * pl.fractional.limits().P_max);
            opt.fixed_eta = pl.params.eta_mgt;
            std::vector<double> loss;
            // the equalised CVT gets the full ratio freedom of the gearboxes
            loss.push_back(design_at_scale(cycle, pl.params, TransmissionSpec::cvt(1e-3, 1e6), pl.fractional, s, opt)
                               .cost.loss);
            for (int n = 5; n >= 2; --n) {
                const auto d = design_at_scale(cycle, pl.params, TransmissionSpec::mgt(n), pl.fractional, s, opt);
                mgt_log.add(d);
                loss.push_back(d.cost.loss);
            }
            loss.push_back(design_at_scale(cycle, pl.params, TransmissionSpec::fgt(), pl.fractional, s, opt).cost.loss);
            ++chains;
            for (std::size_t k = 1; k < loss.size(); ++k) {
                if (loss[k - 1] > loss[k] * (1.0 + 1e-9)) ++broken;
            }
            if (sample.empty()) {
                sample = fmt(" (%s, s=%.1f: CVT %.0f, 5..2-MGT %.0f %.0f %.0f %.0f, FGT %.0f Wh)", preset, s,
                             loss[0] / 3600, loss[1] / 3600, loss[2] / 3600, loss[3] / 3600, loss[4] / 3600,
                             loss[5] / 3600);
            }
        }
    }
    return {broken == 0, fmt("%d chains on urban/highway/mixed, %d order violations", chains, broken) + sample};
}

Outcome table_pattern()
{
    const auto& pl = testing::Pipeline::get();
    for (const double cs : {0.0, pl.params.c_shift}) {
        DesignOptions opt;
        opt.c_shift = cs;
        auto& rows = table[cs];
        for (const auto& spec : technologies(pl.params)) {
            const auto sweep = size_sweep(spec, pl.fractional, 0.3, 1.2, 100, pl.cycle, pl.params, opt);
            for (const auto& r : sweep.rows) {
                if (r.feasible) mgt_log.add(r.solution);
            }
            rows.push_back({tech_name(spec), sweep.best_solution()});
        }
    }
    std::printf("  synthetic Table II (mixed 1800 s cycle, fractional model, 100 sizes over 0.3:1.2)\n");
    std::printf("  %-6s %9s %9s %11s %13s %13s\n", "tech", "P [kW]", "m [kg]", "loss [Wh]", "E(300) [Wh]",
                "E(0) [Wh]");
    const auto& hi = table.at(pl.params.c_shift);
    const auto& lo = table.at(0.0);
    for (std::size_t k = 0; k < hi.size(); ++k) {
        const auto& d = hi[k].best;
        std::printf("  %-6s %9.1f %9.0f %11.1f %13.1f %13.1f\n", hi[k].name.c_str(), d.p_max / 1e3, d.vehicle_mass,
                    d.cost.loss / 3600, d.total_energy / 3600, lo[k].best.total_energy / 3600);
    }
    bool all_beat_fgt = true, non_monotone = true;
    int best_n[2] = {0, 0};
    int idx = 0;
    for (const auto* rows : {&lo, &hi}) {
        const double fgt = (*rows)[0].best.total_energy;
        bool rises = false;
        double best = infinity;
        for (int n = 2; n <= 5; ++n) {
            const double e = (*rows)[static_cast<std::size_t>(n - 1)].best.total_energy;
            all_beat_fgt = all_beat_fgt && e < fgt;
            if (n > 2 && e >= (*rows)[static_cast<std::size_t>(n - 2)].best.total_energy) rises = true;
            if (e < best) {
                best = e;
                best_n[idx] = n;
            }
        }
        non_monotone = non_monotone && rises;
        ++idx;
    }
    return {all_beat_fgt && non_monotone && best_n[1] <= best_n[0],
            fmt("every MGT beats FGT: %s; energy rises again with n at both shift costs: %s; best n %d at 300 J vs "
                "%d at 0 J",
                all_beat_fgt ? "yes" : "no", non_monotone ? "yes" : "no", best_n[1], best_n[0])};
}

Outcome performance()
{
    const auto& pl = testing::Pipeline::get();
    DesignOptions opt;
    opt.c_shift = pl.params.c_shift;
    auto start = Clock::now();
    const auto sweep = size_sweep(TransmissionSpec::mgt(5), pl.fractional, 0.3, 1.2, 100, pl.cycle, pl.params, opt);
    const double sweep_s = seconds_since(start);
    const auto prob =
        build_problem(pl.cycle, pl.params, TransmissionSpec::mgt(5), pl.fractional, sweep.best_solution().scale, opt);
    start = Clock::now();
    const auto s = optimize_mgt(5, prob.coeffs, opt.c_shift, prob.towing_floor);
    const double single_s = seconds_since(start);
    mgt_log.add(s);
    return {sweep_s < 60.0 && single_s < 2.0,
            fmt("5-MGT sweep of 100 sizes on %zu steps: %.2f s; single optimize_mgt: %.3f s (%d iterations)",
                pl.cycle.size(), sweep_s, single_s, s.iterations)};
}

Outcome iteration_behaviour()
{
    const double avg = mgt_log.runs ? static_cast<double>(mgt_log.total_iterations) / mgt_log.runs : 0.0;
    return {mgt_log.runs > 0 && mgt_log.non_monotone == 0 && mgt_log.max_iterations <= 100,
            fmt("%d runs, %d with a rising J, max %d iterations, average %.1f", mgt_log.runs, mgt_log.non_monotone,
                mgt_log.max_iterations, avg)};
}

#ifdef GEAROPT_WITH_CLI
Outcome cli_determinism()
{
    testing::TempDir dir;
    const auto f = [&](const char* name) { return dir.file(name); };
    const std::vector<std::vector<std::string>> commands{
        {"synth-cycle", "--preset", "urban", "--duration", "600", "--seed", "7", "--out", f("cycle.csv")},
        {"synth-map", "--truth", "mixed", "--out", f("map.csv")},
        {"fit-motor", "--map", f("map.csv"), "--out", f("frac.json")},
        {"fit-motor", "--map", f("map.csv"), "--model", "quadratic", "--out", f("quad.json")},
        {"optimize", "--cycle", f("cycle.csv"), "--motor", f("frac.json"), "--transmission", "fgt", "--power", "60"},
        {"optimize", "--cycle", f("cycle.csv"), "--motor", f("frac.json"), "--transmission", "cvt", "--power", "50",
         "--trace", f("cvt.csv")},
        {"optimize", "--cycle", f("cycle.csv"), "--motor", f("quad.json"), "--transmission", "mgt:3", "--power", "50",
         "--out", f("design.json"), "--trace", f("mgt.csv")},
        {"size-sweep", "--cycle", f("cycle.csv"), "--motor", f("frac.json"), "--transmission", "mgt:2", "--sizes",
         "30", "--table", f("sweep.csv")},
        {"oracle", "--cycle", f("cycle.csv"), "--motor", f("frac.json"), "--transmission", "mgt:2", "--power", "50",
         "--grid-res", "0.2", "--ratio-range", "4:30"},
        {"simulate", "--design", f("design.json"), "--map", f("map.csv"), "--trace", f("sim.csv")},
    };
    const std::vector<std::string> files{"cycle.csv", "map.csv", "frac.json", "quad.json", "cvt.csv",
                                         "design.json", "mgt.csv", "sweep.csv", "sim.csv"};
    auto run_all = [&](std::vector<std::string>& captured) {
        for (const auto& args : commands) {
            std::vector<const char*> argv{"gearopt"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            captured.push_back(std::to_string(code) + "\n" + out.str() + err.str());
        }
        for (const auto& name : files) captured.push_back(testing::slurp(dir.file(name)));
    };
    std::vector<std::string> first, second;
    run_all(first);
    run_all(second);
    int differing = 0, failed = 0;
    for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k] != second[k]) ++differing;
        if (k < commands.size() && first[k].rfind("0\n", 0) != 0) ++failed;
    }
    return {differing == 0 && failed == 0,
            fmt("%zu commands and %zu files compared, %d differ, %d commands failed", commands.size(), files.size(),
                differing, failed)};
}
#endif

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        Outcome outcome;
        double seconds = 0.0;
        double limit = infinity;
    };
    std::vector<Criterion> criteria{
        {1, "CVT closed form vs grid", cvt_exactness, {}, 0.0, 1.0},
        {2, "FGT closed form vs grid", fgt_exactness, {}, 0.0, 1.0},
        {3, "gearshift DP vs enumeration", dp_exactness, {}, 0.0, infinity},
        {4, "iterative MGT vs brute-force oracle", oracle_gap, {}, 0.0, 300.0},
        {5, "iterative MGT monotone and convergent", iteration_behaviour, {}, 0.0, infinity},
        {6, "loss model fit fidelity", fit_fidelity, {}, 0.0, infinity},
        {7, "closed-loop simulation", closed_loop, {}, 0.0, infinity},
        {8, "nesting of equalised technologies", nesting, {}, 0.0, infinity},
        {9, "qualitative technology ranking", table_pattern, {}, 0.0, infinity},
        {10, "performance", performance, {}, 0.0, infinity},
#ifdef GEAROPT_WITH_CLI
        {11, "CLI determinism", cli_determinism, {}, 0.0, infinity},
#else
        {11, "CLI determinism", [] { return Outcome{false, "built without the CLI"}; }, {}, 0.0, infinity},
#endif
    };
    // 9 feeds 7; 5 summarises every optimize_mgt run, so it goes last
    const std::vector<int> order{1, 2, 3, 6, 9, 7, 8, 4, 10, 11, 5};
    for (const int id : order) {
        auto& c = criteria[static_cast<std::size_t>(id - 1)];
        const auto start = Clock::now();
        try {
            c.outcome = c.run();
        } catch (const std::exception& e) {
            c.outcome = {false, std::string("exception: ") + e.what()};
        }
        c.seconds = seconds_since(start);
        if (c.seconds >= c.limit) {
            c.outcome.pass = false;
            c.outcome.detail += fmt("; over the %.0f s limit", c.limit);
        }
    }
    bool all = true;
    for (const auto& c : criteria) {
        all = all && c.outcome.pass;
        std::printf("%s %2d %s: %s [%.2f s]\n", c.outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                    c.outcome.detail.c_str(), c.seconds);
    }
    std::fflush(stdout);
    return all ? 0 : 1;
}
