#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "gearopt/error.hpp"
#include "gearopt/sizing.hpp"

using namespace gearopt;

TEST_CASE("design at one scale")
{
    const auto& pl = testing::Pipeline::get();
    const auto d = design_at_scale(pl.cycle, pl.params, TransmissionSpec::fgt(), pl.fractional, 0.8);
    CHECK(d.scale == 0.8);
    CHECK(d.p_max == doctest::Approx(0.8 * pl.fractional.limits().P_max));
    CHECK(d.vehicle_mass == doctest::Approx(total_mass(pl.params, TransmissionSpec::fgt(), d.p_max)));
    CHECK(d.total_energy == doctest::Approx(d.mechanical_energy + d.cost.loss));
    CHECK(d.eta == pl.params.eta_fgt);
    CHECK(d.ratios.size() == 1);
    CHECK(d.ratios[0] >= d.towing_floor);
}

TEST_CASE("a one-size sweep equals the single design")
{
    const auto& pl = testing::Pipeline::get();
    DesignOptions opt;
    opt.c_shift = 300.0;
    const auto spec = TransmissionSpec::mgt(2);
    const auto sweep = size_sweep(spec, pl.fractional, 0.7, 0.7, 1, pl.cycle, pl.params, opt);
    const auto single = design_at_scale(pl.cycle, pl.params, spec, pl.fractional, 0.7, opt);
    REQUIRE(sweep.rows.size() == 1);
    CHECK(sweep.best_solution().total_energy == single.total_energy);
    CHECK(sweep.best_solution().ratios == single.ratios);
}

TEST_CASE("sweep feasibility is monotone in size and mass follows power")
{
    const auto& pl = testing::Pipeline::get();
    const auto sweep = size_sweep(TransmissionSpec::fgt(), pl.fractional, 0.3, 1.2, 19, pl.cycle, pl.params);
    bool seen_feasible = false;
    for (std::size_t k = 0; k < sweep.rows.size(); ++k) {
        const auto& r = sweep.rows[k];
        if (seen_feasible) CHECK(r.feasible);
        seen_feasible = seen_feasible || r.feasible;
        if (!r.feasible) CHECK(!r.reason.empty());
        if (k > 0) CHECK(r.mass > sweep.rows[k - 1].mass);
    }
    CHECK(sweep.rows[sweep.best].feasible);
    for (const auto& r : sweep.rows) {
        if (r.feasible) CHECK(sweep.best_solution().total_energy <= r.solution.total_energy);
    }
}

TEST_CASE("a fixed gear needs at least as much motor as two gears")
{
    const auto& pl = testing::Pipeline::get();
    const auto fgt = size_sweep(TransmissionSpec::fgt(), pl.fractional, 0.3, 1.2, 46, pl.cycle, pl.params);
    const auto mgt = size_sweep(TransmissionSpec::mgt(2), pl.fractional, 0.3, 1.2, 46, pl.cycle, pl.params);
    CHECK(fgt.best_solution().p_max >= mgt.best_solution().p_max);
    CHECK(fgt.best_solution().total_energy > mgt.best_solution().total_energy);
}

TEST_CASE("equalised vehicles")
{
    const auto& pl = testing::Pipeline::get();
    DesignOptions opt;
    opt.fixed_mass = 1600.0;
    opt.fixed_eta = 0.97;
    const auto p = build_problem(pl.cycle, pl.params, TransmissionSpec::cvt(pl.params), pl.fractional, 0.8, opt);
    CHECK(p.vehicle_mass == 1600.0);
    CHECK(p.eta == 0.97);
    const auto q = build_problem(pl.cycle, pl.params, TransmissionSpec::mgt(3), pl.fractional, 0.8, opt);
    CHECK(q.demand.power == p.demand.power);
}

TEST_CASE("a sweep with no feasible size throws")
{
    const auto& pl = testing::Pipeline::get();
    CHECK_THROWS_AS(size_sweep(TransmissionSpec::fgt(), pl.fractional, 0.01, 0.02, 3, pl.cycle, pl.params),
                    InfeasibleError);
}

TEST_CASE("sweep CSV")
{
    const auto& pl = testing::Pipeline::get();
    const auto sweep = size_sweep(TransmissionSpec::mgt(2), pl.fractional, 0.1, 0.8, 4, pl.cycle, pl.params);
    std::ostringstream os;
    write_sweep_csv(os, sweep);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "s,P_m_max_kW,mass_kg,J_J,loss_J,total_energy_J,feasible,ratios");
    int rows = 0, infeasible = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.find(",0,") != std::string::npos) ++infeasible;
    }
    CHECK(rows == 4);
    CHECK(infeasible >= 1);
}
