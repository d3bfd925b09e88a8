#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "depotsim/errors.hpp"
#include "depotsim/metrics.hpp"
#include "depotsim/orchestrator.hpp"
#include "support.hpp"

using namespace depotsim;
using doctest::Approx;

namespace {

double drug_total(const Simulation& s) {
    return s.ledger().free + s.ledger().bound;
}

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("rest state without sources is a fixed point") {
    // Capillary filtration is itself a fluid source, so "no sources" means no
    // injection and no Starling exchange.
    SimulationConfig cfg = testing::tiny_config();
    apply_setting(cfg, "protocol.volume_cm3", "0", {});
    apply_setting(cfg, "starling.l_pb", "0", {});
    apply_setting(cfg, "starling.l_pl", "0", {});
    Simulation sim(cfg);
    const FieldState before = sim.state();
    for (int k = 0; k < 5; ++k) sim.step_staggered(0.1);
    const FieldState& after = sim.state();
    for (std::size_t q = 0; q < before.c_na.size(); ++q) {
        CHECK(after.c_na[q] == Approx(before.c_na[q]).epsilon(1e-12));
        CHECK(after.c_h[q] == Approx(before.c_h[q]).epsilon(1e-12));
        CHECK(after.c_mab[q] == 0.0);
        CHECK(after.c_b[q] == 0.0);
        CHECK(std::abs(after.p[q]) < 1e-12);
    }
    CHECK(sim.ledger().injected == 0.0);
}

TEST_CASE("Starling exchange alone only dilutes slowly") {
    // Filtered plasma enters without solutes, so the background drifts.
    SimulationConfig cfg = testing::tiny_config();
    apply_setting(cfg, "protocol.volume_cm3", "0", {});
    Simulation sim(cfg);
    const FieldState before = sim.state();
    for (int k = 0; k < 5; ++k) sim.step_staggered(0.1);
    double worst = 0.0;
    for (std::size_t q = 0; q < before.c_na.size(); ++q) {
        worst = std::max(worst, std::abs(sim.state().c_na[q] - before.c_na[q]) / before.c_na[q]);
    }
    MESSAGE("largest relative sodium change at rest over 0.5 s: " << worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("short phase: electroneutrality, ledger and pressure pulse") {
    const SimulationConfig cfg = testing::tiny_config();
    Simulation sim(cfg);
    const double dose = cfg.syringe().c_mab * cfg.protocol.volume;
    double worst_en = 0.0, worst_ledger = 0.0, last_absorbed = 0.0;
    double p_mid = 0.0, p_end = 0.0;
    bool monotone = true;
    sim.run_short_term([&](const Simulation& s) {
        worst_en = std::max(worst_en, electroneutrality_residual(s.state()));
        worst_ledger = std::max(worst_ledger, s.ledger().closure_error());
        monotone = monotone && s.ledger().absorbed >= last_absorbed;
        last_absorbed = s.ledger().absorbed;
        const double p = ball_average(s.state().p, s.mesh(), s.source_center_z(), 0.2);
        if (std::abs(s.state().t - 2.5) < 1e-9) p_mid = p;
        if (std::abs(s.state().t - 10.0) < 1e-9) p_end = p;
    });
    CHECK(worst_en < 1e-12);
    CHECK(worst_ledger < 1e-8);
    CHECK(monotone);
    CHECK(sim.ledger().injected == Approx(dose).epsilon(1e-10));
    // Pressure follows the source: large on the plateau, relaxed afterwards.
    CHECK(p_mid > 1.0);
    CHECK(p_end < 0.01 * p_mid);
    CHECK(sim.stats().steps > 0);
}

TEST_CASE("each step satisfies the drug ledger identity") {
    const SimulationConfig cfg = testing::tiny_config();
    Simulation sim(cfg);
    const double dose = cfg.syringe().c_mab * cfg.protocol.volume;
    for (int k = 0; k < 40; ++k) {
        const DoseLedger before = sim.ledger();
        sim.step_staggered(0.1);
        const DoseLedger& after = sim.ledger();
        const double d_free = after.free - before.free;
        const double rhs = (after.injected - before.injected) - (after.absorbed - before.absorbed) -
                           (after.bound - before.bound) - (after.eliminated - before.eliminated) -
                           (after.outflow - before.outflow);
        CHECK(std::abs(d_free - rhs) < 1e-8 * dose);
        // The ledger's free and bound entries are the integrals of the fields.
        CHECK(after.free == Approx(cfg.layers.porosity * integrate(sim.state().c_mab, sim.mesh())).epsilon(1e-12));
        CHECK(after.bound == Approx(integrate(sim.state().c_b, sim.mesh())).epsilon(1e-12));
    }
}

TEST_CASE("bound drug respects the binding capacity") {
    Simulation sim(testing::tiny_config());
    sim.run_short_term();
    const double b_max = sim.config().binding.b_max;
    for (double v : sim.state().c_b) CHECK(v <= b_max + 1e-15);
    for (double v : sim.state().c_mab) CHECK(v >= 0.0);
}

TEST_CASE("lower buffer pH gives a lower average tissue pH") {
    std::vector<double> ph5, ph9;
    for (const char* ph : {"5", "9"}) {
        SimulationConfig cfg = testing::tiny_config();
        apply_setting(cfg, "drug.buffer_ph", ph, {});
        Simulation sim(cfg);
        auto& out = std::string(ph) == "5" ? ph5 : ph9;
        sim.run_short_term([&](const Simulation& s) {
            if (s.state().t > 0.0) out.push_back(domain_average(s.state().ph, s.mesh()));
        });
    }
    REQUIRE(ph5.size() == ph9.size());
    for (std::size_t k = 0; k < ph5.size(); ++k) CHECK(ph5[k] < ph9[k]);
}

TEST_CASE("model reduction conserves drug and freezes the lymph field") {
    Simulation sim(testing::tiny_config());
    sim.run_short_term();
    const double total = drug_total(sim);
    const double rho = domain_average(net_charge_density(sim.state().c_mab, sim.state().z_mab), sim.mesh());
    const ReductionReport rep = sim.reduce_to_long_term();
    CHECK(sim.phase() == Phase::long_term);
    CHECK(drug_total(sim) == Approx(total).epsilon(1e-12));
    CHECK(rep.rho_avg_before == Approx(rho).epsilon(1e-12));
    CHECK(std::abs(rep.rho_avg_after - rep.rho_avg_before) < 0.02 * std::abs(rep.rho_avg_before));
    CHECK_FALSE(rep.warning);
    const AxiMesh& m = sim.mesh();
    CHECK(m.nr() == 25);
    const auto& layers = sim.config().layers;
    for (std::size_t j = 0; j < m.nz(); ++j) {
        const std::size_t layer = layers.layer_at(m.z(j), m.height());
        for (std::size_t i = 0; i < m.nr(); ++i) {
            const double jl = sim.state().lymph_rate[m.index(i, j)];
            CHECK(jl >= 0.0);
            if (layer == 2) CHECK(jl == 0.0);
        }
    }
    for (double v : sim.state().u.radial) CHECK(v == 0.0);
    for (double v : sim.state().u.axial) CHECK(v == 0.0);
}

TEST_CASE("long phase keeps the ledger closed and absorption monotone") {
    Simulation sim(testing::tiny_config(2.0));
    sim.run_short_term();
    sim.reduce_to_long_term();
    double last = sim.ledger().absorbed;
    bool monotone = true;
    double worst_en = 0.0, worst_ledger = 0.0;
    sim.run_long_term([&](const Simulation& s) {
        monotone = monotone && s.ledger().absorbed >= last;
        last = s.ledger().absorbed;
        worst_en = std::max(worst_en, electroneutrality_residual(s.state()));
        worst_ledger = std::max(worst_ledger, s.ledger().closure_error());
    });
    CHECK(monotone);
    CHECK(worst_en < 1e-12);
    CHECK(worst_ledger < 1e-8);
    CHECK(sim.stats().retries == 0);
    CHECK(sim.state().t == Approx(10.0 + 2.0 * 3600.0));
}

TEST_CASE("pipeline is deterministic") {
    auto run = [] {
        Simulation sim(testing::tiny_config(0.2));
        sim.run_short_term();
        sim.reduce_to_long_term();
        sim.run_long_term();
        return sim.state();
    };
    const FieldState a = run();
    const FieldState b = run();
    CHECK(a.c_mab == b.c_mab);
    CHECK(a.c_b == b.c_b);
    CHECK(a.phi == b.phi);
}

TEST_CASE("advance_to crosses the phase boundary") {
    Simulation sim(testing::tiny_config());
    sim.advance_to(600.0);
    CHECK(sim.phase() == Phase::long_term);
    CHECK(sim.state().t == Approx(600.0));
}

}  // TEST_SUITE
