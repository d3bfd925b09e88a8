#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "depotsim/darcy.hpp"
#include "depotsim/errors.hpp"
#include "depotsim/params.hpp"
#include "depotsim/transport.hpp"
#include "support.hpp"

using namespace depotsim;
using doctest::Approx;

namespace {

const PhysicalConstants kConstants;
const SpeciesTable kSpecies;

double center_of_mass_z(const AxiMesh& m, const NodalField& c) {
    NodalField zc(c.size());
    for (std::size_t j = 0; j < m.nz(); ++j)
        for (std::size_t i = 0; i < m.nr(); ++i) zc[m.index(i, j)] = m.z(j) * c[m.index(i, j)];
    return integrate(zc, m) / integrate(c, m);
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("species flux examples") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 10, 10);
    const NodalField zero(m.node_count(), 0.0);
    const NodalField one(m.node_count(), 1.0);
    const FaceVelocity u = FaceVelocity::zero(m);

    const FaceFlux none = species_flux(m, NodalField(m.node_count(), 2e-7), 1e-6, one, u, zero, 0.1, kConstants);
    for (double v : none.radial) CHECK(v == 0.0);
    for (double v : none.axial) CHECK(v == 0.0);

    // Potential decreasing in r pushes cations outward.
    const NodalField phi = testing::sample(m, [](double r, double) { return -0.01 * r; });
    const FaceFlux mig = species_flux(m, NodalField(m.node_count(), 1e-7), 1e-6, one, u, phi, 0.1, kConstants);
    for (double v : mig.radial) CHECK(v > 0.0);

    // Fick's law with unit slope.
    const NodalField ramp = testing::sample(m, [](double r, double) { return r; });
    const FaceFlux fick = species_flux(m, ramp, 1e-6, zero, u, zero, 0.1, kConstants);
    for (double v : fick.radial) CHECK(v == Approx(-1e-7).epsilon(1e-12));
}

TEST_CASE("uniform state without sources is a fixed point") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 20, 20);
    const std::size_t n = m.node_count();
    const FaceVelocity u = FaceVelocity::zero(m);
    const NodalField zero(n, 0.0);
    SpeciesFields old{NodalField(n, 1.4e-4), NodalField(n, 4e-11), NodalField(n, 0.0)};
    TransportStepInputs in;
    in.dt = 0.5;
    in.velocity = &u;
    in.phi = zero;
    in.q_p = zero;
    in.z_mab = zero;
    in.lymph_rate = zero;
    in.binding_release = zero;
    TransportSolver solver(m, kSpecies, kConstants);
    const SpeciesFields next = solver.advance(old, in);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(next.sodium[k] == Approx(1.4e-4).epsilon(1e-12));
        CHECK(next.hydrogen[k] == Approx(4e-11).epsilon(1e-12));
        CHECK(next.antibody[k] == 0.0);
    }
}

TEST_CASE("sodium mass balance under injection-driven flow") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 50, 50, 0.0, 4.2, 1.06);
    const std::size_t n = m.node_count();
    const InjectionProtocol protocol;
    const NodalField q = injection_source(m, protocol, 2.5);
    const TissueLayers layers;
    const StarlingParams starling;
    PressureSolver pressure(m, layers, starling, 1e-7);
    const NodalField p = pressure.solve(q);
    const FaceVelocity u = pressure.velocity(p, q);
    const NodalField zero(n, 0.0);
    const NodalField z_na(n, 1.0);
    const NodalField c_old(n, 1.4e-4);
    const double dt = 0.02, porosity = 0.1, c_syringe = 4.2e-4;

    TransportSolver solver(m, kSpecies, kConstants);
    double outflow = 0.0;
    const NodalField c = solver.advance_one(c_old, 1.33e-5, z_na, u, zero, q, c_syringe, {}, {}, porosity, dt,
                                            1.4e-4, &outflow);
    const double change = porosity * (integrate(c, m) - integrate(c_old, m));
    const double source = dt * c_syringe * integrate(q, m);
    CHECK(change == Approx(source - dt * outflow).epsilon(1e-8));

    // Discrete maximum principle for advection-diffusion with injection.
    const double cmax = *std::max_element(c.begin(), c.end());
    CHECK(cmax <= std::max(1.4e-4, c_syringe) * (1.0 + 1e-10));
    // No lower bound here: capillary filtration adds solute-free fluid, so a
    // slight dilution below the background level is physical.
}

TEST_CASE("electromigration moves cations toward lower potential") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 30, 30);
    const std::size_t n = m.node_count();
    const NodalField phi = testing::sample(m, [](double, double z) { return 0.01 * z; });
    const NodalField c0(n, 1e-7);
    const FaceVelocity u = FaceVelocity::zero(m);
    TransportSolver solver(m, kSpecies, kConstants);
    const double com0 = center_of_mass_z(m, c0);
    const NodalField pos = solver.advance_one(c0, 1e-6, NodalField(n, 1.0), u, phi, {}, 0.0, {}, {}, 0.1, 600.0, 0.0);
    const NodalField neutral = solver.advance_one(c0, 1e-6, NodalField(n, 0.0), u, phi, {}, 0.0, {}, {}, 0.1, 600.0, 0.0);
    const NodalField neg = solver.advance_one(c0, 1e-6, NodalField(n, -1.0), u, phi, {}, 0.0, {}, {}, 0.1, 600.0, 0.0);
    CHECK(center_of_mass_z(m, pos) < com0);
    CHECK(center_of_mass_z(m, neutral) == Approx(com0).epsilon(1e-12));
    CHECK(center_of_mass_z(m, neg) > com0);
    CHECK(integrate(pos, m) == Approx(integrate(c0, m)).epsilon(1e-10));
}

TEST_CASE("lymph sink removes exactly the reported uptake") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 20, 20);
    const std::size_t n = m.node_count();
    const FaceVelocity u = FaceVelocity::zero(m);
    const NodalField zero(n, 0.0);
    const NodalField jl = testing::sample(m, [](double, double z) { return z > 3.0 ? 1e-4 : 0.0; });
    SpeciesFields old{NodalField(n, 1.4e-4), NodalField(n, 4e-11),
                      testing::sample(m, [](double r, double z) { return 1e-7 * std::exp(-r * r - (z - 4) * (z - 4)); })};
    TransportStepInputs in;
    in.dt = 10.0;
    in.velocity = &u;
    in.phi = zero;
    in.q_p = zero;
    const NodalField z_mab(n, 3.0);
    in.z_mab = z_mab;
    in.lymph_rate = jl;
    in.binding_release = zero;
    TransportSolver solver(m, kSpecies, kConstants);
    TransportReport rep;
    const SpeciesFields next = solver.advance(old, in, &rep);
    const double lost = in.porosity * (integrate(old.antibody, m) - integrate(next.antibody, m));
    CHECK(rep.lymph_uptake > 0.0);
    CHECK(lost == Approx(in.dt * rep.lymph_uptake).epsilon(1e-9));
}

TEST_CASE("tissue pH update and floor") {
    std::size_t floored = 0;
    const NodalField ph = update_tissue_ph(NodalField(5, 4e-11), &floored);
    for (double v : ph) CHECK(v == Approx(7.39794).epsilon(1e-5));
    CHECK(floored == 0);
    const NodalField low = update_tissue_ph(NodalField{1e-16, 0.0, 1e-9}, &floored);
    CHECK(low[0] == Approx(13.0));
    CHECK(low[1] == Approx(13.0));
    CHECK(low[2] == Approx(6.0));
    CHECK(floored == 2);
}

TEST_CASE("strong undershoot rejects the step") {
    // A large negative extra source drives the solution negative.
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 10, 10);
    const std::size_t n = m.node_count();
    TransportSolver solver(m, kSpecies, kConstants);
    const NodalField src(n, -1.0);
    CHECK_THROWS_AS(solver.advance_one(NodalField(n, 1e-7), 1e-6, NodalField(n, 0.0), FaceVelocity::zero(m),
                                       NodalField(n, 0.0), {}, 0.0, {}, src, 0.1, 1.0, 0.0),
                    StepRejected);
}

}  // TEST_SUITE
