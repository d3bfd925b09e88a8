#include <doctest.h>

#include <cmath>
#include <random>

#include "depotsim/errors.hpp"
#include "depotsim/metrics.hpp"
#include "depotsim/potential.hpp"
#include "depotsim/transport.hpp"
#include "support.hpp"

using namespace depotsim;
using doctest::Approx;

namespace {

struct Fields {
    NodalField na, h, mab, z, jl, release;
};

Fields uniform(const AxiMesh& m, double na, double h) {
    const std::size_t n = m.node_count();
    return {NodalField(n, na), NodalField(n, h), NodalField(n, 0.0), NodalField(n, 0.0), NodalField(n, 0.0),
            NodalField(n, 0.0)};
}

PotentialCoefficients assemble(const AxiMesh& m, const Fields& f, const SpeciesTable& sp = {}) {
    return assemble_potential(m, sp, PhysicalConstants{}, 0.1, {f.na, f.h, f.mab}, f.z, f.jl, f.release);
}

// A smooth sodium gradient produces a nonzero diffusion current.
Fields graded(const AxiMesh& m) {
    Fields f = uniform(m, 0.0, 4e-11);
    f.na = testing::sample(m, [](double r, double z) { return 1.4e-4 * (1.0 + 0.5 * std::exp(-(r * r + (z - 4.2) * (z - 4.2)))); });
    return f;
}

}  // namespace

TEST_SUITE("potential") {

TEST_CASE("uniform state has no source and zero potential") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 20, 20);
    const PotentialCoefficients c = assemble(m, uniform(m, 1.4e-4, 4e-11));
    for (double v : c.charge_source) CHECK(v == 0.0);
    for (double v : c.radial_current) CHECK(v == 0.0);
    for (double v : c.axial_current) CHECK(v == 0.0);
    for (double v : solve_potential(c, m)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("conductivity matches the hand formula") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 10, 10);
    const PhysicalConstants k;
    const SpeciesTable sp;
    const double mu_na = sp.sodium.mobility(k), mu_h = sp.hydrogen.mobility(k), mu_cl = sp.chloride.mobility(k);
    CHECK(mu_na == Approx(5.46e-9).epsilon(1e-3));
    CHECK(mu_cl == Approx(8.33e-9).epsilon(1e-3));

    const PotentialCoefficients na_only = assemble(m, uniform(m, 1.4e-4, 0.0));
    CHECK(na_only.sigma[0] == Approx(k.faraday * 0.1 * 1.4e-4 * (mu_na + mu_cl)).epsilon(1e-13));

    const PotentialCoefficients rest = assemble(m, uniform(m, 1.4e-4, 4e-11));
    const double expected = k.faraday * 0.1 * (1.4e-4 * (mu_na + mu_cl) + 4e-11 * (mu_h + mu_cl));
    CHECK(rest.sigma[5] == Approx(expected).epsilon(1e-13));
}

TEST_CASE("non-positive conductivity is a solver failure") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 10, 10);
    CHECK_THROWS_AS(assemble(m, uniform(m, 0.0, 0.0)), SolverError);
}

TEST_CASE("zero-mean gauge and determinism") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 40, 40, 0.0, 4.2, 1.05);
    Fields f = graded(m);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1e-9);
    f.mab.assign(m.node_count(), 0.0);
    f.z.assign(m.node_count(), 4.0);
    for (auto& v : f.release) v = u(rng);
    const PotentialCoefficients c = assemble(m, f);
    const NodalField a = solve_potential(c, m);
    const NodalField b = solve_potential(c, m);
    CHECK(a == b);
    double amax = 0.0;
    for (double v : a) amax = std::max(amax, std::abs(v));
    CHECK(amax > 0.0);
    CHECK(std::abs(domain_average(a, m)) < 1e-12 * std::max(1.0, amax));
    PotentialSolver reused(m);
    CHECK(reused.solve(c) == a);
}

TEST_CASE("source-free potential is invariant under concentration scaling") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 30, 30, 0.0, 4.2, 1.05);
    const Fields base = graded(m);
    const NodalField phi = solve_potential(assemble(m, base), m);
    const SpeciesTable sp;
    const PhysicalConstants k;
    const NodalField z_na(m.node_count(), 1.0);
    const FaceVelocity u = FaceVelocity::zero(m);
    const FaceFlux j1 = species_flux(m, base.na, sp.sodium.diffusivity, z_na, u, phi, 0.1, k);
    for (double lambda : {0.5, 2.0}) {
        Fields s = base;
        for (double& v : s.na) v *= lambda;
        for (double& v : s.h) v *= lambda;
        const NodalField phi_s = solve_potential(assemble(m, s), m);
        for (std::size_t q = 0; q < phi.size(); ++q) CHECK(phi_s[q] == Approx(phi[q]).epsilon(1e-8).scale(1e-6));
        const FaceFlux js = species_flux(m, s.na, sp.sodium.diffusivity, z_na, u, phi_s, 0.1, k);
        for (std::size_t q = 0; q < j1.radial.size(); ++q) {
            CHECK(js.radial[q] == Approx(lambda * j1.radial[q]).epsilon(1e-7).scale(1e-16));
        }
    }
}

TEST_CASE("liquid junction: faster anion makes a salt-rich region positive") {
    // Chloride diffuses faster than sodium, so a zero-current state holds the
    // concentrated region at a higher potential than its dilute surroundings.
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 40, 40, 0.0, 4.2, 1.05);
    const NodalField phi = solve_potential(assemble(m, graded(m)), m);
    CHECK(m.interpolate(phi, 0.0, 4.2) > m.interpolate(phi, 5.0, 4.2));
}

}  // TEST_SUITE
