#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "depotsim/errors.hpp"
#include "depotsim/mesh.hpp"
#include "support.hpp"

using namespace depotsim;
using doctest::Approx;
using std::numbers::pi;

TEST_SUITE("mesh") {

TEST_CASE("uniform mesh spacing and total volume") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 10, 10, 0.0, 4.2, 1.0);
    REQUIRE(m.nr() == 11);
    for (std::size_t i = 0; i < m.nr(); ++i) CHECK(m.r(i) == Approx(0.5 * i).epsilon(1e-14));
    for (std::size_t j = 0; j < m.nz(); ++j) CHECK(m.z(j) == Approx(0.5 * j).epsilon(1e-14));
    double cells = 0.0, nodes = 0.0;
    for (std::size_t j = 0; j + 1 < m.nz(); ++j)
        for (std::size_t i = 0; i + 1 < m.nr(); ++i) cells += m.cell_volume(i, j);
    for (double v : m.node_volumes()) nodes += v;
    CHECK(cells == Approx(pi * 25.0 * 5.0).epsilon(1e-10));
    CHECK(nodes == Approx(pi * 25.0 * 5.0).epsilon(1e-10));
}

TEST_CASE("graded mesh refines toward the focus") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 60, 60, 0.0, 4.2, 1.2);
    double cells = 0.0;
    for (std::size_t j = 0; j + 1 < m.nz(); ++j)
        for (std::size_t i = 0; i + 1 < m.nr(); ++i) cells += m.cell_volume(i, j);
    CHECK(cells == Approx(pi * 125.0).epsilon(1e-10));
    std::size_t jmin = 0;
    double hmin = 1e9;
    for (std::size_t j = 0; j + 1 < m.nz(); ++j) {
        const double h = m.z(j + 1) - m.z(j);
        if (h < hmin) {
            hmin = h;
            jmin = j;
        }
    }
    CHECK(m.z(jmin) <= 4.2 + 1e-12);
    CHECK(m.z(jmin + 1) >= 4.2 - 1e-12);
    CHECK(m.r(1) - m.r(0) == Approx(m.min_spacing_r()));
    for (std::size_t j = 1; j + 1 < m.nz(); ++j) {
        const double ratio = (m.z(j + 1) - m.z(j)) / (m.z(j) - m.z(j - 1));
        CHECK(std::max(ratio, 1.0 / ratio) <= 1.3);
    }
    CHECK(m.r_nodes().back() == 5.0);
    CHECK(m.z_nodes().back() == 5.0);
}

TEST_CASE("mesh construction errors") {
    CHECK_THROWS_AS(build_graded_mesh(5.0, 5.0, 4, 20, 0.0, 4.2, 1.0), ConfigError);
    CHECK_THROWS_AS(build_graded_mesh(5.0, 5.0, 20, 20, 0.0, 6.0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_graded_mesh(5.0, 5.0, 20, 20, 0.0, 4.0, 0.9), ConfigError);
    CHECK_THROWS_AS(build_graded_mesh(5.0, 5.0, 20, 20, 0.0, 4.0, 1.5), ConfigError);
    CHECK_THROWS_AS(AxiMesh({0.0, 1.0, 1.0}, {0.0, 1.0}), ConfigError);
}

TEST_CASE("mesh construction is deterministic") {
    const AxiMesh a = build_graded_mesh(5.0, 5.0, 50, 70, 0.0, 4.2, 1.04);
    const AxiMesh b = build_graded_mesh(5.0, 5.0, 50, 70, 0.0, 4.2, 1.04);
    CHECK(a == b);
}

TEST_CASE("integration examples") {
    const AxiMesh m = testing::uniform_mesh(5.0, 5.0, 100, 100);
    CHECK(integrate(NodalField(m.node_count(), 1.0), m) == Approx(pi * 125.0).epsilon(1e-12));
    CHECK(integrate(NodalField(m.node_count(), 0.0), m) == 0.0);
    const NodalField r = testing::sample(m, [](double rr, double) { return rr; });
    // 2 pi int r^2 dr dz = (2 pi / 3) R^3 H
    CHECK(integrate(r, m) == Approx(2.0 * pi / 3.0 * 125.0 * 5.0).epsilon(1e-3));
}

TEST_CASE("integration is linear") {
    const AxiMesh m = build_graded_mesh(5.0, 5.0, 30, 40, 0.0, 4.2, 1.05);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NodalField f(m.node_count()), g(m.node_count()), s(m.node_count());
    for (std::size_t k = 0; k < f.size(); ++k) {
        f[k] = u(rng);
        g[k] = u(rng);
        s[k] = f[k] + g[k];
    }
    CHECK(integrate(s, m) == Approx(integrate(f, m) + integrate(g, m)).epsilon(1e-13));
}

TEST_CASE("projection examples") {
    const AxiMesh fine = build_graded_mesh(5.0, 5.0, 160, 160, 0.0, 4.2, 1.01);
    const AxiMesh coarse = testing::uniform_mesh(5.0, 5.0, 40, 40);

    const Projection c7 = project_field(fine, NodalField(fine.node_count(), 7.0), coarse);
    for (double v : c7.field) CHECK(v == Approx(7.0).epsilon(1e-14));
    CHECK(std::abs(c7.relative_mass_change) < 1e-12);

    // Bilinear functions are reproduced exactly.
    auto bilinear = [](double r, double z) { return 1.0 + 0.3 * r - 0.7 * z + 0.2 * r * z; };
    const Projection p = project_field(fine, testing::sample(fine, bilinear), coarse);
    const NodalField exact = testing::sample(coarse, bilinear);
    for (std::size_t k = 0; k < exact.size(); ++k) CHECK(p.field[k] == Approx(exact[k]).epsilon(1e-12));

    const Projection lin = project_field(fine, testing::sample(fine, [](double, double z) { return z; }), coarse);
    CHECK(std::abs(lin.relative_mass_change) < 1e-12);

    // Independent oracle for the bump: both integrals against the closed form
    // 2 pi int r exp(-(r^2 + (z - 3)^2) / (2 s^2)) = 2 pi s^2 * sqrt(2 pi) s for a bump well inside.
    const double s = 0.5;
    auto bump = [&](double r, double z) { return std::exp(-(r * r + (z - 3.0) * (z - 3.0)) / (2 * s * s)); };
    const NodalField src = testing::sample(fine, bump);
    const Projection b = project_field(fine, src, coarse);
    const double closed = 2.0 * pi * s * s * std::sqrt(2.0 * pi) * s;
    CHECK(integrate(src, fine) == Approx(closed).epsilon(5e-3));
    CHECK(std::abs(b.relative_mass_change) < 0.02);

    const AxiMesh other = testing::uniform_mesh(4.0, 5.0, 20, 20);
    CHECK_THROWS_AS(project_field(fine, src, other), ConfigError);
}

}  // TEST_SUITE
