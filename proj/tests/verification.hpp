#pragma once

// Manufactured-solution convergence studies shared by the unit tests and the
// acceptance report.

#include <cmath>
#include <numbers>
#include <vector>

#include "depotsim/binding.hpp"
#include "depotsim/darcy.hpp"
#include "depotsim/potential.hpp"
#include "depotsim/transport.hpp"
#include "support.hpp"

namespace testing {

struct ConvergenceStudy {
    std::vector<double> h;
    std::vector<double> error;
    double order = 0.0;
};

inline const std::vector<std::size_t>& mms_sizes() {
    static const std::vector<std::size_t> sizes = {17, 33, 65, 129};
    return sizes;
}

// p* = cos(a r) cos(b z) vanishes at r = R and has zero normal slope on the
// axis and at both ends of the column.
inline ConvergenceStudy pressure_convergence() {
    using namespace depotsim;
    using std::numbers::pi;
    const double R = 5.0, H = 5.0;
    const double kappa = 1e-9, eta = 1e-7;
    const double K = kappa / eta;
    const double a = pi / (2.0 * R), b = pi / H;
    TissueLayers single;
    single.layers = {{"uniform", H, kappa, 0.0}};
    StarlingParams no_exchange;
    no_exchange.l_pb = 0.0;
    no_exchange.l_pl = 0.0;
    ConvergenceStudy s;
    for (std::size_t n : mms_sizes()) {
        const AxiMesh m = uniform_mesh(R, H, n - 1, n - 1);
        const NodalField exact = sample(m, [&](double r, double z) { return std::cos(a * r) * std::cos(b * z); });
        const NodalField q = sample(m, [&](double r, double z) {
            const double radial = r > 0.0 ? a * std::sin(a * r) / r : a * a;
            return K * ((a * a * std::cos(a * r) + radial) * std::cos(b * z) + b * b * std::cos(a * r) * std::cos(b * z));
        });
        const NodalField p = solve_pressure(m, single, q, no_exchange, eta);
        s.h.push_back(R / static_cast<double>(n - 1));
        s.error.push_back(l2_error(m, p, exact));
    }
    s.order = fitted_order(s.h, s.error);
    return s;
}

// Pure-Neumann problem with a z-dependent conductivity; compared after
// removing the volume mean from the exact solution.
inline ConvergenceStudy potential_convergence() {
    using namespace depotsim;
    using std::numbers::pi;
    const double R = 5.0, H = 5.0;
    const double a = pi / R, b = pi / H;
    auto sigma_of = [&](double z) { return 1.0 + 0.3 * z / H; };
    ConvergenceStudy s;
    for (std::size_t n : mms_sizes()) {
        const AxiMesh m = uniform_mesh(R, H, n - 1, n - 1);
        PotentialCoefficients c;
        c.sigma = sample(m, [&](double, double z) { return sigma_of(z); });
        c.z_mab.assign(m.node_count(), 0.0);
        c.radial_current.assign(m.nz() * (m.nr() - 1), 0.0);
        c.axial_current.assign((m.nz() - 1) * m.nr(), 0.0);
        c.charge_source = sample(m, [&](double r, double z) {
            const double radial = r > 0.0 ? a * std::sin(a * r) / r : a * a;
            const double lap = -(a * a * std::cos(a * r) + radial) * std::cos(b * z) -
                               b * b * std::cos(a * r) * std::cos(b * z);
            const double dphi_dz = -b * std::cos(a * r) * std::sin(b * z);
            return -(sigma_of(z) * lap + 0.3 / H * dphi_dz);
        });
        const NodalField phi = solve_potential(c, m);
        NodalField exact = sample(m, [&](double r, double z) { return std::cos(a * r) * std::cos(b * z); });
        double mean = 0.0, vol = 0.0;
        for (std::size_t k = 0; k < exact.size(); ++k) {
            mean += m.node_volume(k) * exact[k];
            vol += m.node_volume(k);
        }
        for (double& v : exact) v -= mean / vol;
        s.h.push_back(R / static_cast<double>(n - 1));
        s.error.push_back(l2_error(m, phi, exact));
    }
    s.order = fitted_order(s.h, s.error);
    return s;
}

// The manufactured field is also the old state, so the backward-Euler time
// difference vanishes at the exact solution and only the spatial truncation
// error remains. A weak linear sink keeps the Neumann problem well posed.
inline ConvergenceStudy diffusion_convergence() {
    using namespace depotsim;
    using std::numbers::pi;
    const double R = 5.0, H = 5.0;
    const double D = 1e-6, n_por = 0.1, k_sink = 1e-5;
    const double a = pi / R, b = pi / H;
    const SpeciesTable species;
    const PhysicalConstants constants;
    ConvergenceStudy s;
    for (std::size_t n : mms_sizes()) {
        const AxiMesh m = uniform_mesh(R, H, n - 1, n - 1);
        const NodalField exact = sample(m, [&](double r, double z) { return 2.0 + std::cos(a * r) * std::cos(b * z); });
        const NodalField src = sample(m, [&](double r, double z) {
            const double radial = r > 0.0 ? a * std::sin(a * r) / r : a * a;
            const double lap = -(a * a * std::cos(a * r) + radial) * std::cos(b * z) -
                               b * b * std::cos(a * r) * std::cos(b * z);
            return -n_por * D * lap + k_sink * (2.0 + std::cos(a * r) * std::cos(b * z));
        });
        const NodalField sink(m.node_count(), k_sink);
        const NodalField zero(m.node_count(), 0.0);
        TransportSolver solver(m, species, constants);
        const NodalField c =
            solver.advance_one(exact, D, zero, FaceVelocity::zero(m), zero, {}, 0.0, sink, src, n_por, 1e4, 0.0);
        s.h.push_back(R / static_cast<double>(n - 1));
        s.error.push_back(l2_error(m, c, exact));
    }
    s.order = fitted_order(s.h, s.error);
    return s;
}

// Constant free concentration turns the binding law into the linear ODE
// dc_B/dt = alpha - beta c_B with a closed-form solution.
inline ConvergenceStudy binding_time_convergence() {
    const double k_a = 3e8, k_d = 2e-4, k_e = 1e-4, n = 0.1, b_max = 1e-9, c = 1e-10;
    const double alpha = k_a * n * c * b_max;
    const double beta = k_a * n * c + k_d + k_e;
    const double T = 2.0 / beta;
    const double exact = alpha / beta * (1.0 - std::exp(-beta * T));
    ConvergenceStudy s;
    for (int steps : {10, 20, 40, 80, 160}) {
        const double dt = T / steps;
        double cb = 0.0;
        for (int k = 0; k < steps; ++k) cb = depotsim::advance_binding(cb, c, k_a, k_d, k_e, n, b_max, dt);
        s.h.push_back(dt);
        s.error.push_back(std::abs(cb - exact));
    }
    s.order = fitted_order(s.h, s.error);
    return s;
}

}  // namespace testing
