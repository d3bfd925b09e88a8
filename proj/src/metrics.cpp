#include "depotsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "depotsim/errors.hpp"
#include "depotsim/orchestrator.hpp"

namespace depotsim {

double domain_average(std::span<const double> field, const AxiMesh& mesh) {
    const double volume = std::numbers::pi * mesh.radius() * mesh.radius() * mesh.height();
    return integrate(field, mesh) / volume;
}

NodalField net_charge_density(std::span<const double> c_mab, std::span<const double> z_mab) {
    NodalField rho(c_mab.size());
    for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = z_mab[k] * c_mab[k];
    return rho;
}

double plume_volume(std::span<const double> c, const AxiMesh& mesh) {
    constexpr int sub = 8;
    const double cmax = *std::max_element(c.begin(), c.end());
    if (!(cmax > 1e-18)) return 0.0;
    const double threshold = 0.5 * cmax;
    double volume = 0.0;
    for (std::size_t j = 0; j + 1 < mesh.nz(); ++j) {
        for (std::size_t i = 0; i + 1 < mesh.nr(); ++i) {
            const double c00 = c[mesh.index(i, j)];
            const double c10 = c[mesh.index(i + 1, j)];
            const double c01 = c[mesh.index(i, j + 1)];
            const double c11 = c[mesh.index(i + 1, j + 1)];
            const double lo = std::min({c00, c10, c01, c11});
            const double hi = std::max({c00, c10, c01, c11});
            if (hi <= threshold) continue;
            if (lo > threshold) {
                volume += mesh.cell_volume(i, j);
                continue;
            }
            const double r0 = mesh.r(i);
            const double dr = (mesh.r(i + 1) - r0) / sub;
            const double dz = (mesh.z(j + 1) - mesh.z(j)) / sub;
            for (int b = 0; b < sub; ++b) {
                const double t = (b + 0.5) / sub;
                for (int a = 0; a < sub; ++a) {
                    const double s = (a + 0.5) / sub;
                    const double v = (1 - s) * (1 - t) * c00 + s * (1 - t) * c10 + (1 - s) * t * c01 + s * t * c11;
                    if (v > threshold) {
                        const double ra = r0 + a * dr;
                        volume += std::numbers::pi * ((ra + dr) * (ra + dr) - ra * ra) * dz;
                    }
                }
            }
        }
    }
    return volume;
}

namespace {

template <class Op>
void for_ball(const AxiMesh& mesh, double center_z, double radius, Op op) {
    bool any = false;
    for (std::size_t j = 0; j < mesh.nz(); ++j) {
        const double dz = mesh.z(j) - center_z;
        if (std::abs(dz) > radius) continue;
        for (std::size_t i = 0; i < mesh.nr(); ++i) {
            if (std::hypot(mesh.r(i), dz) > radius) break;
            op(mesh.index(i, j));
            any = true;
        }
    }
    if (!any) throw ConfigError("ball of radius " + std::to_string(radius) + " cm contains no mesh node");
}

}  // namespace

double ball_average(std::span<const double> field, const AxiMesh& mesh, double center_z, double radius) {
    double num = 0.0;
    double den = 0.0;
    for_ball(mesh, center_z, radius, [&](std::size_t k) {
        num += mesh.node_volume(k) * field[k];
        den += mesh.node_volume(k);
    });
    return num / den;
}

double ball_max(std::span<const double> field, const AxiMesh& mesh, double center_z, double radius) {
    double m = -INFINITY;
    for_ball(mesh, center_z, radius, [&](std::size_t k) { m = std::max(m, field[k]); });
    return m;
}

DoseFractions dose_fractions(const DoseLedger& ledger) {
    if (!(ledger.injected > 0.0)) return {};
    const double s = 100.0 / ledger.injected;
    return {ledger.free * s, ledger.bound * s, ledger.absorbed * s};
}

}  // namespace depotsim
