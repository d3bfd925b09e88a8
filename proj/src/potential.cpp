#include "depotsim/potential.hpp"

#include <cmath>
#include <string>

#include "depotsim/errors.hpp"

namespace depotsim {

PotentialCoefficients assemble_potential(const AxiMesh& mesh, const SpeciesTable& species,
                                         const PhysicalConstants& constants, double porosity,
                                         const Concentrations& c, std::span<const double> z_mab,
                                         std::span<const double> lymph_rate,
                                         std::span<const double> binding_release) {
    const std::size_t nn = mesh.node_count();
    const std::size_t nr = mesh.nr();
    const std::size_t nz = mesh.nz();
    const double n = porosity;
    const double z_cl = species.chloride.valence;
    const double mu_cl = species.chloride.mobility(constants);
    const double mu_na = species.sodium.mobility(constants);
    const double mu_h = species.hydrogen.mobility(constants);
    const double mu_m = species.antibody.mobility(constants);
    const double z_na = species.sodium.valence;
    const double z_h = species.hydrogen.valence;
    const double d_cl = species.chloride.diffusivity;
    const double dd_na = species.sodium.diffusivity - d_cl;
    const double dd_h = species.hydrogen.diffusivity - d_cl;
    const double dd_m = species.antibody.diffusivity - d_cl;

    PotentialCoefficients out;
    out.sigma.resize(nn);
    out.charge_source.resize(nn);
    out.z_mab.assign(z_mab.begin(), z_mab.end());
    for (std::size_t k = 0; k < nn; ++k) {
        const double z = z_mab[k];
        const double s = constants.faraday * n *
                         (z_na * c.sodium[k] * (z_na * mu_na - z_cl * mu_cl) +
                          z_h * c.hydrogen[k] * (z_h * mu_h - z_cl * mu_cl) +
                          z * c.antibody[k] * (z * mu_m - z_cl * mu_cl));
        if (!(s > 0.0)) {
            throw SolverError("potential: effective conductivity " + std::to_string(s) +
                              " is not positive at node " + std::to_string(k));
        }
        out.sigma[k] = s;
        out.charge_source[k] = z * (binding_release[k] - lymph_rate[k] * c.antibody[k]);
    }

    // n * sum_i z_i (D_i - D_Cl) * (c_i[b] - c_i[a]), with the mAb valence
    // averaged onto the face.
    auto current = [&](std::size_t a, std::size_t b) {
        const double zf = 0.5 * (z_mab[a] + z_mab[b]);
        return n * (z_na * dd_na * (c.sodium[b] - c.sodium[a]) + z_h * dd_h * (c.hydrogen[b] - c.hydrogen[a]) +
                    zf * dd_m * (c.antibody[b] - c.antibody[a]));
    };
    out.radial_current.resize((nr - 1) * nz);
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double g = mesh.radial_face_area(i, j) / (mesh.r(i + 1) - mesh.r(i));
            out.radial_current[j * (nr - 1) + i] = g * current(mesh.index(i, j), mesh.index(i + 1, j));
        }
    }
    out.axial_current.resize(nr * (nz - 1));
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const double g = mesh.axial_face_area(i, j) / (mesh.z(j + 1) - mesh.z(j));
            out.axial_current[j * nr + i] = g * current(mesh.index(i, j), mesh.index(i, j + 1));
        }
    }
    return out;
}

PotentialSolver::PotentialSolver(const AxiMesh& mesh) : mesh_(&mesh), a_(mesh) {}

NodalField PotentialSolver::solve(const PotentialCoefficients& coeffs) {
    const AxiMesh& m = *mesh_;
    const std::size_t nr = m.nr();
    const std::size_t nz = m.nz();
    const std::size_t nn = m.node_count();
    if (coeffs.sigma.size() != nn) throw SolverError("potential: coefficients do not match the mesh");

    a_.set_zero();
    NodalField rhs(nn, 0.0);
    for (std::size_t k = 0; k < nn; ++k) rhs[k] = m.node_volume(k) * coeffs.charge_source[k];

    auto couple = [&](std::size_t a, std::size_t b, StencilMatrix::Dir ab, StencilMatrix::Dir ba, double t,
                      double g) {
        a_.at(a, StencilMatrix::center) += t;
        a_.at(b, StencilMatrix::center) += t;
        a_.at(a, ab) -= t;
        a_.at(b, ba) -= t;
        rhs[a] += g;
        rhs[b] -= g;
    };
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const std::size_t a = m.index(i, j);
            const std::size_t b = a + 1;
            const double sf = 0.5 * (coeffs.sigma[a] + coeffs.sigma[b]);
            const double t = sf * m.radial_face_area(i, j) / (m.r(i + 1) - m.r(i));
            couple(a, b, StencilMatrix::east, StencilMatrix::west, t, coeffs.radial_current[j * (nr - 1) + i]);
        }
    }
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t a = m.index(i, j);
            const std::size_t b = a + nr;
            const double sf = 0.5 * (coeffs.sigma[a] + coeffs.sigma[b]);
            const double t = sf * m.axial_face_area(i, j) / (m.z(j + 1) - m.z(j));
            couple(a, b, StencilMatrix::north, StencilMatrix::south, t, coeffs.axial_current[j * nr + i]);
        }
    }

    // Solvability: remove the volume-weighted mean of the right-hand side.
    double total = 0.0;
    double volume = 0.0;
    for (std::size_t k = 0; k < nn; ++k) {
        total += rhs[k];
        volume += m.node_volume(k);
    }
    for (std::size_t k = 0; k < nn; ++k) rhs[k] -= m.node_volume(k) * total / volume;

    // Pin node 0; with a compatible rhs its own equation then holds too.
    a_.at(0, StencilMatrix::center) = 1.0;
    a_.at(0, StencilMatrix::east) = 0.0;
    a_.at(0, StencilMatrix::north) = 0.0;
    a_.at(1, StencilMatrix::west) = 0.0;
    a_.at(nr, StencilMatrix::south) = 0.0;
    rhs[0] = 0.0;

    ldlt_.factor(a_.matrix(), "potential");
    NodalField phi = ldlt_.solve(rhs);
    for (double v : phi) {
        if (!std::isfinite(v)) throw SolverError("potential: non-finite solution");
    }

    double mean = 0.0;
    for (std::size_t k = 0; k < nn; ++k) mean += m.node_volume(k) * phi[k];
    mean /= volume;
    for (double& v : phi) v -= mean;
    return phi;
}

NodalField solve_potential(const PotentialCoefficients& coeffs, const AxiMesh& mesh) {
    PotentialSolver solver(mesh);
    return solver.solve(coeffs);
}

}  // namespace depotsim
