#include "depotsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "depotsim/errors.hpp"

namespace depotsim {

namespace {

double outer_area(const AxiMesh& m, std::size_t j) {
    return 2.0 * std::numbers::pi * m.radius() * (m.dual_z_hi(j) - m.dual_z_lo(j));
}

// Face speed (cm/s) combining Darcy flux and electromigration.
double face_speed(double u, double z_face, double diffusivity, double porosity, double f_rt, double dphi,
                  double spacing) {
    return u - z_face * diffusivity * porosity * f_rt * dphi / spacing;
}

}  // namespace

FaceFlux species_flux(const AxiMesh& mesh, std::span<const double> c, double diffusivity,
                      std::span<const double> valence, const FaceVelocity& u, std::span<const double> phi,
                      double porosity, const PhysicalConstants& constants, double boundary_value) {
    const std::size_t nr = mesh.nr();
    const std::size_t nz = mesh.nz();
    const double f_rt = constants.inverse_thermal_voltage();
    FaceFlux f;
    f.radial.resize((nr - 1) * nz);
    f.axial.resize(nr * (nz - 1));
    f.outer.resize(nz);
    auto face = [&](std::size_t a, std::size_t b, double uf, double h) {
        const double zf = 0.5 * (valence[a] + valence[b]);
        const double s = face_speed(uf, zf, diffusivity, porosity, f_rt, phi[b] - phi[a], h);
        const double up = s > 0.0 ? c[a] : c[b];
        return s * up - diffusivity * porosity * (c[b] - c[a]) / h;
    };
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            f.radial[j * (nr - 1) + i] =
                face(mesh.index(i, j), mesh.index(i + 1, j), u.r_face(i, j), mesh.r(i + 1) - mesh.r(i));
        }
        const double uo = u.outer[j];
        f.outer[j] = uo * (uo > 0.0 ? c[mesh.index(nr - 1, j)] : boundary_value);
    }
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            f.axial[j * nr + i] =
                face(mesh.index(i, j), mesh.index(i, j + 1), u.z_face(i, j), mesh.z(j + 1) - mesh.z(j));
        }
    }
    return f;
}

TransportSolver::TransportSolver(const AxiMesh& mesh, const SpeciesTable& species,
                                 const PhysicalConstants& constants)
    : mesh_(&mesh), species_(species), constants_(constants), a_(mesh) {}

NodalField TransportSolver::advance_one(std::span<const double> c_old, double diffusivity,
                                        std::span<const double> valence, const FaceVelocity& u,
                                        std::span<const double> phi, std::span<const double> q_p,
                                        double c_source, std::span<const double> sink,
                                        std::span<const double> extra_source, double porosity, double dt,
                                        double boundary_value, double* outflow, std::size_t* clipped,
                                        bool* fallback) {
    const AxiMesh& m = *mesh_;
    const std::size_t nr = m.nr();
    const std::size_t nz = m.nz();
    const std::size_t nn = m.node_count();
    const double f_rt = constants_.inverse_thermal_voltage();
    using D = StencilMatrix::Dir;

    a_.set_zero();
    NodalField rhs(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        const double v = m.node_volume(k);
        double diag = porosity * v / dt;
        double b = porosity * v / dt * c_old[k];
        if (!q_p.empty()) b += v * q_p[k] * c_source;
        if (!sink.empty()) diag += v * sink[k];
        if (!extra_source.empty()) b += v * extra_source[k];
        a_.at(k, D::center) = diag;
        rhs[k] = b;
    }

    // Face (a -> b) with area-weighted speed s and diffusive conductance g.
    auto couple = [&](std::size_t a, std::size_t b, D ab, D ba, double s, double g) {
        if (s > 0.0) {
            a_.at(a, D::center) += s;
            a_.at(b, ba) -= s;
        } else {
            a_.at(a, ab) += s;
            a_.at(b, D::center) -= s;
        }
        a_.at(a, D::center) += g;
        a_.at(b, D::center) += g;
        a_.at(a, ab) -= g;
        a_.at(b, ba) -= g;
    };
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const std::size_t a = m.index(i, j);
            const std::size_t b = a + 1;
            const double h = m.r(i + 1) - m.r(i);
            const double area = m.radial_face_area(i, j);
            const double zf = 0.5 * (valence[a] + valence[b]);
            const double s = face_speed(u.r_face(i, j), zf, diffusivity, porosity, f_rt, phi[b] - phi[a], h);
            couple(a, b, D::east, D::west, s * area, diffusivity * porosity * area / h);
        }
    }
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t a = m.index(i, j);
            const std::size_t b = a + nr;
            const double h = m.z(j + 1) - m.z(j);
            const double area = m.axial_face_area(i, j);
            const double zf = 0.5 * (valence[a] + valence[b]);
            const double s = face_speed(u.z_face(i, j), zf, diffusivity, porosity, f_rt, phi[b] - phi[a], h);
            couple(a, b, D::north, D::south, s * area, diffusivity * porosity * area / h);
        }
    }
    for (std::size_t j = 0; j < nz; ++j) {
        const std::size_t k = m.index(nr - 1, j);
        const double s = u.outer[j] * outer_area(m, j);
        if (s > 0.0) a_.at(k, D::center) += s;
        else rhs[k] -= s * boundary_value;
    }

    NodalField c(c_old.begin(), c_old.end());
    const SolveReport rep = solve_general(a_.matrix(), rhs, c, "species transport", 1e-12);
    if (fallback != nullptr && rep.direct_fallback) *fallback = true;

    double cmax = 0.0;
    double cmin = 0.0;
    for (double v : c) {
        if (!std::isfinite(v)) throw StepRejected("species transport: non-finite concentration");
        cmax = std::max(cmax, v);
        cmin = std::min(cmin, v);
    }
    if (cmin < -1e-12 * cmax) {
        throw StepRejected("species transport: concentration undershoot " + std::to_string(cmin));
    }
    std::size_t n_clipped = 0;
    for (double& v : c) {
        if (v < 0.0) {
            v = 0.0;
            ++n_clipped;
        }
    }
    if (clipped != nullptr) *clipped += n_clipped;

    if (outflow != nullptr) {
        double out = 0.0;
        for (std::size_t j = 0; j < nz; ++j) {
            const double s = u.outer[j] * outer_area(m, j);
            out += s * (s > 0.0 ? c[m.index(nr - 1, j)] : boundary_value);
        }
        *outflow = out;
    }
    return c;
}

SpeciesFields TransportSolver::advance(const SpeciesFields& old, const TransportStepInputs& in,
                                       TransportReport* report) {
    if (!(in.dt > 0.0)) throw SolverError("species transport: dt must be positive");
    if (in.velocity == nullptr) throw SolverError("species transport: missing velocity field");
    const AxiMesh& m = *mesh_;
    const std::size_t nn = m.node_count();
    TransportReport local;
    TransportReport& rep = report != nullptr ? *report : local;
    rep = TransportReport{};

    const NodalField z_na(nn, species_.sodium.valence);
    const NodalField z_h(nn, species_.hydrogen.valence);
    SpeciesFields out;
    out.sodium = advance_one(old.sodium, species_.sodium.diffusivity, z_na, *in.velocity, in.phi, in.q_p,
                             in.syringe.c_na, {}, {}, in.porosity, in.dt, species_.sodium.c_init,
                             &rep.boundary_outflow[0], &rep.clipped, &rep.direct_fallback);
    out.hydrogen = advance_one(old.hydrogen, species_.hydrogen.diffusivity, z_h, *in.velocity, in.phi, in.q_p,
                               in.syringe.c_h, {}, {}, in.porosity, in.dt, species_.hydrogen.c_init,
                               &rep.boundary_outflow[1], &rep.clipped, &rep.direct_fallback);
    out.antibody = advance_one(old.antibody, species_.antibody.diffusivity, in.z_mab, *in.velocity, in.phi,
                               in.q_p, in.syringe.c_mab, in.lymph_rate, in.binding_release, in.porosity, in.dt,
                               species_.antibody.c_init, &rep.boundary_outflow[2], &rep.clipped,
                               &rep.direct_fallback);
    if (!in.lymph_rate.empty()) {
        NodalField uptake(nn);
        for (std::size_t k = 0; k < nn; ++k) uptake[k] = in.lymph_rate[k] * out.antibody[k];
        rep.lymph_uptake = integrate(uptake, m);
    }
    return out;
}

SpeciesFields advance_species(const AxiMesh& mesh, const SpeciesTable& species,
                              const PhysicalConstants& constants, const SpeciesFields& old,
                              const TransportStepInputs& in) {
    TransportSolver solver(mesh, species, constants);
    return solver.advance(old, in);
}

NodalField update_tissue_ph(std::span<const double> c_h, std::size_t* floored) {
    constexpr double floor = 1e-16;
    NodalField ph(c_h.size());
    std::size_t n = 0;
    for (std::size_t k = 0; k < c_h.size(); ++k) {
        double c = c_h[k];
        if (!(c > floor)) {
            ++n;
            c = floor;
        }
        ph[k] = ph_from_hydrogen(c);
    }
    if (floored != nullptr) *floored = n;
    return ph;
}

}  // namespace depotsim
