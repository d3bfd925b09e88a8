#include "depotsim/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "depotsim/errors.hpp"

namespace depotsim {

// ---- protocol ----------------------------------------------------------

double InjectionProtocol::plateau_rate() const {
    return volume / (duration - ramp_time);
}

double InjectionProtocol::flow_rate(double t) const {
    if (t < 0.0 || t > duration) return 0.0;
    const double q = plateau_rate();
    if (ramp_time <= 0.0) return q;
    if (t < ramp_time) return q * t / ramp_time;
    if (t > duration - ramp_time) return q * (duration - t) / ramp_time;
    return q;
}

double InjectionProtocol::delivered(double t0, double t1) const {
    // Antiderivative of the trapezoid, piecewise quadratic.
    auto cumulative = [this](double t) {
        const double q = plateau_rate();
        t = std::clamp(t, 0.0, duration);
        if (ramp_time <= 0.0) return q * t;
        const double up_end = ramp_time;
        const double down_start = duration - ramp_time;
        if (t <= up_end) return 0.5 * q * t * t / ramp_time;
        double v = 0.5 * q * ramp_time;
        if (t <= down_start) return v + q * (t - up_end);
        v += q * (down_start - up_end);
        const double s = t - down_start;
        return v + q * s - 0.5 * q * s * s / ramp_time;
    };
    return cumulative(t1) - cumulative(t0);
}

void InjectionProtocol::validate(double height) const {
    if (!(volume >= 0.0)) throw ConfigError("protocol.volume_cm3 must be >= 0");
    if (!(duration > 0.0)) throw ConfigError("protocol.duration_s must be > 0");
    if (!(ramp_time >= 0.0) || 2.0 * ramp_time > duration) {
        throw ConfigError("protocol.ramp_s must lie in [0, duration/2]");
    }
    if (!(source_radius > 0.0)) throw ConfigError("protocol.source_radius_cm must be > 0");
    if (!(depth > 0.0) || !(depth < height)) {
        throw ConfigError("protocol.depth_cm puts the source centre outside the domain");
    }
}

double orifice_exit_speed(double flow_rate, double radius) {
    return flow_rate / (std::numbers::pi * radius * radius);
}

InjectionSource::InjectionSource(const AxiMesh& mesh, const InjectionProtocol& protocol)
    : protocol_(protocol) {
    protocol.validate(mesh.height());
    center_z_ = mesh.height() - protocol.depth;
    const double sigma = 0.5 * protocol.source_radius;
    const double cutoff2 = 9.0 * sigma * sigma;
    shape_.assign(mesh.node_count(), 0.0);
    for (std::size_t j = 0; j < mesh.nz(); ++j) {
        const double dz = mesh.z(j) - center_z_;
        for (std::size_t i = 0; i < mesh.nr(); ++i) {
            const double d2 = mesh.r(i) * mesh.r(i) + dz * dz;
            if (d2 <= cutoff2) shape_[mesh.index(i, j)] = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
    const double total = integrate(shape_, mesh);
    if (!(total > 0.0)) {
        throw ConfigError("injection source is not resolved by the mesh (no node within 3 sigma)");
    }
    for (double& v : shape_) v /= total;
}

NodalField InjectionSource::at(double t) const {
    NodalField q(shape_.size());
    const double rate = protocol_.flow_rate(t);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = rate * shape_[k];
    return q;
}

NodalField injection_source(const AxiMesh& mesh, const InjectionProtocol& protocol, double t) {
    return InjectionSource(mesh, protocol).at(t);
}

// ---- Starling ----------------------------------------------------------

double starling_blood(double p, const StarlingParams& s, double porosity) {
    return porosity * s.l_pb * s.sbv * (s.p_b - p - s.sigma_r * (s.pi_b - s.pi_i));
}

double starling_lymph(double p, const StarlingParams& s, double porosity, double slv) {
    return porosity * s.l_pl * slv * (p - s.p_l);
}

// ---- faces -------------------------------------------------------------

FaceVelocity FaceVelocity::zero(const AxiMesh& mesh) {
    FaceVelocity u;
    u.nr = mesh.nr();
    u.nz = mesh.nz();
    u.radial.assign((u.nr - 1) * u.nz, 0.0);
    u.axial.assign(u.nr * (u.nz - 1), 0.0);
    u.outer.assign(u.nz, 0.0);
    return u;
}

NodalField velocity_magnitude(const AxiMesh& mesh, const FaceVelocity& u) {
    NodalField mag(mesh.node_count(), 0.0);
    const std::size_t nr = mesh.nr();
    const std::size_t nz = mesh.nz();
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            double ur = 0.0;
            if (i == 0) {
                ur = 0.0;  // symmetry axis
            } else if (i + 1 == nr) {
                ur = 0.5 * (u.r_face(i - 1, j) + u.outer[j]);
            } else {
                ur = 0.5 * (u.r_face(i - 1, j) + u.r_face(i, j));
            }
            const double lo = j > 0 ? u.z_face(i, j - 1) : 0.0;
            const double hi = j + 1 < nz ? u.z_face(i, j) : 0.0;
            const double uz = 0.5 * (lo + hi);
            mag[mesh.index(i, j)] = std::sqrt(ur * ur + uz * uz);
        }
    }
    return mag;
}

LayerCoefficients::LayerCoefficients(const AxiMesh& mesh, const TissueLayers& layers) {
    const double h = mesh.height();
    auto overlap = [&](std::size_t k, double lo, double hi) {
        const auto ext = layers.extent(k, h);
        return std::max(0.0, std::min(hi, ext[1]) - std::max(lo, ext[0]));
    };
    const std::size_t nl = layers.layers.size();
    k_axial_.resize(mesh.nz() - 1);
    for (std::size_t j = 0; j + 1 < mesh.nz(); ++j) {
        const double lo = mesh.z(j);
        const double hi = mesh.z(j + 1);
        double resistance = 0.0;
        for (std::size_t k = 0; k < nl; ++k) resistance += overlap(k, lo, hi) / layers.layers[k].permeability;
        k_axial_[j] = (hi - lo) / resistance;
    }
    k_radial_.resize(mesh.nz());
    slv_.resize(mesh.nz());
    for (std::size_t j = 0; j < mesh.nz(); ++j) {
        const double lo = mesh.dual_z_lo(j);
        const double hi = mesh.dual_z_hi(j);
        double kk = 0.0;
        double ss = 0.0;
        for (std::size_t k = 0; k < nl; ++k) {
            const double w = overlap(k, lo, hi);
            kk += w * layers.layers[k].permeability;
            ss += w * layers.layers[k].slv;
        }
        k_radial_[j] = kk / (hi - lo);
        slv_[j] = ss / (hi - lo);
    }
}

// ---- pressure ----------------------------------------------------------

PressureSolver::PressureSolver(const AxiMesh& mesh, const TissueLayers& layers,
                               const StarlingParams& starling, double viscosity)
    : mesh_(&mesh),
      layers_(layers),
      starling_(starling),
      viscosity_(viscosity),
      coeff_(mesh, layers) {
    if (!(viscosity > 0.0)) throw ConfigError("flow.viscosity must be > 0");
    layers.validate(mesh.height());
    starling.validate();
    const std::size_t nr = mesh.nr();
    const std::size_t nz = mesh.nz();
    const double n = layers.porosity;

    t_radial_.resize((nr - 1) * nz);
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            t_radial_[j * (nr - 1) + i] = mesh.radial_face_area(i, j) * coeff_.radial_permeability(j) /
                                          viscosity / (mesh.r(i + 1) - mesh.r(i));
        }
    }
    t_axial_.resize(nr * (nz - 1));
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            t_axial_[j * nr + i] = mesh.axial_face_area(i, j) * coeff_.axial_permeability(j) / viscosity /
                                   (mesh.z(j + 1) - mesh.z(j));
        }
    }
    blood_coeff_ = n * starling.l_pb * starling.sbv;
    lymph_coeff_.resize(mesh.node_count());
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            lymph_coeff_[mesh.index(i, j)] = n * starling.l_pl * coeff_.node_slv(j);
        }
    }

    StencilMatrix a(mesh);
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t k = mesh.index(i, j);
            if (i + 1 == nr) {  // Dirichlet p = 0 at r = R
                a.at(k, StencilMatrix::center) = 1.0;
                continue;
            }
            double diag = mesh.node_volume(k) * (blood_coeff_ + lymph_coeff_[k]);
            if (i > 0) {
                const double t = t_radial_[j * (nr - 1) + i - 1];
                diag += t;
                a.at(k, StencilMatrix::west) = -t;
            }
            {
                const double t = t_radial_[j * (nr - 1) + i];
                diag += t;
                // The east neighbour may be a Dirichlet node (value 0): drop
                // the coupling to keep the matrix symmetric.
                if (i + 2 < nr) a.at(k, StencilMatrix::east) = -t;
            }
            if (j > 0) {
                const double t = t_axial_[(j - 1) * nr + i];
                diag += t;
                a.at(k, StencilMatrix::south) = -t;
            }
            if (j + 1 < nz) {
                const double t = t_axial_[j * nr + i];
                diag += t;
                a.at(k, StencilMatrix::north) = -t;
            }
            a.at(k, StencilMatrix::center) = diag;
        }
    }
    // Zero the couplings from Dirichlet rows' neighbours pointing into them
    // (already dropped) and from Dirichlet rows themselves (identity rows).
    a.matrix().prune(0.0);
    solver_.factor(a.matrix(), "pressure");
}

NodalField PressureSolver::solve(std::span<const double> q_p) const {
    const AxiMesh& m = *mesh_;
    const double base = blood_coeff_ * (starling_.p_b - starling_.sigma_r * (starling_.pi_b - starling_.pi_i));
    NodalField rhs(m.node_count(), 0.0);
    for (std::size_t j = 0; j < m.nz(); ++j) {
        for (std::size_t i = 0; i + 1 < m.nr(); ++i) {
            const std::size_t k = m.index(i, j);
            rhs[k] = m.node_volume(k) * (q_p[k] + base + lymph_coeff_[k] * starling_.p_l);
        }
    }
    NodalField p = solver_.solve(rhs);
    for (std::size_t j = 0; j < m.nz(); ++j) p[m.index(m.nr() - 1, j)] = 0.0;
    return p;
}

FaceVelocity PressureSolver::velocity(std::span<const double> p, std::span<const double> q_p) const {
    const AxiMesh& m = *mesh_;
    const std::size_t nr = m.nr();
    const std::size_t nz = m.nz();
    FaceVelocity u = FaceVelocity::zero(m);
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double t = t_radial_[j * (nr - 1) + i];
            u.r_face(i, j) = -t * (p[m.index(i + 1, j)] - p[m.index(i, j)]) / m.radial_face_area(i, j);
        }
    }
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const double t = t_axial_[j * nr + i];
            u.z_face(i, j) = -t * (p[m.index(i, j + 1)] - p[m.index(i, j)]) / m.axial_face_area(i, j);
        }
    }
    // Outflow through r = R closes the volume balance of the boundary column.
    const std::size_t ib = nr - 1;
    for (std::size_t j = 0; j < nz; ++j) {
        const std::size_t k = m.index(ib, j);
        double inflow = u.r_face(ib - 1, j) * m.radial_face_area(ib - 1, j);
        if (j > 0) inflow += u.z_face(ib, j - 1) * m.axial_face_area(ib, j - 1);
        if (j + 1 < nz) inflow -= u.z_face(ib, j) * m.axial_face_area(ib, j);
        const double gen = m.node_volume(k) * (q_p[k] + starling_blood(p[k], starling_, layers_.porosity) -
                                               lymph_coeff_[k] * (p[k] - starling_.p_l));
        const double area = 2.0 * std::numbers::pi * m.radius() * (m.dual_z_hi(j) - m.dual_z_lo(j));
        u.outer[j] = (inflow + gen) / area;
    }
    return u;
}

NodalField PressureSolver::blood_exchange(std::span<const double> p) const {
    NodalField out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = starling_blood(p[k], starling_, layers_.porosity);
    return out;
}

NodalField PressureSolver::lymph_exchange(std::span<const double> p) const {
    NodalField out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = lymph_coeff_[k] * (p[k] - starling_.p_l);
    return out;
}

NodalField solve_pressure(const AxiMesh& mesh, const TissueLayers& layers, std::span<const double> q_p,
                          const StarlingParams& starling, double viscosity) {
    return PressureSolver(mesh, layers, starling, viscosity).solve(q_p);
}

FaceVelocity velocity_from_pressure(const AxiMesh& mesh, const TissueLayers& layers,
                                    const StarlingParams& starling, double viscosity,
                                    std::span<const double> p, std::span<const double> q_p) {
    return PressureSolver(mesh, layers, starling, viscosity).velocity(p, q_p);
}

}  // namespace depotsim
