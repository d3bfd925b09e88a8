#pragma once

#include <span>
#include <vector>

#include "depotsim/linear_system.hpp"
#include "depotsim/mesh.hpp"
#include "depotsim/params.hpp"

namespace depotsim {

/// Trapezoidal flow-rate history: linear ramps of `ramp_time` at both ends of
/// [0, duration], plateau set so the delivered volume is exact.
struct InjectionProtocol {
    double depth = 0.8;           // cm below the skin surface
    double volume = 1.0;          // cm^3
    double duration = 5.0;        // s
    double ramp_time = 0.1;       // s
    double source_radius = 0.1066; // cm; Gaussian sigma = source_radius / 2

    double plateau_rate() const;
    double flow_rate(double t) const;
    /// Exact integral of flow_rate over [t0, t1].
    double delivered(double t0, double t1) const;
    void validate(double height) const;
};

/// Q / (pi a^2): mean exit speed through a circular orifice of radius a.
double orifice_exit_speed(double flow_rate, double radius);

/// Volumetric injection source density q_p (1/s) on mesh nodes: truncated
/// Gaussian centred on the axis at z = H - depth, scaled so that
/// integrate(q_p) == Q(t).
class InjectionSource {
public:
    InjectionSource(const AxiMesh& mesh, const InjectionProtocol& protocol);
    NodalField at(double t) const;
    /// Shape normalized to unit integral.
    const NodalField& unit_profile() const { return shape_; }
    double center_z() const { return center_z_; }

private:
    InjectionProtocol protocol_;
    NodalField shape_;
    double center_z_ = 0.0;
};

NodalField injection_source(const AxiMesh& mesh, const InjectionProtocol& protocol, double t);

/// J_b = n L_pb (S_b/V) (p_b - p - sigma_r (pi_b - pi_i)), 1/s.
double starling_blood(double p, const StarlingParams& s, double porosity);
/// J_l = n L_pl (S_l/V)_layer (p - p_l), 1/s.
double starling_lymph(double p, const StarlingParams& s, double porosity, double slv);

/// Darcy face velocities (volumetric flux per unit area, cm/s).
struct FaceVelocity {
    std::vector<double> radial;  // face (i, j)-(i+1, j), index j*(nr-1)+i
    std::vector<double> axial;   // face (i, j)-(i, j+1), index j*nr+i
    std::vector<double> outer;   // outward flux through r = R at row j
    std::size_t nr = 0;
    std::size_t nz = 0;

    static FaceVelocity zero(const AxiMesh& mesh);
    double& r_face(std::size_t i, std::size_t j) { return radial[j * (nr - 1) + i]; }
    double r_face(std::size_t i, std::size_t j) const { return radial[j * (nr - 1) + i]; }
    double& z_face(std::size_t i, std::size_t j) { return axial[j * nr + i]; }
    double z_face(std::size_t i, std::size_t j) const { return axial[j * nr + i]; }
};

/// Nodal |u| reconstructed by averaging the adjacent face values.
NodalField velocity_magnitude(const AxiMesh& mesh, const FaceVelocity& u);

/// Per-layer coefficient lookups on a mesh: permeability at faces (harmonic
/// across interfaces for axial faces, thickness-weighted arithmetic for
/// radial faces) and node-averaged lymphatic surface density.
class LayerCoefficients {
public:
    LayerCoefficients(const AxiMesh& mesh, const TissueLayers& layers);
    double radial_permeability(std::size_t j) const { return k_radial_[j]; }
    double axial_permeability(std::size_t j) const { return k_axial_[j]; }
    double node_slv(std::size_t j) const { return slv_[j]; }

private:
    std::vector<double> k_radial_;
    std::vector<double> k_axial_;
    std::vector<double> slv_;
};

/// Quasi-static pressure equation
///     div(-(kappa/eta) grad p) = q_p + J_b(p) - J_l(p)
/// with p = 0 at r = R and zero normal flux elsewhere. The Starling terms are
/// linear in p and kept implicit, so each solve is a single linear system;
/// the matrix is factored once and reused for every source.
class PressureSolver {
public:
    PressureSolver(const AxiMesh& mesh, const TissueLayers& layers, const StarlingParams& starling,
                   double viscosity);

    NodalField solve(std::span<const double> q_p) const;
    FaceVelocity velocity(std::span<const double> p, std::span<const double> q_p) const;

    NodalField blood_exchange(std::span<const double> p) const;
    NodalField lymph_exchange(std::span<const double> p) const;

    const AxiMesh& mesh() const { return *mesh_; }

private:
    const AxiMesh* mesh_;
    TissueLayers layers_;
    StarlingParams starling_;
    double viscosity_;
    LayerCoefficients coeff_;
    std::vector<double> t_radial_;  // transmissibilities, same layout as FaceVelocity
    std::vector<double> t_axial_;
    std::vector<double> lymph_coeff_;  // n L_pl S_l/V per node
    double blood_coeff_ = 0.0;         // n L_pb S_b/V
    SpdSolver solver_;
};

NodalField solve_pressure(const AxiMesh& mesh, const TissueLayers& layers, std::span<const double> q_p,
                          const StarlingParams& starling, double viscosity);

/// u = -(kappa/eta) grad p on faces; the r = R outflow closes each boundary
/// node's volume balance.
FaceVelocity velocity_from_pressure(const AxiMesh& mesh, const TissueLayers& layers,
                                    const StarlingParams& starling, double viscosity,
                                    std::span<const double> p, std::span<const double> q_p);

}  // namespace depotsim
