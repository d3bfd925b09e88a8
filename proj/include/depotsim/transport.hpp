#pragma once

#include <span>
#include <vector>

#include "depotsim/darcy.hpp"
#include "depotsim/linear_system.hpp"
#include "depotsim/mesh.hpp"
#include "depotsim/params.hpp"

namespace depotsim {

/// Face fluxes j = u c - D n grad c - z D n F/(RT) c grad Phi in mol/cm^2/s,
/// oriented like FaceVelocity (towards increasing r or z). `outer` holds the
/// flux leaving through r = R.
struct FaceFlux {
    std::vector<double> radial;
    std::vector<double> axial;
    std::vector<double> outer;
};

/// Advective and migrative parts are upwinded on the face speed
/// u_n - z D n F/(RT) dPhi/dn; diffusion is central. `valence` is nodal
/// (face value = mean of the two nodes). `boundary_value` is the
/// concentration carried in by inflow across r = R.
FaceFlux species_flux(const AxiMesh& mesh, std::span<const double> c, double diffusivity,
                      std::span<const double> valence, const FaceVelocity& u, std::span<const double> phi,
                      double porosity, const PhysicalConstants& constants, double boundary_value = 0.0);

/// Everything one implicit transport step needs besides the old state.
struct TransportStepInputs {
    double dt = 0.0;
    const FaceVelocity* velocity = nullptr;
    std::span<const double> phi;
    std::span<const double> q_p;
    std::span<const double> z_mab;
    std::span<const double> lymph_rate;       // J_l, 1/s
    std::span<const double> binding_release;  // phi_B, mol/cm^3/s, lagged
    SyringeComposition syringe;
    double porosity = 0.1;
};

struct SpeciesFields {
    NodalField sodium;
    NodalField hydrogen;
    NodalField antibody;
};

/// Per-species statistics of one transport step.
struct TransportReport {
    double boundary_outflow[3] = {0.0, 0.0, 0.0};  // mol/s through r = R at the new state
    double lymph_uptake = 0.0;                     // integral of J_l c_mAb^{k+1}, mol/s
    std::size_t clipped = 0;                       // round-off negatives set to zero
    bool direct_fallback = false;
};

/// Backward Euler for Na+, H+ and mAb:
///   n (c^{k+1} - c^k)/dt + div j(c^{k+1}) = q_p c^max [- J_l c^{k+1} + phi_B for mAb]
/// Throws StepRejected when a concentration undershoots -1e-12 max(c).
class TransportSolver {
public:
    TransportSolver(const AxiMesh& mesh, const SpeciesTable& species, const PhysicalConstants& constants);

    SpeciesFields advance(const SpeciesFields& old, const TransportStepInputs& in,
                          TransportReport* report = nullptr);

    /// Single-species step with constant valence, no sink and no source
    /// beyond q_p * c_source. Used by verification tests.
    NodalField advance_one(std::span<const double> c_old, double diffusivity, std::span<const double> valence,
                           const FaceVelocity& u, std::span<const double> phi, std::span<const double> q_p,
                           double c_source, std::span<const double> sink, std::span<const double> extra_source,
                           double porosity, double dt, double boundary_value, double* outflow = nullptr,
                           std::size_t* clipped = nullptr, bool* fallback = nullptr);

private:
    const AxiMesh* mesh_;
    SpeciesTable species_;
    PhysicalConstants constants_;
    StencilMatrix a_;
};

SpeciesFields advance_species(const AxiMesh& mesh, const SpeciesTable& species,
                              const PhysicalConstants& constants, const SpeciesFields& old,
                              const TransportStepInputs& in);

/// Nodal pH with c_H floored at 1e-16; `floored` receives the number of
/// nodes at or below the floor.
NodalField update_tissue_ph(std::span<const double> c_h, std::size_t* floored = nullptr);

}  // namespace depotsim
