#pragma once

#include <span>
#include <vector>

#include "depotsim/linear_system.hpp"
#include "depotsim/mesh.hpp"
#include "depotsim/params.hpp"

namespace depotsim {

/// Concentrations of the transported species on mesh nodes.
struct Concentrations {
    std::span<const double> sodium;
    std::span<const double> hydrogen;
    std::span<const double> antibody;
};

/// Coefficients of the electroneutrality-derived potential equation, with
/// Cl- eliminated:
///
///   -div( sigma grad Phi ) = s + div( n sum_i z_i (D_i - D_Cl) grad c_i )
///
///   sigma = F n sum_i z_i (z_i mu_i - z_Cl mu_Cl) c_i
///   s     = z_mAb (phi_B - J_l c_mAb)     (charge source of the antibody)
///
/// phi_B is the net release rate from the bound pool into the free pool.
struct PotentialCoefficients {
    NodalField sigma;          // S/cm
    NodalField charge_source;  // mol/cm^3/s of charge
    NodalField z_mab;
    /// Diffusion current n*sum z(D-D_Cl) dc/dn times face area, oriented
    /// from the lower-index node to the higher-index node (mol/s of charge).
    std::vector<double> radial_current;
    std::vector<double> axial_current;
};

/// Throws SolverError if sigma <= 0 at any node.
PotentialCoefficients assemble_potential(const AxiMesh& mesh, const SpeciesTable& species,
                                         const PhysicalConstants& constants, double porosity,
                                         const Concentrations& c, std::span<const double> z_mab,
                                         std::span<const double> lymph_rate,
                                         std::span<const double> binding_release);

/// Pure-Neumann solve. The mean of the discrete right-hand side is removed
/// (solvability) and the gauge is fixed to a zero domain average.
NodalField solve_potential(const PotentialCoefficients& coeffs, const AxiMesh& mesh);

/// Same as solve_potential with a reusable symbolic factorization.
class PotentialSolver {
public:
    explicit PotentialSolver(const AxiMesh& mesh);
    NodalField solve(const PotentialCoefficients& coeffs);

private:
    const AxiMesh* mesh_;
    StencilMatrix a_;
    SpdSolver ldlt_;
};

}  // namespace depotsim
