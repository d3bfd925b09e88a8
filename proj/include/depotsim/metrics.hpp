#pragma once

#include <span>

#include "depotsim/mesh.hpp"

namespace depotsim {

struct DoseLedger;

/// integrate(f) / (pi R^2 H).
double domain_average(std::span<const double> field, const AxiMesh& mesh);

/// rho = z c, pointwise.
NodalField net_charge_density(std::span<const double> c_mab, std::span<const double> z_mab);

/// Volume (cm^3) where c > 0.5 max(c). Each cell is subsampled on a regular
/// 8 x 8 grid of the bilinear interpolant with exact axisymmetric sub-volumes,
/// so partially covered cells contribute fractionally. Zero when
/// max(c) <= 1e-18.
double plume_volume(std::span<const double> c, const AxiMesh& mesh);

/// Node-volume-weighted average over nodes within `radius` of (0, center_z).
/// Throws ConfigError when no node lies in the ball.
double ball_average(std::span<const double> field, const AxiMesh& mesh, double center_z, double radius);

/// Maximum over nodes within the ball; same error rule as ball_average.
double ball_max(std::span<const double> field, const AxiMesh& mesh, double center_z, double radius);

struct DoseFractions {
    double free_pct = 0.0;
    double bound_pct = 0.0;
    double absorbed_pct = 0.0;
};

/// Totals divided by the injected amount, in percent. All zero while
/// nothing has been injected.
DoseFractions dose_fractions(const DoseLedger& ledger);

}  // namespace depotsim
