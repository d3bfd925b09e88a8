#pragma once

#include <span>

#include "depotsim/mesh.hpp"
#include "depotsim/params.hpp"

namespace depotsim {

// Bound-drug kinetics on the extracellular matrix:
//
//   dc_B/dt = k_a n c (B_max - c_B) - k_d c_B - k_e c_B
//
// The free-pool exchange phi_B is the exact negative of the exchange part of
// that right-hand side, so free + bound drug is conserved apart from the
// k_e elimination of the bound pool.

/// phi_B = k_d c_B - k_a n c (B_max - c_B): net release into the free pool,
/// mol/cm^3/s. The k_e term leaves the system and is not part of phi_B.
double binding_sink(double c_mab, double c_b, double k_a, double k_d, double porosity, double b_max);

/// Backward Euler with c frozen over the step, clamped to [0, B_max].
double advance_binding(double c_b, double c_mab, double k_a, double k_d, double k_e, double porosity,
                       double b_max, double dt);

struct Exchange {
    double c_mab;  // new free concentration (per pore volume)
    double c_b;    // new bound concentration
};

/// Backward Euler on the local free/bound pair with both pools implicit:
///   n (c' - c)/dt = -(k_a n c' (B_max - c_B') - k_d c_B')
///   (c_B' - c_B)/dt = k_a n c' (B_max - c_B') - (k_d + k_e) c_B'
/// The quadratic has exactly one root in [0, min(B_max, (n c + c_B)/s)],
/// s = 1 + dt k_e; n c' + s c_B' = n c + c_B holds to round-off.
Exchange exchange_binding(double c_mab, double c_b, double k_a, double k_d, double k_e, double porosity,
                          double b_max, double dt);

/// Fieldwise advance_binding with rates from the nodal pH.
NodalField advance_binding_field(std::span<const double> c_b, std::span<const double> c_mab,
                                 std::span<const double> ph, const BindingParams& params, double porosity,
                                 double dt);

/// Fieldwise binding_sink with rates from the nodal pH.
NodalField binding_sink_field(std::span<const double> c_mab, std::span<const double> c_b,
                              std::span<const double> ph, const BindingParams& params, double porosity);

}  // namespace depotsim
