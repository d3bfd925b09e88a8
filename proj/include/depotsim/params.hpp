#pragma once

// Physical parameters of the tissue/injectate system.
//
// Unit system, used everywhere without conversion:
//   length cm, time s, amount mol, pressure N/cm^2, energy J, charge C,
//   potential V, temperature K, concentration mol/cm^3.

#include <array>
#include <string>
#include <vector>

#include "depotsim/ph_curve.hpp"

namespace depotsim {

struct PhysicalConstants {
    double faraday = 96485.0;     // C/mol
    double gas_constant = 8.314;  // J/K/mol
    double temperature = 293.0;   // K

    /// F/(R T) in 1/V.
    double inverse_thermal_voltage() const { return faraday / (gas_constant * temperature); }
    void validate() const;
};

struct SpeciesSpec {
    std::string name;
    double diffusivity = 0.0;  // cm^2/s
    double valence = 0.0;      // ignored for the antibody (curve-valued)
    double c_init = 0.0;       // mol/cm^3

    /// mu = D / (R T), mol cm^2 / (J s). Always derived.
    double mobility(const PhysicalConstants& k) const {
        return diffusivity / (k.gas_constant * k.temperature);
    }
};

enum class Transported : int { sodium = 0, hydrogen = 1, antibody = 2 };
inline constexpr std::size_t kTransportedCount = 3;

/// Na+, H+ and the antibody are transported; Cl- is eliminated through
/// electroneutrality.
struct SpeciesTable {
    SpeciesSpec sodium{"Na+", 1.33e-5, +1.0, 1.4e-4};
    SpeciesSpec hydrogen{"H+", 9.31e-5, +1.0, 4.0e-11};
    SpeciesSpec antibody{"mAb", 1.0e-6, 0.0, 0.0};
    SpeciesSpec chloride{"Cl-", 2.03e-5, -1.0, 0.0};  // c_init derived

    const SpeciesSpec& operator[](Transported s) const;
    void validate() const;
};

struct BindingParams {
    PhCurve ka_curve;    // cm^3/mol/s
    PhCurve kd_curve;    // 1/s
    double k_e = 0.0;    // 1/s
    double b_max = 1e-9; // mol/cm^3

    void validate() const;
};

struct RatePair {
    double k_a;
    double k_d;
};

/// Starling exchange with blood and lymphatic capillaries. The lymphatic
/// surface density is per tissue layer and lives in TissueLayers.
struct StarlingParams {
    double l_pb = 1e-6;     // cm^3/N/s
    double l_pl = 6.0e-5;   // cm^3/N/s
    double sbv = 70.0;      // 1/cm
    double p_b = 0.35;      // N/cm^2
    double p_l = 0.0;       // N/cm^2
    double sigma_r = 0.3;
    double pi_b = 0.35;     // N/cm^2
    double pi_i = 0.15;     // N/cm^2

    void validate() const;
};

struct TissueLayer {
    std::string name;
    double thickness = 0.0;     // cm
    double permeability = 0.0;  // cm^2
    double slv = 0.0;           // lymphatic surface per volume, 1/cm
};

/// Layers ordered from the skin surface (z = H) downward.
struct TissueLayers {
    std::vector<TissueLayer> layers{
        {"dermis-epidermis", 0.2, 1e-10, 70.0},
        {"adipose", 1.5, 1e-9, 0.05 * 70.0},
        {"muscle", 3.3, 1e-11, 0.0},
    };
    double porosity = 0.1;

    double total_thickness() const;
    /// Index of the layer containing height z (z = 0 bottom, z = H skin).
    /// A point exactly on an interface maps to the layer below it.
    std::size_t layer_at(double z, double height) const;
    /// [z_bottom, z_top] of layer k.
    std::array<double, 2> extent(std::size_t k, double height) const;
    void validate(double height) const;
};

// ---- chemistry ---------------------------------------------------------

/// pH = -log10(1000 c_H); c_H in mol/cm^3. Throws DomainError for c_H <= 0.
double ph_from_hydrogen(double c_h);

/// Piecewise-linear, clamped evaluation; identical rule for all curves.
inline double charge_at_ph(const PhCurve& curve, double ph) { return curve(ph); }
RatePair rates_at_ph(const BindingParams& binding, double ph);

/// c_Cl from electroneutrality with z_Na = z_H = +1 and the given z_Cl.
double recover_chloride(double c_na, double c_h, double c_mab, double z_mab,
                        double z_cl = -1.0);

struct SyringeComposition {
    double c_na = 0.0;
    double c_h = 0.0;
    double c_mab = 0.0;
    double c_cl = 0.0;
    double z_mab = 0.0;
};

/// Injectate composition: Na+ at three times physiological level, H+ from the
/// buffer pH, antibody from mg/mL and molar mass, Cl- from charge balance.
/// Throws ConfigError when the balance requires negative chloride.
SyringeComposition syringe_composition(double buffer_ph, double mab_mg_per_ml,
                                       double molar_mass, double z_mab_at_buffer,
                                       double physiological_na = 1.4e-4);

}  // namespace depotsim
