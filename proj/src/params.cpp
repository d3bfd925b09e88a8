#include "depotsim/params.hpp"

#include <cmath>

#include "depotsim/errors.hpp"

namespace depotsim {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void PhysicalConstants::validate() const {
    require(faraday > 0.0, "constants.faraday must be > 0");
    require(gas_constant > 0.0, "constants.gas_constant must be > 0");
    require(temperature > 0.0, "constants.temperature must be > 0");
}

const SpeciesSpec& SpeciesTable::operator[](Transported s) const {
    switch (s) {
        case Transported::sodium: return sodium;
        case Transported::hydrogen: return hydrogen;
        case Transported::antibody: return antibody;
    }
    return antibody;
}

void SpeciesTable::validate() const {
    for (const SpeciesSpec* s : {&sodium, &hydrogen, &antibody, &chloride}) {
        require(s->diffusivity > 0.0 && std::isfinite(s->diffusivity),
                "species " + s->name + ": diffusivity must be > 0");
        require(s->c_init >= 0.0, "species " + s->name + ": initial concentration must be >= 0");
    }
    require(hydrogen.c_init > 0.0, "species H+: initial concentration must be > 0");
    require(chloride.valence != 0.0, "eliminated species Cl- must have nonzero valence");
}

void BindingParams::validate() const {
    require(!ka_curve.empty() && !kd_curve.empty(), "binding: k_a and k_d curves are required");
    require(k_e >= 0.0, "binding.k_e must be >= 0");
    require(b_max > 0.0, "binding.b_max must be > 0");
    for (double ph = 3.0; ph <= 12.0; ph += 0.25) {
        require(ka_curve(ph) >= 0.0, "binding: k_a(pH) must be >= 0 on [3, 12]");
        require(kd_curve(ph) >= 0.0, "binding: k_d(pH) must be >= 0 on [3, 12]");
    }
    require(ka_curve.min_value() >= 0.0, "binding: k_a samples must be >= 0");
    require(kd_curve.min_value() >= 0.0, "binding: k_d samples must be >= 0");
}

void StarlingParams::validate() const {
    require(l_pb >= 0.0, "starling.l_pb must be >= 0");
    require(l_pl >= 0.0, "starling.l_pl must be >= 0");
    require(sbv >= 0.0, "starling.sbv must be >= 0");
    require(sigma_r >= 0.0 && sigma_r <= 1.0, "starling.sigma_r must lie in [0, 1]");
}

double TissueLayers::total_thickness() const {
    double h = 0.0;
    for (const auto& l : layers) h += l.thickness;
    return h;
}

std::size_t TissueLayers::layer_at(double z, double height) const {
    double top = height;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const double bottom = top - layers[k].thickness;
        if (z > bottom || k + 1 == layers.size()) return k;
        top = bottom;
    }
    return layers.size() - 1;
}

std::array<double, 2> TissueLayers::extent(std::size_t k, double height) const {
    double top = height;
    for (std::size_t m = 0; m < k; ++m) top -= layers[m].thickness;
    return {top - layers[k].thickness, top};
}

void TissueLayers::validate(double height) const {
    require(!layers.empty(), "layers: at least one tissue layer is required");
    require(porosity > 0.0 && porosity <= 1.0, "layers.porosity must lie in (0, 1]");
    for (const auto& l : layers) {
        require(l.thickness > 0.0, "layers." + l.name + ": thickness must be > 0");
        require(l.permeability > 0.0, "layers." + l.name + ": permeability must be > 0");
        require(l.slv >= 0.0, "layers." + l.name + ": lymphatic surface density must be >= 0");
    }
    require(std::abs(total_thickness() - height) <= 1e-12 * height,
            "layers must tile [0, H] exactly: thicknesses sum to " +
                std::to_string(total_thickness()) + " cm, H = " + std::to_string(height) + " cm");
}

double ph_from_hydrogen(double c_h) {
    if (!(c_h > 0.0)) throw DomainError("non-positive hydrogen concentration", 0);
    return -std::log10(1000.0 * c_h);
}

RatePair rates_at_ph(const BindingParams& binding, double ph) {
    return {binding.ka_curve(ph), binding.kd_curve(ph)};
}

double recover_chloride(double c_na, double c_h, double c_mab, double z_mab, double z_cl) {
    return -(1.0 / z_cl) * (c_na + c_h + z_mab * c_mab);
}

SyringeComposition syringe_composition(double buffer_ph, double mab_mg_per_ml,
                                       double molar_mass, double z_mab_at_buffer,
                                       double physiological_na) {
    require(buffer_ph >= 3.0 && buffer_ph <= 12.0, "protocol.buffer_ph must lie in [3, 12]");
    require(molar_mass > 0.0, "drug.molar_mass must be > 0");
    require(mab_mg_per_ml >= 0.0, "drug.concentration_mg_per_ml must be >= 0");
    SyringeComposition s;
    s.c_na = 3.0 * physiological_na;
    s.c_h = std::pow(10.0, -buffer_ph) / 1000.0;
    // mg/mL -> g/cm^3 -> mol/cm^3
    s.c_mab = mab_mg_per_ml * 1e-3 / molar_mass;
    s.z_mab = z_mab_at_buffer;
    s.c_cl = recover_chloride(s.c_na, s.c_h, s.c_mab, s.z_mab);
    if (s.c_cl < 0.0) {
        throw ConfigError("unbalanced formulation: syringe chloride would be negative (" +
                          std::to_string(s.c_cl) + " mol/cm^3)");
    }
    return s;
}

}  // namespace depotsim
