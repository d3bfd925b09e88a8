#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depotsim/darcy.hpp"
#include "depotsim/params.hpp"
#include "depotsim/ph_curve.hpp"

namespace depotsim {

/// Time-stepping and phase-transition plan.
struct PhasePlan {
    double short_dt = 0.02;        // s
    double short_horizon = 10.0;   // s
    double long_dt_min = 1.0;      // s
    double long_dt_max = 60.0;     // s
    double long_dt_growth = 1.05;  // geometric ramp factor per step
    double long_horizon_h = 36.0;  // h
    double report_time_h = 30.0;   // time of the sweep dose-fraction report
    std::size_t coarse_nr = 80;
    std::size_t coarse_nz = 80;
    double checkpoint_every_h = 6.0;

    void validate(double injection_duration) const;
};

struct DrugSpec {
    std::string curve_set = "igg1-like";
    // Explicit curve files; empty means <data>/curves/<curve_set>/<kind>.csv.
    std::string charge_curve_path;
    std::string ka_curve_path;
    std::string kd_curve_path;
    double concentration_mg_per_ml = 100.0;
    double molar_mass = 150000.0;  // g/mol
    double buffer_ph = 7.4;
};

struct OutputSpec {
    std::string directory = "run";
    double short_cadence_s = 0.1;
    double long_cadence_h = 0.25;
    double short_snapshot_s = 5.0;   // snapshot cadence in the short phase (0 = none)
    double long_snapshot_h = 6.0;    // snapshot cadence in the long phase (0 = none)
    double ball_radius_cm = 0.2;
    bool checkpoints = true;
};

struct MeshSpec {
    std::size_t fine_nr = 200;
    std::size_t fine_nz = 200;
    double grading = 1.02;
};

/// Fully resolved simulation input. Curves are loaded at config load time;
/// the curve paths are kept for serialization.
struct SimulationConfig {
    double radius = 5.0;   // cm
    double height = 5.0;   // cm
    std::string bmi = "high";
    std::optional<double> muscle_thickness;  // derived as H - dermis - adipose when absent

    TissueLayers layers;
    MeshSpec mesh;
    InjectionProtocol protocol;
    SpeciesTable species;
    PhysicalConstants constants;
    StarlingParams starling;
    double viscosity = 1e-7;  // N s/cm^2
    double isf_ph = 7.4;

    DrugSpec drug;
    PhCurve charge_curve;
    BindingParams binding;

    PhasePlan plan;
    OutputSpec output;

    /// Loads the curves named by `drug` (relative paths resolve against
    /// `base_dir`). Throws ConfigError on failure.
    void load_curves(const std::filesystem::path& base_dir);
    /// Re-derives muscle thickness and initial H+ and checks every invariant.
    void finalize();
    void validate() const;

    SyringeComposition syringe() const;
};

/// Directory holding the packaged example curve sets.
std::filesystem::path data_directory();

/// Defaults for every key, curves loaded from the packaged data.
SimulationConfig default_config();

/// `section.key = value` lines with `#` comments. Unknown keys, malformed
/// lines and invalid values throw ConfigError naming the line and key.
SimulationConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
SimulationConfig load_config(const std::filesystem::path& path);

/// Applies a single `key = value` override (same validation as parsing),
/// then re-finalizes.
void apply_setting(SimulationConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir);

/// Every key with its current value; parse_config(serialize_config(c))
/// reproduces c.
std::string serialize_config(const SimulationConfig& cfg);

/// Sorted list of all recognised keys.
std::vector<std::string> config_keys();

/// BMI presets: high -> adipose 1.5 cm, depth 0.8 cm; low -> adipose 0.6 cm,
/// depth 0.5 cm.
void apply_bmi_preset(SimulationConfig& cfg, const std::string& bmi);

}  // namespace depotsim
