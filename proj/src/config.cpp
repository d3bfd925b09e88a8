#include "depotsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "depotsim/errors.hpp"

#ifndef DEPOTSIM_DATA_DIR
#define DEPOTSIM_DATA_DIR "data"
#endif

namespace depotsim {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

struct Key {
    std::string name;
    std::function<void(SimulationConfig&, const std::string&, const std::filesystem::path&)> set;
    std::function<std::string(const SimulationConfig&)> get;
};

TissueLayer& layer(SimulationConfig& c, std::size_t k) { return c.layers.layers[k]; }

std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
    if (value.empty()) return value;
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal().string();
}

const std::vector<Key>& key_table() {
    static const std::vector<Key> table = [] {
        std::vector<Key> t;
        auto num = [&t](std::string name, auto accessor) {
            t.push_back({name,
                         [name, accessor](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                             accessor(c) = parse_double(name, v);
                         },
                         [accessor](const SimulationConfig& c) {
                             return format_double(accessor(const_cast<SimulationConfig&>(c)));
                         }});
        };
        auto count = [&t](std::string name, auto accessor) {
            t.push_back({name,
                         [name, accessor](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                             accessor(c) = parse_count(name, v);
                         },
                         [accessor](const SimulationConfig& c) {
                             return std::to_string(accessor(const_cast<SimulationConfig&>(c)));
                         }});
        };
        auto path = [&t](std::string name, auto accessor) {
            t.push_back({name,
                         [accessor](SimulationConfig& c, const std::string& v, const std::filesystem::path& base) {
                             accessor(c) = resolve_path(v, base);
                         },
                         [accessor](const SimulationConfig& c) {
                             return accessor(const_cast<SimulationConfig&>(c));
                         }});
        };

        // Scenario preset first so that explicit keys written after it win.
        t.push_back({"scenario.bmi",
                     [](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                         apply_bmi_preset(c, v);
                     },
                     [](const SimulationConfig& c) { return c.bmi; }});

        num("geometry.radius_cm", [](SimulationConfig& c) -> double& { return c.radius; });
        num("geometry.height_cm", [](SimulationConfig& c) -> double& { return c.height; });

        const char* names[] = {"dermis", "adipose", "muscle"};
        for (std::size_t k = 0; k < 3; ++k) {
            const std::string n = names[k];
            if (k < 2) {
                num("layers." + n + "_cm", [k](SimulationConfig& c) -> double& { return layer(c, k).thickness; });
            } else {
                t.push_back({"layers.muscle_cm",
                             [](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                                 if (v == "auto") c.muscle_thickness.reset();
                                 else c.muscle_thickness = parse_double("layers.muscle_cm", v);
                             },
                             [](const SimulationConfig& c) {
                                 return c.muscle_thickness ? format_double(*c.muscle_thickness)
                                                           : std::string("auto");
                             }});
            }
            num("layers." + n + "_permeability_cm2",
                [k](SimulationConfig& c) -> double& { return layer(c, k).permeability; });
            num("layers." + n + "_slv_per_cm", [k](SimulationConfig& c) -> double& { return layer(c, k).slv; });
        }
        num("layers.porosity", [](SimulationConfig& c) -> double& { return c.layers.porosity; });

        count("mesh.fine_nr", [](SimulationConfig& c) -> std::size_t& { return c.mesh.fine_nr; });
        count("mesh.fine_nz", [](SimulationConfig& c) -> std::size_t& { return c.mesh.fine_nz; });
        num("mesh.grading", [](SimulationConfig& c) -> double& { return c.mesh.grading; });
        count("mesh.coarse_nr", [](SimulationConfig& c) -> std::size_t& { return c.plan.coarse_nr; });
        count("mesh.coarse_nz", [](SimulationConfig& c) -> std::size_t& { return c.plan.coarse_nz; });

        num("protocol.depth_cm", [](SimulationConfig& c) -> double& { return c.protocol.depth; });
        num("protocol.volume_cm3", [](SimulationConfig& c) -> double& { return c.protocol.volume; });
        num("protocol.duration_s", [](SimulationConfig& c) -> double& { return c.protocol.duration; });
        num("protocol.ramp_s", [](SimulationConfig& c) -> double& { return c.protocol.ramp_time; });
        num("protocol.source_radius_cm", [](SimulationConfig& c) -> double& { return c.protocol.source_radius; });

        t.push_back({"drug.curve_set",
                     [](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                         if (v.empty()) throw ConfigError("drug.curve_set must not be empty");
                         c.drug.curve_set = v;
                     },
                     [](const SimulationConfig& c) { return c.drug.curve_set; }});
        path("drug.charge_curve", [](SimulationConfig& c) -> std::string& { return c.drug.charge_curve_path; });
        path("drug.ka_curve", [](SimulationConfig& c) -> std::string& { return c.drug.ka_curve_path; });
        path("drug.kd_curve", [](SimulationConfig& c) -> std::string& { return c.drug.kd_curve_path; });
        num("drug.concentration_mg_per_ml",
            [](SimulationConfig& c) -> double& { return c.drug.concentration_mg_per_ml; });
        num("drug.molar_mass_g_per_mol", [](SimulationConfig& c) -> double& { return c.drug.molar_mass; });
        num("drug.buffer_ph", [](SimulationConfig& c) -> double& { return c.drug.buffer_ph; });
        num("drug.diffusivity_cm2_s", [](SimulationConfig& c) -> double& { return c.species.antibody.diffusivity; });
        num("binding.b_max", [](SimulationConfig& c) -> double& { return c.binding.b_max; });
        num("binding.k_e", [](SimulationConfig& c) -> double& { return c.binding.k_e; });

        num("species.na_diffusivity_cm2_s", [](SimulationConfig& c) -> double& { return c.species.sodium.diffusivity; });
        num("species.h_diffusivity_cm2_s",
            [](SimulationConfig& c) -> double& { return c.species.hydrogen.diffusivity; });
        num("species.cl_diffusivity_cm2_s",
            [](SimulationConfig& c) -> double& { return c.species.chloride.diffusivity; });
        num("species.na_init", [](SimulationConfig& c) -> double& { return c.species.sodium.c_init; });
        num("species.isf_ph", [](SimulationConfig& c) -> double& { return c.isf_ph; });

        num("constants.faraday", [](SimulationConfig& c) -> double& { return c.constants.faraday; });
        num("constants.gas_constant", [](SimulationConfig& c) -> double& { return c.constants.gas_constant; });
        num("constants.temperature", [](SimulationConfig& c) -> double& { return c.constants.temperature; });

        num("starling.l_pb", [](SimulationConfig& c) -> double& { return c.starling.l_pb; });
        num("starling.l_pl", [](SimulationConfig& c) -> double& { return c.starling.l_pl; });
        num("starling.sbv", [](SimulationConfig& c) -> double& { return c.starling.sbv; });
        num("starling.p_b", [](SimulationConfig& c) -> double& { return c.starling.p_b; });
        num("starling.p_l", [](SimulationConfig& c) -> double& { return c.starling.p_l; });
        num("starling.sigma_r", [](SimulationConfig& c) -> double& { return c.starling.sigma_r; });
        num("starling.pi_b", [](SimulationConfig& c) -> double& { return c.starling.pi_b; });
        num("starling.pi_i", [](SimulationConfig& c) -> double& { return c.starling.pi_i; });
        num("flow.viscosity", [](SimulationConfig& c) -> double& { return c.viscosity; });

        num("plan.short_dt_s", [](SimulationConfig& c) -> double& { return c.plan.short_dt; });
        num("plan.short_horizon_s", [](SimulationConfig& c) -> double& { return c.plan.short_horizon; });
        num("plan.long_dt_min_s", [](SimulationConfig& c) -> double& { return c.plan.long_dt_min; });
        num("plan.long_dt_max_s", [](SimulationConfig& c) -> double& { return c.plan.long_dt_max; });
        num("plan.long_dt_growth", [](SimulationConfig& c) -> double& { return c.plan.long_dt_growth; });
        num("plan.long_horizon_h", [](SimulationConfig& c) -> double& { return c.plan.long_horizon_h; });
        num("plan.report_time_h", [](SimulationConfig& c) -> double& { return c.plan.report_time_h; });
        num("plan.checkpoint_every_h", [](SimulationConfig& c) -> double& { return c.plan.checkpoint_every_h; });

        path("output.directory", [](SimulationConfig& c) -> std::string& { return c.output.directory; });
        num("output.short_cadence_s", [](SimulationConfig& c) -> double& { return c.output.short_cadence_s; });
        num("output.long_cadence_h", [](SimulationConfig& c) -> double& { return c.output.long_cadence_h; });
        num("output.short_snapshot_s", [](SimulationConfig& c) -> double& { return c.output.short_snapshot_s; });
        num("output.long_snapshot_h", [](SimulationConfig& c) -> double& { return c.output.long_snapshot_h; });
        num("output.ball_radius_cm", [](SimulationConfig& c) -> double& { return c.output.ball_radius_cm; });
        t.push_back({"output.checkpoints",
                     [](SimulationConfig& c, const std::string& v, const std::filesystem::path&) {
                         c.output.checkpoints = parse_bool("output.checkpoints", v);
                     },
                     [](const SimulationConfig& c) { return std::string(c.output.checkpoints ? "true" : "false"); }});
        return t;
    }();
    return table;
}

const Key* find_key(const std::string& name) {
    for (const Key& k : key_table()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void PhasePlan::validate(double injection_duration) const {
    require(short_dt > 0.0, "plan.short_dt_s must be > 0");
    require(short_horizon >= injection_duration, "plan.short_horizon_s must be >= protocol.duration_s");
    require(long_dt_min > 0.0, "plan.long_dt_min_s must be > 0");
    require(long_dt_min <= long_dt_max, "plan.long_dt_min_s must be <= plan.long_dt_max_s");
    require(long_dt_growth >= 1.0, "plan.long_dt_growth must be >= 1");
    require(long_horizon_h >= 0.0, "plan.long_horizon_h must be >= 0");
    require(report_time_h >= 0.0, "plan.report_time_h must be >= 0");
    require(coarse_nr >= 8 && coarse_nz >= 8, "mesh.coarse_nr and mesh.coarse_nz must be >= 8");
    require(checkpoint_every_h > 0.0, "plan.checkpoint_every_h must be > 0");
}

std::filesystem::path data_directory() { return DEPOTSIM_DATA_DIR; }

void apply_bmi_preset(SimulationConfig& cfg, const std::string& bmi) {
    if (bmi == "high") {
        cfg.layers.layers[1].thickness = 1.5;
        cfg.protocol.depth = 0.8;
    } else if (bmi == "low") {
        cfg.layers.layers[1].thickness = 0.6;
        cfg.protocol.depth = 0.5;
    } else {
        throw ConfigError("scenario.bmi must be 'high' or 'low', got '" + bmi + "'");
    }
    cfg.bmi = bmi;
    cfg.muscle_thickness.reset();
}

void SimulationConfig::load_curves(const std::filesystem::path& base_dir) {
    // Relative curve paths are resolved once and stored absolute, so a
    // serialized config (for example inside a checkpoint) stays loadable.
    auto pick = [&](std::string& explicit_path, const char* kind) {
        std::filesystem::path p;
        if (!explicit_path.empty()) {
            p = explicit_path;
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            p = std::filesystem::absolute(p).lexically_normal();
            explicit_path = p.string();
        } else {
            p = data_directory() / "curves" / drug.curve_set / (std::string(kind) + ".csv");
        }
        return PhCurve::from_csv(p);
    };
    charge_curve = pick(drug.charge_curve_path, "charge");
    binding.ka_curve = pick(drug.ka_curve_path, "ka");
    binding.kd_curve = pick(drug.kd_curve_path, "kd");
}

void SimulationConfig::finalize() {
    auto& ls = layers.layers;
    require(ls.size() == 3, "layers: exactly three tissue layers are supported");
    ls[2].thickness = muscle_thickness ? *muscle_thickness : height - ls[0].thickness - ls[1].thickness;
    require(isf_ph >= 3.0 && isf_ph <= 12.0, "species.isf_ph must lie in [3, 12]");
    species.hydrogen.c_init = std::pow(10.0, -isf_ph) / 1000.0;
    species.chloride.c_init = recover_chloride(species.sodium.c_init, species.hydrogen.c_init, 0.0, 0.0,
                                               species.chloride.valence);
    validate();
}

void SimulationConfig::validate() const {
    require(radius > 0.0, "geometry.radius_cm must be > 0");
    require(height > 0.0, "geometry.height_cm must be > 0");
    for (const auto& l : layers.layers) {
        require(l.thickness > 0.0, "layers." + l.name + " thickness must be > 0 (muscle is H - dermis - adipose)");
    }
    layers.validate(height);
    require(mesh.fine_nr >= 8 && mesh.fine_nz >= 8, "mesh.fine_nr and mesh.fine_nz must be >= 8");
    require(mesh.grading >= 1.0, "mesh.grading must be >= 1");
    protocol.validate(height);
    species.validate();
    constants.validate();
    starling.validate();
    require(viscosity > 0.0, "flow.viscosity must be > 0");
    require(drug.concentration_mg_per_ml >= 0.0, "drug.concentration_mg_per_ml must be >= 0");
    require(drug.molar_mass > 0.0, "drug.molar_mass_g_per_mol must be > 0");
    require(drug.buffer_ph >= 3.0 && drug.buffer_ph <= 12.0, "drug.buffer_ph must lie in [3, 12]");
    require(!charge_curve.empty(), "drug: charge curve is not loaded");
    require(charge_curve.is_non_increasing(), "drug: charge curve must be non-increasing in pH");
    binding.validate();
    plan.validate(protocol.duration);
    require(output.short_cadence_s > 0.0, "output.short_cadence_s must be > 0");
    require(output.long_cadence_h > 0.0, "output.long_cadence_h must be > 0");
    require(output.short_snapshot_s >= 0.0, "output.short_snapshot_s must be >= 0");
    require(output.long_snapshot_h >= 0.0, "output.long_snapshot_h must be >= 0");
    require(output.ball_radius_cm > 0.0, "output.ball_radius_cm must be > 0");
    (void)syringe();
}

SyringeComposition SimulationConfig::syringe() const {
    return syringe_composition(drug.buffer_ph, drug.concentration_mg_per_ml, drug.molar_mass,
                               charge_curve(drug.buffer_ph), species.sodium.c_init);
}

SimulationConfig default_config() {
    SimulationConfig cfg;
    cfg.load_curves({});
    cfg.finalize();
    return cfg;
}

namespace {

SimulationConfig parse_lines(const std::string& text, const std::filesystem::path& base_dir) {
    SimulationConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Key* k = find_key(key);
        if (k == nullptr) throw ConfigError(where + "unknown key '" + key + "'");
        try {
            k->set(cfg, value, base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

}  // namespace

SimulationConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    SimulationConfig cfg = parse_lines(text, base_dir);
    cfg.load_curves(base_dir);
    cfg.finalize();
    return cfg;
}

SimulationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

void apply_setting(SimulationConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir) {
    const Key* k = find_key(key);
    if (k == nullptr) throw ConfigError("unknown key '" + key + "'");
    k->set(cfg, value, base_dir);
    if (key.rfind("drug.", 0) == 0) cfg.load_curves(base_dir);
    cfg.finalize();
}

std::string serialize_config(const SimulationConfig& cfg) {
    std::string out;
    for (const Key& k : key_table()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Key& k : key_table()) keys.push_back(k.name);
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace depotsim
