#include "depotsim/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "depotsim/errors.hpp"
#include "depotsim/metrics.hpp"

namespace depotsim {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return in;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse number '" + s + "'");
    }
}

// Nodal |grad Phi| from central differences (one-sided at the boundary).
NodalField gradient_magnitude(const AxiMesh& m, std::span<const double> f) {
    NodalField g(m.node_count());
    const std::size_t nr = m.nr();
    const std::size_t nz = m.nz();
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t il = i > 0 ? i - 1 : i;
            const std::size_t ih = i + 1 < nr ? i + 1 : i;
            const std::size_t jl = j > 0 ? j - 1 : j;
            const std::size_t jh = j + 1 < nz ? j + 1 : j;
            const double dr = (f[m.index(ih, j)] - f[m.index(il, j)]) / (m.r(ih) - m.r(il));
            const double dz = (f[m.index(i, jh)] - f[m.index(i, jl)]) / (m.z(jh) - m.z(jl));
            g[m.index(i, j)] = std::hypot(dr, dz);
        }
    }
    return g;
}

const std::vector<double MetricRow::*>& channels() {
    static const std::vector<double MetricRow::*> c = {
        &MetricRow::t_s,          &MetricRow::pressure_ball_avg, &MetricRow::velocity_ball_max,
        &MetricRow::phi_avg,      &MetricRow::ph_avg,            &MetricRow::rho_mab_avg,
        &MetricRow::plume_volume_cm3, &MetricRow::free_pct,      &MetricRow::bound_pct,
        &MetricRow::absorbed_pct};
    return c;
}

}  // namespace

// ---- metrics rows ------------------------------------------------------

MetricRow compute_metrics(const Simulation& sim) {
    const AxiMesh& m = sim.mesh();
    const FieldState& s = sim.state();
    const double zc = sim.source_center_z();
    const double radius = sim.config().output.ball_radius_cm;
    MetricRow row;
    row.t_s = s.t;
    row.pressure_ball_avg = ball_average(s.p, m, zc, radius);
    row.velocity_ball_max = ball_max(velocity_magnitude(m, s.u), m, zc, radius);
    row.phi_avg = domain_average(s.phi, m);
    row.ph_avg = domain_average(s.ph, m);
    row.rho_mab_avg = domain_average(net_charge_density(s.c_mab, s.z_mab), m);
    row.plume_volume_cm3 = plume_volume(s.c_mab, m);
    const DoseFractions f = dose_fractions(sim.ledger());
    row.free_pct = f.free_pct;
    row.bound_pct = f.bound_pct;
    row.absorbed_pct = f.absorbed_pct;
    return row;
}

void write_timeseries(const MetricSeries& series, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << kTimeseriesHeader << '\n';
    for (const MetricRow& r : series) {
        bool first = true;
        for (auto c : channels()) {
            if (!first) out << ',';
            out << fmt(r.*c);
            first = false;
        }
        out << '\n';
    }
    finish(out, path);
}

MetricSeries read_timeseries(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kTimeseriesHeader) {
        throw ConfigError(path.string() + ": unexpected time-series header");
    }
    MetricSeries series;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != channels().size()) throw ConfigError(where + ": wrong number of columns");
        MetricRow r;
        for (std::size_t k = 0; k < cells.size(); ++k) r.*channels()[k] = to_double(cells[k], where);
        series.push_back(r);
    }
    return series;
}

double series_value_at(const MetricSeries& s, double t_s, double MetricRow::*channel) {
    if (s.empty()) throw ConfigError("empty time series");
    if (t_s <= s.front().t_s) return s.front().*channel;
    if (t_s >= s.back().t_s) return s.back().*channel;
    const auto it = std::lower_bound(s.begin(), s.end(), t_s,
                                     [](const MetricRow& r, double t) { return r.t_s < t; });
    const MetricRow& b = *it;
    const MetricRow& a = *(it - 1);
    const double w = (t_s - a.t_s) / (b.t_s - a.t_s);
    return (1.0 - w) * (a.*channel) + w * (b.*channel);
}

// ---- snapshots ---------------------------------------------------------

const NodalField* Snapshot::find(const std::string& name) const {
    for (const auto& [n, f] : fields) {
        if (n == name) return &f;
    }
    return nullptr;
}

Snapshot make_snapshot(const Simulation& sim) {
    const AxiMesh& m = sim.mesh();
    const FieldState& s = sim.state();
    Snapshot snap;
    snap.mesh = m;
    snap.t = s.t;
    NodalField log_u = velocity_magnitude(m, s.u);
    for (double& v : log_u) v = std::log10(std::max(v, 1e-30));
    snap.fields = {
        {"c_Na", s.c_na},
        {"c_Cl", s.c_cl},
        {"c_H", s.c_h},
        {"c_mAb", s.c_mab},
        {"c_B", s.c_b},
        {"pH", s.ph},
        {"Phi", s.phi},
        {"grad_Phi_mag", gradient_magnitude(m, s.phi)},
        {"log10_u_mag", log_u},
        {"rho_mAb", net_charge_density(s.c_mab, s.z_mab)},
        {"p", s.p},
    };
    return snap;
}

void write_snapshot(const Snapshot& snap, const fs::path& path) {
    const AxiMesh& m = snap.mesh;
    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "depot snapshot t=" << fmt(snap.t) << "\n";
    out << "ASCII\nDATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << m.nr() << ' ' << m.nz() << " 1\n";
    out << "POINTS " << m.node_count() << " double\n";
    for (std::size_t j = 0; j < m.nz(); ++j) {
        for (std::size_t i = 0; i < m.nr(); ++i) out << fmt(m.r(i)) << ' ' << fmt(m.z(j)) << " 0\n";
    }
    out << "FIELD FieldData 1\nTIME 1 1 double\n" << fmt(snap.t) << "\n";
    out << "POINT_DATA " << m.node_count() << "\n";
    for (const auto& [name, f] : snap.fields) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f) out << fmt(v) << '\n';
    }
    finish(out, path);
}

Snapshot read_snapshot(const fs::path& path) {
    std::ifstream in = open_in(path);
    auto fail = [&](const std::string& what) { return ConfigError(path.string() + ": " + what); };
    std::string line;
    std::getline(in, line);
    if (line.rfind("# vtk DataFile", 0) != 0) throw fail("not a legacy VTK file");
    std::getline(in, line);  // title
    std::string word;
    std::size_t nr = 0, nz = 0, one = 0, np = 0;
    in >> word;
    if (word != "ASCII") throw fail("only ASCII files are supported");
    in >> word >> word;
    if (word != "STRUCTURED_GRID") throw fail("expected STRUCTURED_GRID");
    in >> word >> nr >> nz >> one;
    in >> word >> np >> word;
    if (!in || np != nr * nz) throw fail("bad grid header");
    std::vector<double> r(nr), z(nz);
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            double x = 0, y = 0, w = 0;
            in >> x >> y >> w;
            if (j == 0) r[i] = x;
            if (i == 0) z[j] = y;
        }
    }
    Snapshot snap;
    while (in >> word) {
        if (word == "FIELD") {
            std::string name, arr;
            int n_arrays = 0, comps = 0, tuples = 0;
            in >> name >> n_arrays >> arr >> comps >> tuples >> word >> snap.t;
        } else if (word == "POINT_DATA") {
            in >> np;
        } else if (word == "SCALARS") {
            std::string name, type;
            in >> name >> type >> one >> word >> word;  // LOOKUP_TABLE default
            NodalField f(nr * nz);
            for (double& v : f) {
                std::string tok;
                in >> tok;
                v = std::strtod(tok.c_str(), nullptr);
            }
            if (!in) throw fail("truncated field " + name);
            snap.fields.emplace_back(name, std::move(f));
        } else {
            throw fail("unexpected token '" + word + "'");
        }
    }
    snap.mesh = AxiMesh(std::move(r), std::move(z));
    return snap;
}

// ---- checkpoints -------------------------------------------------------

namespace {

constexpr int kCheckpointVersion = 1;

void put_vector(std::ostream& out, const std::string& tag, std::span<const double> v) {
    out << tag << ' ' << v.size() << '\n';
    for (std::size_t k = 0; k < v.size(); ++k) out << fmt(v[k]) << ((k % 8 == 7 || k + 1 == v.size()) ? '\n' : ' ');
}

std::vector<double> get_vector(std::istream& in, const std::string& tag, const std::string& where) {
    std::string word;
    std::size_t n = 0;
    in >> word >> n;
    if (!in || word != tag) throw ConfigError(where + ": expected section '" + tag + "'");
    std::vector<double> v(n);
    for (double& x : v) {
        std::string tok;
        in >> tok;
        char* end = nullptr;
        x = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) throw ConfigError(where + ": bad number in section '" + tag + "'");
    }
    if (!in) throw ConfigError(where + ": truncated section '" + tag + "'");
    return v;
}

}  // namespace

void write_checkpoint(const Simulation& sim, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out = open_out(tmp);
        const FieldState& s = sim.state();
        const DoseLedger& l = sim.ledger();
        const StepStats& st = sim.stats();
        out << "depotsim-checkpoint " << kCheckpointVersion << '\n';
        out << "phase " << (sim.phase() == Phase::short_term ? "short" : "long") << '\n';
        out << "t " << fmt(s.t) << '\n';
        out << "next_dt " << fmt(sim.next_dt()) << '\n';
        out << "ledger " << fmt(l.injected) << ' ' << fmt(l.free) << ' ' << fmt(l.bound) << ' ' << fmt(l.absorbed)
            << ' ' << fmt(l.eliminated) << ' ' << fmt(l.outflow) << '\n';
        out << "stats " << st.steps << ' ' << st.retries << ' ' << st.clipped << ' ' << st.direct_fallbacks << ' '
            << st.ph_floored << ' ' << st.negative_chloride << '\n';
        const std::string cfg = serialize_config(sim.config());
        out << "config " << std::count(cfg.begin(), cfg.end(), '\n') << '\n' << cfg;
        put_vector(out, "r_nodes", sim.mesh().r_nodes());
        put_vector(out, "z_nodes", sim.mesh().z_nodes());
        put_vector(out, "c_na", s.c_na);
        put_vector(out, "c_h", s.c_h);
        put_vector(out, "c_mab", s.c_mab);
        put_vector(out, "c_b", s.c_b);
        put_vector(out, "c_cl", s.c_cl);
        put_vector(out, "p", s.p);
        put_vector(out, "phi", s.phi);
        put_vector(out, "ph", s.ph);
        put_vector(out, "z_mab", s.z_mab);
        put_vector(out, "lymph_rate", s.lymph_rate);
        put_vector(out, "binding_release", s.binding_release);
        put_vector(out, "u_radial", s.u.radial);
        put_vector(out, "u_axial", s.u.axial);
        put_vector(out, "u_outer", s.u.outer);
        out << "end\n";
        finish(out, tmp);
    }
    fs::rename(tmp, path);
}

Simulation read_checkpoint(const fs::path& path) {
    std::ifstream in = open_in(path);
    const std::string where = path.string();
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "depotsim-checkpoint") throw ConfigError(where + ": not a checkpoint file");
    if (version != kCheckpointVersion) {
        throw ConfigError(where + ": unsupported checkpoint version " + std::to_string(version));
    }
    std::string phase_name;
    in >> word >> phase_name;
    if (word != "phase" || (phase_name != "short" && phase_name != "long")) throw ConfigError(where + ": bad phase");
    FieldState s;
    double next_dt = 0.0;
    DoseLedger l;
    StepStats st;
    in >> word >> s.t >> word >> next_dt;
    in >> word >> l.injected >> l.free >> l.bound >> l.absorbed >> l.eliminated >> l.outflow;
    in >> word >> st.steps >> st.retries >> st.clipped >> st.direct_fallbacks >> st.ph_floored >> st.negative_chloride;
    std::size_t n_lines = 0;
    in >> word >> n_lines;
    if (!in || word != "config") throw ConfigError(where + ": missing config section");
    std::string line;
    std::getline(in, line);
    std::string cfg_text;
    for (std::size_t k = 0; k < n_lines && std::getline(in, line); ++k) cfg_text += line + '\n';
    SimulationConfig cfg = parse_config(cfg_text, {});

    std::vector<double> r_nodes = get_vector(in, "r_nodes", where);
    std::vector<double> z_nodes = get_vector(in, "z_nodes", where);
    AxiMesh mesh(std::move(r_nodes), std::move(z_nodes));
    s.c_na = get_vector(in, "c_na", where);
    s.c_h = get_vector(in, "c_h", where);
    s.c_mab = get_vector(in, "c_mab", where);
    s.c_b = get_vector(in, "c_b", where);
    s.c_cl = get_vector(in, "c_cl", where);
    s.p = get_vector(in, "p", where);
    s.phi = get_vector(in, "phi", where);
    s.ph = get_vector(in, "ph", where);
    s.z_mab = get_vector(in, "z_mab", where);
    s.lymph_rate = get_vector(in, "lymph_rate", where);
    s.binding_release = get_vector(in, "binding_release", where);
    s.u.nr = mesh.nr();
    s.u.nz = mesh.nz();
    s.u.radial = get_vector(in, "u_radial", where);
    s.u.axial = get_vector(in, "u_axial", where);
    s.u.outer = get_vector(in, "u_outer", where);
    in >> word;
    if (word != "end") throw ConfigError(where + ": missing end marker");
    return Simulation::restore(std::move(cfg), phase_name == "short" ? Phase::short_term : Phase::long_term,
                               std::move(mesh), std::move(s), l, st, next_dt);
}

// ---- run driver --------------------------------------------------------

namespace {

bool on_cadence(double t, double cadence) {
    if (!(cadence > 0.0)) return false;
    const double k = std::round(t / cadence);
    return k >= 1.0 && std::abs(t - k * cadence) <= 1e-6 * std::max(1.0, cadence);
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%010.1fs", t);
    return buf;
}

double phi_contrast(const Simulation& sim) {
    const AxiMesh& m = sim.mesh();
    const double zc = sim.source_center_z();
    return m.interpolate(sim.state().phi, 0.0, zc) - m.interpolate(sim.state().phi, m.radius(), zc);
}

}  // namespace

RunResult run_simulation(const SimulationConfig& cfg, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    const bool files = !dir.empty();
    if (files) {
        fs::create_directories(dir / "snapshots");
        if (cfg.output.checkpoints) fs::create_directories(dir / "checkpoints");
        std::ofstream c = open_out(dir / "config.txt");
        c << serialize_config(cfg);
        finish(c, dir / "config.txt");
    }
    RunResult result;
    Simulation sim(cfg);
    double phi_contrast_short = 0.0;

    auto record = [&](const Simulation& s) {
        result.series.push_back(compute_metrics(s));
        result.max_electroneutrality = std::max(result.max_electroneutrality, electroneutrality_residual(s.state()));
        result.max_ledger_error = std::max(result.max_ledger_error, s.ledger().closure_error());
    };
    auto checkpoint = [&](const std::string& name) {
        if (files && cfg.output.checkpoints) write_checkpoint(sim, dir / "checkpoints" / name);
    };

    try {
        sim.run_short_term([&](const Simulation& s) {
            record(s);
            if (files && on_cadence(s.state().t, cfg.output.short_snapshot_s)) {
                write_snapshot(make_snapshot(s), dir / "snapshots" / ("short_" + time_tag(s.state().t) + ".vtk"));
            }
        });
        phi_contrast_short = phi_contrast(sim);
        checkpoint("short_end.ckpt");
        result.reduction = sim.reduce_to_long_term();
        const double snap_s = cfg.output.long_snapshot_h * 3600.0;
        const double ckpt_s = cfg.plan.checkpoint_every_h * 3600.0;
        sim.run_long_term([&](const Simulation& s) {
            record(s);
            const double t = s.state().t;
            if (files && on_cadence(t, snap_s)) {
                write_snapshot(make_snapshot(s), dir / "snapshots" / ("long_" + time_tag(t) + ".vtk"));
            }
            if (on_cadence(t, ckpt_s)) checkpoint("long_" + time_tag(t) + ".ckpt");
        });
        checkpoint("final.ckpt");
    } catch (const SolverError&) {
        if (files) {
            write_timeseries(result.series, dir / "timeseries.csv");
            checkpoint("failed_last_good.ckpt");
        }
        throw;
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (files) {
        write_timeseries(result.series, dir / "timeseries.csv");
        nlohmann::json j;
        double p_peak = 0.0, u_peak = 0.0, plume_peak = 0.0, plume_t = 0.0;
        for (const MetricRow& r : result.series) {
            p_peak = std::max(p_peak, r.pressure_ball_avg);
            u_peak = std::max(u_peak, r.velocity_ball_max);
            if (r.plume_volume_cm3 > plume_peak && r.t_s > cfg.plan.short_horizon) {
                plume_peak = r.plume_volume_cm3;
                plume_t = r.t_s;
            }
        }
        const double t_rep = cfg.plan.report_time_h * 3600.0;
        j["peak_pressure_ball_avg"] = p_peak;
        j["peak_velocity_ball_max"] = u_peak;
        j["plume_peak_cm3"] = plume_peak;
        j["plume_peak_h"] = plume_t / 3600.0;
        j["report_time_h"] = cfg.plan.report_time_h;
        j["free_pct_at_report"] = series_value_at(result.series, t_rep, &MetricRow::free_pct);
        j["bound_pct_at_report"] = series_value_at(result.series, t_rep, &MetricRow::bound_pct);
        j["absorbed_pct_at_report"] = series_value_at(result.series, t_rep, &MetricRow::absorbed_pct);
        j["phi_depot_minus_far_field_end_short"] = phi_contrast_short;
        j["max_electroneutrality_residual"] = result.max_electroneutrality;
        j["max_ledger_closure_error"] = result.max_ledger_error;
        j["reduction_mass_change"] = result.reduction.relative_mass_change;
        j["reduction_warning"] = result.reduction.warning;
        j["ledger"] = {{"injected", sim.ledger().injected}, {"free", sim.ledger().free},
                       {"bound", sim.ledger().bound},       {"absorbed", sim.ledger().absorbed},
                       {"eliminated", sim.ledger().eliminated}, {"outflow", sim.ledger().outflow}};
        j["steps"] = sim.stats().steps;
        j["retries"] = sim.stats().retries;
        j["clipped_negatives"] = sim.stats().clipped;
        j["negative_chloride_nodes"] = sim.stats().negative_chloride;
        j["wall_seconds"] = result.wall_seconds;
        std::ofstream out = open_out(dir / "summary.json");
        out << j.dump(2) << '\n';
        finish(out, dir / "summary.json");
    }
    return result;
}

// ---- sweeps ------------------------------------------------------------

std::string sweep_axis_key(const std::string& axis) {
    if (axis == "buffer_ph") return "drug.buffer_ph";
    if (axis == "bmi") return "scenario.bmi";
    if (axis == "depth") return "protocol.depth_cm";
    if (axis == "concentration") return "drug.concentration_mg_per_ml";
    throw ConfigError("unknown sweep axis '" + axis + "' (expected buffer_ph, bmi, depth or concentration)");
}

std::vector<SweepEntry> run_sweep(const SimulationConfig& base, const std::string& axis,
                                  const std::vector<std::string>& values, const fs::path& dir, unsigned workers) {
    const std::string key = sweep_axis_key(axis);
    // Validate every value before starting any run.
    std::vector<SimulationConfig> configs;
    for (const std::string& v : values) {
        SimulationConfig c = base;
        apply_setting(c, key, v, {});
        configs.push_back(std::move(c));
    }
    std::vector<SweepEntry> entries(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            SweepEntry& e = entries[k];
            e.value = values[k];
            try {
                const fs::path sub = dir.empty() ? fs::path() : dir / (axis + "_" + values[k]);
                const RunResult r = run_simulation(configs[k], sub);
                const double t_rep = configs[k].plan.report_time_h * 3600.0;
                e.free_pct = series_value_at(r.series, t_rep, &MetricRow::free_pct);
                e.bound_pct = series_value_at(r.series, t_rep, &MetricRow::bound_pct);
                e.absorbed_pct = series_value_at(r.series, t_rep, &MetricRow::absorbed_pct);
                for (const MetricRow& row : r.series) {
                    if (row.t_s > configs[k].plan.short_horizon && row.plume_volume_cm3 > e.plume_peak_cm3) {
                        e.plume_peak_cm3 = row.plume_volume_cm3;
                        e.plume_peak_h = row.t_s / 3600.0;
                    }
                }
                e.ok = true;
            } catch (const std::exception& ex) {
                e.ok = false;
                e.error = ex.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (!dir.empty()) {
        std::ofstream out = open_out(dir / "sweep.csv");
        out << "value,status,free_pct,bound_pct,absorbed_pct,plume_peak_cm3,plume_peak_h,error\n";
        for (const SweepEntry& e : entries) {
            std::string err = e.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            out << e.value << ',' << (e.ok ? "ok" : "failed") << ',' << fmt(e.free_pct) << ',' << fmt(e.bound_pct)
                << ',' << fmt(e.absorbed_pct) << ',' << fmt(e.plume_peak_cm3) << ',' << fmt(e.plume_peak_h) << ','
                << err << '\n';
        }
        finish(out, dir / "sweep.csv");
    }
    return entries;
}

// ---- reference comparison ---------------------------------------------

ReferenceCurve read_reference(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_h,remaining_fraction") {
        throw ConfigError(path.string() + ": expected header 't_h,remaining_fraction'");
    }
    ReferenceCurve ref;
    ref.label = path.stem().string();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw ConfigError(where + ": expected two columns");
        const double t = to_double(cells[0], where);
        const double f = to_double(cells[1], where);
        if (!ref.t_h.empty() && !(t > ref.t_h.back())) throw ConfigError(where + ": times must increase");
        if (f < 0.0 || f > 1.0) throw ConfigError(where + ": fraction must lie in [0, 1]");
        ref.t_h.push_back(t);
        ref.remaining.push_back(f);
    }
    if (ref.t_h.empty()) throw ConfigError(path.string() + ": no data rows");
    return ref;
}

ComparisonReport compare_reference(const MetricSeries& run, const ReferenceCurve& ref) {
    if (run.empty()) throw ConfigError("run time series is empty");
    const double t0 = run.front().t_s / 3600.0;
    const double t1 = run.back().t_s / 3600.0;
    ComparisonReport rep;
    double sq = 0.0;
    for (std::size_t k = 0; k < ref.t_h.size(); ++k) {
        const double t = ref.t_h[k];
        if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
        const double free = series_value_at(run, t * 3600.0, &MetricRow::free_pct);
        const double bound = series_value_at(run, t * 3600.0, &MetricRow::bound_pct);
        const double sim = (free + bound) / 100.0;
        const double d = sim - ref.remaining[k];
        sq += d * d;
        rep.max_deviation = std::max(rep.max_deviation, std::abs(d));
        rep.t_h.push_back(t);
        rep.simulated.push_back(sim);
        rep.reference.push_back(ref.remaining[k]);
    }
    rep.points = rep.t_h.size();
    if (rep.points == 0) throw ConfigError("reference and run time ranges do not overlap");
    rep.rmse = std::sqrt(sq / static_cast<double>(rep.points));
    return rep;
}

}  // namespace depotsim
