#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depotsim/config.hpp"
#include "depotsim/errors.hpp"
#include "depotsim/io.hpp"

namespace fs = std::filesystem;
using namespace depotsim;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kSolver = 2;

unsigned worker_count() {
    const char* env = std::getenv("DEPOTSIM_WORKERS");
    if (env == nullptr || *env == '\0') return 1;
    try {
        const long n = std::stol(env);
        if (n < 1) throw std::invalid_argument(env);
        return static_cast<unsigned>(n);
    } catch (const std::exception&) {
        throw ConfigError(std::string("DEPOTSIM_WORKERS must be a positive integer, got '") + env + "'");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty entry in value list '" + text + "'");
        out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw ConfigError("value list is empty");
    return out;
}

fs::path output_dir(const SimulationConfig& cfg, const std::string& override_dir) {
    return override_dir.empty() ? fs::path(cfg.output.directory) : fs::path(override_dir);
}

void print_summary(const MetricSeries& s, double report_h) {
    double p = 0, u = 0, plume = 0, plume_t = 0;
    for (const MetricRow& r : s) {
        p = std::max(p, r.pressure_ball_avg);
        u = std::max(u, r.velocity_ball_max);
        if (r.plume_volume_cm3 > plume) {
            plume = r.plume_volume_cm3;
            plume_t = r.t_s;
        }
    }
    const double t = report_h * 3600.0;
    std::printf("samples                 %zu (t = %.6g s .. %.6g s)\n", s.size(), s.front().t_s, s.back().t_s);
    std::printf("peak pressure (ball)    %.6g N/cm^2\n", p);
    std::printf("peak velocity (ball)    %.6g cm/s\n", u);
    std::printf("peak plume volume       %.6g cm^3 at %.4g h\n", plume, plume_t / 3600.0);
    std::printf("fractions at %.4g h      free %.4f %%  bound %.4f %%  absorbed %.4f %%\n", report_h,
                series_value_at(s, t, &MetricRow::free_pct), series_value_at(s, t, &MetricRow::bound_pct),
                series_value_at(s, t, &MetricRow::absorbed_pct));
    const MetricRow& last = s.back();
    std::printf("final                   pH %.4f  free %.4f %%  bound %.4f %%  absorbed %.4f %%\n", last.ph_avg,
                last.free_pct, last.bound_pct, last.absorbed_pct);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subcutaneous antibody injection simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values, run_dir, ref_path, ckpt_path, snap_out;
    double snap_time = 0.0;

    auto* run = app.add_subcommand("run", "Run the full two-phase simulation");
    run->add_option("config", config_path, "Configuration file")->required();
    run->add_option("--out", out_dir, "Output directory (default: output.directory)");

    auto* sweep = app.add_subcommand("sweep", "Run one simulation per value of a scenario axis");
    sweep->add_option("config", config_path, "Base configuration file")->required();
    sweep->add_option("--axis", axis, "buffer_ph | bmi | depth | concentration")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--out", out_dir, "Sweep directory (default: output.directory)");

    auto* metrics = app.add_subcommand("metrics", "Summarize the time series of a run directory");
    metrics->add_option("run-dir", run_dir)->required();
    double report_h = 30.0;
    metrics->add_option("--report-h", report_h, "Report time for dose fractions in hours");

    auto* compare = app.add_subcommand("compare", "Compare remaining depot fraction with a reference curve");
    compare->add_option("run-dir", run_dir)->required();
    compare->add_option("reference", ref_path, "CSV with header t_h,remaining_fraction")->required();

    auto* snapshot = app.add_subcommand("snapshot", "Advance a checkpoint to a time and write a VTK snapshot");
    snapshot->add_option("checkpoint", ckpt_path)->required();
    snapshot->add_option("--time", snap_time, "Target time in seconds")->required();
    snapshot->add_option("--out", snap_out, "Output .vtk path (default: next to the checkpoint)");

    auto* keys = app.add_subcommand("keys", "List every configuration key with its default value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*run) {
            const SimulationConfig cfg = load_config(config_path);
            const fs::path dir = output_dir(cfg, out_dir);
            const RunResult r = run_simulation(cfg, dir);
            std::printf("run written to %s (%.1f s wall)\n", dir.string().c_str(), r.wall_seconds);
            print_summary(r.series, cfg.plan.report_time_h);
        } else if (*sweep) {
            const SimulationConfig cfg = load_config(config_path);
            const fs::path dir = output_dir(cfg, out_dir);
            const auto entries = run_sweep(cfg, axis, split_list(values), dir, worker_count());
            bool any_failed = false;
            std::printf("%-12s %-7s %10s %10s %10s %12s\n", axis.c_str(), "status", "free_pct", "bound_pct",
                        "absorbed", "plume_peak");
            for (const SweepEntry& e : entries) {
                any_failed = any_failed || !e.ok;
                std::printf("%-12s %-7s %10.4f %10.4f %10.4f %12.4f\n", e.value.c_str(), e.ok ? "ok" : "failed",
                            e.free_pct, e.bound_pct, e.absorbed_pct, e.plume_peak_cm3);
                if (!e.ok) std::fprintf(stderr, "run %s failed: %s\n", e.value.c_str(), e.error.c_str());
            }
            std::printf("combined results in %s\n", (dir / "sweep.csv").string().c_str());
            if (any_failed) return kSolver;
        } else if (*metrics) {
            const MetricSeries s = read_timeseries(fs::path(run_dir) / "timeseries.csv");
            if (s.empty()) throw ConfigError(run_dir + ": time series has no rows");
            print_summary(s, report_h);
        } else if (*compare) {
            const MetricSeries s = read_timeseries(fs::path(run_dir) / "timeseries.csv");
            const ReferenceCurve ref = read_reference(ref_path);
            const ComparisonReport rep = compare_reference(s, ref);
            std::printf("reference %s: %zu points, RMSE %.6g, max deviation %.6g\n", ref.label.c_str(), rep.points,
                        rep.rmse, rep.max_deviation);
            std::printf("t_h,simulated,reference\n");
            for (std::size_t k = 0; k < rep.points; ++k) {
                std::printf("%.6g,%.6g,%.6g\n", rep.t_h[k], rep.simulated[k], rep.reference[k]);
            }
        } else if (*snapshot) {
            Simulation sim = read_checkpoint(ckpt_path);
            if (snap_time < sim.state().t) {
                throw ConfigError("--time " + std::to_string(snap_time) + " lies before the checkpoint time " +
                                  std::to_string(sim.state().t));
            }
            sim.advance_to(snap_time);
            fs::path out = snap_out.empty()
                               ? fs::path(ckpt_path).parent_path() / ("snapshot_t" + std::to_string(snap_time) + ".vtk")
                               : fs::path(snap_out);
            write_snapshot(make_snapshot(sim), out);
            std::printf("snapshot at t = %.6g s written to %s\n", sim.state().t, out.string().c_str());
        } else if (*keys) {
            const SimulationConfig cfg = default_config();
            std::cout << serialize_config(cfg);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kValidation;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
    return kOk;
}
