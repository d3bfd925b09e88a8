#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "depotsim/config.hpp"
#include "depotsim/orchestrator.hpp"

namespace depotsim {

/// One row of the metrics time series.
struct MetricRow {
    double t_s = 0.0;
    double pressure_ball_avg = 0.0;
    double velocity_ball_max = 0.0;
    double phi_avg = 0.0;
    double ph_avg = 0.0;
    double rho_mab_avg = 0.0;
    double plume_volume_cm3 = 0.0;
    double free_pct = 0.0;
    double bound_pct = 0.0;
    double absorbed_pct = 0.0;
};

using MetricSeries = std::vector<MetricRow>;

inline constexpr const char* kTimeseriesHeader =
    "t_s,pressure_ball_avg,velocity_ball_max,phi_avg,ph_avg,rho_mab_avg,plume_volume_cm3,free_pct,bound_pct,"
    "absorbed_pct";

/// All channels for the current state of a simulation.
MetricRow compute_metrics(const Simulation& sim);

/// Throws std::runtime_error naming the path on I/O failure.
void write_timeseries(const MetricSeries& series, const std::filesystem::path& path);
MetricSeries read_timeseries(const std::filesystem::path& path);

/// Named nodal fields for a snapshot.
struct Snapshot {
    AxiMesh mesh;
    double t = 0.0;
    std::vector<std::pair<std::string, NodalField>> fields;

    const NodalField* find(const std::string& name) const;
};

/// c_Na, c_Cl, c_H, c_mAb, c_B, pH, Phi, |grad Phi|, log10|u|, rho_mAb, p.
Snapshot make_snapshot(const Simulation& sim);

/// Legacy VTK ASCII STRUCTURED_GRID with every field as POINT_DATA; values
/// are written with 17 significant digits so a read-back is bit-identical.
void write_snapshot(const Snapshot& snap, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Versioned text checkpoint: config, phase, mesh, fields, ledger, stats.
void write_checkpoint(const Simulation& sim, const std::filesystem::path& path);
Simulation read_checkpoint(const std::filesystem::path& path);

struct RunResult {
    MetricSeries series;
    ReductionReport reduction;
    double max_electroneutrality = 0.0;
    double max_ledger_error = 0.0;
    double wall_seconds = 0.0;
};

/// Short phase, reduction and long phase with all output written under
/// `dir` (timeseries.csv, config.txt, snapshots/, checkpoints/, summary.json).
/// An empty `dir` runs without writing files.
RunResult run_simulation(const SimulationConfig& cfg, const std::filesystem::path& dir);

/// Linear interpolation of one channel at time t (clamped at the ends).
double series_value_at(const MetricSeries& s, double t_s, double MetricRow::*channel);

struct SweepEntry {
    std::string value;
    bool ok = false;
    std::string error;
    double free_pct = 0.0;
    double bound_pct = 0.0;
    double absorbed_pct = 0.0;
    double plume_peak_cm3 = 0.0;
    double plume_peak_h = 0.0;
};

/// Axis names: buffer_ph, bmi, depth, concentration. Runs every value in
/// its own sub-directory of `dir` using up to `workers` threads, then
/// writes `dir`/sweep.csv. Failed runs are recorded and do not stop the sweep.
std::vector<SweepEntry> run_sweep(const SimulationConfig& base, const std::string& axis,
                                  const std::vector<std::string>& values, const std::filesystem::path& dir,
                                  unsigned workers);

/// Config key driven by a sweep axis; throws ConfigError for unknown axes.
std::string sweep_axis_key(const std::string& axis);

struct ReferenceCurve {
    std::string label;
    std::vector<double> t_h;
    std::vector<double> remaining;
};

/// CSV with header `t_h,remaining_fraction`; times increasing, fractions
/// in [0, 1].
ReferenceCurve read_reference(const std::filesystem::path& path);

struct ComparisonReport {
    double rmse = 0.0;
    double max_deviation = 0.0;
    std::size_t points = 0;
    std::vector<double> t_h;
    std::vector<double> simulated;
    std::vector<double> reference;
};

/// Remaining depot fraction of the run is (free + bound)/100. It is
/// linearly interpolated onto the reference times that fall inside the
/// run's time range. Throws ConfigError when the ranges do not overlap.
ComparisonReport compare_reference(const MetricSeries& run, const ReferenceCurve& ref);

}  // namespace depotsim
