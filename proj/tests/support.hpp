#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "depotsim/mesh.hpp"

namespace testing {

inline depotsim::AxiMesh uniform_mesh(double radius, double height, std::size_t nr, std::size_t nz) {
    return depotsim::build_graded_mesh(radius, height, nr, nz, 0.0, height, 1.0);
}

inline depotsim::NodalField sample(const depotsim::AxiMesh& m, const std::function<double(double, double)>& f) {
    depotsim::NodalField out(m.node_count());
    for (std::size_t j = 0; j < m.nz(); ++j) {
        for (std::size_t i = 0; i < m.nr(); ++i) out[m.index(i, j)] = f(m.r(i), m.z(j));
    }
    return out;
}

// Volume-weighted discrete L2 norm of a - b.
inline double l2_error(const depotsim::AxiMesh& m, const depotsim::NodalField& a, const depotsim::NodalField& b) {
    double s = 0.0;
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += m.node_volume(k) * (a[k] - b[k]) * (a[k] - b[k]);
        v += m.node_volume(k);
    }
    return std::sqrt(s / v);
}

// Least-squares slope of log(error) against log(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double x = std::log(h[k]);
        const double y = std::log(err[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing

#include "depotsim/config.hpp"

namespace testing {

// Coarse, short configuration for pipeline tests that must run in seconds.
inline depotsim::SimulationConfig tiny_config(double long_horizon_h = 0.5) {
    depotsim::SimulationConfig cfg = depotsim::default_config();
    depotsim::apply_setting(cfg, "mesh.fine_nr", "40", {});
    depotsim::apply_setting(cfg, "mesh.fine_nz", "40", {});
    depotsim::apply_setting(cfg, "mesh.grading", "1.05", {});
    depotsim::apply_setting(cfg, "mesh.coarse_nr", "24", {});
    depotsim::apply_setting(cfg, "mesh.coarse_nz", "24", {});
    depotsim::apply_setting(cfg, "plan.short_dt_s", "0.1", {});
    depotsim::apply_setting(cfg, "plan.long_horizon_h", std::to_string(long_horizon_h), {});
    depotsim::apply_setting(cfg, "plan.report_time_h", std::to_string(long_horizon_h), {});
    depotsim::apply_setting(cfg, "output.short_cadence_s", "0.5", {});
    depotsim::apply_setting(cfg, "output.long_cadence_h", "0.1", {});
    return cfg;
}

}  // namespace testing
