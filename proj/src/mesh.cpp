#include "depotsim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "depotsim/errors.hpp"

namespace depotsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxNeighbourRatio = 1.3;

void check_axis(const std::vector<double>& x, const char* name) {
    if (x.size() < 2) throw ConfigError(std::string("mesh: need at least 2 nodes in ") + name);
    if (x.front() != 0.0) throw ConfigError(std::string("mesh: first ") + name + " node must be 0");
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (!(x[k] > x[k - 1])) {
            throw ConfigError(std::string("mesh: ") + name + " nodes must be strictly increasing");
        }
    }
}

double geometric_sum(double g, std::size_t n) {
    if (g == 1.0) return static_cast<double>(n);
    return (std::pow(g, static_cast<double>(n)) - 1.0) / (g - 1.0);
}

// Spacings growing by `g` away from the focus, which sits at x = 0 of a
// segment of length `length`.
std::vector<double> spacings_from(double length, std::size_t n, double g) {
    std::vector<double> h(n);
    const double h0 = length / geometric_sum(g, n);
    double cur = h0;
    for (std::size_t k = 0; k < n; ++k) {
        h[k] = cur;
        cur *= g;
    }
    return h;
}

std::vector<double> graded_axis(double length, std::size_t n, double focus, double g) {
    std::vector<double> x(n + 1);
    if (g == 1.0) {
        for (std::size_t k = 0; k <= n; ++k) x[k] = length * static_cast<double>(k) / static_cast<double>(n);
        x[n] = length;
        return x;
    }

    std::vector<double> h;  // spacings from x = 0 upward
    if (focus <= 0.0) {
        h = spacings_from(length, n, g);
    } else if (focus >= length) {
        h = spacings_from(length, n, g);
        std::reverse(h.begin(), h.end());
    } else {
        // Split the cells so the two spacings adjacent to the focus match as
        // closely as possible.
        std::size_t best_lo = 1;
        double best_mismatch = 1e300;
        for (std::size_t n_lo = 1; n_lo < n; ++n_lo) {
            const double h_lo = focus / geometric_sum(g, n_lo);
            const double h_hi = (length - focus) / geometric_sum(g, n - n_lo);
            const double mismatch = std::abs(std::log(h_lo / h_hi));
            if (mismatch < best_mismatch) {
                best_mismatch = mismatch;
                best_lo = n_lo;
            }
        }
        auto lo = spacings_from(focus, best_lo, g);
        std::reverse(lo.begin(), lo.end());
        auto hi = spacings_from(length - focus, n - best_lo, g);
        h = std::move(lo);
        h.insert(h.end(), hi.begin(), hi.end());
    }

    x[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) x[k + 1] = x[k] + h[k];
    // Pin the far end and the focus exactly; accumulated round-off is ~1e-16.
    x[n] = length;
    if (focus > 0.0 && focus < length) {
        auto it = std::min_element(x.begin(), x.end(), [focus](double a, double b) {
            return std::abs(a - focus) < std::abs(b - focus);
        });
        *it = focus;
    }
    return x;
}

void check_ratios(const std::vector<double>& x, const char* name) {
    for (std::size_t k = 1; k + 1 < x.size(); ++k) {
        const double a = x[k] - x[k - 1];
        const double b = x[k + 1] - x[k];
        if (std::max(a / b, b / a) > kMaxNeighbourRatio + 1e-9) {
            throw ConfigError(std::string("mesh: neighbour spacing ratio in ") + name + " exceeds 1.3 (" +
                              std::to_string(std::max(a / b, b / a)) + ")");
        }
    }
}

}  // namespace

AxiMesh::AxiMesh(std::vector<double> r_nodes, std::vector<double> z_nodes)
    : r_(std::move(r_nodes)), z_(std::move(z_nodes)) {
    check_axis(r_, "r");
    check_axis(z_, "z");
    node_volume_.assign(node_count(), 0.0);
    for (std::size_t j = 0; j < nz(); ++j) {
        const double dz = dual_z_hi(j) - dual_z_lo(j);
        for (std::size_t i = 0; i < nr(); ++i) {
            const double lo = dual_r_lo(i);
            const double hi = dual_r_hi(i);
            node_volume_[index(i, j)] = kPi * (hi * hi - lo * lo) * dz;
        }
    }
}

double AxiMesh::cell_volume(std::size_t i, std::size_t j) const {
    const double rc = 0.5 * (r_[i] + r_[i + 1]);
    return 2.0 * kPi * rc * (r_[i + 1] - r_[i]) * (z_[j + 1] - z_[j]);
}

double AxiMesh::quarter_volume(std::size_t i, std::size_t j, int di, int dj) const {
    const double rc = 0.5 * (r_[i] + r_[i + 1]);
    const double dz = 0.5 * (z_[j + 1] - z_[j]);
    const double lo = di == 0 ? r_[i] : rc;
    const double hi = di == 0 ? rc : r_[i + 1];
    (void)dj;
    return kPi * (hi * hi - lo * lo) * dz;
}

double AxiMesh::radial_face_area(std::size_t i, std::size_t j) const {
    const double rf = 0.5 * (r_[i] + r_[i + 1]);
    return 2.0 * kPi * rf * (dual_z_hi(j) - dual_z_lo(j));
}

double AxiMesh::axial_face_area(std::size_t i, std::size_t j) const {
    (void)j;
    const double lo = dual_r_lo(i);
    const double hi = dual_r_hi(i);
    return kPi * (hi * hi - lo * lo);
}

double AxiMesh::min_spacing_r() const {
    double m = 1e300;
    for (std::size_t k = 1; k < r_.size(); ++k) m = std::min(m, r_[k] - r_[k - 1]);
    return m;
}

double AxiMesh::min_spacing_z() const {
    double m = 1e300;
    for (std::size_t k = 1; k < z_.size(); ++k) m = std::min(m, z_[k] - z_[k - 1]);
    return m;
}

double AxiMesh::interpolate(std::span<const double> field, double r, double z) const {
    r = std::clamp(r, 0.0, radius());
    z = std::clamp(z, 0.0, height());
    auto cell_of = [](const std::vector<double>& x, double v) {
        auto it = std::upper_bound(x.begin(), x.end(), v);
        std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
        return std::min(k, x.size() - 2);
    };
    const std::size_t i = cell_of(r_, r);
    const std::size_t j = cell_of(z_, z);
    const double s = (r - r_[i]) / (r_[i + 1] - r_[i]);
    const double t = (z - z_[j]) / (z_[j + 1] - z_[j]);
    const double f00 = field[index(i, j)];
    const double f10 = field[index(i + 1, j)];
    const double f01 = field[index(i, j + 1)];
    const double f11 = field[index(i + 1, j + 1)];
    return (1.0 - s) * (1.0 - t) * f00 + s * (1.0 - t) * f10 + (1.0 - s) * t * f01 + s * t * f11;
}

AxiMesh build_graded_mesh(double radius, double height, std::size_t n_r, std::size_t n_z,
                          double focus_r, double focus_z, double grading) {
    if (n_r < 8 || n_z < 8) throw ConfigError("mesh: n_r and n_z must be >= 8");
    if (!(radius > 0.0) || !(height > 0.0)) throw ConfigError("mesh: R and H must be > 0");
    if (focus_r < 0.0 || focus_r > radius || focus_z < 0.0 || focus_z > height) {
        throw ConfigError("mesh: grading focus lies outside the domain");
    }
    if (!(grading >= 1.0)) throw ConfigError("mesh: grading must be >= 1");
    auto r = graded_axis(radius, n_r, focus_r, grading);
    auto z = graded_axis(height, n_z, focus_z, grading);
    check_ratios(r, "r");
    check_ratios(z, "z");
    return AxiMesh(std::move(r), std::move(z));
}

double integrate(std::span<const double> field, const AxiMesh& mesh) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < mesh.nz(); ++j) {
        for (std::size_t i = 0; i + 1 < mesh.nr(); ++i) {
            double cell = 0.0;
            for (int dj = 0; dj < 2; ++dj) {
                for (int di = 0; di < 2; ++di) {
                    cell += mesh.quarter_volume(i, j, di, dj) * field[mesh.index(i + di, j + dj)];
                }
            }
            sum += cell;
        }
    }
    return sum;
}

Projection project_field(const AxiMesh& src, std::span<const double> src_field, const AxiMesh& dst) {
    const double tol = 1e-12 * std::max(src.radius(), src.height());
    if (std::abs(src.radius() - dst.radius()) > tol || std::abs(src.height() - dst.height()) > tol) {
        throw ConfigError("project_field: source and destination meshes cover different domains");
    }
    Projection out;
    out.field.resize(dst.node_count());
    for (std::size_t j = 0; j < dst.nz(); ++j) {
        for (std::size_t i = 0; i < dst.nr(); ++i) {
            out.field[dst.index(i, j)] = src.interpolate(src_field, dst.r(i), dst.z(j));
        }
    }
    const double before = integrate(src_field, src);
    const double after = integrate(out.field, dst);
    out.relative_mass_change = before != 0.0 ? (after - before) / std::abs(before) : 0.0;
    return out;
}

}  // namespace depotsim
