#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace depotsim {

using NodalField = std::vector<double>;

/// Structured (r, z) grid of an axisymmetric cylinder [0, R] x [0, H].
///
/// Unknowns live on nodes. Each node owns the dual box bounded by the
/// midpoints to its neighbours (clipped at the domain boundary); all
/// volume and face measures carry the axisymmetric weight 2*pi*r exactly, so
/// the r = 0 axis needs no special treatment (its faces have zero area).
class AxiMesh {
public:
    AxiMesh() = default;
    /// Node coordinates must start at 0 and be strictly increasing.
    AxiMesh(std::vector<double> r_nodes, std::vector<double> z_nodes);

    std::size_t nr() const { return r_.size(); }  // nodes in r
    std::size_t nz() const { return z_.size(); }  // nodes in z
    std::size_t node_count() const { return r_.size() * z_.size(); }
    std::size_t index(std::size_t i, std::size_t j) const { return j * r_.size() + i; }

    double radius() const { return r_.back(); }
    double height() const { return z_.back(); }
    const std::vector<double>& r_nodes() const { return r_; }
    const std::vector<double>& z_nodes() const { return z_; }
    double r(std::size_t i) const { return r_[i]; }
    double z(std::size_t j) const { return z_[j]; }

    /// Volume 2*pi*r_c*dr*dz of primal cell (i, j) spanning nodes i..i+1, j..j+1.
    double cell_volume(std::size_t i, std::size_t j) const;
    /// Exact axisymmetric volume of the corner quarter of cell (i, j) owned
    /// by node (i + di, j + dj), di, dj in {0, 1}.
    double quarter_volume(std::size_t i, std::size_t j, int di, int dj) const;
    /// Dual (control) volume of node k; sums to pi R^2 H.
    double node_volume(std::size_t k) const { return node_volume_[k]; }
    const std::vector<double>& node_volumes() const { return node_volume_; }

    // Dual-box bounds of node i (r) and j (z).
    double dual_r_lo(std::size_t i) const { return i == 0 ? r_[0] : 0.5 * (r_[i - 1] + r_[i]); }
    double dual_r_hi(std::size_t i) const { return i + 1 == r_.size() ? r_[i] : 0.5 * (r_[i] + r_[i + 1]); }
    double dual_z_lo(std::size_t j) const { return j == 0 ? z_[0] : 0.5 * (z_[j - 1] + z_[j]); }
    double dual_z_hi(std::size_t j) const { return j + 1 == z_.size() ? z_[j] : 0.5 * (z_[j] + z_[j + 1]); }

    /// Area of the face between node (i, j) and (i + 1, j).
    double radial_face_area(std::size_t i, std::size_t j) const;
    /// Area of the face between node (i, j) and (i, j + 1).
    double axial_face_area(std::size_t i, std::size_t j) const;

    double min_spacing_r() const;
    double min_spacing_z() const;

    /// Bilinear interpolation of a nodal field at (r, z), clamped to the domain.
    double interpolate(std::span<const double> field, double r, double z) const;

    friend bool operator==(const AxiMesh& a, const AxiMesh& b) {
        return a.r_ == b.r_ && a.z_ == b.z_;
    }

private:
    std::vector<double> r_;
    std::vector<double> z_;
    std::vector<double> node_volume_;
};

/// Geometric grading toward `focus` in both directions. grading = 1 gives a
/// uniform mesh. Throws ConfigError for n < 8, a focus outside the domain,
/// grading < 1, or any neighbour spacing ratio above 1.3.
AxiMesh build_graded_mesh(double radius, double height, std::size_t n_r, std::size_t n_z,
                          double focus_r, double focus_z, double grading);

/// Axisymmetric integral: sum over cells of the volume-weighted corner
/// average times the cell volume. Identical to sum_k V_k f_k over node dual
/// volumes, which is the measure the transport scheme conserves.
double integrate(std::span<const double> field, const AxiMesh& mesh);

struct Projection {
    NodalField field;
    double relative_mass_change = 0.0;  // (I_dst - I_src) / |I_src|; 0 when I_src = 0
};

/// Bilinear interpolation of `src_field` onto the nodes of `dst`. Both meshes
/// must cover the same (R, H); throws ConfigError otherwise.
Projection project_field(const AxiMesh& src, std::span<const double> src_field, const AxiMesh& dst);

}  // namespace depotsim
