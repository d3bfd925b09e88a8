#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "depotsim/mesh.hpp"

namespace depotsim {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Five-point stencil matrix on an AxiMesh with a fixed sparsity pattern.
/// Coefficients are addressed by (node, neighbour direction) so repeated
/// assembly never touches the structure.
class StencilMatrix {
public:
    enum Dir : int { center = 0, west = 1, east = 2, south = 3, north = 4 };

    explicit StencilMatrix(const AxiMesh& mesh);

    void set_zero();
    /// Coefficient A(k, neighbour of k in direction d). The neighbour must exist.
    double& at(std::size_t k, Dir d) { return values_[slot_[5 * k + d]]; }
    double at(std::size_t k, Dir d) const { return values_[slot_[5 * k + d]]; }
    bool has(std::size_t k, Dir d) const { return slot_[5 * k + d] >= 0; }

    const SparseMatrix& matrix() const { return a_; }
    SparseMatrix& matrix() { return a_; }
    std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }

private:
    SparseMatrix a_;
    double* values_ = nullptr;
    std::vector<long> slot_;
};

/// Symmetric positive definite solve with a reusable factorization.
class SpdSolver {
public:
    SpdSolver();
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    /// Throws SolverError naming `what` if the factorization fails.
    void factor(const SparseMatrix& a, const std::string& what);
    std::vector<double> solve(std::span<const double> rhs) const;
    bool ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool direct_fallback = false;
};

/// General (nonsymmetric) sparse solve: ILUT-preconditioned BiCGSTAB with a
/// direct SparseLU fallback. `x` is the initial guess on entry. Throws
/// SolverError naming `what` if neither route reaches `tolerance`.
SolveReport solve_general(const SparseMatrix& a, std::span<const double> rhs, std::vector<double>& x,
                          const std::string& what, double tolerance = 1e-13);

}  // namespace depotsim
