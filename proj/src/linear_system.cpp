#include "depotsim/linear_system.hpp"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "depotsim/errors.hpp"

namespace depotsim {

StencilMatrix::StencilMatrix(const AxiMesh& mesh) {
    const auto n = static_cast<int>(mesh.node_count());
    const std::size_t nr = mesh.nr();
    const std::size_t nz = mesh.nz();
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(5 * mesh.node_count());
    for (std::size_t j = 0; j < nz; ++j) {
        for (std::size_t i = 0; i < nr; ++i) {
            const int k = static_cast<int>(mesh.index(i, j));
            trips.emplace_back(k, k, 1.0);
            if (i > 0) trips.emplace_back(k, k - 1, 1.0);
            if (i + 1 < nr) trips.emplace_back(k, k + 1, 1.0);
            if (j > 0) trips.emplace_back(k, k - static_cast<int>(nr), 1.0);
            if (j + 1 < nz) trips.emplace_back(k, k + static_cast<int>(nr), 1.0);
        }
    }
    a_.resize(n, n);
    a_.setFromTriplets(trips.begin(), trips.end());
    a_.makeCompressed();
    values_ = a_.valuePtr();

    slot_.assign(5 * mesh.node_count(), -1);
    const int inr = static_cast<int>(nr);
    for (int col = 0; col < n; ++col) {
        for (SparseMatrix::InnerIterator it(a_, col); it; ++it) {
            const int row = it.row();
            const long pos = &it.valueRef() - values_;
            const int d = col - row;
            Dir dir = center;
            if (d == 0) dir = center;
            else if (d == -1) dir = west;
            else if (d == 1) dir = east;
            else if (d == -inr) dir = south;
            else if (d == inr) dir = north;
            slot_[5 * static_cast<std::size_t>(row) + dir] = pos;
        }
    }
    set_zero();
}

void StencilMatrix::set_zero() {
    std::fill(values_, values_ + a_.nonZeros(), 0.0);
}

struct SpdSolver::Impl {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    bool ready = false;
};

SpdSolver::SpdSolver() : impl_(std::make_unique<Impl>()) {}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factor(const SparseMatrix& a, const std::string& what) {
    if (!impl_->ready) {
        impl_->ldlt.analyzePattern(a);
    }
    impl_->ldlt.factorize(a);
    if (impl_->ldlt.info() != Eigen::Success) {
        impl_->ready = false;
        throw SolverError(what + ": LDLT factorization failed (matrix not SPD or singular)");
    }
    impl_->ready = true;
}

std::vector<double> SpdSolver::solve(std::span<const double> rhs) const {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = impl_->ldlt.solve(b);
    return {x.data(), x.data() + x.size()};
}

bool SpdSolver::ready() const { return impl_->ready; }

SolveReport solve_general(const SparseMatrix& a, std::span<const double> rhs, std::vector<double>& x,
                          const std::string& what, double tolerance) {
    SolveReport report;
    const auto n = static_cast<Eigen::Index>(rhs.size());
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        xv.setZero();
        return report;
    }

    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double, int>> it;
    it.preconditioner().setDroptol(1e-6);
    it.preconditioner().setFillfactor(4);
    it.setTolerance(tolerance);
    it.setMaxIterations(400);
    it.compute(a);
    if (it.info() == Eigen::Success) {
        Eigen::VectorXd guess = xv;
        Eigen::VectorXd sol = it.solveWithGuess(b, guess);
        const double res = (a * sol - b).norm() / bnorm;
        if (it.info() == Eigen::Success && std::isfinite(res) && res <= 10.0 * tolerance) {
            xv = sol;
            report.iterations = static_cast<int>(it.iterations());
            report.relative_residual = res;
            return report;
        }
    }

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolverError(what + ": sparse LU factorization failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd sol = lu.solve(b);
    const double res = (a * sol - b).norm() / bnorm;
    if (!std::isfinite(res) || res > 1e-8) {
        throw SolverError(what + ": direct solve residual " + std::to_string(res) + " too large");
    }
    xv = sol;
    report.direct_fallback = true;
    report.relative_residual = res;
    return report;
}

}  // namespace depotsim
