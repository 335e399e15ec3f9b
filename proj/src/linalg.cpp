#include "fpbandits/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace fpbandits {

SymMatrix::SymMatrix(Matrix m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("SymMatrix: matrix must be square");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw std::invalid_argument("SymMatrix: asymmetry exceeds 1e-12 relative tolerance");
    }
    m_ = std::move(m);
}

SymMatrix SymMatrix::identity(int dim, double scale) {
    return SymMatrix(Matrix(scale * Matrix::Identity(dim, dim)));
}

Vector solve_spd(const SymMatrix& a, const Vector& b) {
    if (b.size() != a.dim()) {
        throw std::invalid_argument("solve_spd: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(a.data());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("solve_spd: Cholesky factorization failed");
    }
    return llt.solve(b);
}

double quad_norm(const SymMatrix& a, const Vector& x) {
    const Vector y = solve_spd(a, x);
    // Roundoff can push a tiny quadratic form below zero.
    return std::sqrt(std::max(0.0, x.dot(y)));
}

SymMatrix inv_sqrt(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.data());
    if (eig.info() != Eigen::Success) {
        throw NotPositiveDefinite("inv_sqrt: eigendecomposition failed");
    }
    const Vector& evals = eig.eigenvalues();
    if (evals.minCoeff() <= 0.0) {
        throw NotPositiveDefinite("inv_sqrt: matrix has a nonpositive eigenvalue");
    }
    const Matrix& u = eig.eigenvectors();
    Matrix b = u * evals.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    // Symmetrize: u diag u^T is symmetric only up to roundoff.
    b = 0.5 * (b + b.transpose()).eval();
    return SymMatrix(std::move(b));
}

SymMatrix rank1_update(const SymMatrix& a, const Vector& x, double w) {
    if (x.size() != a.dim()) {
        throw std::invalid_argument("rank1_update: dimension mismatch");
    }
    if (w < 0.0) {
        throw std::invalid_argument("rank1_update: weight must be nonnegative");
    }
    SymMatrix out;
    // Update the lower triangle and mirror it; vectorized expression paths
    // can round (i,j) and (j,i) differently, this keeps symmetry exact.
    Matrix m = a.data();
    const Eigen::Index d = m.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            m(i, j) += w * (x(i) * x(j));
            m(j, i) = m(i, j);
        }
    }
    out.m_ = std::move(m);
    return out;
}

SpdSolver::SpdSolver(const SymMatrix& a) : llt_(a.data()) {
    if (llt_.info() != Eigen::Success) {
        throw NotPositiveDefinite("SpdSolver: Cholesky factorization failed");
    }
}

Vector SpdSolver::solve(const Vector& b) const { return llt_.solve(b); }

double SpdSolver::inv_quad(const Vector& x) const {
    // x^T A^{-1} x = ||L^{-1} x||^2 with A = L L^T.
    const Vector y = llt_.matrixL().solve(x);
    return y.squaredNorm();
}

double SpdSolver::inv_norm(const Vector& x) const { return std::sqrt(inv_quad(x)); }

}  // namespace fpbandits
