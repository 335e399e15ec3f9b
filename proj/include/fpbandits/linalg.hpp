#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fpbandits/errors.hpp"

namespace fpbandits {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense symmetric matrix with validated symmetry. Holds the Gram matrices
// (vanilla and curvature-weighted) used throughout; all are constructed as
// lambda*I + sum_i w_i x_i x_i^T with lambda > 0, so they stay positive
// definite.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m);
    static SymMatrix identity(int dim, double scale = 1.0);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& data() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    SymMatrix() = default;
    friend SymMatrix rank1_update(const SymMatrix&, const Vector&, double);
    friend class SpdSolver;
    Matrix m_;
};

// Solves A y = b for positive definite A via Cholesky.
Vector solve_spd(const SymMatrix& a, const Vector& b);

// ||x|| in the A^{-1} metric: sqrt(x^T A^{-1} x).
double quad_norm(const SymMatrix& a, const Vector& x);

// Symmetric B with B A B = I, via eigendecomposition.
SymMatrix inv_sqrt(const SymMatrix& a);

// A + w x x^T; exact symmetry is preserved entrywise.
SymMatrix rank1_update(const SymMatrix& a, const Vector& x, double w);

// Cached Cholesky factorization for repeated solves/quadratic forms against
// one matrix (per-round arm scoring).
class SpdSolver {
public:
    explicit SpdSolver(const SymMatrix& a);
    Vector solve(const Vector& b) const;
    double inv_quad(const Vector& x) const;  // x^T A^{-1} x
    double inv_norm(const Vector& x) const;  // sqrt of the above
private:
    Eigen::LLT<Matrix> llt_;
};

}  // namespace fpbandits
