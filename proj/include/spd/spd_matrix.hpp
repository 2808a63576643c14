#ifndef SPD_SPD_MATRIX_HPP
#define SPD_SPD_MATRIX_HPP

#include <Eigen/Dense>

#include <vector>

#include "spd/error.hpp"

/**
 * @file spd_matrix.hpp
 *
 * Validated symmetric positive definite matrices and the dense kernels built
 * on them: Cholesky, symmetric eigendecomposition, extremal generalized
 * eigenvalues, matrix log/exp and the affine-invariant Riemannian geometry.
 */

namespace spd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance on max|M - M^T| / max|M| accepted by make_spd.
inline constexpr double kDefaultSymmetryTol = 1e-9;

/**
 * @brief An element of the open cone of d x d symmetric positive definite matrices.
 *
 * Instances can only be produced by make_spd (or functions that call it), so
 * holding one means the entries are exactly symmetric and a Cholesky factor
 * exists. The lower factor is computed once at construction and kept.
 */
class SpdMatrix {
public:
    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    /// Lower-triangular L with matrix() == L * L^T.
    const Matrix& cholesky_factor() const noexcept { return l_; }

    /// Largest |raw(i,j) - raw(j,i)| seen before symmetrization.
    double asymmetry() const noexcept { return asymmetry_; }

    friend SpdMatrix make_spd(const Matrix& raw, double tol);

private:
    SpdMatrix(Matrix m, Matrix l, double asymmetry)
        : m_(std::move(m)), l_(std::move(l)), asymmetry_(asymmetry) {}

    Matrix m_;
    Matrix l_;
    double asymmetry_ = 0.0;
};

/**
 * Validates raw and returns (raw + raw^T) / 2.
 *
 * Throws NotSquare, AsymmetryExceedsTolerance (max|raw - raw^T| > tol * max|raw|),
 * InvalidArgument (non-finite or empty) or NotPositiveDefinite.
 */
SpdMatrix make_spd(const Matrix& raw, double tol = kDefaultSymmetryTol);

/// Row-vector form used by the file readers; ragged input is NotSquare.
SpdMatrix make_spd(const std::vector<std::vector<double>>& rows, double tol = kDefaultSymmetryTol);

SpdMatrix identity_spd(int dim);

/// Lower Cholesky factor of A.
const Matrix& cholesky(const SpdMatrix& a);

struct SymEig {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric matrix. Throws NoConvergence.
SymEig sym_eig(const Matrix& sym);
SymEig sym_eig(const SpdMatrix& a);

/// Extremal eigenvalues of a pencil or a symmetric matrix.
struct EigenPair {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix: closed form for
/// d <= 2, otherwise Householder tridiagonalization and Sturm bisection for
/// the two ends of the spectrum only.
EigenPair extremal_eigenvalues(const Matrix& sym);

/// L^{-1} B L^{-T} for A = L L^T. Its spectrum is that of B A^{-1}.
Matrix whiten(const SpdMatrix& a, const SpdMatrix& b);

/// Extremal eigenvalues of B A^{-1}, each with relative accuracy. Throws
/// DimensionMismatch.
EigenPair gen_extremal_eig(const SpdMatrix& a, const SpdMatrix& b);

/// Full ascending spectrum of B A^{-1}.
Vector gen_eigenvalues(const SpdMatrix& a, const SpdMatrix& b);

Matrix matrix_log(const SpdMatrix& a);

/// exp of a symmetric matrix, which is always SPD.
SpdMatrix matrix_exp(const Matrix& sym);

/// A^p through the eigendecomposition.
SpdMatrix matrix_power(const SpdMatrix& a, double p);

/// Loewner order a <= b, i.e. b - a is positive semidefinite up to tol * ||b||.
bool loewner_leq(const SpdMatrix& a, const SpdMatrix& b, double tol = 1e-12);

/// Interpolation parameter t in [0, 1].
class GeodesicWeight {
public:
    explicit GeodesicWeight(double t);
    double value() const noexcept { return t_; }

private:
    double t_;
};

/// (sum_i log^2 lambda_i)^{1/2} over the spectrum of B A^{-1}.
double riemannian_distance(const SpdMatrix& a, const SpdMatrix& b);

/// A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}.
SpdMatrix riemannian_geodesic(const SpdMatrix& a, const SpdMatrix& b, GeodesicWeight t);

struct ConePoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// [[a,b],[b,c]] -> (sqrt2 b, (a-c)/sqrt2, (a+c)/sqrt2). Throws WrongDimension.
ConePoint cone_projection(const SpdMatrix& a);

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b);

}  // namespace spd

#endif
