#include "spd/spd_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace spd {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::NotSquare: return "NotSquare";
        case Errc::AsymmetryExceedsTolerance: return "AsymmetryExceedsTolerance";
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::WrongDimension: return "WrongDimension";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::SingularTransform: return "SingularTransform";
        case Errc::DegenerateDirection: return "DegenerateDirection";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::EmptyCluster: return "EmptyCluster";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::MissingTruth: return "MissingTruth";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::CenterSamplingExhausted: return "CenterSamplingExhausted";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

bool is_numerical(Errc code) noexcept {
    return code == Errc::NoConvergence || code == Errc::DegenerateDirection ||
           code == Errc::CenterSamplingExhausted;
}

SpdMatrix make_spd(const Matrix& raw, double tol) {
    if (raw.rows() != raw.cols()) {
        throw Error(Errc::NotSquare, std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
    }
    if (raw.rows() == 0) {
        throw Error(Errc::InvalidArgument, "empty matrix");
    }
    if (!raw.allFinite()) {
        throw Error(Errc::InvalidArgument, "non-finite entry");
    }

    const double scale = raw.cwiseAbs().maxCoeff();
    const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) {
        throw Error(Errc::AsymmetryExceedsTolerance,
                    "max|M - M^T| = " + std::to_string(asym) + " vs max|M| = " + std::to_string(scale));
    }

    Matrix sym = 0.5 * (raw + raw.transpose());
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::NotPositiveDefinite, "Cholesky factorization failed");
    }
    Matrix l = llt.matrixL();
    if (!l.allFinite() || l.diagonal().minCoeff() <= 0.0) {
        throw Error(Errc::NotPositiveDefinite, "non-positive Cholesky pivot");
    }
    return SpdMatrix(std::move(sym), std::move(l), asym);
}

SpdMatrix make_spd(const std::vector<std::vector<double>>& rows, double tol) {
    const auto n = rows.size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw Error(Errc::NotSquare, "row " + std::to_string(i) + " has " +
                                             std::to_string(rows[i].size()) + " entries, expected " +
                                             std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return make_spd(m, tol);
}

SpdMatrix identity_spd(int dim) {
    return make_spd(Matrix::Identity(dim, dim));
}

const Matrix& cholesky(const SpdMatrix& a) {
    return a.cholesky_factor();
}

SymEig sym_eig(const Matrix& sym) {
    if (sym.rows() != sym.cols()) {
        throw Error(Errc::NotSquare, "sym_eig needs a square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error(Errc::NoConvergence, "symmetric eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SymEig sym_eig(const SpdMatrix& a) {
    return sym_eig(a.matrix());
}

namespace {

EigenPair closed_form_2x2(const Matrix& s) {
    const double a = s(0, 0);
    const double b = s(0, 1);
    const double c = s(1, 1);
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    double hi = mean + rad;
    double lo = mean - rad;
    // Recover the small root from the determinant when the pair is well separated.
    const double det = a * c - b * b;
    if (mean > 0.0 && hi > 0.0 && lo < 0.5 * hi) {
        lo = det / hi;
    }
    return {lo, hi};
}

// One pass of the LDL^T pivots q_i of T - x I gives the number of eigenvalues
// below x and the log-derivative of det(T - x I), sum_j 1 / (x - lambda_j).
struct Sturm {
    Eigen::Index count = 0;
    double log_deriv = 0.0;
};

Sturm sturm(const Vector& diag, const Vector& sub, double x, double pivmin) {
    Sturm out;
    double q = diag(0) - x;
    double dq = -1.0;
    if (std::abs(q) < pivmin) {
        q = -pivmin;
    }
    out.count += q < 0.0;
    out.log_deriv += dq / q;
    for (Eigen::Index i = 1; i < diag.size(); ++i) {
        const double b2 = sub(i - 1) * sub(i - 1);
        const double q_prev = q;
        q = (diag(i) - x) - b2 / q_prev;
        dq = -1.0 + b2 * dq / (q_prev * q_prev);
        if (std::abs(q) < pivmin) {
            q = -pivmin;
        }
        out.count += q < 0.0;
        out.log_deriv += dq / q;
    }
    return out;
}

// Smallest (lowest = true) or largest eigenvalue inside [lo, hi]. Bisection
// until the bracket isolates that eigenvalue, then Newton on det(T - x I)
// from the outer end, which approaches it monotonically: the eigenvalue lies
// between delta and n * delta away, delta being the Newton step. A Newton
// step that fails to halve the bracket is followed by a bisection step.
double extreme_eigenvalue(const Vector& diag, const Vector& sub, bool lowest, double lo, double hi,
                          double pivmin) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const Eigen::Index n = diag.size();
    const Eigen::Index isolated_count = lowest ? 1 : n - 1;
    Sturm outer = sturm(diag, sub, lowest ? lo : hi, pivmin);
    Eigen::Index inner_count = sturm(diag, sub, lowest ? hi : lo, pivmin).count;
    bool bisect_next = false;
    for (int it = 0; it < 512; ++it) {
        const double width = hi - lo;
        if (width <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + pivmin) {
            break;
        }
        double x = lo + 0.5 * width;
        const bool try_newton = !bisect_next && inner_count == isolated_count;
        bisect_next = false;
        if (try_newton && outer.log_deriv != 0.0 && std::isfinite(outer.log_deriv)) {
            const double anchor = lowest ? lo : hi;
            const double delta = -1.0 / outer.log_deriv;
            const double newton = anchor + delta;
            const double far = anchor + static_cast<double>(n) * delta;
            if (newton > lo && newton < hi) {
                x = newton;
            } else if (far > lo && far < hi) {
                x = far;
            }
        }
        if (x <= lo || x >= hi) {
            break;
        }
        const Sturm at = sturm(diag, sub, x, pivmin);
        const bool outside = lowest ? at.count == 0 : at.count == n;
        if (outside) {
            (lowest ? lo : hi) = x;
            outer = at;
        } else {
            (lowest ? hi : lo) = x;
            inner_count = at.count;
        }
        bisect_next = try_newton && hi - lo > 0.5 * width;
    }
    return lo + 0.5 * (hi - lo);
}

EigenPair tridiagonal_extremes(const Vector& diag, const Vector& sub) {
    const Eigen::Index n = diag.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double max_off = 0.0;
    // Diagonal entries are Rayleigh quotients, so they bound each end from inside.
    double diag_lo = diag(0);
    double diag_hi = diag(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag_lo = std::min(diag_lo, diag(i));
        diag_hi = std::max(diag_hi, diag(i));
        const double r = (i > 0 ? std::abs(sub(i - 1)) : 0.0) + (i + 1 < n ? std::abs(sub(i)) : 0.0);
        lo = std::min(lo, diag(i) - r);
        hi = std::max(hi, diag(i) + r);
        if (i + 1 < n) {
            max_off = std::max(max_off, sub(i) * sub(i));
        }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error(Errc::NoConvergence, "non-finite matrix in eigenvalue bisection");
    }
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off);
    const double span = std::max(hi - lo, std::numeric_limits<double>::min());
    lo -= 2.0 * std::numeric_limits<double>::epsilon() * span + pivmin;
    hi += 2.0 * std::numeric_limits<double>::epsilon() * span + pivmin;
    return {extreme_eigenvalue(diag, sub, true, lo, std::min(hi, diag_lo + pivmin), pivmin),
            extreme_eigenvalue(diag, sub, false, std::max(lo, diag_hi - pivmin), hi, pivmin)};
}

}  // namespace

EigenPair extremal_eigenvalues(const Matrix& s) {
    const auto n = s.rows();
    if (n != s.cols() || n == 0) {
        throw Error(Errc::NotSquare, "extremal_eigenvalues needs a non-empty square matrix");
    }
    if (n == 1) {
        return {s(0, 0), s(0, 0)};
    }
    if (n == 2) {
        return closed_form_2x2(s);
    }
    const Eigen::Tridiagonalization<Matrix> tri(s);
    return tridiagonal_extremes(tri.diagonal(), tri.subDiagonal());
}

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b) {
    if (a.dim() != b.dim()) {
        throw Error(Errc::DimensionMismatch,
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
}

constexpr double kWideSpectrum = 1e-3;

Matrix whiten(const SpdMatrix& a, const SpdMatrix& b) {
    require_same_dim(a, b);
    const auto l = a.cholesky_factor().triangularView<Eigen::Lower>();
    Matrix t = l.solve(b.matrix());
    Matrix w = l.solve(t.transpose());
    return 0.5 * (w + w.transpose());
}

EigenPair gen_extremal_eig(const SpdMatrix& a, const SpdMatrix& b) {
    EigenPair e = extremal_eigenvalues(whiten(a, b));
    // The small end is only accurate relative to the large one. For a wide
    // spectrum take it as the reciprocal top of the reversed pencil instead.
    if (!(e.lambda_min > kWideSpectrum * e.lambda_max)) {
        const EigenPair r = extremal_eigenvalues(whiten(b, a));
        if (r.lambda_max > 0.0) {
            e.lambda_min = 1.0 / r.lambda_max;
        }
    }
    // Rounding can push a tiny eigenvalue of a near-singular pencil to <= 0.
    const double floor = std::numeric_limits<double>::min();
    e.lambda_min = std::max(e.lambda_min, floor);
    e.lambda_max = std::max(e.lambda_max, e.lambda_min);
    return e;
}

Vector gen_eigenvalues(const SpdMatrix& a, const SpdMatrix& b) {
    return sym_eig(whiten(a, b)).values;
}

namespace {

Matrix spectral_map(const SymEig& e, double (*f)(double, double), double arg) {
    Vector mapped = e.values.unaryExpr([&](double x) { return f(x, arg); });
    return e.vectors * mapped.asDiagonal() * e.vectors.transpose();
}

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

}  // namespace

Matrix matrix_log(const SpdMatrix& a) {
    return symmetrized(spectral_map(sym_eig(a), [](double x, double) { return std::log(x); }, 0.0));
}

SpdMatrix matrix_exp(const Matrix& sym) {
    return make_spd(symmetrized(spectral_map(sym_eig(symmetrized(sym)),
                                             [](double x, double) { return std::exp(x); }, 0.0)));
}

SpdMatrix matrix_power(const SpdMatrix& a, double p) {
    return make_spd(symmetrized(
        spectral_map(sym_eig(a), [](double x, double q) { return std::exp(q * std::log(x)); }, p)));
}

bool loewner_leq(const SpdMatrix& a, const SpdMatrix& b, double tol) {
    require_same_dim(a, b);
    const Matrix diff = b.matrix() - a.matrix();
    const double lo = sym_eig(diff).values(0);
    return lo >= -tol * b.matrix().norm();
}

GeodesicWeight::GeodesicWeight(double t) : t_(t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw Error(Errc::InvalidArgument, "geodesic weight must lie in [0, 1], got " + std::to_string(t));
    }
}

double riemannian_distance(const SpdMatrix& a, const SpdMatrix& b) {
    // Fixed argument order makes the result exactly symmetric.
    const bool swap = std::lexicographical_compare(b.matrix().data(), b.matrix().data() + b.matrix().size(),
                                                   a.matrix().data(), a.matrix().data() + a.matrix().size());
    const Vector ev = swap ? gen_eigenvalues(b, a) : gen_eigenvalues(a, b);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double l = std::log(ev(i));
        acc += l * l;
    }
    return std::sqrt(acc);
}

SpdMatrix riemannian_geodesic(const SpdMatrix& a, const SpdMatrix& b, GeodesicWeight t) {
    require_same_dim(a, b);
    if (t.value() == 0.0) {
        return a;
    }
    if (t.value() == 1.0) {
        return b;
    }
    // Congruence by L^{-1} sends a to I, where the geodesic is W^t.
    const Matrix w = whiten(a, b);
    const Matrix wt = spectral_map(sym_eig(w), [](double x, double q) { return std::exp(q * std::log(x)); },
                                   t.value());
    const Matrix& l = a.cholesky_factor();
    return make_spd(symmetrized(l * wt * l.transpose()));
}

ConePoint cone_projection(const SpdMatrix& m) {
    if (m.dim() != 2) {
        throw Error(Errc::WrongDimension, "cone projection needs d = 2, got " + std::to_string(m.dim()));
    }
    const double a = m(0, 0);
    const double b = m(0, 1);
    const double c = m(1, 1);
    const double r2 = std::sqrt(2.0);
    return {r2 * b, (a - c) / r2, (a + c) / r2};
}

}  // namespace spd
