#include "spd/thompson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spd {

namespace {

// Lexicographic order on entries; used to evaluate (a, b) and (b, a) identically.
bool precedes(const SpdMatrix& a, const SpdMatrix& b) {
    const double* pa = a.matrix().data();
    const double* pb = b.matrix().data();
    const auto n = a.matrix().size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (pa[i] != pb[i]) {
            return pa[i] < pb[i];
        }
    }
    return false;
}

// expm1(x) / expm1(y) for y > 0, without overflow when y is large.
double expm1_ratio(double x, double y) {
    if (y < 30.0) {
        return std::expm1(x) / std::expm1(y);
    }
    return std::exp(x - y) * (-std::expm1(-x)) / (-std::expm1(-y));
}

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

}  // namespace

double thompson_distance(const EigenPair& pencil) noexcept {
    return std::max({std::log(pencil.lambda_max), -std::log(pencil.lambda_min), 0.0});
}

double thompson_distance(const SpdMatrix& a, const SpdMatrix& b) {
    require_same_dim(a, b);
    if (a.matrix() == b.matrix()) {
        return 0.0;
    }
    return precedes(a, b) ? thompson_distance(gen_extremal_eig(a, b))
                          : thompson_distance(gen_extremal_eig(b, a));
}

GeodesicCoefficients nussbaum_coefficients(const EigenPair& pencil, double t) noexcept {
    const double m = pencil.lambda_min;
    const double big = pencil.lambda_max;
    const double log_m = std::log(m);
    if (big - m <= kDegenerateGapRel * big) {
        return {std::exp(t * log_m), 0.0};
    }
    // Powers are taken in log space; the divided differences
    // (M^t - m^t)/(M - m) and (M m^t - m M^t)/(M - m) are rewritten with
    // expm1 so they stay accurate for nearly degenerate pencils.
    const double log_big = std::log(big);
    const double gap = log_big - log_m;
    const double on_b = std::exp((t - 1.0) * log_m) * expm1_ratio(t * gap, gap);
    const double on_a = std::exp(t * log_big) * expm1_ratio((1.0 - t) * gap, gap);
    return {on_a, on_b};
}

SpdMatrix thompson_geodesic_extended(const SpdMatrix& a, const SpdMatrix& b, const EigenPair& pencil,
                                     double t) {
    require_same_dim(a, b);
    if (t == 0.0) {
        return a;
    }
    if (t == 1.0) {
        return b;
    }
    const auto c = nussbaum_coefficients(pencil, t);
    if (c.on_b == 0.0) {
        return make_spd(c.on_a * a.matrix());
    }
    return make_spd(symmetrized(c.on_a * a.matrix() + c.on_b * b.matrix()));
}

SpdMatrix thompson_geodesic_extended(const SpdMatrix& a, const SpdMatrix& b, double t) {
    require_same_dim(a, b);
    return thompson_geodesic_extended(a, b, gen_extremal_eig(a, b), t);
}

SpdMatrix thompson_geodesic(const SpdMatrix& a, const SpdMatrix& b, GeodesicWeight t) {
    return thompson_geodesic_extended(a, b, t.value());
}

SphereSample sphere_sample(const SpdMatrix& center, double radius, Rng& rng) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(Errc::InvalidArgument, "sphere radius must be positive, got " + std::to_string(radius));
    }
    const int d = center.dim();
    std::normal_distribution<double> normal(0.0, 1.0);

    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix s(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                s(i, j) = normal(rng);
                s(j, i) = s(i, j);
            }
        }
        const SymEig e = sym_eig(s);
        const double lo = e.values(0);
        const double hi = e.values(d - 1);
        const double spread_scale = std::max(std::abs(lo), std::abs(hi));
        if (d >= 2 && hi - lo <= 1e-12 * spread_scale) {
            continue;
        }
        const double r0 = std::max(hi, -lo);
        if (!(r0 > 0.0)) {
            continue;
        }

        // exp(S) built from the decomposition we already have.
        const Vector expd = e.values.array().exp();
        const SpdMatrix direction = make_spd(symmetrized(e.vectors * expd.asDiagonal() * e.vectors.transpose()));
        const SpdMatrix eye = identity_spd(d);
        const EigenPair pencil{std::exp(lo), std::exp(hi)};
        const SpdMatrix at_identity = thompson_geodesic_extended(eye, direction, pencil, radius / r0);

        const Matrix root = matrix_power(center, 0.5).matrix();
        SpdMatrix point = make_spd(symmetrized(root * at_identity.matrix() * root));
        return {center, radius, std::move(point)};
    }
    throw Error(Errc::DegenerateDirection, "100 consecutive degenerate sphere directions");
}

SpdMatrix sphere_antipode(const SphereSample& sample) {
    return thompson_geodesic_extended(sample.center, sample.point, -1.0);
}

SpdMatrix congruence(const SpdMatrix& a, const Matrix& g) {
    if (g.rows() != a.dim() || g.cols() != a.dim()) {
        throw Error(Errc::DimensionMismatch, "transform must be " + std::to_string(a.dim()) + "x" +
                                                 std::to_string(a.dim()));
    }
    if (!g.allFinite()) {
        throw Error(Errc::SingularTransform, "non-finite transform");
    }
    Eigen::FullPivLU<Matrix> lu(g);
    if (!lu.isInvertible()) {
        throw Error(Errc::SingularTransform, "transform is not invertible");
    }
    return make_spd(symmetrized(g * a.matrix() * g.transpose()));
}

}  // namespace spd
