#ifndef SPD_THOMPSON_HPP
#define SPD_THOMPSON_HPP

#include "spd/random.hpp"
#include "spd/spd_matrix.hpp"

namespace spd {

/// Relative gap (lambda_max - lambda_min) / lambda_max below which a pencil is
/// treated as a multiple of the identity.
inline constexpr double kDegenerateGapRel = 1e-12;

/// Thompson distance: max(log lambda_max, -log lambda_min) of B A^{-1}.
/// Exactly symmetric in its arguments.
double thompson_distance(const SpdMatrix& a, const SpdMatrix& b);

/// Distance from the extremal eigenvalues of a pencil.
double thompson_distance(const EigenPair& pencil) noexcept;

/**
 * Point at parameter t on the Nussbaum geodesic from a to b,
 *
 *   ((M^t - m^t) b + (M m^t - m M^t) a) / (M - m),
 *
 * where (m, M) are the extremal eigenvalues of b a^{-1}; m^t a when M == m.
 * For t in [0, 1] this is the weighted geometric midrange of a and b.
 */
SpdMatrix thompson_geodesic(const SpdMatrix& a, const SpdMatrix& b, GeodesicWeight t);

/// Same curve for any real t (used for sphere retraction and antipodes).
/// d(a, result) == |t| d(a, b).
SpdMatrix thompson_geodesic_extended(const SpdMatrix& a, const SpdMatrix& b, double t);

/// Variant reusing an already computed pencil = gen_extremal_eig(a, b).
SpdMatrix thompson_geodesic_extended(const SpdMatrix& a, const SpdMatrix& b, const EigenPair& pencil,
                                     double t);

/// Coefficients (alpha, beta) with geodesic(t) = alpha * a + beta * b.
struct GeodesicCoefficients {
    double on_a = 1.0;
    double on_b = 0.0;
};
GeodesicCoefficients nussbaum_coefficients(const EigenPair& pencil, double t) noexcept;

struct SphereSample {
    SpdMatrix center;
    double radius;
    SpdMatrix point;
};

/**
 * Draws a point at Thompson distance radius from center.
 *
 * A symmetric Gaussian direction S is exponentiated, moved along the
 * geodesic from I so that d(I, point) == radius, then carried to center by
 * the congruence C^{1/2} (.) C^{1/2}. Directions whose eigenvalues are all equal
 * are redrawn (d >= 2), up to 100 times before DegenerateDirection.
 */
SphereSample sphere_sample(const SpdMatrix& center, double radius, Rng& rng);

/// Reflection of sample.point through sample.center along the geodesic.
SpdMatrix sphere_antipode(const SphereSample& sample);

/// G A G^T. Throws SingularTransform if g is not invertible.
SpdMatrix congruence(const SpdMatrix& a, const Matrix& g);

}  // namespace spd

#endif
