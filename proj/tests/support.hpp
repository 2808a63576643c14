#ifndef SPD_TESTS_SUPPORT_HPP
#define SPD_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spd/generate.hpp"
#include "spd/random.hpp"
#include "spd/spd_matrix.hpp"

namespace testing_support {

inline spd::SpdMatrix mat2(double a, double b, double c) {
    return spd::make_spd(std::vector<std::vector<double>>{{a, b}, {b, c}});
}

// The three-matrix example data set.
inline std::vector<spd::SpdMatrix> worked_example() {
    return {mat2(0.95, -0.6, 1.1), mat2(1.0, 0.5, 2.1), mat2(2.5, -0.2, 1.2)};
}

inline spd::Matrix gaussian(int rows, int cols, spd::Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    spd::Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

inline spd::Matrix random_symmetric(int d, spd::Rng& rng) {
    const spd::Matrix g = gaussian(d, d, rng);
    return 0.5 * (g + g.transpose());
}

// Well conditioned with probability ~1; det bounded away from 0 is checked.
inline spd::Matrix random_invertible(int d, spd::Rng& rng) {
    for (;;) {
        spd::Matrix g = gaussian(d, d, rng) + 0.5 * spd::Matrix::Identity(d, d);
        Eigen::JacobiSVD<spd::Matrix> svd(g);
        const auto& s = svd.singularValues();
        if (s(s.size() - 1) > 1e-2 * s(0)) {
            return g;
        }
    }
}

// Q diag(exp(u)) Q^T with u uniform in [-spread, spread].
inline spd::SpdMatrix random_spd_conditioned(int d, double spread, spd::Rng& rng) {
    std::uniform_real_distribution<double> u(-spread, spread);
    const Eigen::HouseholderQR<spd::Matrix> qr(gaussian(d, d, rng));
    const spd::Matrix q = qr.householderQ();
    Eigen::VectorXd ev(d);
    for (int i = 0; i < d; ++i) {
        ev(i) = std::exp(u(rng));
    }
    return spd::make_spd(q * ev.asDiagonal() * q.transpose(), 1e-6);
}

// Three points at Thompson distance 0.8 to 1.2 from I in directions about
// 120 degrees apart in the traceless plane, then `inner` points within
// `inner_radius` of I. The three are the designed extremal points.
inline std::vector<spd::SpdMatrix> triangle_with_interior(std::size_t inner, double inner_radius, spd::Rng& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
    std::uniform_real_distribution<double> reach(0.8, 1.2);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    const double start = phase(rng);
    std::vector<spd::SpdMatrix> out;
    for (int k = 0; k < 3; ++k) {
        const double phi = start + 2.0 * 3.14159265358979323846 * k / 3.0 + jitter(rng);
        spd::Matrix s(2, 2);
        s << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
        out.push_back(spd::matrix_exp(reach(rng) * s));
    }
    std::uniform_real_distribution<double> u(0.0, inner_radius);
    for (std::size_t i = 0; i < inner; ++i) {
        spd::Matrix s = random_symmetric(2, rng);
        const Eigen::SelfAdjointEigenSolver<spd::Matrix> es(s, Eigen::EigenvaluesOnly);
        const double top = es.eigenvalues().cwiseAbs().maxCoeff();
        out.push_back(spd::matrix_exp(s * (u(rng) / top)));
    }
    return out;
}

// Full generalized spectrum of B A^{-1} from Eigen's generalized solver.
inline Eigen::VectorXd reference_gen_spectrum(const spd::SpdMatrix& a, const spd::SpdMatrix& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<spd::Matrix> es(b.matrix(), a.matrix());
    return es.eigenvalues();
}

inline double reference_thompson(const spd::SpdMatrix& a, const spd::SpdMatrix& b) {
    const Eigen::VectorXd ev = reference_gen_spectrum(a, b);
    return std::max(std::log(ev.maxCoeff()), -std::log(ev.minCoeff()));
}

}  // namespace testing_support

#endif
