#include "spd/midrange.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "spd/dataset.hpp"
#include "spd/format.hpp"
#include "spd/parallel.hpp"
#include "spd/thompson.hpp"

namespace spd {

namespace {

void require_data(std::span<const SpdMatrix> data) {
    if (data.empty()) {
        throw Error(Errc::EmptyDataset, "no data points");
    }
    for (const auto& y : data) {
        require_same_dim(data.front(), y);
    }
}

constexpr double kEarlyStopStep = 1e-12;
constexpr double kBoundSlack = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr std::size_t kEarlyStopRun = 100;

// Every IMR iterate is a nonnegative combination sum_i c_i B_i of the data
// and the starting point. Entry (j, i) holds L_j^{-1} B_i L_j^{-T} for the
// data point Y_j = L_j L_j^T, so the pencil of (X, Y_j) whitens as a weighted
// sum of stored matrices instead of two fresh triangular solves.
class WhitenedBasis {
public:
    static constexpr std::size_t kMaxEntries = std::size_t{1} << 23;

    static bool worthwhile(std::size_t n, std::size_t basis, int dim, std::size_t num_iters) {
        const auto d = static_cast<std::size_t>(dim);
        return dim >= 3 && num_iters >= basis && n * basis * d * d <= kMaxEntries;
    }

    WhitenedBasis(std::span<const SpdMatrix> data, const std::vector<const SpdMatrix*>& basis)
        : basis_size_(basis.size()) {
        entries_.resize(data.size() * basis_size_);
        parallel_for(data.size(), [&](std::size_t j) {
            for (std::size_t i = 0; i < basis_size_; ++i) {
                entries_[j * basis_size_ + i] = whiten(data[j], *basis[i]);
            }
        });
    }

    // Extremal eigenvalues of X^{-1} Y_j for X = sum_i coef[i] B_i.
    EigenPair pencil(std::size_t j, const std::vector<double>& coef, Matrix& work) const {
        work.setZero(entries_[0].rows(), entries_[0].cols());
        for (std::size_t i = 0; i < basis_size_; ++i) {
            if (coef[i] != 0.0) {
                work.noalias() += coef[i] * entries_[j * basis_size_ + i];
            }
        }
        const EigenPair e = extremal_eigenvalues(work);
        const double floor = std::numeric_limits<double>::min();
        const double lo = std::max(e.lambda_min, floor);
        const double hi = std::max(e.lambda_max, lo);
        return {1.0 / hi, 1.0 / lo};
    }

private:
    std::size_t basis_size_;
    std::vector<Matrix> entries_;
};

}  // namespace

void require_uniform(const std::vector<SpdMatrix>& points) {
    require_data(points);
}

void Dataset::validate() const {
    require_data(points);
    if (labels && labels->size() != points.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(labels->size()) + " labels for " +
                                              std::to_string(points.size()) + " points");
    }
}

ImrResult inductive_midrange(std::span<const SpdMatrix> data, const ImrConfig& cfg) {
    require_data(data);
    if (cfg.num_iters == 0) {
        throw Error(Errc::InvalidArgument, "num_iters must be at least 1");
    }

    SpdMatrix x = [&]() -> SpdMatrix {
        if (const auto* idx = std::get_if<std::size_t>(&cfg.init)) {
            if (*idx >= data.size()) {
                throw Error(Errc::InvalidArgument, "init index " + std::to_string(*idx) + " out of range");
            }
            return data[*idx];
        }
        const auto& m = std::get<SpdMatrix>(cfg.init);
        require_same_dim(data.front(), m);
        return m;
    }();

    std::optional<ImrTrace> trace;
    if (cfg.record_trace) {
        trace.emplace();
        trace->iterates.reserve(cfg.num_iters + 1);
        trace->targets.reserve(cfg.num_iters);
        trace->step_distances.reserve(cfg.num_iters);
        trace->iterates.push_back(x);
    }
    if (cfg.observer) {
        cfg.observer(1, x);
    }

    std::vector<const SpdMatrix*> basis;
    for (const auto& y : data) {
        basis.push_back(&y);
    }
    std::vector<double> coef(data.size(), 0.0);
    if (const auto* idx = std::get_if<std::size_t>(&cfg.init)) {
        coef[*idx] = 1.0;
    } else {
        basis.push_back(&std::get<SpdMatrix>(cfg.init));
        coef.push_back(1.0);
    }
    std::optional<WhitenedBasis> whitened;
    if (WhitenedBasis::worthwhile(data.size(), basis.size(), x.dim(), cfg.num_iters)) {
        whitened.emplace(data, basis);
    }
    Matrix work;

    // Upper bounds on the distance from the iterate to each point. A step of
    // length s moves every distance by at most s, so points whose bound is
    // clearly below the best exact distance cannot be the farthest.
    std::vector<double> bound(data.size(), std::numeric_limits<double>::infinity());
    auto exact = [&](std::size_t i) {
        const EigenPair p = whitened ? whitened->pencil(i, coef, work) : gen_extremal_eig(x, data[i]);
        bound[i] = thompson_distance(p);
        return p;
    };

    std::vector<std::pair<std::size_t, EigenPair>> candidates;
    std::size_t tiny_steps = 0;
    std::size_t k = 1;
    for (; k <= cfg.num_iters; ++k) {
        const auto first = static_cast<std::size_t>(std::max_element(bound.begin(), bound.end()) - bound.begin());
        candidates.clear();
        candidates.push_back({first, exact(first)});
        double farthest = bound[first];
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (i == first || bound[i] < farthest - kBoundSlack * (1.0 + farthest)) {
                continue;
            }
            candidates.push_back({i, exact(i)});
            farthest = std::max(farthest, bound[i]);
        }
        // Distances within kTieTol of the largest are tied; the lowest index wins.
        std::size_t target = data.size();
        EigenPair pencil;
        for (const auto& [i, p] : candidates) {
            if (bound[i] >= farthest * (1.0 - kTieTol) && i < target) {
                target = i;
                pencil = p;
            }
        }
        farthest = bound[target];

        const double w = 1.0 / static_cast<double>(k + 1);
        x = thompson_geodesic_extended(x, data[target], pencil, w);
        const GeodesicCoefficients step_coef = nussbaum_coefficients(pencil, w);
        for (double& c : coef) {
            c *= step_coef.on_a;
        }
        coef[target] += step_coef.on_b;
        // The geodesic is parameterized proportionally to distance.
        const double step = w * farthest;
        for (double& b : bound) {
            b += step;
        }

        if (trace) {
            trace->iterates.push_back(x);
            trace->targets.push_back(target);
            trace->step_distances.push_back(step);
        }
        if (cfg.on_step) {
            cfg.on_step(k, target, step);
        }
        if (cfg.observer) {
            cfg.observer(k + 1, x);
        }

        if (cfg.early_stop) {
            tiny_steps = step < kEarlyStopStep ? tiny_steps + 1 : 0;
            if (tiny_steps >= kEarlyStopRun) {
                ++k;
                break;
            }
        }
    }
    return {std::move(x), k - 1, std::move(trace)};
}

std::vector<double> scalar_inductive_trace(std::span<const double> values, double init, std::size_t num_iters) {
    if (values.empty()) {
        throw Error(Errc::EmptyInput, "no values");
    }
    std::vector<double> xs;
    xs.reserve(num_iters + 1);
    double x = init;
    xs.push_back(x);
    for (std::size_t k = 1; k <= num_iters; ++k) {
        double target = values[0];
        double farthest = std::abs(x - values[0]);
        for (std::size_t i = 1; i < values.size(); ++i) {
            const double dist = std::abs(x - values[i]);
            if (dist > farthest) {
                farthest = dist;
                target = values[i];
            }
        }
        const double w = 1.0 / static_cast<double>(k + 1);
        x += w * (target - x);
        xs.push_back(x);
    }
    return xs;
}

double scalar_inductive_midrange(std::span<const double> values, double init, std::size_t num_iters) {
    return scalar_inductive_trace(values, init, num_iters).back();
}

double imr_cost(const SpdMatrix& x, std::span<const SpdMatrix> data) {
    require_data(data);
    double cost = 0.0;
    for (const auto& y : data) {
        cost = std::max(cost, thompson_distance(x, y));
    }
    return cost;
}

namespace {

// Dedicated 2 x 2 evaluator for the minimax search: roots of
// det(X - l Y) = l^2 det(Y) - l (x11 y22 + x22 y11 - 2 x12 y12) + det(X).
struct Sym2 {
    double a, b, c;
};

struct LogRange {
    double lo, hi;  // log of the extremal eigenvalues of Y^{-1} X
};

LogRange log_pencil_2x2(const Sym2& x, const Sym2& y) {
    const double det_y = y.a * y.c - y.b * y.b;
    const double det_x = x.a * x.c - x.b * x.b;
    const double mid = x.a * y.c + x.c * y.a - 2.0 * x.b * y.b;
    const double disc = std::max(mid * mid - 4.0 * det_y * det_x, 0.0);
    const double hi = (mid + std::sqrt(disc)) / (2.0 * det_y);
    const double lo = det_x / (det_y * hi);
    return {std::log(lo), std::log(hi)};
}

// Minimax cost of the best multiple s X. With up = max_i log hi_i and
// down = max_i -log lo_i the cost of s X is max(log s + up, down - log s),
// minimized at log s = (down - up) / 2 with value (up + down) / 2.
struct ScaledCost {
    double cost;
    double log_scale;
};

ScaledCost scaled_cost(const Sym2& x, const std::vector<Sym2>& ys) {
    if (!(x.a > 0.0) || !(x.c > 0.0) || !(x.a * x.c - x.b * x.b > 0.0)) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    double up = -std::numeric_limits<double>::infinity();
    double down = -std::numeric_limits<double>::infinity();
    for (const auto& y : ys) {
        const LogRange r = log_pencil_2x2(x, y);
        up = std::max(up, r.hi);
        down = std::max(down, -r.lo);
    }
    return {0.5 * (up + down), 0.5 * (down - up)};
}

constexpr int kGridPoints = 50;
constexpr double kMinStep = 1e-5;

}  // namespace

MinimaxResult optimization_midrange_2d(std::span<const SpdMatrix> data) {
    if (data.empty()) {
        throw Error(Errc::EmptyDataset, "no data points");
    }
    std::vector<Sym2> ys;
    ys.reserve(data.size());
    for (const auto& y : data) {
        if (y.dim() != 2) {
            throw Error(Errc::WrongDimension, "2 x 2 data required, got d = " + std::to_string(y.dim()));
        }
        ys.push_back({y(0, 0), y(0, 1), y(1, 1)});
    }
    if (data.size() == 1) {
        return {data[0], 0.0};
    }

    double a_lo = ys[0].a, a_hi = ys[0].a, c_lo = ys[0].c, c_hi = ys[0].c;
    for (const auto& y : ys) {
        a_lo = std::min(a_lo, y.a);
        a_hi = std::max(a_hi, y.a);
        c_lo = std::min(c_lo, y.c);
        c_hi = std::max(c_hi, y.c);
    }

    // Coarse grid over a, c and the correlation s = b / sqrt(ac) in (-1, 1).
    struct Candidate {
        double cost;
        Sym2 x;
    };
    std::vector<Candidate> grid;
    grid.reserve(kGridPoints * kGridPoints * kGridPoints);
    auto axis = [](double lo, double hi, int i) {
        return lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
    };
    for (int i = 0; i < kGridPoints; ++i) {
        const double a = axis(a_lo, a_hi, i);
        for (int j = 0; j < kGridPoints; ++j) {
            const double c = axis(c_lo, c_hi, j);
            const double root = std::sqrt(a * c);
            for (int l = 0; l < kGridPoints; ++l) {
                const double s = -1.0 + 2.0 * (static_cast<double>(l) + 0.5) / kGridPoints;
                const Sym2 x{a, s * root, c};
                grid.push_back({scaled_cost(x, ys).cost, x});
            }
        }
    }
    const std::size_t starts = std::min<std::size_t>(5, grid.size());
    std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(starts), grid.end(),
                      [](const Candidate& l, const Candidate& r) { return l.cost < r.cost; });

    // Refinement: pattern search on the scale-free cost (the scale direction
    // is solved exactly above). Each poll uses the 26 neighbour directions of
    // a cube under a fresh random rotation; a step size is only halved after
    // several rotations fail, so the search does not stall on a kink that the
    // axis directions straddle.
    const double scale = std::max(a_hi, c_hi);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_rotation = [&]() {
        Eigen::Matrix3d g;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                g(i, j) = normal(rng);
            }
        }
        return Eigen::Matrix3d(Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ());
    };
    std::vector<Eigen::Vector3d> cube;
    for (int u = -1; u <= 1; ++u) {
        for (int v = -1; v <= 1; ++v) {
            for (int w = -1; w <= 1; ++w) {
                if (u != 0 || v != 0 || w != 0) {
                    cube.push_back(Eigen::Vector3d(u, v, w).normalized());
                }
            }
        }
    }
    constexpr int kFailedPollsBeforeShrink = 4;

    Candidate best = grid.front();
    for (std::size_t s = 0; s < starts; ++s) {
        Candidate cur = grid[s];
        double h = 0.05 * scale;
        int failures = 0;
        while (h >= kMinStep) {
            const Eigen::Matrix3d rot = random_rotation();
            Candidate next = cur;
            for (const auto& dir : cube) {
                const Eigen::Vector3d step = h * (rot * dir);
                const Sym2 x{cur.x.a + step(0), cur.x.b + step(1), cur.x.c + step(2)};
                const double cost = scaled_cost(x, ys).cost;
                if (cost < next.cost) {
                    next = {cost, x};
                }
            }
            if (next.cost < cur.cost) {
                cur = next;
                failures = 0;
                h *= 1.5;
            } else if (++failures >= kFailedPollsBeforeShrink) {
                h *= 0.5;
                failures = 0;
            }
        }
        if (cur.cost < best.cost) {
            best = cur;
        }
    }

    const double factor = std::exp(scaled_cost(best.x, ys).log_scale);
    Matrix m(2, 2);
    m << best.x.a, best.x.b, best.x.b, best.x.c;
    SpdMatrix x = make_spd(factor * m);
    const double cost = imr_cost(x, data);
    return {std::move(x), cost};
}

ActiveDataReport detect_active_data(std::span<const SpdMatrix> data, std::size_t num_iters,
                                    double burn_in_fraction) {
    require_data(data);
    if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0)) {
        throw Error(Errc::InvalidArgument, "burn-in fraction must lie in (0, 1)");
    }
    const auto cutoff = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(num_iters)));
    const std::size_t n = data.size();

    // Per-run membership flags, merged in index order afterwards.
    std::vector<std::vector<char>> external(n, std::vector<char>(n, 0));
    std::vector<std::vector<char>> active(n, std::vector<char>(n, 0));
    parallel_for(n, [&](std::size_t run) {
        ImrConfig cfg;
        cfg.num_iters = num_iters;
        cfg.init = run;
        cfg.on_step = [&](std::size_t k, std::size_t target, double) {
            external[run][target] = 1;
            if (k > cutoff) {
                active[run][target] = 1;
            }
        };
        inductive_midrange(data, cfg);
    });

    ActiveDataReport report;
    for (std::size_t i = 0; i < n; ++i) {
        bool is_external = false;
        bool is_active = false;
        for (std::size_t run = 0; run < n; ++run) {
            is_external = is_external || external[run][i] != 0;
            is_active = is_active || active[run][i] != 0;
        }
        if (is_active) {
            report.active.push_back(i);
        }
        if (is_external) {
            report.external.push_back(i);
        } else {
            report.internal.push_back(i);
        }
    }
    return report;
}

std::string trace_to_csv(const ImrTrace& trace) {
    std::ostringstream out;
    out << "k,target_index,step_distance,d_to_final\n";
    if (trace.iterates.empty()) {
        return out.str();
    }
    const SpdMatrix& last = trace.iterates.back();
    for (std::size_t i = 0; i < trace.targets.size(); ++i) {
        out << (i + 1) << ',' << trace.targets[i] << ',' << format_double(trace.step_distances[i]) << ','
            << format_double(thompson_distance(trace.iterates[i], last)) << '\n';
    }
    return out.str();
}

}  // namespace spd
