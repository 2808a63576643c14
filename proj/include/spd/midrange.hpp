#ifndef SPD_MIDRANGE_HPP
#define SPD_MIDRANGE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spd/spd_matrix.hpp"

/**
 * @file midrange.hpp
 *
 * Inductive midrange (IMR): starting from X_1, repeatedly step a fraction
 * 1/(k+1) of the way along the Thompson geodesic toward the data point that is
 * currently farthest away. Also the scalar version of the same recursion, a
 * brute-force minimax midrange for 2 x 2 data, and active-data detection.
 */

namespace spd {

/// Farthest points within a relative 1e-12 of each other are tied.
enum class TieBreak { LowestIndex };

struct ImrConfig {
    std::size_t num_iters = 10000;

    /// Index into the data set or an explicit starting matrix.
    std::variant<std::size_t, SpdMatrix> init = std::size_t{0};

    TieBreak tie_break = TieBreak::LowestIndex;
    bool record_trace = false;

    /// Stop once 100 consecutive steps are shorter than 1e-12.
    bool early_stop = false;

    /// Called with (k, X_k) for every iterate, k = 1 .. iterations + 1.
    std::function<void(std::size_t, const SpdMatrix&)> observer;

    /// Called with (k, target index, step distance) after every step.
    std::function<void(std::size_t, std::size_t, double)> on_step;
};

struct ImrTrace {
    std::vector<SpdMatrix> iterates;       // X_1 .. X_{n+1}
    std::vector<std::size_t> targets;      // index of the farthest point at step k
    std::vector<double> step_distances;    // d(X_k, X_{k+1})
};

struct ImrResult {
    SpdMatrix midrange;
    std::size_t iterations = 0;
    std::optional<ImrTrace> trace;
};

/// Throws EmptyDataset, DimensionMismatch, InvalidArgument (bad init).
ImrResult inductive_midrange(std::span<const SpdMatrix> data, const ImrConfig& cfg = {});

/// x_{k+1} = (1 - w) x_k + w y_k with w = 1/(k+1) and y_k the farthest value.
/// Returns the value after num_iters steps. Throws EmptyInput.
double scalar_inductive_midrange(std::span<const double> values, double init, std::size_t num_iters);

/// All iterates x_1 .. x_{num_iters+1} of the scalar recursion.
std::vector<double> scalar_inductive_trace(std::span<const double> values, double init,
                                           std::size_t num_iters);

/// max_i d(X, Y_i).
double imr_cost(const SpdMatrix& x, std::span<const SpdMatrix> data);

struct MinimaxResult {
    SpdMatrix midrange;
    double cost;
};

/// Minimax (Thompson) midrange of 2 x 2 data by grid search plus pattern
/// search refinement over the entries (a, b, c).
MinimaxResult optimization_midrange_2d(std::span<const SpdMatrix> data);

struct ActiveDataReport {
    std::vector<std::size_t> active;    // targeted after burn-in in some run
    std::vector<std::size_t> external;  // targeted at least once in some run
    std::vector<std::size_t> internal;  // never targeted
};

/// Runs IMR once from every data point and classifies the points by which
/// steps targeted them. Empirical: depends on num_iters and the burn-in.
ActiveDataReport detect_active_data(std::span<const SpdMatrix> data, std::size_t num_iters,
                                    double burn_in_fraction = 0.5);

/// CSV with header k,target_index,step_distance,d_to_final.
std::string trace_to_csv(const ImrTrace& trace);

}  // namespace spd

#endif
