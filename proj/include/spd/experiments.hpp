#ifndef SPD_EXPERIMENTS_HPP
#define SPD_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spd/clustering.hpp"
#include "spd/dataset.hpp"
#include "spd/midrange.hpp"

/**
 * @file experiments.hpp
 *
 * Repeatable numerical studies of IMR and Thompson clustering. Every run
 * draws from its own stream make_stream(seed, row, substream) where row is
 * the configuration index; data sets use substream 2 * run and the
 * algorithms under test use 2 * run + 1. Runs execute on a thread pool and
 * rows are written in (row, run) order, so output depends only on the flags.
 */

namespace spd {

struct SizeConfig {
    int dim;
    std::size_t n;
};

/// Least-squares slope of log(y) against log(x), skipping y <= 0.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Runs IMR from `init` for num_iters steps and fits the slope of
/// log d(X_k, X_final) against log k over k in [fit_lo, fit_hi].
double convergence_slope(std::span<const SpdMatrix> data, std::size_t num_iters, std::size_t fit_lo,
                         std::size_t fit_hi, const std::variant<std::size_t, SpdMatrix>& init = std::size_t{0});

/// Where each convergence run starts.
enum class ConvergenceStart {
    /// A fresh gen_random_spd draw from the run's algorithm stream.
    RandomSpd,
    /// data[0]. When data[0] is one end of the pair that fixes the midrange,
    /// X_2 is that pair's exact Nussbaum midpoint and the error then stays
    /// near d / num_iters, which flattens the fitted slope.
    FirstDataPoint,
};

struct ConvergenceOptions {
    std::vector<SizeConfig> configs{{5, 5}, {5, 20}, {50, 5}, {50, 20}};
    std::size_t runs = 10;
    std::size_t num_iters = 10000;
    std::size_t fit_lo = 10;
    std::size_t fit_hi = 1000;
    ConvergenceStart start = ConvergenceStart::RandomSpd;
    std::uint64_t seed = 20211;
};

struct ConvergenceRun {
    SizeConfig config;
    std::size_t run;
    double slope;
};

struct ConvergenceTable {
    ConvergenceOptions options;
    std::vector<ConvergenceRun> runs;
    std::vector<double> mean_slope;  // per config
};

ConvergenceTable experiment_convergence(const ConvergenceOptions& opts);
std::string to_csv(const ConvergenceTable& table);

struct InvarianceOptions {
    std::vector<SizeConfig> configs{{2, 5}, {5, 5}, {20, 5}, {100, 5}};
    std::size_t inits = 100;
    std::size_t num_iters = 10000;
    /// Also record the separation after 2 * num_iters steps.
    bool doubled = true;
    std::uint64_t seed = 20211;
};

struct InvarianceRow {
    SizeConfig config;
    std::size_t inits = 0;
    std::size_t converged = 0;
    double max_separation = 0.0;
    double avg_separation = 0.0;
    double max_separation_doubled = 0.0;
    double avg_separation_doubled = 0.0;
};

struct InvarianceTable {
    InvarianceOptions options;
    std::vector<InvarianceRow> rows;
};

/// One random data set per configuration, IMR from `inits` random SPD starts,
/// pairwise Thompson separation of the final iterates.
InvarianceTable experiment_invariance(const InvarianceOptions& opts);
std::string to_csv(const InvarianceTable& table);

enum class ClusteringMethod { KMeansPlusPlus, XMeans };

struct ClusteringExperimentOptions {
    ClusteringMethod method = ClusteringMethod::KMeansPlusPlus;
    std::vector<int> dims{2, 5, 10, 20};
    std::size_t runs = 20;
    std::size_t n_points = 200;
    std::size_t n_clusters = 10;
    double cluster_radius = 0.2;
    double min_center_separation = 1.0;
    KMeansOptions kmeans;
    XMeansOptions xmeans;
    std::uint64_t seed = 20211;
};

struct AccuracyRun {
    int dim;
    std::size_t run;
    std::size_t k_found;
    AccuracyReport report;
};

struct AccuracySummary {
    int dim;
    double points_identified;
    double clusters_identified;
    double clusters_lost;
    double k_found;
};

struct AccuracyTable {
    ClusteringExperimentOptions options;
    std::vector<AccuracyRun> runs;
    std::vector<AccuracySummary> means;  // per dim
};

/// 10 x 20 style clustered data sets per dimension, clustered by k-means++
/// seeded k-means (k = n_clusters) or by X-means, scored against the truth.
AccuracyTable experiment_clustering(const ClusteringExperimentOptions& opts);
std::string to_csv(const AccuracyTable& table);

/**
 * Cone coordinates for plotting. Columns x,y,z,kind,index,role where kind is
 * "data" or "iterate" and role is active/external/internal for data points
 * when a report is given ("-" otherwise). Throws WrongDimension unless d = 2.
 */
std::string export_cone_csv(const Dataset& data, const ImrTrace* trace = nullptr,
                            const ActiveDataReport* roles = nullptr);

}  // namespace spd

#endif
