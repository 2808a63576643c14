#ifndef SPD_CLUSTERING_HPP
#define SPD_CLUSTERING_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "spd/dataset.hpp"
#include "spd/random.hpp"
#include "spd/spd_matrix.hpp"

/**
 * @file clustering.hpp
 *
 * K-means under the Thompson metric with inductive-midrange centroids, plus
 * k-means++ seeding, X-means binary splitting scored by BIC, and accuracy
 * scoring against ground truth labels.
 */

namespace spd {

struct ClusterModel {
    std::vector<SpdMatrix> centroids;
    std::vector<std::size_t> assignment;
    std::size_t k = 0;
    std::optional<double> bic;
    std::size_t rounds = 0;
    bool converged = false;
};

/// k distinct data points drawn uniformly as starting centroids.
struct RandomPoints {};
/// k-means++ seeding with squared Thompson distances.
struct KMeansPlusPlus {};
/// Explicit starting centroids; labels follow by nearest-centroid assignment.
struct SeedCentroids {
    std::vector<SpdMatrix> centroids;
};
/// Explicit starting labels, each < k.
struct InitialLabels {
    std::vector<std::size_t> labels;
};

using InitStrategy = std::variant<RandomPoints, KMeansPlusPlus, SeedCentroids, InitialLabels>;

struct KMeansOptions {
    std::size_t max_rounds = 100;
    std::size_t imr_iters = 500;
};

/**
 * Alternates IMR centroids and nearest-centroid reassignment until the labels
 * repeat or max_rounds is reached. The returned centroids are always the IMR
 * (from the lowest-index member) of the returned clusters. An empty cluster
 * takes the point farthest from its own centroid.
 *
 * Throws EmptyDataset, KTooLarge, InvalidArgument.
 */
ClusterModel kmeans(std::span<const SpdMatrix> data, std::size_t k, const InitStrategy& init,
                    const KMeansOptions& opts, Rng& rng);

/// Indices of k distinct seeds. The first is uniform; each next one is drawn
/// with probability proportional to the squared distance to the nearest seed.
std::vector<std::size_t> kmeans_pp_init(std::span<const SpdMatrix> data, std::size_t k, Rng& rng);

/// How the per-cluster likelihood weighs the spread term.
enum class BicLikelihood {
    /// Isotropic Gaussian in the d(d+1)/2 dimensional tangent space with the
    /// Thompson distance as radius: -D n log(sigma) - D n / 2 + n log(n/N).
    Isotropic,
    /// One-dimensional radial model: -n log(sigma) - n / 2 + n log(n/N).
    Radial,
};

struct BicResult {
    double score = 0.0;
    /// Some cluster has sigma == 0; score is +infinity.
    bool zero_variance = false;
};

/**
 * BIC = sum of per-cluster log-likelihoods - (p / 2) log N with
 * p = K (d(d+1)/2 + 1) and sigma^2 = sum of squared distances to the
 * centroid over n - 1. Higher is better. A singleton cluster counts as zero
 * variance. Throws EmptyCluster, LengthMismatch.
 */
BicResult bic_score(std::span<const SpdMatrix> data, std::span<const std::size_t> assignment,
                    std::span<const SpdMatrix> centroids, BicLikelihood model = BicLikelihood::Isotropic);

struct XMeansOptions {
    std::size_t k0 = 1;
    std::size_t max_splits_per_cluster = 3;
    double split_radius_factor = 0.5;
    BicLikelihood likelihood = BicLikelihood::Isotropic;
    KMeansOptions kmeans;
};

/**
 * X-means: k0-means, then for each cluster try a 2-means split seeded by an
 * antipodal pair on a Thompson sphere of radius factor * sigma around the
 * centroid; keep splits that raise the BIC of that cluster and rerun k-means
 * on the whole set. A rejected cluster is retried with a fresh pair until it
 * has used max_splits_per_cluster attempts. Clusters under 4 points are not
 * split. Stops when a round accepts nothing.
 */
ClusterModel xmeans(std::span<const SpdMatrix> data, const XMeansOptions& opts, Rng& rng);

struct AccuracyReport {
    std::size_t points_identified = 0;
    std::size_t clusters_identified = 0;
    std::size_t clusters_lost = 0;
};

/**
 * Greedy maximum-overlap matching of predicted to true clusters. Pairs are
 * taken by decreasing overlap; ties go to the lower true id, then to the
 * predicted cluster with the smaller first member, which keeps the report
 * invariant under relabeling of predictions.
 *
 * A true cluster is identified when its matched prediction has exactly its
 * members, and lost when more than half of it sits in a prediction matched
 * to another true cluster. Throws LengthMismatch.
 */
AccuracyReport score_accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

/// Throws MissingTruth when the data set has no labels.
AccuracyReport score_accuracy(const ClusterModel& model, const Dataset& data);

}  // namespace spd

#endif
