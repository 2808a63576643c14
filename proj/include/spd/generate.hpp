#ifndef SPD_GENERATE_HPP
#define SPD_GENERATE_HPP

#include <cstddef>
#include <cstdint>

#include "spd/dataset.hpp"
#include "spd/random.hpp"

namespace spd {

/// G G^T + eps I with standard normal G and eps = 1e-8 * trace(G G^T) / d.
SpdMatrix gen_random_spd(int dim, Rng& rng);

struct ExperimentConfig {
    std::uint64_t seed = 20211;
    int dim = 2;
    std::size_t n_points = 200;
    std::size_t n_clusters = 10;
    double cluster_radius = 0.2;
    double min_center_separation = 1.0;
    std::size_t num_iters = 10000;
    std::size_t runs = 20;

    /// Throws InvalidArgument for non-positive counts or radius >= separation / 2.
    void validate() const;
};

/**
 * n_clusters centers drawn with gen_random_spd and rejected until every pair
 * is at least min_center_separation apart (10^5 draws at most), then
 * n_points / n_clusters sphere samples of radius cluster_radius per center
 * (the remainder goes to the first centers). Points are grouped by cluster
 * and labeled with the center index.
 *
 * Throws CenterSamplingExhausted with the best separation reached.
 */
Dataset gen_clustered_dataset(const ExperimentConfig& cfg, Rng& rng);

/// Same draw, also returning the centers.
struct ClusteredDataset {
    Dataset data;
    std::vector<SpdMatrix> centers;
};
ClusteredDataset gen_clustered_dataset_with_centers(const ExperimentConfig& cfg, Rng& rng);

}  // namespace spd

#endif
