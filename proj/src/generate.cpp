#include "spd/generate.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "spd/thompson.hpp"

namespace spd {

SpdMatrix gen_random_spd(int dim, Rng& rng) {
    if (dim < 1) {
        throw Error(Errc::InvalidArgument, "dimension must be at least 1");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            g(i, j) = normal(rng);
        }
    }
    Matrix m = g * g.transpose();
    m = 0.5 * (m + m.transpose());
    const double ridge = 1e-8 * m.trace() / dim;
    m.diagonal().array() += ridge;
    return make_spd(m);
}

void ExperimentConfig::validate() const {
    if (dim < 1 || n_points == 0 || n_clusters == 0 || num_iters == 0 || runs == 0) {
        throw Error(Errc::InvalidArgument, "experiment counts must be positive");
    }
    if (n_clusters > n_points) {
        throw Error(Errc::InvalidArgument, "more clusters than points");
    }
    if (!(cluster_radius > 0.0) || !(cluster_radius < min_center_separation / 2.0)) {
        throw Error(Errc::InvalidArgument, "cluster radius must be positive and below half the center separation");
    }
}

ClusteredDataset gen_clustered_dataset_with_centers(const ExperimentConfig& cfg, Rng& rng) {
    cfg.validate();
    constexpr std::size_t kMaxDraws = 100000;

    std::vector<SpdMatrix> centers;
    centers.reserve(cfg.n_clusters);
    double worst_rejected = 0.0;
    for (std::size_t draw = 0; centers.size() < cfg.n_clusters; ++draw) {
        if (draw == kMaxDraws) {
            throw Error(Errc::CenterSamplingExhausted,
                        "placed " + std::to_string(centers.size()) + " of " + std::to_string(cfg.n_clusters) +
                            " centers; closest rejected candidate was at " + std::to_string(worst_rejected));
        }
        SpdMatrix candidate = gen_random_spd(cfg.dim, rng);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) {
            nearest = std::min(nearest, thompson_distance(candidate, c));
        }
        if (nearest >= cfg.min_center_separation) {
            centers.push_back(std::move(candidate));
        } else {
            worst_rejected = std::max(worst_rejected, nearest);
        }
    }

    Dataset data;
    data.points.reserve(cfg.n_points);
    data.labels.emplace();
    data.labels->reserve(cfg.n_points);
    const std::size_t base = cfg.n_points / cfg.n_clusters;
    const std::size_t extra = cfg.n_points % cfg.n_clusters;
    for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
        const std::size_t count = base + (c < extra ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            data.points.push_back(sphere_sample(centers[c], cfg.cluster_radius, rng).point);
            data.labels->push_back(c);
        }
    }
    return {std::move(data), std::move(centers)};
}

Dataset gen_clustered_dataset(const ExperimentConfig& cfg, Rng& rng) {
    return gen_clustered_dataset_with_centers(cfg, rng).data;
}

}  // namespace spd
