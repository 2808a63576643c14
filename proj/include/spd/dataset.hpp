#ifndef SPD_DATASET_HPP
#define SPD_DATASET_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "spd/spd_matrix.hpp"

namespace spd {

/// Ordered SPD points with optional ground-truth cluster ids.
struct Dataset {
    std::vector<SpdMatrix> points;
    std::optional<std::vector<std::size_t>> labels;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    int dim() const { return points.empty() ? 0 : points.front().dim(); }

    /// Throws EmptyDataset, DimensionMismatch or LengthMismatch.
    void validate() const;
};

/// Throws EmptyDataset if empty and DimensionMismatch if dims differ.
void require_uniform(const std::vector<SpdMatrix>& points);

}  // namespace spd

#endif
