#include "spd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "spd/midrange.hpp"
#include "spd/parallel.hpp"
#include "spd/thompson.hpp"

namespace spd {

namespace {

void require_points(std::span<const SpdMatrix> data) {
    if (data.empty()) {
        throw Error(Errc::EmptyDataset, "no data points");
    }
    for (const auto& y : data) {
        require_same_dim(data.front(), y);
    }
}

struct Assignment {
    std::vector<std::size_t> labels;
    std::vector<double> distance;  // to the assigned centroid
};

Assignment assign_nearest(std::span<const SpdMatrix> data, const std::vector<SpdMatrix>& centroids) {
    Assignment out{std::vector<std::size_t>(data.size()), std::vector<double>(data.size())};
    parallel_for(data.size(), [&](std::size_t i) {
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double dist = thompson_distance(data[i], centroids[c]);
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        out.labels[i] = best;
        out.distance[i] = best_dist;
    });
    return out;
}

std::vector<std::vector<std::size_t>> members_of(const std::vector<std::size_t>& labels, std::size_t k) {
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[labels[i]].push_back(i);
    }
    return members;
}

// IMR of each cluster started from its lowest-index member.
std::vector<SpdMatrix> gather(std::span<const SpdMatrix> data, const std::vector<std::size_t>& idx) {
    std::vector<SpdMatrix> out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(data[i]);
    }
    return out;
}

// IMR centroids keyed by member indices. The IMR of a fixed member list is
// deterministic, so unchanged clusters need not be recomputed.
using CentroidMemo = std::map<std::vector<std::size_t>, SpdMatrix>;

std::vector<std::optional<SpdMatrix>> cluster_centroids(std::span<const SpdMatrix> data,
                                                        const std::vector<std::size_t>& labels, std::size_t k,
                                                        std::size_t imr_iters, CentroidMemo& memo) {
    const auto members = members_of(labels, k);
    std::vector<std::optional<SpdMatrix>> centroids(k);
    std::vector<std::size_t> missing;
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) {
            continue;
        }
        if (const auto it = memo.find(members[c]); it != memo.end()) {
            centroids[c] = it->second;
        } else {
            missing.push_back(c);
        }
    }
    parallel_for(missing.size(), [&](std::size_t m) {
        const std::size_t c = missing[m];
        ImrConfig cfg;
        cfg.num_iters = imr_iters;
        cfg.init = std::size_t{0};
        centroids[c] = inductive_midrange(gather(data, members[c]), cfg).midrange;
    });
    for (auto c : missing) {
        memo.emplace(members[c], *centroids[c]);
    }
    return centroids;
}

// Moves the point farthest from its own centroid into each empty cluster.
// Returns true if anything moved.
bool reseed_empty(std::span<const SpdMatrix> data, std::vector<std::size_t>& labels, std::size_t k,
                  std::size_t imr_iters, CentroidMemo& memo) {
    auto members = members_of(labels, k);
    if (std::none_of(members.begin(), members.end(), [](const auto& m) { return m.empty(); })) {
        return false;
    }
    const auto centroids = cluster_centroids(data, labels, k, imr_iters, memo);
    std::vector<double> dist(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        dist[i] = thompson_distance(data[i], *centroids[labels[i]]);
    }
    std::vector<std::size_t> sizes(k);
    for (std::size_t c = 0; c < k; ++c) {
        sizes[c] = members[c].size();
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t pick = data.size();
        double far = -1.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (sizes[labels[i]] > 1 && dist[i] > far) {
                far = dist[i];
                pick = i;
            }
        }
        if (pick == data.size()) {
            break;  // every cluster is a singleton already; k <= N makes this unreachable
        }
        --sizes[labels[pick]];
        labels[pick] = c;
        sizes[c] = 1;
        dist[pick] = 0.0;
    }
    return true;
}

std::vector<std::size_t> random_distinct(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

std::vector<std::size_t> kmeans_pp_init(std::span<const SpdMatrix> data, std::size_t k, Rng& rng) {
    require_points(data);
    const std::size_t n = data.size();
    if (k == 0) {
        throw Error(Errc::InvalidArgument, "k must be at least 1");
    }
    if (k > n) {
        throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
    }

    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    std::vector<char> taken(n, 0);
    std::vector<double> weight(n, std::numeric_limits<double>::infinity());

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t next = first(rng);
    for (;;) {
        chosen.push_back(next);
        taken[next] = 1;
        weight[next] = 0.0;
        if (chosen.size() == k) {
            break;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                const double dist = thompson_distance(data[i], data[next]);
                weight[i] = std::min(weight[i], dist * dist);
                total += weight[i];
            }
        }
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(rng);
            double acc = 0.0;
            std::size_t last_positive = n;
            next = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || weight[i] <= 0.0) {
                    continue;
                }
                last_positive = i;
                acc += weight[i];
                if (acc > target) {
                    next = i;
                    break;
                }
            }
            if (next == n) {
                next = last_positive;
            }
        } else {
            // Only duplicates of chosen seeds remain.
            next = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), 0) - taken.begin());
        }
    }
    return chosen;
}

namespace {

ClusterModel kmeans_memo(std::span<const SpdMatrix> data, std::size_t k, const InitStrategy& init,
                         const KMeansOptions& opts, Rng& rng, CentroidMemo& memo) {
    require_points(data);
    const std::size_t n = data.size();
    if (k == 0) {
        throw Error(Errc::InvalidArgument, "k must be at least 1");
    }
    if (k > n) {
        throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
    }
    if (opts.max_rounds == 0 || opts.imr_iters == 0) {
        throw Error(Errc::InvalidArgument, "max_rounds and imr_iters must be positive");
    }

    std::vector<std::size_t> labels = std::visit(
        [&](const auto& strategy) -> std::vector<std::size_t> {
            using T = std::decay_t<decltype(strategy)>;
            if constexpr (std::is_same_v<T, RandomPoints>) {
                return assign_nearest(data, gather(data, random_distinct(n, k, rng))).labels;
            } else if constexpr (std::is_same_v<T, KMeansPlusPlus>) {
                return assign_nearest(data, gather(data, kmeans_pp_init(data, k, rng))).labels;
            } else if constexpr (std::is_same_v<T, SeedCentroids>) {
                if (strategy.centroids.size() != k) {
                    throw Error(Errc::InvalidArgument, "expected " + std::to_string(k) + " seed centroids");
                }
                for (const auto& c : strategy.centroids) {
                    require_same_dim(data.front(), c);
                }
                return assign_nearest(data, strategy.centroids).labels;
            } else {
                if (strategy.labels.size() != n) {
                    throw Error(Errc::LengthMismatch, "initial labels do not match the data");
                }
                for (auto l : strategy.labels) {
                    if (l >= k) {
                        throw Error(Errc::InvalidArgument, "initial label out of range");
                    }
                }
                return strategy.labels;
            }
        },
        init);

    ClusterModel model;
    model.k = k;
    std::vector<SpdMatrix> centroids;
    for (std::size_t round = 1; round <= opts.max_rounds; ++round) {
        reseed_empty(data, labels, k, opts.imr_iters, memo);
        auto cs = cluster_centroids(data, labels, k, opts.imr_iters, memo);
        centroids.clear();
        for (auto& c : cs) {
            centroids.push_back(std::move(*c));
        }
        model.rounds = round;
        auto next = assign_nearest(data, centroids).labels;
        if (next == labels) {
            model.converged = true;
            break;
        }
        labels = std::move(next);
    }
    if (!model.converged) {
        reseed_empty(data, labels, k, opts.imr_iters, memo);
        auto cs = cluster_centroids(data, labels, k, opts.imr_iters, memo);
        centroids.clear();
        for (auto& c : cs) {
            centroids.push_back(std::move(*c));
        }
    }
    model.centroids = std::move(centroids);
    model.assignment = std::move(labels);
    return model;
}

}  // namespace

ClusterModel kmeans(std::span<const SpdMatrix> data, std::size_t k, const InitStrategy& init,
                    const KMeansOptions& opts, Rng& rng) {
    CentroidMemo memo;
    return kmeans_memo(data, k, init, opts, rng, memo);
}

BicResult bic_score(std::span<const SpdMatrix> data, std::span<const std::size_t> assignment,
                    std::span<const SpdMatrix> centroids, BicLikelihood likelihood) {
    require_points(data);
    if (assignment.size() != data.size()) {
        throw Error(Errc::LengthMismatch, "assignment does not match the data");
    }
    const std::size_t k = centroids.size();
    if (k == 0) {
        throw Error(Errc::EmptyCluster, "no clusters");
    }
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> sq(k, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto c = assignment[i];
        if (c >= k) {
            throw Error(Errc::InvalidArgument, "assignment id out of range");
        }
        const double dist = thompson_distance(data[i], centroids[c]);
        ++counts[c];
        sq[c] += dist * dist;
    }

    const int d = data.front().dim();
    const double tangent_dim = 0.5 * d * (d + 1);
    const double weight = likelihood == BicLikelihood::Isotropic ? tangent_dim : 1.0;
    const auto total = static_cast<double>(data.size());

    BicResult out;
    double loglik = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw Error(Errc::EmptyCluster, "cluster " + std::to_string(c) + " has no members");
        }
        const auto nl = static_cast<double>(counts[c]);
        // One member fits its own centroid; rounding in the centroid must
        // not turn that into a huge finite likelihood.
        if (counts[c] == 1) {
            out.zero_variance = true;
            continue;
        }
        // The centroid is fitted to the same members, hence n - 1.
        const double var = sq[c] / (nl - 1.0);
        if (var <= 0.0) {
            out.zero_variance = true;
            continue;
        }
        loglik += -weight * nl * 0.5 * std::log(var) - weight * nl / 2.0 + nl * std::log(nl / total);
    }
    const double params = static_cast<double>(k) * (tangent_dim + 1.0);
    out.score = out.zero_variance ? std::numeric_limits<double>::infinity()
                                  : loglik - 0.5 * params * std::log(total);
    return out;
}

ClusterModel xmeans(std::span<const SpdMatrix> data, const XMeansOptions& opts, Rng& rng) {
    require_points(data);
    if (opts.k0 == 0 || !(opts.split_radius_factor > 0.0)) {
        throw Error(Errc::InvalidArgument, "k0 and split_radius_factor must be positive");
    }
    CentroidMemo memo;
    ClusterModel model = kmeans_memo(data, opts.k0, RandomPoints{}, opts.kmeans, rng, memo);
    std::vector<std::size_t> attempts(model.k, 0);

    for (std::size_t pass = 0; pass < data.size(); ++pass) {
        const auto members = members_of(model.assignment, model.k);
        std::vector<SpdMatrix> next_centroids;
        std::vector<std::size_t> next_attempts;
        bool accepted = false;

        for (std::size_t c = 0; c < model.k; ++c) {
            const SpdMatrix& centroid = model.centroids[c];
            auto keep = [&](std::size_t tries) {
                next_centroids.push_back(centroid);
                next_attempts.push_back(tries);
            };
            if (members[c].size() < 4 || attempts[c] >= opts.max_splits_per_cluster) {
                keep(attempts[c]);
                continue;
            }
            const auto pts = gather(data, members[c]);
            const std::vector<std::size_t> one(pts.size(), 0);
            const BicResult unsplit = bic_score(pts, one, std::span<const SpdMatrix>(&centroid, 1), opts.likelihood);
            if (unsplit.zero_variance) {
                keep(opts.max_splits_per_cluster);
                continue;
            }

            double sq = 0.0;
            for (const auto& p : pts) {
                const double dist = thompson_distance(p, centroid);
                sq += dist * dist;
            }
            const double sigma = std::sqrt(sq / static_cast<double>(pts.size()));

            // Fresh antipodal pair on each attempt until one split wins.
            std::size_t tries = attempts[c];
            bool split_here = false;
            while (tries < opts.max_splits_per_cluster && !split_here) {
                const SphereSample s = sphere_sample(centroid, opts.split_radius_factor * sigma, rng);
                SeedCentroids seeds{{s.point, sphere_antipode(s)}};
                const ClusterModel split = kmeans(pts, 2, seeds, opts.kmeans, rng);
                const BicResult split_bic = bic_score(pts, split.assignment, split.centroids, opts.likelihood);

                // A zero-variance child is a degenerate perfect fit (a singleton),
                // not evidence for two clusters.
                if (!split_bic.zero_variance && split_bic.score > unsplit.score) {
                    split_here = true;
                    for (const auto& sc : split.centroids) {
                        next_centroids.push_back(sc);
                        next_attempts.push_back(0);
                    }
                } else {
                    ++tries;
                }
            }
            if (split_here) {
                accepted = true;
            } else {
                keep(tries);
            }
        }

        if (!accepted) {
            break;
        }
        const std::size_t k = next_centroids.size();
        model = kmeans_memo(data, k, SeedCentroids{std::move(next_centroids)}, opts.kmeans, rng, memo);
        attempts = std::move(next_attempts);
    }
    model.bic = bic_score(data, model.assignment, model.centroids, opts.likelihood).score;
    return model;
}

AccuracyReport score_accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
    if (predicted.size() != truth.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(predicted.size()) + " predictions for " +
                                              std::to_string(truth.size()) + " labels");
    }
    AccuracyReport report;
    if (truth.empty()) {
        return report;
    }

    // Dense ids; predicted clusters are keyed by their first member so the
    // outcome does not depend on how predictions are numbered.
    std::map<std::size_t, std::size_t> true_ids;
    std::map<std::size_t, std::size_t> pred_first;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        true_ids.emplace(truth[i], 0);
        pred_first.emplace(predicted[i], i);
    }
    std::size_t next = 0;
    for (auto& [id, dense] : true_ids) {
        dense = next++;
    }
    std::vector<std::size_t> firsts;
    for (const auto& [id, first] : pred_first) {
        firsts.push_back(first);
    }
    std::sort(firsts.begin(), firsts.end());
    std::map<std::size_t, std::size_t> pred_ids;
    for (std::size_t p = 0; p < firsts.size(); ++p) {
        pred_ids[predicted[firsts[p]]] = p;
    }

    const std::size_t kt = true_ids.size();
    const std::size_t kp = pred_ids.size();
    std::vector<std::vector<std::size_t>> overlap(kt, std::vector<std::size_t>(kp, 0));
    std::vector<std::size_t> true_size(kt, 0);
    std::vector<std::size_t> pred_size(kp, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = true_ids[truth[i]];
        const auto p = pred_ids[predicted[i]];
        ++overlap[t][p];
        ++true_size[t];
        ++pred_size[p];
    }

    struct Pair {
        std::size_t count, t, p;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < kt; ++t) {
        for (std::size_t p = 0; p < kp; ++p) {
            if (overlap[t][p] > 0) {
                pairs.push_back({overlap[t][p], t, p});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        if (a.t != b.t) {
            return a.t < b.t;
        }
        return a.p < b.p;
    });

    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> match_of_true(kt, none);
    std::vector<std::size_t> match_of_pred(kp, none);
    for (const auto& pr : pairs) {
        if (match_of_true[pr.t] == none && match_of_pred[pr.p] == none) {
            match_of_true[pr.t] = pr.p;
            match_of_pred[pr.p] = pr.t;
            report.points_identified += pr.count;
        }
    }

    for (std::size_t t = 0; t < kt; ++t) {
        const auto p = match_of_true[t];
        if (p != none && overlap[t][p] == true_size[t] && pred_size[p] == true_size[t]) {
            ++report.clusters_identified;
        }
        for (std::size_t q = 0; q < kp; ++q) {
            if (2 * overlap[t][q] > true_size[t]) {
                if (match_of_pred[q] != none && match_of_pred[q] != t) {
                    ++report.clusters_lost;
                }
                break;
            }
        }
    }
    return report;
}

AccuracyReport score_accuracy(const ClusterModel& model, const Dataset& data) {
    if (!data.labels) {
        throw Error(Errc::MissingTruth, "data set has no ground-truth labels");
    }
    return score_accuracy(model.assignment, *data.labels);
}

}  // namespace spd
