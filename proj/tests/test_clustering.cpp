#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "spd/clustering.hpp"
#include "spd/error.hpp"
#include "spd/generate.hpp"
#include "spd/midrange.hpp"
#include "spd/thompson.hpp"
#include "support.hpp"

using namespace spd;
using testing_support::mat2;

namespace {

Errc error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no spd::Error thrown");
    return Errc::InvalidArgument;
}

std::vector<SpdMatrix> blob(const SpdMatrix& center, std::size_t n, double radius, Rng& rng) {
    std::vector<SpdMatrix> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sphere_sample(center, radius, rng).point);
    }
    return out;
}

SpdMatrix far_center(const SpdMatrix& from, double min_dist, Rng& rng) {
    for (;;) {
        SpdMatrix c = gen_random_spd(from.dim(), rng);
        if (thompson_distance(from, c) >= min_dist) {
            return c;
        }
    }
}

// The BIC written out directly from the model, distances from Eigen.
double reference_bic(const std::vector<SpdMatrix>& data, const std::vector<std::size_t>& labels,
                     const std::vector<SpdMatrix>& centroids, double weight) {
    const double n_total = static_cast<double>(data.size());
    const int d = data.front().dim();
    double loglik = 0.0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double n = 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (labels[i] == c) {
                const double r = testing_support::reference_thompson(data[i], centroids[c]);
                ss += r * r;
                n += 1.0;
            }
        }
        const double sigma = std::sqrt(ss / (n - 1.0));
        loglik += -weight * n * std::log(sigma) - weight * n / 2.0 + n * std::log(n / n_total);
    }
    const double p = static_cast<double>(centroids.size()) * (d * (d + 1) / 2.0 + 1.0);
    return loglik - 0.5 * p * std::log(n_total);
}

std::vector<SpdMatrix> members(const std::vector<SpdMatrix>& data, const std::vector<std::size_t>& labels,
                               std::size_t c) {
    std::vector<SpdMatrix> out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (labels[i] == c) {
            out.push_back(data[i]);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("kmeans with one cluster returns the IMR of everything") {
    Rng rng = make_stream(1);
    std::vector<SpdMatrix> data;
    for (int i = 0; i < 12; ++i) {
        data.push_back(gen_random_spd(3, rng));
    }
    KMeansOptions opts;
    const ClusterModel m = kmeans(data, 1, RandomPoints{}, opts, rng);
    CHECK(m.k == 1);
    CHECK(m.converged);
    CHECK(std::all_of(m.assignment.begin(), m.assignment.end(), [](std::size_t a) { return a == 0; }));
    ImrConfig cfg;
    cfg.num_iters = opts.imr_iters;
    const SpdMatrix imr = inductive_midrange(data, cfg).midrange;
    CHECK(thompson_distance(m.centroids[0], imr) < 1e-12);
}

TEST_CASE("kmeans on two pairs of identical matrices") {
    const SpdMatrix a = mat2(1.0, 0.1, 1.0);
    const SpdMatrix b = mat2(40.0, -3.0, 9.0);
    const std::vector<SpdMatrix> data = {a, b, a, b};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_stream(seed);
        const ClusterModel m = kmeans(data, 2, RandomPoints{}, {}, rng);
        CHECK(m.assignment[0] == m.assignment[2]);
        CHECK(m.assignment[1] == m.assignment[3]);
        CHECK(m.assignment[0] != m.assignment[1]);
        CHECK(thompson_distance(m.centroids[m.assignment[0]], a) < 1e-12);
        CHECK(thompson_distance(m.centroids[m.assignment[1]], b) < 1e-12);
    }
}

TEST_CASE("kmeans seeded at the true centers recovers the clusters") {
    for (int d : {2, 5, 10}) {
        ExperimentConfig cfg;
        cfg.dim = d;
        Rng rng = make_stream(77, static_cast<std::uint64_t>(d));
        const ClusteredDataset g = gen_clustered_dataset_with_centers(cfg, rng);
        const ClusterModel m = kmeans(g.data.points, 10, SeedCentroids{g.centers}, {}, rng);
        const AccuracyReport r = score_accuracy(m, g.data);
        INFO("d = " << d);
        CHECK(r.points_identified >= 195);
    }
}

TEST_CASE("kmeans terminates with IMR centroids of the final clusters") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = make_stream(seed, 3);
        std::vector<SpdMatrix> data;
        for (int i = 0; i < 30; ++i) {
            data.push_back(gen_random_spd(3, rng));
        }
        KMeansOptions opts;
        opts.max_rounds = 50;
        const ClusterModel m = kmeans(data, 4, KMeansPlusPlus{}, opts, rng);
        CHECK(m.rounds <= opts.max_rounds);
        CHECK(m.centroids.size() == m.k);
        for (std::size_t c = 0; c < m.k; ++c) {
            const auto cluster = members(data, m.assignment, c);
            REQUIRE_FALSE(cluster.empty());
            ImrConfig cfg;
            cfg.num_iters = opts.imr_iters;
            const SpdMatrix imr = inductive_midrange(cluster, cfg).midrange;
            CHECK(testing_support::reference_thompson(m.centroids[c], imr) <= 1e-3);
        }
        if (m.converged) {
            // One more round of reassignment changes nothing.
            for (std::size_t i = 0; i < data.size(); ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < m.k; ++c) {
                    best = std::min(best, thompson_distance(data[i], m.centroids[c]));
                }
                CHECK(thompson_distance(data[i], m.centroids[m.assignment[i]]) == best);
            }
        }
    }
}

TEST_CASE("kmeans errors") {
    Rng rng = make_stream(2);
    const std::vector<SpdMatrix> data = {mat2(1, 0, 1), mat2(2, 0, 2)};
    CHECK(error_of([&] { kmeans(data, 3, RandomPoints{}, {}, rng); }) == Errc::KTooLarge);
    CHECK(error_of([&] { kmeans(std::vector<SpdMatrix>{}, 1, RandomPoints{}, {}, rng); }) == Errc::EmptyDataset);
    CHECK(error_of([&] { kmeans_pp_init(data, 3, rng); }) == Errc::KTooLarge);
}

TEST_CASE("kmeans labels are equivariant under congruence") {
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 2 + trial % 2;
        Rng rng = make_stream(31, static_cast<std::uint64_t>(trial));
        std::vector<SpdMatrix> data;
        for (int i = 0; i < 12; ++i) {
            data.push_back(testing_support::random_spd_conditioned(d, 1.5, rng));
        }
        const Matrix g = testing_support::random_invertible(d, rng);
        std::vector<SpdMatrix> moved;
        for (const auto& y : data) {
            moved.push_back(congruence(y, g));
        }
        KMeansOptions opts;
        opts.imr_iters = 100;
        Rng r1 = make_stream(5, static_cast<std::uint64_t>(trial));
        Rng r2 = make_stream(5, static_cast<std::uint64_t>(trial));
        const InitStrategy init = trial % 4 < 2 ? InitStrategy{KMeansPlusPlus{}} : InitStrategy{RandomPoints{}};
        const ClusterModel a = kmeans(data, 3, init, opts, r1);
        const ClusterModel b = kmeans(moved, 3, init, opts, r2);
        INFO("trial " << trial);
        CHECK(a.assignment == b.assignment);
    }
}

TEST_CASE("kmeans is deterministic under a seed") {
    for (int trial = 0; trial < 500; ++trial) {
        Rng rng = make_stream(9, static_cast<std::uint64_t>(trial));
        std::vector<SpdMatrix> data;
        for (int i = 0; i < 10; ++i) {
            data.push_back(gen_random_spd(2, rng));
        }
        KMeansOptions opts;
        opts.imr_iters = 60;
        Rng r1 = make_stream(trial);
        Rng r2 = make_stream(trial);
        const ClusterModel a = kmeans(data, 3, KMeansPlusPlus{}, opts, r1);
        const ClusterModel b = kmeans(data, 3, KMeansPlusPlus{}, opts, r2);
        CHECK(a.assignment == b.assignment);
        for (std::size_t c = 0; c < a.k; ++c) {
            CHECK(a.centroids[c].matrix() == b.centroids[c].matrix());
        }
    }
}

TEST_CASE("kmeans++ seeding") {
    SUBCASE("k = 1 picks every point eventually") {
        Rng rng = make_stream(3);
        std::vector<SpdMatrix> data;
        for (int i = 0; i < 5; ++i) {
            data.push_back(gen_random_spd(2, rng));
        }
        std::set<std::size_t> seen;
        for (int t = 0; t < 200; ++t) {
            const auto idx = kmeans_pp_init(data, 1, rng);
            REQUIRE(idx.size() == 1);
            seen.insert(idx[0]);
        }
        CHECK(seen.size() == 5);
    }
    SUBCASE("duplicates of a chosen seed are never chosen again") {
        const SpdMatrix a = mat2(1, 0, 1);
        const SpdMatrix b = mat2(5, 1, 2);
        const SpdMatrix c = mat2(0.2, 0, 9);
        const std::vector<SpdMatrix> data = {a, a, a, b, b, c, a, b};
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            Rng rng = make_stream(seed);
            const auto idx = kmeans_pp_init(data, 3, rng);
            REQUIRE(idx.size() == 3);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t j = i + 1; j < idx.size(); ++j) {
                    CHECK(idx[i] != idx[j]);
                    CHECK(thompson_distance(data[idx[i]], data[idx[j]]) > 0.0);
                }
            }
        }
    }
    SUBCASE("more seeds than distinct points still gives distinct indices") {
        const SpdMatrix a = mat2(1, 0, 1);
        const std::vector<SpdMatrix> data = {a, a, mat2(3, 0, 3), a};
        Rng rng = make_stream(4);
        auto idx = kmeans_pp_init(data, 4, rng);
        std::sort(idx.begin(), idx.end());
        CHECK(idx == std::vector<std::size_t>{0, 1, 2, 3});
    }
    SUBCASE("the second seed follows the squared distances") {
        const std::vector<SpdMatrix> data = {mat2(1, 0, 1), mat2(2, 0, 1), mat2(1, 0.5, 3), mat2(9, 1, 0.5)};
        constexpr int trials = 40000;
        std::vector<std::vector<int>> count(4, std::vector<int>(4, 0));
        std::vector<int> firsts(4, 0);
        Rng rng = make_stream(6);
        for (int t = 0; t < trials; ++t) {
            const auto idx = kmeans_pp_init(data, 2, rng);
            ++firsts[idx[0]];
            ++count[idx[0]][idx[1]];
        }
        for (std::size_t f = 0; f < 4; ++f) {
            const double pf = firsts[f] / static_cast<double>(trials);
            CHECK(std::abs(pf - 0.25) < 5.0 * std::sqrt(0.25 * 0.75 / trials));
            double total = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                const double r = testing_support::reference_thompson(data[f], data[j]);
                total += r * r;
            }
            for (std::size_t j = 0; j < 4; ++j) {
                const double r = testing_support::reference_thompson(data[f], data[j]);
                const double p = r * r / total;
                const double freq = count[f][j] / static_cast<double>(firsts[f]);
                CHECK(std::abs(freq - p) < 5.0 * std::sqrt(p * (1.0 - p) / firsts[f]) + 1e-12);
            }
        }
    }
}

TEST_CASE("bic matches the written-out score") {
    Rng rng = make_stream(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 3;
        std::vector<SpdMatrix> data;
        for (int i = 0; i < 15; ++i) {
            data.push_back(gen_random_spd(d, rng));
        }
        std::vector<std::size_t> labels(data.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = i % 3;
        }
        std::vector<SpdMatrix> centroids;
        for (std::size_t c = 0; c < 3; ++c) {
            centroids.push_back(gen_random_spd(d, rng));
        }
        const double tangent = d * (d + 1) / 2.0;
        const BicResult iso = bic_score(data, labels, centroids);
        const BicResult rad = bic_score(data, labels, centroids, BicLikelihood::Radial);
        CHECK_FALSE(iso.zero_variance);
        CHECK(iso.score == doctest::Approx(reference_bic(data, labels, centroids, tangent)).epsilon(1e-10));
        CHECK(rad.score == doctest::Approx(reference_bic(data, labels, centroids, 1.0)).epsilon(1e-10));
    }
}

TEST_CASE("bic flags zero variance") {
    const SpdMatrix a = mat2(2, 0.5, 1);
    const std::vector<SpdMatrix> data = {a, a, a};
    const std::vector<std::size_t> labels = {0, 0, 0};
    const BicResult r = bic_score(data, labels, std::vector<SpdMatrix>{a});
    CHECK(r.zero_variance);
    CHECK(r.score == std::numeric_limits<double>::infinity());
}

TEST_CASE("bic rewards splitting two far blobs") {
    for (int d : {2, 3, 5}) {
        Rng rng = make_stream(12, static_cast<std::uint64_t>(d));
        const SpdMatrix c1 = gen_random_spd(d, rng);
        const SpdMatrix c2 = far_center(c1, 2.0, rng);
        std::vector<SpdMatrix> data = blob(c1, 10, 0.05, rng);
        const auto second = blob(c2, 10, 0.05, rng);
        data.insert(data.end(), second.begin(), second.end());
        std::vector<std::size_t> one(data.size(), 0);
        std::vector<std::size_t> two(data.size());
        for (std::size_t i = 0; i < two.size(); ++i) {
            two[i] = i < 10 ? 0 : 1;
        }
        const BicResult unsplit = bic_score(data, one, std::vector<SpdMatrix>{inductive_midrange(data).midrange});
        const BicResult split = bic_score(
            data, two,
            std::vector<SpdMatrix>{inductive_midrange(members(data, two, 0)).midrange,
                                   inductive_midrange(members(data, two, 1)).midrange});
        INFO("d = " << d);
        CHECK(split.score > unsplit.score);
    }
}

TEST_CASE("bic rejects splitting a single blob") {
    for (int d : {2, 3, 5, 10}) {
        int rejected = 0;
        for (int trial = 0; trial < 50; ++trial) {
            Rng rng = make_stream(13, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(d));
            const auto data = blob(gen_random_spd(d, rng), 20, 0.2, rng);
            const ClusterModel one = kmeans(data, 1, RandomPoints{}, {}, rng);
            const ClusterModel two = kmeans(data, 2, RandomPoints{}, {}, rng);
            const BicResult b1 = bic_score(data, one.assignment, one.centroids);
            const BicResult b2 = bic_score(data, two.assignment, two.centroids);
            rejected += (b2.zero_variance || b2.score < b1.score) ? 1 : 0;
        }
        INFO("d = " << d);
        CHECK(rejected >= 45);
    }
}

TEST_CASE("bic errors") {
    const std::vector<SpdMatrix> data = {mat2(1, 0, 1), mat2(2, 0, 1)};
    const std::vector<SpdMatrix> cents = {mat2(1, 0, 1), mat2(2, 0, 1)};
    CHECK(error_of([&] { bic_score(data, std::vector<std::size_t>{0, 0}, cents); }) == Errc::EmptyCluster);
    CHECK(error_of([&] { bic_score(data, std::vector<std::size_t>{0}, cents); }) == Errc::LengthMismatch);
}

TEST_CASE("xmeans keeps a single tight cluster whole") {
    constexpr int d = 3;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_stream(seed, 40);
        const auto data = blob(gen_random_spd(d, rng), 20, 0.2, rng);
        const ClusterModel m = xmeans(data, {}, rng);
        INFO("seed " << seed);
        CHECK(m.k == 1);
    }
}

TEST_CASE("xmeans splits two separated clusters") {
    constexpr int d = 3;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_stream(seed, 41);
        const SpdMatrix c1 = gen_random_spd(d, rng);
        const SpdMatrix c2 = far_center(c1, 1.0, rng);
        std::vector<SpdMatrix> data = blob(c1, 20, 0.2, rng);
        const auto second = blob(c2, 20, 0.2, rng);
        data.insert(data.end(), second.begin(), second.end());
        Dataset ds{data, std::vector<std::size_t>(40)};
        for (std::size_t i = 20; i < 40; ++i) {
            (*ds.labels)[i] = 1;
        }
        const ClusterModel m = xmeans(data, {}, rng);
        INFO("seed " << seed);
        CHECK(m.k == 2);
        const AccuracyReport r = score_accuracy(m, ds);
        CHECK(r.points_identified == 40);
        CHECK(r.clusters_identified == 2);
        REQUIRE(m.bic);
        CHECK(std::isfinite(*m.bic));
    }
}

TEST_CASE("xmeans errors") {
    Rng rng = make_stream(1);
    CHECK(error_of([&] { xmeans(std::vector<SpdMatrix>{}, {}, rng); }) == Errc::EmptyDataset);
}

TEST_CASE("score_accuracy examples") {
    const std::vector<std::size_t> truth = {0, 0, 1, 1, 2, 2, 2};
    SUBCASE("perfect") {
        const std::vector<std::size_t> pred = {4, 4, 0, 0, 9, 9, 9};
        const AccuracyReport r = score_accuracy(pred, truth);
        CHECK(r.points_identified == 7);
        CHECK(r.clusters_identified == 3);
        CHECK(r.clusters_lost == 0);
    }
    SUBCASE("one predicted cluster for ten true ones") {
        std::vector<std::size_t> t;
        for (std::size_t c = 0; c < 10; ++c) {
            t.insert(t.end(), 20, c);
        }
        const std::vector<std::size_t> pred(200, 0);
        const AccuracyReport r = score_accuracy(pred, t);
        CHECK(r.points_identified == 20);
        CHECK(r.clusters_identified == 0);
        CHECK(r.clusters_lost == 9);
    }
    SUBCASE("a merged pair and an oversplit") {
        // True 0 and 1 merged; true 2 split 2 + 1.
        const std::vector<std::size_t> pred = {0, 0, 0, 0, 1, 1, 2};
        const AccuracyReport r = score_accuracy(pred, truth);
        CHECK(r.points_identified == 4);
        CHECK(r.clusters_identified == 0);
        CHECK(r.clusters_lost == 1);
    }
    SUBCASE("errors") {
        CHECK(error_of([&] { score_accuracy(std::vector<std::size_t>{0}, truth); }) == Errc::LengthMismatch);
        ClusterModel m;
        m.k = 1;
        m.assignment = {0};
        Dataset ds{{mat2(1, 0, 1)}, std::nullopt};
        CHECK(error_of([&] { score_accuracy(m, ds); }) == Errc::MissingTruth);
    }
}

TEST_CASE("score_accuracy ignores the naming of predicted clusters") {
    for (int trial = 0; trial < 500; ++trial) {
        Rng rng = make_stream(21, static_cast<std::uint64_t>(trial));
        const std::size_t n = 30;
        std::uniform_int_distribution<std::size_t> true_id(0, 4);
        std::uniform_int_distribution<std::size_t> pred_id(0, 5);
        std::vector<std::size_t> truth(n);
        std::vector<std::size_t> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = true_id(rng);
            // Mostly right, so that overlaps tie often enough to matter.
            pred[i] = std::uniform_real_distribution<double>(0, 1)(rng) < 0.6 ? truth[i] : pred_id(rng);
        }
        std::vector<std::size_t> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> renamed(n);
        for (std::size_t i = 0; i < n; ++i) {
            renamed[i] = perm[pred[i]];
        }
        const AccuracyReport a = score_accuracy(pred, truth);
        const AccuracyReport b = score_accuracy(renamed, truth);
        CHECK(a.points_identified == b.points_identified);
        CHECK(a.clusters_identified == b.clusters_identified);
        CHECK(a.clusters_lost == b.clusters_lost);
        CHECK(a.points_identified <= n);
    }
}
