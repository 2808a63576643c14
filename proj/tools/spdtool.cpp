// spdtool: data generation, midranges, clustering and the experiment tables
// from the command line.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spd/clustering.hpp"
#include "spd/error.hpp"
#include "spd/experiments.hpp"
#include "spd/generate.hpp"
#include "spd/io.hpp"
#include "spd/midrange.hpp"
#include "spd/random.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::uint64_t seed = 20211;
    std::optional<int> dim;
    std::optional<std::size_t> n;
    std::optional<std::size_t> k;
    std::optional<std::size_t> iters;
    std::optional<std::size_t> runs;
    std::string out;
    std::string format = "json";
    std::string in;
};

void add_common(CLI::App* cmd, Common& c, bool with_input) {
    cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
    cmd->add_option("--dim", c.dim, "matrix dimension d")->check(CLI::PositiveNumber);
    cmd->add_option("--n", c.n, "number of points")->check(CLI::PositiveNumber);
    cmd->add_option("--k", c.k, "number of clusters")->check(CLI::PositiveNumber);
    cmd->add_option("--iters", c.iters, "IMR iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--runs", c.runs, "repetitions")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output file (stdout if omitted)");
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    if (with_input) {
        cmd->add_option("--in", c.in, "dataset file (.json or .csv)");
    }
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
    } else {
        spd::write_text_file(c.out, text);
    }
}

std::string dump(const spd::json& j) { return j.dump(2) + "\n"; }

spd::Dataset random_dataset(int dim, std::size_t n, spd::Rng& rng) {
    spd::Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        d.points.push_back(spd::gen_random_spd(dim, rng));
    }
    return d;
}

spd::ExperimentConfig clustered_config(const Common& c) {
    spd::ExperimentConfig cfg;
    cfg.seed = c.seed;
    cfg.dim = c.dim.value_or(2);
    cfg.n_points = c.n.value_or(200);
    cfg.n_clusters = c.k.value_or(10);
    return cfg;
}

// --in if given, otherwise a fresh draw from the flags.
spd::Dataset input_dataset(const Common& c, bool clustered) {
    if (!c.in.empty()) {
        return spd::load_dataset(c.in);
    }
    spd::Rng rng = spd::make_stream(c.seed);
    if (clustered) {
        return spd::gen_clustered_dataset(clustered_config(c), rng);
    }
    return random_dataset(c.dim.value_or(2), c.n.value_or(5), rng);
}

void run_gen(const Common& c) {
    spd::Rng rng = spd::make_stream(c.seed);
    const spd::Dataset data = c.k ? spd::gen_clustered_dataset(clustered_config(c), rng)
                                  : random_dataset(c.dim.value_or(2), c.n.value_or(5), rng);
    emit(c, c.format == "csv" ? spd::dataset_to_csv(data) : dump(spd::dataset_to_json(data)));
}

void run_midrange(const Common& c, const std::string& method, const std::string& trace_out) {
    const spd::Dataset data = input_dataset(c, false);
    data.validate();
    if (method == "minimax") {
        const auto r = spd::optimization_midrange_2d(data.points);
        if (c.format == "csv") {
            emit(c, spd::matrix_to_csv(r.midrange));
        } else {
            emit(c, dump({{"midrange", spd::matrix_to_json(r.midrange)}, {"cost", r.cost}}));
        }
        return;
    }
    spd::ImrConfig cfg;
    cfg.num_iters = c.iters.value_or(cfg.num_iters);
    cfg.record_trace = !trace_out.empty();
    const auto r = spd::inductive_midrange(data.points, cfg);
    if (r.trace) {
        spd::write_text_file(trace_out, spd::trace_to_csv(*r.trace));
    }
    if (c.format == "csv") {
        emit(c, spd::matrix_to_csv(r.midrange));
    } else {
        emit(c, dump({{"midrange", spd::matrix_to_json(r.midrange)},
                      {"cost", spd::imr_cost(r.midrange, data.points)},
                      {"iterations", r.iterations}}));
    }
}

void run_cluster(const Common& c, const std::string& method) {
    const spd::Dataset data = input_dataset(c, true);
    data.validate();
    spd::Rng rng = spd::make_stream(c.seed, 0, 1);
    spd::KMeansOptions kopts;
    kopts.imr_iters = c.iters.value_or(kopts.imr_iters);

    spd::ClusterModel model;
    if (method == "xmeans") {
        spd::XMeansOptions xopts;
        xopts.kmeans = kopts;
        model = spd::xmeans(data.points, xopts, rng);
    } else {
        const std::size_t k = c.k.value_or(10);
        const spd::InitStrategy init =
            method == "kmeanspp" ? spd::InitStrategy{spd::KMeansPlusPlus{}} : spd::InitStrategy{spd::RandomPoints{}};
        model = spd::kmeans(data.points, k, init, kopts, rng);
        model.bic = spd::bic_score(data.points, model.assignment, model.centroids).score;
    }

    std::optional<spd::AccuracyReport> acc;
    if (data.labels) {
        acc = spd::score_accuracy(model, data);
    }
    if (c.format == "csv") {
        std::string text = "index,cluster\n";
        for (std::size_t i = 0; i < model.assignment.size(); ++i) {
            text += std::to_string(i) + "," + std::to_string(model.assignment[i]) + "\n";
        }
        emit(c, text);
        return;
    }
    spd::json j = spd::cluster_model_to_json(model);
    if (acc) {
        j["accuracy"] = {{"points_identified", acc->points_identified},
                         {"clusters_identified", acc->clusters_identified},
                         {"clusters_lost", acc->clusters_lost}};
    }
    emit(c, dump(j));
}

void run_experiment(const Common& c, const std::string& which, const std::string& start) {
    if (which == "convergence") {
        spd::ConvergenceOptions o;
        o.seed = c.seed;
        o.runs = c.runs.value_or(o.runs);
        o.num_iters = c.iters.value_or(o.num_iters);
        o.fit_hi = std::min(o.fit_hi, o.num_iters);
        o.start = start == "first" ? spd::ConvergenceStart::FirstDataPoint : spd::ConvergenceStart::RandomSpd;
        if (c.dim || c.n) {
            o.configs = {{c.dim.value_or(5), c.n.value_or(5)}};
        }
        emit(c, spd::to_csv(spd::experiment_convergence(o)));
    } else if (which == "invariance") {
        spd::InvarianceOptions o;
        o.seed = c.seed;
        o.inits = c.runs.value_or(o.inits);
        o.num_iters = c.iters.value_or(o.num_iters);
        if (c.dim || c.n) {
            o.configs = {{c.dim.value_or(2), c.n.value_or(5)}};
        }
        emit(c, spd::to_csv(spd::experiment_invariance(o)));
    } else {
        spd::ClusteringExperimentOptions o;
        o.method = which == "xmeans" ? spd::ClusteringMethod::XMeans : spd::ClusteringMethod::KMeansPlusPlus;
        o.seed = c.seed;
        o.runs = c.runs.value_or(o.runs);
        o.n_points = c.n.value_or(o.n_points);
        o.n_clusters = c.k.value_or(o.n_clusters);
        if (c.iters) {
            o.kmeans.imr_iters = *c.iters;
            o.xmeans.kmeans.imr_iters = *c.iters;
        }
        if (c.dim) {
            o.dims = {*c.dim};
        }
        emit(c, spd::to_csv(spd::experiment_clustering(o)));
    }
}

void run_cone_export(const Common& c, bool with_trace, bool with_roles) {
    const spd::Dataset data = input_dataset(c, false);
    data.validate();
    std::optional<spd::ImrResult> imr;
    if (with_trace) {
        spd::ImrConfig cfg;
        cfg.num_iters = c.iters.value_or(1000);
        cfg.record_trace = true;
        imr = spd::inductive_midrange(data.points, cfg);
    }
    std::optional<spd::ActiveDataReport> roles;
    if (with_roles) {
        roles = spd::detect_active_data(data.points, c.iters.value_or(1000));
    }
    emit(c, spd::export_cone_csv(data, imr ? &*imr->trace : nullptr, roles ? &*roles : nullptr));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thompson-metric midranges and clustering on SPD matrices"};
    app.require_subcommand(1);

    Common common;

    auto* gen = app.add_subcommand("gen", "random SPD data set; clustered when --k is given");
    add_common(gen, common, false);

    std::string mid_method = "imr";
    std::string trace_out;
    auto* mid = app.add_subcommand("midrange", "inductive midrange of a data set");
    add_common(mid, common, true);
    mid->add_option("--method", mid_method, "imr, or minimax for 2 x 2 data")
        ->check(CLI::IsMember({"imr", "minimax"}))
        ->capture_default_str();
    mid->add_option("--trace-out", trace_out, "write the IMR trace as CSV");

    std::string cluster_method;
    auto* cluster = app.add_subcommand("cluster", "cluster a data set");
    add_common(cluster, common, true);
    cluster->add_option("method", cluster_method, "kmeans, xmeans or kmeanspp")
        ->required()
        ->check(CLI::IsMember({"kmeans", "xmeans", "kmeanspp"}));

    std::string which;
    std::string start = "random";
    auto* exp = app.add_subcommand("experiment", "experiment tables (always CSV)");
    add_common(exp, common, false);
    exp->add_option("which", which, "convergence, invariance, xmeans or kmeanspp")
        ->required()
        ->check(CLI::IsMember({"convergence", "invariance", "xmeans", "kmeanspp"}));
    exp->add_option("--start", start, "convergence start: random or first")
        ->check(CLI::IsMember({"random", "first"}))
        ->capture_default_str();

    bool with_trace = false;
    bool with_roles = false;
    auto* cone = app.add_subcommand("cone-export", "cone coordinates of 2 x 2 data as CSV");
    add_common(cone, common, true);
    cone->add_flag("--trace", with_trace, "include IMR iterates");
    cone->add_flag("--roles", with_roles, "tag points as active, external or internal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gen->parsed()) {
            run_gen(common);
        } else if (mid->parsed()) {
            run_midrange(common, mid_method, trace_out);
        } else if (cluster->parsed()) {
            run_cluster(common, cluster_method);
        } else if (exp->parsed()) {
            run_experiment(common, which, start);
        } else if (cone->parsed()) {
            run_cone_export(common, with_trace, with_roles);
        }
    } catch (const spd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return spd::is_numerical(e.code()) ? kExitNumerical : kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
