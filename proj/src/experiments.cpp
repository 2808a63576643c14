#include "spd/experiments.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "spd/format.hpp"
#include "spd/generate.hpp"
#include "spd/io.hpp"
#include "spd/parallel.hpp"
#include "spd/random.hpp"
#include "spd/thompson.hpp"

namespace spd {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(Errc::LengthMismatch, "slope fit needs paired samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0)) {
            continue;
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) {
        throw Error(Errc::InvalidArgument, "slope fit needs two positive samples");
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (denom == 0.0) {
        throw Error(Errc::InvalidArgument, "slope fit needs distinct abscissae");
    }
    return (dn * sxy - sx * sy) / denom;
}

double convergence_slope(std::span<const SpdMatrix> data, std::size_t num_iters, std::size_t fit_lo,
                         std::size_t fit_hi, const std::variant<std::size_t, SpdMatrix>& init) {
    if (fit_lo < 1 || fit_lo >= fit_hi || fit_hi > num_iters) {
        throw Error(Errc::InvalidArgument, "fit window must satisfy 1 <= lo < hi <= num_iters");
    }
    std::vector<SpdMatrix> window;
    window.reserve(fit_hi - fit_lo + 1);
    ImrConfig cfg;
    cfg.num_iters = num_iters;
    cfg.init = init;
    cfg.observer = [&](std::size_t k, const SpdMatrix& x) {
        if (k >= fit_lo && k <= fit_hi) {
            window.push_back(x);
        }
    };
    const SpdMatrix last = inductive_midrange(data, cfg).midrange;

    std::vector<double> ks;
    std::vector<double> ds;
    ks.reserve(window.size());
    ds.reserve(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
        ks.push_back(static_cast<double>(fit_lo + i));
        ds.push_back(thompson_distance(window[i], last));
    }
    return fit_loglog_slope(ks, ds);
}

ConvergenceTable experiment_convergence(const ConvergenceOptions& opts) {
    if (opts.runs == 0 || opts.configs.empty()) {
        throw Error(Errc::InvalidArgument, "nothing to run");
    }
    ConvergenceTable table{opts, {}, {}};
    const std::size_t jobs = opts.configs.size() * opts.runs;
    std::vector<double> slopes(jobs);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t row = job / opts.runs;
        const std::size_t run = job % opts.runs;
        const SizeConfig cfg = opts.configs[row];
        Rng rng = make_stream(opts.seed, row, 2 * run);
        std::vector<SpdMatrix> data;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            data.push_back(gen_random_spd(cfg.dim, rng));
        }
        std::variant<std::size_t, SpdMatrix> init = std::size_t{0};
        if (opts.start == ConvergenceStart::RandomSpd) {
            Rng algo = make_stream(opts.seed, row, 2 * run + 1);
            init = gen_random_spd(cfg.dim, algo);
        }
        slopes[job] = convergence_slope(data, opts.num_iters, opts.fit_lo, opts.fit_hi, init);
    });
    for (std::size_t row = 0; row < opts.configs.size(); ++row) {
        double sum = 0.0;
        for (std::size_t run = 0; run < opts.runs; ++run) {
            const double s = slopes[row * opts.runs + run];
            table.runs.push_back({opts.configs[row], run, s});
            sum += s;
        }
        table.mean_slope.push_back(sum / static_cast<double>(opts.runs));
    }
    return table;
}

std::string to_csv(const ConvergenceTable& t) {
    std::ostringstream out;
    out << "# experiment=convergence seed=" << t.options.seed << " runs=" << t.options.runs
        << " num_iters=" << t.options.num_iters << " fit_window=[" << t.options.fit_lo << ","
        << t.options.fit_hi << "] start="
        << (t.options.start == ConvergenceStart::RandomSpd ? "random" : "first") << "\n";
    out << "# units: slope = d log(d_inf(X_k, X_final)) / d log(k), dimensionless\n";
    out << "dim,n,run,slope\n";
    for (const auto& r : t.runs) {
        out << r.config.dim << ',' << r.config.n << ',' << r.run << ',' << format_double(r.slope) << '\n';
    }
    for (std::size_t i = 0; i < t.mean_slope.size(); ++i) {
        out << t.options.configs[i].dim << ',' << t.options.configs[i].n << ",mean,"
            << format_double(t.mean_slope[i]) << '\n';
    }
    return out.str();
}

namespace {

struct Separation {
    double max = 0.0;
    double avg = 0.0;
};

Separation pairwise_separation(const std::vector<SpdMatrix>& pts) {
    Separation s;
    std::size_t pairs = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = thompson_distance(pts[i], pts[j]);
            s.max = std::max(s.max, d);
            sum += d;
            ++pairs;
        }
    }
    s.avg = pairs ? sum / static_cast<double>(pairs) : 0.0;
    return s;
}

}  // namespace

InvarianceTable experiment_invariance(const InvarianceOptions& opts) {
    if (opts.inits == 0 || opts.configs.empty() || opts.num_iters == 0) {
        throw Error(Errc::InvalidArgument, "nothing to run");
    }
    InvarianceTable table{opts, {}};
    for (std::size_t row = 0; row < opts.configs.size(); ++row) {
        const SizeConfig cfg = opts.configs[row];
        Rng data_rng = make_stream(opts.seed, row, 0);
        std::vector<SpdMatrix> data;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            data.push_back(gen_random_spd(cfg.dim, data_rng));
        }

        std::vector<std::optional<SpdMatrix>> at_n(opts.inits);
        std::vector<std::optional<SpdMatrix>> at_2n(opts.inits);
        parallel_for(opts.inits, [&](std::size_t i) {
            Rng rng = make_stream(opts.seed, row, 2 * i + 1);
            ImrConfig imr;
            imr.init = gen_random_spd(cfg.dim, rng);
            imr.num_iters = opts.doubled ? 2 * opts.num_iters : opts.num_iters;
            imr.observer = [&](std::size_t k, const SpdMatrix& x) {
                if (k == opts.num_iters + 1) {
                    at_n[i] = x;
                }
            };
            try {
                auto res = inductive_midrange(data, imr);
                if (opts.doubled) {
                    at_2n[i] = std::move(res.midrange);
                }
            } catch (const Error&) {
                at_n[i].reset();  // counted as not converged
                at_2n[i].reset();
            }
        });

        InvarianceRow out;
        out.config = cfg;
        out.inits = opts.inits;
        std::vector<SpdMatrix> finals;
        std::vector<SpdMatrix> finals_2n;
        for (std::size_t i = 0; i < opts.inits; ++i) {
            if (at_n[i] && at_n[i]->matrix().allFinite() && (!opts.doubled || at_2n[i])) {
                ++out.converged;
                finals.push_back(*at_n[i]);
                if (opts.doubled) {
                    finals_2n.push_back(*at_2n[i]);
                }
            }
        }
        const Separation s = pairwise_separation(finals);
        out.max_separation = s.max;
        out.avg_separation = s.avg;
        if (opts.doubled) {
            const Separation s2 = pairwise_separation(finals_2n);
            out.max_separation_doubled = s2.max;
            out.avg_separation_doubled = s2.avg;
        }
        table.rows.push_back(out);
    }
    return table;
}

std::string to_csv(const InvarianceTable& t) {
    std::ostringstream out;
    out << "# experiment=invariance seed=" << t.options.seed << " inits=" << t.options.inits
        << " num_iters=" << t.options.num_iters << "\n";
    out << "# units: separations are Thompson distances (natural log scale); counts out of inits\n";
    out << "dim,n,inits,max_separation,avg_separation,convergence_count";
    if (t.options.doubled) {
        out << ",max_separation_2x,avg_separation_2x";
    }
    out << '\n';
    for (const auto& r : t.rows) {
        out << r.config.dim << ',' << r.config.n << ',' << r.inits << ',' << format_double(r.max_separation) << ','
            << format_double(r.avg_separation) << ',' << r.converged;
        if (t.options.doubled) {
            out << ',' << format_double(r.max_separation_doubled) << ','
                << format_double(r.avg_separation_doubled);
        }
        out << '\n';
    }
    return out.str();
}

AccuracyTable experiment_clustering(const ClusteringExperimentOptions& opts) {
    if (opts.runs == 0 || opts.dims.empty()) {
        throw Error(Errc::InvalidArgument, "nothing to run");
    }
    AccuracyTable table{opts, {}, {}};
    const std::size_t jobs = opts.dims.size() * opts.runs;
    std::vector<AccuracyRun> results(jobs);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t row = job / opts.runs;
        const std::size_t run = job % opts.runs;
        ExperimentConfig cfg;
        cfg.seed = opts.seed;
        cfg.dim = opts.dims[row];
        cfg.n_points = opts.n_points;
        cfg.n_clusters = opts.n_clusters;
        cfg.cluster_radius = opts.cluster_radius;
        cfg.min_center_separation = opts.min_center_separation;
        cfg.runs = opts.runs;

        Rng data_rng = make_stream(opts.seed, row, 2 * run);
        const Dataset data = gen_clustered_dataset(cfg, data_rng);
        Rng algo_rng = make_stream(opts.seed, row, 2 * run + 1);
        const ClusterModel model = opts.method == ClusteringMethod::XMeans
                                       ? xmeans(data.points, opts.xmeans, algo_rng)
                                       : kmeans(data.points, opts.n_clusters, KMeansPlusPlus{}, opts.kmeans,
                                                algo_rng);
        results[job] = {cfg.dim, run, model.k, score_accuracy(model, data)};
    });

    for (std::size_t row = 0; row < opts.dims.size(); ++row) {
        AccuracySummary s{opts.dims[row], 0.0, 0.0, 0.0, 0.0};
        for (std::size_t run = 0; run < opts.runs; ++run) {
            const auto& r = results[row * opts.runs + run];
            table.runs.push_back(r);
            s.points_identified += static_cast<double>(r.report.points_identified);
            s.clusters_identified += static_cast<double>(r.report.clusters_identified);
            s.clusters_lost += static_cast<double>(r.report.clusters_lost);
            s.k_found += static_cast<double>(r.k_found);
        }
        const double n = static_cast<double>(opts.runs);
        s.points_identified /= n;
        s.clusters_identified /= n;
        s.clusters_lost /= n;
        s.k_found /= n;
        table.means.push_back(s);
    }
    return table;
}

std::string to_csv(const AccuracyTable& t) {
    std::ostringstream out;
    const bool x = t.options.method == ClusteringMethod::XMeans;
    out << "# experiment=" << (x ? "xmeans" : "kmeanspp") << " seed=" << t.options.seed
        << " runs=" << t.options.runs << " n_points=" << t.options.n_points
        << " n_clusters=" << t.options.n_clusters << " cluster_radius=" << format_double(t.options.cluster_radius)
        << " min_center_separation=" << format_double(t.options.min_center_separation) << "\n";
    out << "# units: points out of n_points, clusters out of n_clusters; radii are Thompson distances\n";
    out << "dim,run,k_found,points_identified,clusters_identified,clusters_lost\n";
    for (const auto& r : t.runs) {
        out << r.dim << ',' << r.run << ',' << r.k_found << ',' << r.report.points_identified << ','
            << r.report.clusters_identified << ',' << r.report.clusters_lost << '\n';
    }
    for (const auto& m : t.means) {
        out << m.dim << ",mean," << format_double(m.k_found) << ',' << format_double(m.points_identified) << ','
            << format_double(m.clusters_identified) << ',' << format_double(m.clusters_lost) << '\n';
    }
    return out.str();
}

std::string export_cone_csv(const Dataset& data, const ImrTrace* trace, const ActiveDataReport* roles) {
    if (data.dim() != 2) {
        throw Error(Errc::WrongDimension, "cone export needs 2 x 2 data");
    }
    std::map<std::size_t, std::string> role;
    if (roles) {
        for (auto i : roles->internal) role[i] = "internal";
        for (auto i : roles->external) role[i] = "external";
        for (auto i : roles->active) role[i] = "active";
    }
    std::ostringstream out;
    out << "x,y,z,kind,index,role\n";
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const auto it = role.find(i);
        out << cone_csv_row(data.points[i]) << ",data," << i << ',' << (it == role.end() ? "-" : it->second)
            << '\n';
    }
    if (trace) {
        for (std::size_t k = 0; k < trace->iterates.size(); ++k) {
            out << cone_csv_row(trace->iterates[k]) << ",iterate," << (k + 1) << ",-\n";
        }
    }
    return out.str();
}

}  // namespace spd
