#include "dsbm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "dsbm/bp.hpp"
#include "dsbm/generator.hpp"
#include "dsbm/lsd.hpp"
#include "dsbm/parallel.hpp"
#include "dsbm/rng.hpp"
#include "dsbm/svg.hpp"
#include "dsbm/theory.hpp"

namespace dsbm {

namespace {

using nlohmann::json;

constexpr const char* kArtifactVersion = "1";

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = (n == 1) ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                           static_cast<double>(xs.size()));
    }
    return out;
}

ModelParams cell_params(const json& p) {
    ModelParams mp;
    mp.n_nodes = p.at("n_nodes").get<int>();
    mp.n_steps = p.at("n_steps").get<int>();
    mp.k = p.at("k").get<int>();
    mp.assortativity = p.at("a").get<double>();
    mp.mean_degree = p.at("cbar").get<double>();
    mp.link_persistence = p.at("xi").get<double>();
    mp.community_persistence = p.at("eta").get<double>();
    mp.prior = ModelParams::uniform_prior(mp.k);
    return mp;
}

// One grid cell: all replications of generate+infer for one recipe.
json run_cell(const std::string& recipe, const json& p, std::uint64_t cell_seed) {
    json out;
    int reps = p.at("replications").get<int>();

    if (recipe == "phase-diagram") {
        double cbar = p.at("cbar").get<double>();
        double xi = p.at("xi").get<double>();
        double eta = p.at("eta").get<double>();
        out["a_static"] = detectability_threshold(cbar, xi, eta, ThresholdMode::Static);
        out["a_single"] =
            detectability_threshold(cbar, xi, eta, ThresholdMode::SingleSnapshotAsymptotic);
        out["a_lag_corrected"] =
            detectability_threshold(cbar, xi, eta, ThresholdMode::LagCorrected);
        return out;
    }

    ModelParams mp = cell_params(p);
    auto prior = mp.prior;

    if (recipe == "ahat-vs-xi") {
        int t = p.at("t").get<int>();
        std::vector<double> ahats, overlaps;
        for (int rep = 0; rep < reps; ++rep) {
            auto data = generate(mp, substream_seed(cell_seed, rep));
            BpConfig config;
            config.seed = substream_seed(cell_seed, rep, 0xBFULL);
            auto em = em_fit(data.network.snapshots[static_cast<std::size_t>(t)], mp.n_nodes,
                             mp.k, prior, std::nullopt, config);
            ahats.push_back(em.a_hat);
            overlaps.push_back(overlap(data.planted.labels[static_cast<std::size_t>(t)],
                                       em.assignments, prior, true));
        }
        auto a = mean_se(ahats);
        auto q = mean_se(overlaps);
        out["ahat_mean"] = a.mean;
        out["ahat_se"] = a.se;
        out["overlap_mean"] = q.mean;
        out["overlap_se"] = q.se;
        out["theory_at"] = effective_assortativity(mp.assortativity, mp.link_persistence,
                                                   mp.community_persistence, t);
        auto profile = optimal_lag(mp.link_persistence, mp.community_persistence, t);
        out["theory_astar"] = mp.assortativity * profile.a_star;
        return out;
    }

    if (recipe == "overlap-vs-lag") {
        int t = p.at("t").get<int>();
        std::vector<std::vector<double>> by_tau(static_cast<std::size_t>(t) + 1);
        for (int rep = 0; rep < reps; ++rep) {
            auto data = generate(mp, substream_seed(cell_seed, rep));
            BpConfig config;
            config.seed = substream_seed(cell_seed, rep, 0xBFULL);
            auto em = em_fit(data.network.snapshots[static_cast<std::size_t>(t)], mp.n_nodes,
                             mp.k, prior, std::nullopt, config);
            for (int tau = 0; tau <= t; ++tau)
                by_tau[static_cast<std::size_t>(tau)].push_back(
                    overlap(data.planted.labels[static_cast<std::size_t>(t - tau)],
                            em.assignments, prior, true));
        }
        json overlaps = json::array();
        json ses = json::array();
        for (int tau = 0; tau <= t; ++tau) {
            auto q = mean_se(by_tau[static_cast<std::size_t>(tau)]);
            overlaps.push_back(q.mean);
            ses.push_back(q.se);
        }
        out["overlap_by_tau"] = overlaps;
        out["overlap_se_by_tau"] = ses;
        out["tau_star_theory"] =
            optimal_lag(mp.link_persistence, mp.community_persistence, t).tau_star;
        return out;
    }

    if (recipe == "learn-grid" || recipe == "performance-grid" || recipe == "custom") {
        std::vector<double> eta_hats, xi_hats, a_hats, tau_stars;
        std::vector<double> q_corrected, q_raw, gains;
        int failures = 0;
        for (int rep = 0; rep < reps; ++rep) {
            auto data = generate(mp, substream_seed(cell_seed, rep));
            BpConfig config;
            config.seed = substream_seed(cell_seed, rep, 0xBFULL);
            auto lsd = lsd_run(data.network, mp.k, prior, config, 1);
            if (!lsd.ok) {
                ++failures;
                continue;
            }
            eta_hats.push_back(lsd.eta_hat);
            xi_hats.push_back(lsd.xi_hat);
            a_hats.push_back(lsd.a_hat);
            tau_stars.push_back(static_cast<double>(lsd.tau_star_hat));
            double qc = 0.0, qr = 0.0;
            int n_valid = 0;
            for (int t = 0; t <= mp.n_steps; ++t) {
                if (!lsd.corrected_valid[static_cast<std::size_t>(t)]) continue;
                qc += overlap(data.planted.labels[static_cast<std::size_t>(t)],
                              lsd.corrected_assignments.labels[static_cast<std::size_t>(t)],
                              prior, true);
                qr += overlap(data.planted.labels[static_cast<std::size_t>(t)],
                              lsd.sweep.aligned[static_cast<std::size_t>(t)], prior, true);
                ++n_valid;
            }
            if (n_valid > 0) {
                q_corrected.push_back(qc / n_valid);
                q_raw.push_back(qr / n_valid);
                gains.push_back((qc - qr) / n_valid);
            }
        }
        auto eh = mean_se(eta_hats);
        auto xh = mean_se(xi_hats);
        auto ah = mean_se(a_hats);
        auto ts = mean_se(tau_stars);
        auto qc = mean_se(q_corrected);
        auto qr = mean_se(q_raw);
        auto gn = mean_se(gains);
        out["eta_hat_mean"] = eh.mean;
        out["eta_hat_se"] = eh.se;
        out["xi_hat_mean"] = xh.mean;
        out["xi_hat_se"] = xh.se;
        out["a_hat_mean"] = ah.mean;
        out["a_hat_se"] = ah.se;
        out["tau_star_mean"] = ts.mean;
        out["overlap_corrected_mean"] = qc.mean;
        out["overlap_raw_mean"] = qr.mean;
        out["gain_mean"] = gn.mean;
        out["failures"] = failures;
        return out;
    }

    throw std::invalid_argument("unknown recipe: " + recipe);
}

struct Cell {
    json params;
    std::uint64_t seed = 0;
    json outputs;
    std::string error;
    double wall_ms = 0.0;
};

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < columns.size(); ++c)
        os << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            os << row[c] << (c + 1 < row.size() ? ',' : '\n');
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

}  // namespace

void ExperimentSpec::validate() const {
    static const char* known[] = {"phase-diagram", "ahat-vs-xi", "overlap-vs-lag",
                                  "learn-grid", "performance-grid", "custom"};
    bool ok = false;
    for (const char* r : known) ok = ok || recipe == r;
    if (!ok) throw std::invalid_argument("unknown recipe: " + recipe);
    if (out_dir.empty()) throw std::invalid_argument("output directory required");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::filesystem::create_directories(spec.out_dir);

    // Recipe defaults; explicit grids and sizes win.
    int n_nodes = spec.n_nodes > 0 ? spec.n_nodes : 300;
    int k = spec.k > 0 ? spec.k : 2;
    double cbar = spec.cbar > 0.0 ? spec.cbar : 10.0;
    std::vector<double> xi_grid = spec.xi_grid;
    std::vector<double> eta_grid = spec.eta_grid;
    std::vector<double> a_grid = spec.a_grid;
    std::vector<int> t_grid = spec.t_grid;
    int n_steps = spec.n_steps;

    if (xi_grid.empty()) xi_grid = linspace(0.0, 0.95, spec.grid_points);
    if (eta_grid.empty()) eta_grid = linspace(0.0, 1.0, spec.grid_points);
    if (spec.recipe == "ahat-vs-xi") {
        if (spec.eta_grid.empty()) eta_grid = {0.75};
        if (a_grid.empty()) a_grid = {1.0};
        if (t_grid.empty()) t_grid = {5, 10, 20, 40};
        if (n_steps < 0) n_steps = 40;
    } else if (spec.recipe == "overlap-vs-lag") {
        if (spec.xi_grid.empty()) xi_grid = {0.3, 0.5, 0.7, 0.9};
        if (spec.eta_grid.empty()) eta_grid = {0.75};
        if (a_grid.empty()) a_grid = {1.0};
        if (t_grid.empty()) t_grid = {10};
        if (n_steps < 0) n_steps = 10;
    } else if (spec.recipe == "learn-grid") {
        if (a_grid.empty()) a_grid = {1.0};
        if (n_steps < 0) n_steps = 50;
    } else if (spec.recipe == "performance-grid") {
        if (a_grid.empty()) a_grid = {0.9};
        if (n_steps < 0) n_steps = 50;
    } else if (spec.recipe == "custom") {
        if (a_grid.empty()) a_grid = {0.9};
        if (n_steps < 0) n_steps = 50;
    } else {  // phase-diagram
        if (n_steps < 0) n_steps = 0;
    }
    for (int t : t_grid) n_steps = std::max(n_steps, t);  // observation times need snapshots

    // Cell list.
    std::vector<Cell> cells;
    auto push_cell = [&](json params) {
        params["n_nodes"] = n_nodes;
        params["n_steps"] = n_steps;
        params["k"] = k;
        params["cbar"] = cbar;
        params["replications"] = spec.replications;
        Cell cell;
        cell.seed = substream_seed(spec.base_seed, 0xCE11ULL, cells.size());
        cell.params = std::move(params);
        cells.push_back(std::move(cell));
    };

    if (spec.recipe == "phase-diagram") {
        for (double eta : eta_grid)
            for (double xi : xi_grid) {
                if (xi >= 1.0) continue;
                push_cell({{"xi", xi}, {"eta", eta}, {"a", 0.0}});
            }
    } else if (spec.recipe == "ahat-vs-xi") {
        for (double eta : eta_grid)
            for (double xi : xi_grid)
                for (int t : t_grid)
                    push_cell({{"xi", xi}, {"eta", eta}, {"a", a_grid.front()}, {"t", t}});
    } else if (spec.recipe == "overlap-vs-lag") {
        for (double xi : xi_grid)
            push_cell({{"xi", xi}, {"eta", eta_grid.front()}, {"a", a_grid.front()},
                       {"t", t_grid.front()}});
    } else {
        for (double a : a_grid)
            for (double eta : eta_grid)
                for (double xi : xi_grid) push_cell({{"xi", xi}, {"eta", eta}, {"a", a}});
    }

    parallel_for(static_cast<int>(cells.size()), [&](int idx) {
        Cell& cell = cells[static_cast<std::size_t>(idx)];
        auto start = std::chrono::steady_clock::now();
        try {
            cell.outputs = run_cell(spec.recipe, cell.params, cell.seed);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cell.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }, spec.workers);

    // Run records.
    ExperimentSummary summary;
    summary.cells = static_cast<int>(cells.size());
    std::string records_path = spec.out_dir + "/runrecords.jsonl";
    {
        std::ofstream os(records_path);
        for (const auto& cell : cells) {
            json record = {{"recipe", spec.recipe},
                           {"params", cell.params},
                           {"seed", cell.seed},
                           {"wall_ms", cell.wall_ms},
                           {"version", kArtifactVersion}};
            if (cell.error.empty())
                record["outputs"] = cell.outputs;
            else
                record["error"] = cell.error;
            os << record.dump() << '\n';
            if (!cell.error.empty()) ++summary.failed_cells;
        }
    }
    summary.files_written.push_back(records_path);

    // Per-recipe CSV + SVG.
    auto get = [](const json& j, const char* key) {
        return j.contains(key) ? j.at(key).get<double>() : std::nan("");
    };
    std::vector<std::vector<std::string>> rows;
    std::string csv_path = spec.out_dir + "/" + spec.recipe + ".csv";

    if (spec.recipe == "phase-diagram") {
        for (const auto& cell : cells)
            rows.push_back({num(cell.params.at("xi").get<double>()),
                            num(cell.params.at("eta").get<double>()),
                            num(get(cell.outputs, "a_static")),
                            num(get(cell.outputs, "a_single")),
                            num(get(cell.outputs, "a_lag_corrected"))});
        write_csv(csv_path, {"xi", "eta", "a_static", "a_single", "a_lag_corrected"}, rows);

        HeatMap map;
        map.title = "single-snapshot detectability threshold";
        map.x_label = "xi";
        map.y_label = "eta";
        map.x_ticks = xi_grid;
        map.y_ticks = eta_grid;
        map.values.assign(eta_grid.size(), std::vector<double>(xi_grid.size(), std::nan("")));
        std::size_t idx = 0;
        for (std::size_t r = 0; r < eta_grid.size(); ++r)
            for (std::size_t c = 0; c < xi_grid.size(); ++c)
                map.values[r][c] = get(cells[idx++].outputs, "a_single");
        std::string svg_path = spec.out_dir + "/phase-diagram.svg";
        write_text_file(svg_path, map.render());
        summary.files_written.push_back(svg_path);
    } else if (spec.recipe == "ahat-vs-xi") {
        for (const auto& cell : cells)
            rows.push_back({num(cell.params.at("eta").get<double>()),
                            num(cell.params.at("xi").get<double>()),
                            num(cell.params.at("t").get<int>()),
                            num(spec.replications),
                            num(get(cell.outputs, "ahat_mean")),
                            num(get(cell.outputs, "ahat_se")),
                            num(get(cell.outputs, "overlap_mean")),
                            num(get(cell.outputs, "overlap_se")),
                            num(get(cell.outputs, "theory_at")),
                            num(get(cell.outputs, "theory_astar"))});
        write_csv(csv_path,
                  {"eta", "xi", "t", "reps", "ahat_mean", "ahat_se", "overlap_mean", "overlap_se",
                   "theory_at", "theory_astar"},
                  rows);

        LinePlot plot;
        plot.title = "inferred effective assortativity vs xi";
        plot.x_label = "xi";
        plot.y_label = "a_hat*";
        Series measured{"a_hat*", {}, {}, "#d62728", true, false};
        Series theory_at{"a^t", {}, {}, "#333333", false, true};
        Series theory_astar{"a*_t", {}, {}, "#1f77b4", false, true};
        for (const auto& cell : cells) {
            double xi = cell.params.at("xi").get<double>();
            measured.x.push_back(xi);
            measured.y.push_back(get(cell.outputs, "ahat_mean"));
            theory_at.x.push_back(xi);
            theory_at.y.push_back(get(cell.outputs, "theory_at"));
            theory_astar.x.push_back(xi);
            theory_astar.y.push_back(get(cell.outputs, "theory_astar"));
        }
        plot.series = {measured, theory_at, theory_astar};
        std::string svg_path = spec.out_dir + "/ahat-vs-xi.svg";
        write_text_file(svg_path, plot.render());
        summary.files_written.push_back(svg_path);
    } else if (spec.recipe == "overlap-vs-lag") {
        for (const auto& cell : cells) {
            if (!cell.error.empty()) continue;
            const auto& overlaps = cell.outputs.at("overlap_by_tau");
            const auto& ses = cell.outputs.at("overlap_se_by_tau");
            for (std::size_t tau = 0; tau < overlaps.size(); ++tau)
                rows.push_back({num(cell.params.at("xi").get<double>()),
                                num(static_cast<double>(tau)),
                                num(spec.replications),
                                num(overlaps[tau].get<double>()),
                                num(ses[tau].get<double>()),
                                num(cell.outputs.at("tau_star_theory").get<int>())});
        }
        write_csv(csv_path, {"xi", "tau", "reps", "overlap_mean", "overlap_se",
                             "tau_star_theory"},
                  rows);

        LinePlot plot;
        plot.title = "overlap with planted labels at t - tau";
        plot.x_label = "tau";
        plot.y_label = "overlap";
        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
        int color = 0;
        for (const auto& cell : cells) {
            if (!cell.error.empty()) continue;
            Series s;
            s.label = "xi=" + num(cell.params.at("xi").get<double>());
            s.color = palette[color++ % 5];
            const auto& overlaps = cell.outputs.at("overlap_by_tau");
            for (std::size_t tau = 0; tau < overlaps.size(); ++tau) {
                s.x.push_back(static_cast<double>(tau));
                s.y.push_back(overlaps[tau].get<double>());
            }
            plot.series.push_back(std::move(s));
        }
        std::string svg_path = spec.out_dir + "/overlap-vs-lag.svg";
        write_text_file(svg_path, plot.render());
        summary.files_written.push_back(svg_path);
    } else {
        for (const auto& cell : cells)
            rows.push_back({num(cell.params.at("a").get<double>()),
                            num(cell.params.at("eta").get<double>()),
                            num(cell.params.at("xi").get<double>()),
                            num(spec.replications),
                            num(get(cell.outputs, "eta_hat_mean")),
                            num(get(cell.outputs, "eta_hat_se")),
                            num(get(cell.outputs, "xi_hat_mean")),
                            num(get(cell.outputs, "xi_hat_se")),
                            num(get(cell.outputs, "tau_star_mean")),
                            num(get(cell.outputs, "a_hat_mean")),
                            num(get(cell.outputs, "a_hat_se")),
                            num(get(cell.outputs, "overlap_corrected_mean")),
                            num(get(cell.outputs, "overlap_raw_mean")),
                            num(get(cell.outputs, "gain_mean"))});
        write_csv(csv_path,
                  {"a", "eta", "xi", "reps", "eta_hat_mean", "eta_hat_se", "xi_hat_mean",
                   "xi_hat_se", "tau_star_mean", "a_hat_mean", "a_hat_se",
                   "overlap_corrected_mean", "overlap_raw_mean", "gain_mean"},
                  rows);

        // One heatmap per headline metric when the grid is a full lattice.
        if (a_grid.size() == 1 && cells.size() == eta_grid.size() * xi_grid.size()) {
            static const std::pair<const char*, const char*> panels[] = {
                {"overlap_corrected_mean", "overlap"},
                {"tau_star_mean", "inferred lag"},
                {"gain_mean", "overlap gain from lag correction"},
                {"a_hat_mean", "learned assortativity"},
                {"eta_hat_mean", "learned eta"},
                {"xi_hat_mean", "learned xi"}};
            for (const auto& [key, title] : panels) {
                HeatMap map;
                map.title = title;
                map.x_label = "xi";
                map.y_label = "eta";
                map.x_ticks = xi_grid;
                map.y_ticks = eta_grid;
                map.values.assign(eta_grid.size(),
                                  std::vector<double>(xi_grid.size(), std::nan("")));
                std::size_t idx = 0;
                for (std::size_t r = 0; r < eta_grid.size(); ++r)
                    for (std::size_t c = 0; c < xi_grid.size(); ++c)
                        map.values[r][c] = get(cells[idx++].outputs, key);
                std::string svg_path =
                    spec.out_dir + "/" + spec.recipe + "-" + key + ".svg";
                write_text_file(svg_path, map.render());
                summary.files_written.push_back(svg_path);
            }
        }
    }
    summary.files_written.push_back(csv_path);
    return summary;
}

nlohmann::json replay_record(const nlohmann::json& record) {
    return run_cell(record.at("recipe").get<std::string>(), record.at("params"),
                    record.at("seed").get<std::uint64_t>());
}

}  // namespace dsbm
