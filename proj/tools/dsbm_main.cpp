// Command-line front end: generate, infer, theory, experiment, score.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsbm/bp.hpp"
#include "dsbm/experiment.hpp"
#include "dsbm/generator.hpp"
#include "dsbm/io.hpp"
#include "dsbm/lsd.hpp"
#include "dsbm/parallel.hpp"
#include "dsbm/rng.hpp"
#include "dsbm/svg.hpp"
#include "dsbm/theory.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_prior(const std::string& csv, int k) {
    if (csv.empty()) return dsbm::ModelParams::uniform_prior(k);
    std::vector<double> prior;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) prior.push_back(std::stod(item));
    if (static_cast<int>(prior.size()) != k)
        throw std::invalid_argument("prior must list exactly k probabilities");
    return prior;
}

int cmd_generate(int n_nodes, int n_steps, int k, double assort, double cbar, double xi,
                 double eta, std::uint64_t seed, const std::string& out,
                 const std::string& prior_csv) {
    dsbm::ModelParams params;
    params.n_nodes = n_nodes;
    params.n_steps = n_steps;
    params.k = k;
    params.assortativity = assort;
    params.mean_degree = cbar;
    params.link_persistence = xi;
    params.community_persistence = eta;
    params.prior = parse_prior(prior_csv, k);
    params.validate();

    std::filesystem::create_directories(out);
    auto data = dsbm::generate(params, seed);
    dsbm::write_network_file(out + "/network.txt", data.network);
    dsbm::write_assignments_file(out + "/planted.csv", data.planted);
    dsbm::write_params_file(out + "/params.txt",
                            {{"n_nodes", std::to_string(n_nodes)},
                             {"n_steps", std::to_string(n_steps)},
                             {"k", std::to_string(k)},
                             {"assortativity", std::to_string(assort)},
                             {"mean_degree", std::to_string(cbar)},
                             {"xi", std::to_string(xi)},
                             {"eta", std::to_string(eta)},
                             {"seed", std::to_string(seed)}});

    // Summary: per-snapshot edge counts plus empirical persistence.
    std::size_t carried = 0, prev_edges = 0;
    std::size_t label_same = 0;
    for (int t = 0; t <= n_steps; ++t) {
        const auto& snap = data.network.snapshots[static_cast<std::size_t>(t)];
        std::cout << "t=" << t << " edges=" << snap.size() << '\n';
        if (t > 0) {
            const auto& prev = data.network.snapshots[static_cast<std::size_t>(t - 1)];
            for (const auto& e : prev)
                carried += std::binary_search(snap.begin(), snap.end(), e) ? 1 : 0;
            prev_edges += prev.size();
            const auto& g = data.planted.labels[static_cast<std::size_t>(t)];
            const auto& gp = data.planted.labels[static_cast<std::size_t>(t - 1)];
            for (int i = 0; i < n_nodes; ++i)
                label_same += g[static_cast<std::size_t>(i)] == gp[static_cast<std::size_t>(i)];
        }
    }
    if (n_steps > 0) {
        std::cout << "carried-edge fraction: "
                  << (prev_edges ? static_cast<double>(carried) / prev_edges : 0.0) << '\n'
                  << "label persistence: "
                  << static_cast<double>(label_same) / (static_cast<double>(n_nodes) * n_steps)
                  << '\n';
    }
    std::cout << "wrote " << out << "/network.txt, planted.csv, params.txt\n";
    return 0;
}

int cmd_infer(const std::string& input, int k, const std::string& mode, std::uint64_t seed,
              const std::string& out, const std::string& planted_path, int max_iter, double tol,
              double damping, double init_amp, int workers) {
    auto network = dsbm::read_network_file(input);
    auto prior = dsbm::ModelParams::uniform_prior(k);
    dsbm::BpConfig config;
    config.max_iterations = max_iter;
    config.convergence_tol = tol;
    config.damping = damping;
    config.random_init_amplitude = init_amp;
    config.seed = seed;

    std::filesystem::create_directories(out);
    std::optional<dsbm::AssignmentSequence> planted;
    if (!planted_path.empty()) {
        planted = dsbm::read_assignments_file(planted_path);
        if (planted->n_snapshots() != network.n_snapshots())
            throw std::invalid_argument("planted sequence does not match network snapshots");
    }

    auto write_snapshot_csv = [&](const dsbm::SnapshotSweep& sweep) {
        std::ofstream os(out + "/snapshots.csv");
        os << "t,a_hat_star,converged\n";
        for (int t = 0; t < network.n_snapshots(); ++t)
            os << t << ',' << sweep.a_star[static_cast<std::size_t>(t)] << ','
               << static_cast<int>(sweep.converged[static_cast<std::size_t>(t)]) << '\n';
    };

    if (mode == "static") {
        auto sweep = dsbm::snapshot_sweep(network, k, prior, config, workers);
        dsbm::AssignmentSequence inferred;
        inferred.labels = sweep.aligned;
        dsbm::write_assignments_file(out + "/assignments.csv", inferred);
        write_snapshot_csv(sweep);
        if (planted) {
            std::ofstream os(out + "/overlaps.csv");
            os << "t,overlap_raw\n";
            for (int t = 0; t < network.n_snapshots(); ++t)
                os << t << ','
                   << dsbm::overlap(planted->labels[static_cast<std::size_t>(t)],
                                    sweep.aligned[static_cast<std::size_t>(t)], prior, true)
                   << '\n';
        }
        std::cout << "wrote " << out << "/assignments.csv, snapshots.csv\n";
        return 0;
    }
    if (mode != "lsd") throw std::invalid_argument("mode must be static or lsd");

    auto result = dsbm::lsd_run(network, k, prior, config, workers);
    write_snapshot_csv(result.sweep);

    json summary = {{"ok", result.ok},
                    {"eta_hat", result.eta_hat},
                    {"xi_hat", result.xi_hat},
                    {"tau_star_hat", result.tau_star_hat},
                    {"a_star_hat", result.a_star_hat},
                    {"a_hat", result.a_hat},
                    {"eta_saturated", result.eta_saturated},
                    {"xi_clamped", result.xi_clamped},
                    {"lag_exceeds_horizon", result.lag_exceeds_horizon},
                    {"burn_in", result.burn_in},
                    {"valid_until", 0}};
    if (!result.ok) summary["error"] = result.error;
    int valid_until = -1;
    for (std::size_t t = 0; t < result.corrected_valid.size(); ++t)
        if (result.corrected_valid[t]) valid_until = static_cast<int>(t);
    summary["valid_until"] = valid_until;
    {
        std::ofstream os(out + "/lsd_summary.json");
        os << summary.dump(2) << '\n';
    }
    if (result.ok) {
        dsbm::AssignmentSequence corrected;
        corrected.labels.assign(result.corrected_assignments.labels.begin(),
                                result.corrected_assignments.labels.begin() + valid_until + 1);
        dsbm::write_assignments_file(out + "/corrected.csv", corrected);
        if (planted) {
            std::ofstream os(out + "/overlaps.csv");
            os << "t,overlap_raw,overlap_corrected\n";
            for (int t = 0; t < network.n_snapshots(); ++t) {
                os << t << ','
                   << dsbm::overlap(planted->labels[static_cast<std::size_t>(t)],
                                    result.sweep.aligned[static_cast<std::size_t>(t)], prior,
                                    true)
                   << ',';
                if (t <= valid_until)
                    os << dsbm::overlap(
                        planted->labels[static_cast<std::size_t>(t)],
                        result.corrected_assignments.labels[static_cast<std::size_t>(t)], prior,
                        true);
                os << '\n';
            }
        }
    }
    std::cout << summary.dump(2) << '\n';
    if (!result.ok) return 2;
    std::cout << "wrote " << out << "/lsd_summary.json, corrected.csv, snapshots.csv\n";
    return 0;
}

int cmd_theory(double cbar, double xi, double eta, double assort, const std::string& t_flag,
               int max_lag, bool phase_diagram, int grid_points, const std::string& out) {
    std::filesystem::create_directories(out);
    if (phase_diagram) {
        dsbm::ExperimentSpec spec;
        spec.recipe = "phase-diagram";
        spec.out_dir = out;
        spec.grid_points = grid_points;
        spec.cbar = cbar;
        auto summary = dsbm::run_experiment(spec);
        for (const auto& f : summary.files_written) std::cout << "wrote " << f << '\n';
        return 0;
    }

    std::optional<int> t;
    if (t_flag != "inf") {
        int value = std::stoi(t_flag);
        if (value < 0) throw std::invalid_argument("t must be non-negative or 'inf'");
        t = value;
    }
    auto profile = dsbm::optimal_lag(xi, eta, t);
    int tau_max = t.has_value() ? *t : std::min<int>(max_lag, static_cast<int>(profile.values.size()) - 1);
    {
        std::ofstream os(out + "/lag_profile.csv");
        os << "tau,a_eff\n";
        for (int tau = 0; tau <= tau_max; ++tau)
            os << tau << ',' << assort * profile.values[static_cast<std::size_t>(tau)] << '\n';
    }
    {
        std::ofstream os(out + "/thresholds.csv");
        os << "mode,a_c\n";
        os << "static," << dsbm::detectability_threshold(cbar, xi, eta, dsbm::ThresholdMode::Static)
           << '\n';
        os << "single-snapshot,"
           << dsbm::detectability_threshold(cbar, xi, eta,
                                            dsbm::ThresholdMode::SingleSnapshotAsymptotic)
           << '\n';
        os << "lag-corrected,"
           << dsbm::detectability_threshold(cbar, xi, eta, dsbm::ThresholdMode::LagCorrected)
           << '\n';
    }
    std::cout << "tau_star=" << profile.tau_star << " a_star=" << assort * profile.a_star
              << " delta=" << profile.delta << '\n'
              << "wrote " << out << "/lag_profile.csv, thresholds.csv\n";
    return 0;
}

int cmd_score(const std::string& planted_path, const std::string& inferred_path, int k,
              bool no_permute, const std::string& out) {
    auto planted = dsbm::read_assignments_file(planted_path);
    auto inferred = dsbm::read_assignments_file(inferred_path);
    auto prior = dsbm::ModelParams::uniform_prior(k);
    int n = std::min(planted.n_snapshots(), inferred.n_snapshots());
    std::ostringstream csv;
    csv << "t,overlap\n";
    for (int t = 0; t < n; ++t)
        csv << t << ','
            << dsbm::overlap(planted.labels[static_cast<std::size_t>(t)],
                             inferred.labels[static_cast<std::size_t>(t)], prior, !no_permute)
            << '\n';
    if (out.empty())
        std::cout << csv.str();
    else
        dsbm::write_text_file(out, csv.str());
    return 0;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    if (csv.empty()) return grid;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persistent dynamic SBM: generation, inference, theory, experiments"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "sample a temporal network with planted labels");
    int g_nodes = 300, g_steps = 40, g_groups = 2;
    double g_assort = 0.9, g_cbar = 10.0, g_xi = 0.0, g_eta = 0.5;
    std::uint64_t g_seed = 1;
    std::string g_out = "out", g_prior;
    gen->add_option("--nodes", g_nodes, "number of nodes N")->required();
    gen->add_option("--steps", g_steps, "number of transitions T (T+1 snapshots)")->required();
    gen->add_option("--groups", g_groups, "number of groups k");
    gen->add_option("--assort", g_assort, "assortativity a in [0,1]");
    gen->add_option("--mean-degree", g_cbar, "mean degree cbar");
    gen->add_option("--xi", g_xi, "link persistence in [0,1]");
    gen->add_option("--eta", g_eta, "community persistence in [0,1]");
    gen->add_option("--seed", g_seed, "64-bit seed");
    gen->add_option("--out", g_out, "output directory")->required();
    gen->add_option("--prior", g_prior, "comma-separated group prior (default uniform)");

    // infer
    auto* inf = app.add_subcommand("infer", "run static or LSD inference on a network file");
    std::string i_input, i_mode = "lsd", i_out = "out", i_planted;
    int i_groups = 2, i_max_iter = 500, i_workers = 0;
    double i_tol = 1e-6, i_damping = 0.0, i_init_amp = 0.1;
    std::uint64_t i_seed = 1;
    inf->add_option("--input", i_input, "network file")->required();
    inf->add_option("--groups", i_groups, "number of groups k")->required();
    inf->add_option("--mode", i_mode, "static | lsd");
    inf->add_option("--seed", i_seed, "64-bit seed");
    inf->add_option("--out", i_out, "output directory")->required();
    inf->add_option("--planted", i_planted, "planted assignment file for scoring");
    inf->add_option("--max-iter", i_max_iter, "BP sweep limit");
    inf->add_option("--tol", i_tol, "BP convergence tolerance");
    inf->add_option("--damping", i_damping, "BP damping in [0,1)");
    inf->add_option("--init-amp", i_init_amp, "BP init noise amplitude");
    inf->add_option("--workers", i_workers, "snapshot-level workers (0 = auto)");

    // theory
    auto* thr = app.add_subcommand("theory", "closed-form lag profiles and thresholds");
    double t_cbar = 10.0, t_xi = 0.5, t_eta = 0.75, t_assort = 1.0;
    std::string t_t = "inf", t_out = "out";
    int t_max_lag = 100, t_grid_points = 20;
    bool t_phase = false;
    thr->add_option("--cbar", t_cbar, "mean degree");
    thr->add_option("--xi", t_xi, "link persistence");
    thr->add_option("--eta", t_eta, "community persistence");
    thr->add_option("--assort", t_assort, "assortativity a");
    thr->add_option("--t", t_t, "snapshot time (integer or 'inf')");
    thr->add_option("--max-lag", t_max_lag, "profile cut for asymptotic output");
    thr->add_flag("--phase-diagram", t_phase, "emit the (xi, eta) threshold surface");
    thr->add_option("--grid-points", t_grid_points, "phase diagram resolution");
    thr->add_option("--out", t_out, "output directory")->required();

    // experiment
    auto* exp = app.add_subcommand("experiment", "parameter-grid experiments with CSV/SVG panels");
    dsbm::ExperimentSpec spec;
    std::string e_xi, e_eta, e_a, e_t, e_replay;
    int e_replay_index = 0;
    exp->add_option("--recipe", spec.recipe,
                    "phase-diagram | ahat-vs-xi | overlap-vs-lag | learn-grid | performance-grid "
                    "| custom");
    exp->add_option("--out", spec.out_dir, "output directory");
    exp->add_option("--replications", spec.replications, "replications per cell");
    exp->add_option("--seed", spec.base_seed, "base seed");
    exp->add_option("--workers", spec.workers, "cell-level workers (0 = DSBM_WORKERS/auto)");
    exp->add_option("--grid-points", spec.grid_points, "lattice resolution for (xi, eta)");
    exp->add_option("--grid-xi", e_xi, "explicit xi values, comma-separated");
    exp->add_option("--grid-eta", e_eta, "explicit eta values, comma-separated");
    exp->add_option("--grid-a", e_a, "explicit a values, comma-separated");
    exp->add_option("--grid-t", e_t, "explicit snapshot times, comma-separated");
    exp->add_option("--nodes", spec.n_nodes, "override N");
    exp->add_option("--steps", spec.n_steps, "override T");
    exp->add_option("--groups", spec.k, "override k");
    exp->add_option("--mean-degree", spec.cbar, "override cbar");
    exp->add_option("--replay", e_replay, "replay a runrecords.jsonl file instead of running");
    exp->add_option("--replay-index", e_replay_index, "record index within the replay file");

    // score
    auto* sco = app.add_subcommand("score", "overlap between two assignment files");
    std::string s_planted, s_inferred, s_out;
    int s_groups = 2;
    bool s_no_permute = false;
    sco->add_option("--planted", s_planted, "reference assignment file")->required();
    sco->add_option("--inferred", s_inferred, "assignment file to score")->required();
    sco->add_option("--groups", s_groups, "number of groups k")->required();
    sco->add_flag("--no-permute", s_no_permute, "skip label-permutation maximization");
    sco->add_option("--out", s_out, "write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(g_nodes, g_steps, g_groups, g_assort, g_cbar, g_xi, g_eta, g_seed,
                                g_out, g_prior);
        if (inf->parsed())
            return cmd_infer(i_input, i_groups, i_mode, i_seed, i_out, i_planted, i_max_iter,
                             i_tol, i_damping, i_init_amp, i_workers);
        if (thr->parsed())
            return cmd_theory(t_cbar, t_xi, t_eta, t_assort, t_t, t_max_lag, t_phase,
                              t_grid_points, t_out);
        if (exp->parsed()) {
            if (!e_replay.empty()) {
                std::ifstream is(e_replay);
                if (!is) throw std::runtime_error("cannot open " + e_replay);
                std::string line;
                for (int i = 0; i <= e_replay_index; ++i)
                    if (!std::getline(is, line))
                        throw std::runtime_error("replay index out of range");
                auto record = nlohmann::json::parse(line);
                auto outputs = dsbm::replay_record(record);
                bool match = record.contains("outputs") && outputs == record.at("outputs");
                std::cout << outputs.dump(2) << '\n'
                          << (match ? "replay matches recorded outputs\n"
                                    : "replay DIFFERS from recorded outputs\n");
                return match ? 0 : 2;
            }
            spec.xi_grid = parse_grid(e_xi);
            spec.eta_grid = parse_grid(e_eta);
            spec.a_grid = parse_grid(e_a);
            for (double t : parse_grid(e_t)) spec.t_grid.push_back(static_cast<int>(t));
            auto summary = dsbm::run_experiment(spec);
            std::cout << "cells=" << summary.cells << " failed=" << summary.failed_cells << '\n';
            for (const auto& f : summary.files_written) std::cout << "wrote " << f << '\n';
            return summary.failed_cells == 0 ? 0 : 2;
        }
        if (sco->parsed()) return cmd_score(s_planted, s_inferred, s_groups, s_no_permute, s_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
