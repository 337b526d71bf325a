#pragma once
// Experiment recipes: parameter grids of generate+infer cells with
// replications, aggregated into per-panel CSV files plus SVG quick-look
// renderings. Every cell logs a replayable RunRecord.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace dsbm {

struct ExperimentSpec {
    std::string recipe;  // phase-diagram | ahat-vs-xi | overlap-vs-lag | learn-grid |
                         // performance-grid | custom
    std::string out_dir;
    int replications = 10;
    std::uint64_t base_seed = 1;
    int workers = 0;      // 0 = DSBM_WORKERS or hardware concurrency
    int grid_points = 20; // (xi, eta) lattice resolution where a recipe needs one

    // Optional overrides; empty vectors select recipe defaults.
    std::vector<double> xi_grid;
    std::vector<double> eta_grid;
    std::vector<double> a_grid;
    std::vector<int> t_grid;
    int n_nodes = 0;
    int n_steps = -1;
    int k = 0;
    double cbar = 0.0;

    void validate() const;
};

struct ExperimentSummary {
    int cells = 0;
    int failed_cells = 0;
    std::vector<std::string> files_written;
};

// Executes the grid, writes <recipe>.csv (+ SVGs) and runrecords.jsonl under
// spec.out_dir. Cell failures are recorded and do not abort the run.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

// Re-executes the cell described by a RunRecord and returns fresh outputs;
// replaying a record must reproduce record["outputs"] exactly.
nlohmann::json replay_record(const nlohmann::json& record);

}  // namespace dsbm
