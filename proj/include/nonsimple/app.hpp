#pragma once

// Batch front end: RunConfig ingestion, scenario assembly and artifact export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nonsimple/analysis.hpp"
#include "nonsimple/discretization.hpp"
#include "nonsimple/energy.hpp"
#include "nonsimple/solver.hpp"

namespace nonsimple {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitNotConverged = 3,
    kExitHypothesis = 4,
};

/// A constant value or a per-node text file (one node per line, x fastest).
struct NodalSource {
    std::vector<double> constant; ///< 3 entries for vectors, 6 (row-major 3x2) for B
    std::string file;             ///< as written in the config
};

struct RunConfig {
    Grid2D domain;
    MaterialParams material;

    std::array<EdgeTag, 4> edges{EdgeTag::Clamped, EdgeTag::Clamped, EdgeTag::Clamped,
                                 EdgeTag::Clamped};
    bool planar = false;
    std::string f_o_preset = "identity"; ///< identity | stretch | custom
    double lambda_x = 1.0;
    double lambda_y = 1.0;
    std::string f_o_file;

    NodalSource b{{0.0, 0.0, 0.0}, {}};
    NodalSource B{{0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, {}};
    std::array<std::optional<Vec3>, 4> tau; ///< per edge
    std::array<std::optional<Vec3>, 4> mu;  ///< per edge

    SolveConfig solver;

    std::string output_directory = "out";
    std::vector<std::string> formats{"vtk", "csv", "json"};

    std::filesystem::path base_dir; ///< relative file paths resolve against this

    /// Strict parse: unknown keys and wrong types raise ConfigError with the field path.
    static RunConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
    nlohmann::json to_json() const;

    /// Loads nodal files and builds the discrete problem.
    Problem make_problem() const;
};

RunConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Sets a dotted path (array entries by index, e.g. "loads.b.2") in a config document.
void set_json_path(nlohmann::json& doc, const std::string& path, double value);

/// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Legacy ASCII STRUCTURED_GRID with point data J, kappa and the density terms.
void write_vtk(std::ostream& os, const Field& field, const Problem& problem);

struct CheckOutcome {
    int exit_code = kExitOk;
    nlohmann::json report;
};

/// Growth, coercivity, objectivity and lifted-convexity checks of the configured density.
CheckOutcome cmd_check(const RunConfig& config, bool allow_noncoercive, std::uint64_t seed = 1);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    bool allow_noncoercive = false;
    bool skip_check = false;
};

/// In-memory result of one scenario, plus its reports.
struct RunArtifacts {
    MinimizeResult result;
    ResidualReport residual;
    nlohmann::json eta; ///< EtaReport or {"status": "inapplicable", ...}
    std::optional<EtaReport> eta_report;
    double residual_threshold = 1e-6; ///< max normalized residual accepted as stationary
};

/// The residual threshold is 10 grad_tol.
RunArtifacts analyze(const MinimizeResult& result, const Problem& problem,
                     const SolveConfig& config);

/// Writes the configured formats for one solved scenario into `dir`.
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& art,
                     const Problem& problem, const std::vector<std::string>& formats);

int cmd_run(const RunConfig& config, const RunOptions& options, std::ostream& log);

struct SweepOptions {
    RunOptions run;
    bool compare_flat = false; ///< also solve each step with e3 frozen and record its energy
};

int cmd_sweep(const nlohmann::json& document, const std::filesystem::path& base_dir,
              const std::string& param, const std::vector<double>& values,
              const SweepOptions& options, std::ostream& log);

} // namespace nonsimple
