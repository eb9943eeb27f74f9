#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homs/cells.hpp"
#include "homs/config.hpp"
#include "homs/effective.hpp"
#include "homs/macro_solver.hpp"
#include "homs/mesh.hpp"
#include "homs/metrics.hpp"

namespace homs {

/// Where cached cell archives and reference trajectories live. An empty directory disables
/// caching.
struct CacheSettings {
    std::string directory;

    /// HOMS_CACHE_DIR if set, otherwise `fallback`.
    static CacheSettings from_environment(const std::string& fallback);
    bool enabled() const { return !directory.empty(); }
};

struct CellStage {
    Mesh cell_mesh;
    CellSolutions cells;  // first and second order
    EffectiveCoefficients eff;
    double cells_seconds = 0.0;
    double homogenize_seconds = 0.0;
    bool cached = false;
};

/// First-order cells, effective coefficients, second-order cells.
CellStage run_cell_stage(const RunConfig& config, const CacheSettings& cache = {});

struct ReferenceStage {
    Mesh fine_mesh;
    MacroTrajectory trajectory;
    double seconds = 0.0;
    bool cached = false;
};

ReferenceStage run_reference_stage(const RunConfig& config, const CacheSettings& cache = {});

struct StageTimes {
    double cells = 0.0;
    double homogenize = 0.0;
    double macro = 0.0;
    double reconstruct = 0.0;
    double reference = 0.0;

    /// cells + homogenize + macro + reconstruct.
    double pipeline() const { return cells + homogenize + macro + reconstruct; }
};

struct ComparisonResult {
    RunConfig config;
    CellStage cell;
    Mesh macro_mesh;
    MacroTrajectory macro;
    ReferenceStage reference;
    ErrorSeries errors;
    StageTimes times;
};

/// Full HOMS pipeline plus reference solve and error evolution.
ComparisonResult run_comparison(const RunConfig& config, const CacheSettings& cache = {});

/// Config for another ε with the same fine resolution per period.
RunConfig with_eps(const RunConfig& config, double eps);

/// Echo, coefficients, timings and file inventory as CSV rows "section,key,value".
struct RunManifest {
    std::string config_echo;
    std::optional<EffectiveCoefficients> eff;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::pair<std::string, std::string>> notes;
    std::vector<std::string> files;

    void write(const std::string& path) const;
};

/// Version string baked into manifests.
const char* version_string();

}  // namespace homs
