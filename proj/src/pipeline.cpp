#include "homs/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homs/error.hpp"
#include "homs/io.hpp"
#include "homs/reconstruct.hpp"
#include "homs/reference.hpp"

namespace homs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string cache_path(const CacheSettings& cache, const std::string& kind, const std::string& key) {
    return (std::filesystem::path(cache.directory) / (kind + "-" + hex64(fnv1a(key)) + ".txt")).string();
}

// Writes through a temporary file so an interrupted run never leaves a truncated entry.
template <class Writer>
void write_atomically(const std::string& path, Writer&& writer) {
    ensure_parent_dir(path);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        writer(out);
        if (!out) throw IoError("failed writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp + "' into place: " + ec.message());
}

CellSolutions first_order_part(const CellSolutions& all) {
    CellSolutions first;
    first.n_cell = all.n_cell;
    for (int l = 0; l < 2; ++l) {
        first.continuum[l].N = all.continuum[l].N;
        first.continuum[l].M = all.continuum[l].M;
    }
    return first;
}

}  // namespace

CacheSettings CacheSettings::from_environment(const std::string& fallback) {
    if (const char* env = std::getenv("HOMS_CACHE_DIR"); env && *env) return {env};
    return {fallback};
}

CellStage run_cell_stage(const RunConfig& config, const CacheSettings& cache) {
    config.validate();
    CellStage stage;
    stage.cell_mesh = build_unit_square_mesh(config.n_cell, config.materials.geometry, MeshOptions{config.pattern, 1.0});
    const CellOptions options = config.cell_options();
    const std::string path = cache.enabled() ? cache_path(cache, "cells", config.cell_key()) : std::string();

    auto start = Clock::now();
    if (cache.enabled() && std::filesystem::exists(path)) {
        std::ifstream in(path);
        stage.cells = read_cell_archive(in);
        if (stage.cells.n_cell != config.n_cell || !stage.cells.has_second_order)
            throw IoError("cached cell archive '" + path + "' does not match the configuration");
        stage.cells_seconds = seconds_since(start);
        start = Clock::now();
        stage.eff = compute_effective(stage.cell_mesh, config.materials, first_order_part(stage.cells), options);
        stage.homogenize_seconds = seconds_since(start);
        stage.cached = true;
        return stage;
    }

    const CellSolutions first = solve_first_order(stage.cell_mesh, config.materials, options);
    double cells_time = seconds_since(start);
    start = Clock::now();
    stage.eff = compute_effective(stage.cell_mesh, config.materials, first, options);
    stage.homogenize_seconds = seconds_since(start);
    start = Clock::now();
    stage.cells = solve_second_order(stage.cell_mesh, config.materials, first, stage.eff, options);
    stage.cells_seconds = cells_time + seconds_since(start);

    if (cache.enabled()) write_atomically(path, [&](std::ostream& out) { write_cell_archive(out, stage.cells); });
    return stage;
}

ReferenceStage run_reference_stage(const RunConfig& config, const CacheSettings& cache) {
    ReferenceStage stage;
    stage.fine_mesh = build_fine_mesh(config);
    const std::string path = cache.enabled() ? cache_path(cache, "reference", config.reference_key()) : std::string();
    const auto start = Clock::now();
    if (cache.enabled() && std::filesystem::exists(path)) {
        std::ifstream in(path);
        stage.trajectory = read_trajectory_archive(in);
        if (stage.trajectory.size() != static_cast<std::size_t>(config.num_steps()) + 1 ||
            static_cast<std::size_t>(stage.trajectory.u[0][0].size()) != stage.fine_mesh.num_nodes())
            throw IoError("cached reference '" + path + "' does not match the configuration");
        stage.seconds = seconds_since(start);
        stage.cached = true;
        return stage;
    }
    stage.trajectory = solve_multiscale(config, stage.fine_mesh);
    stage.seconds = seconds_since(start);
    if (cache.enabled())
        write_atomically(path, [&](std::ostream& out) { write_trajectory_archive(out, stage.trajectory); });
    return stage;
}

ComparisonResult run_comparison(const RunConfig& config, const CacheSettings& cache) {
    config.validate();
    ComparisonResult r;
    r.config = config;
    r.cell = run_cell_stage(config, cache);
    r.times.cells = r.cell.cells_seconds;
    r.times.homogenize = r.cell.homogenize_seconds;

    auto start = Clock::now();
    r.macro_mesh = build_unit_square_mesh(config.n_macro, InclusionSpec::none(), MeshOptions{config.pattern, 1.0});
    r.macro = solve_homogenized(config, r.cell.eff, r.macro_mesh);
    r.times.macro = seconds_since(start);

    r.reference = run_reference_stage(config, cache);
    r.times.reference = r.reference.seconds;

    start = Clock::now();
    const Reconstructor rec(r.macro_mesh, r.cell.cell_mesh, r.reference.fine_mesh, config.eps);
    r.errors = error_evolution(r.reference.trajectory, r.macro, rec, r.cell.cells, config.thinning);
    r.times.reconstruct = seconds_since(start);
    r.errors.check_finite();
    return r;
}

RunConfig with_eps(const RunConfig& config, double eps) {
    RunConfig c = config;
    const int per_period = config.n_fine / config.periods();
    c.eps = eps;
    c.n_fine = per_period * c.periods();
    c.validate();
    return c;
}

void RunManifest::write(const std::string& path) const {
    write_atomically(path, [&](std::ostream& out) {
        out << "section,key,value\n";
        out << "version,homs," << version_string() << "\n";
        std::istringstream echo(config_echo);
        std::string line;
        while (std::getline(echo, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string value = line.substr(eq + 1);
            for (char& ch : value)
                if (ch == ',') ch = ';';
            out << "config," << line.substr(0, eq) << "," << value << "\n";
        }
        if (eff) {
            for (int l = 0; l < 2; ++l) {
                const std::string p = "l" + std::to_string(l + 1) + ".";
                out << "effective," << p << "c_star," << format_double(eff->c_star[l]) << "\n";
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        out << "effective," << p << "kappa_star" << i + 1 << j + 1 << ","
                            << format_double(eff->kappa_star[l][i][j]) << "\n";
                for (int i = 0; i < 2; ++i) {
                    out << "effective," << p << "kbar1_" << i + 1 << "," << format_double(eff->kbar1[l][i]) << "\n";
                    out << "effective," << p << "kbar2_" << i + 1 << "," << format_double(eff->kbar2[l][i]) << "\n";
                }
                out << "effective," << p << "q_star," << format_double(eff->q_star[l]) << "\n";
            }
        }
        for (const auto& [stage, s] : stage_seconds) out << "seconds," << stage << "," << format_double(s) << "\n";
        for (const auto& [k, v] : notes) out << "note," << k << "," << v << "\n";
        for (const auto& f : files) out << "file," << std::filesystem::path(f).filename().string() << "," << f << "\n";
    });
}

const char* version_string() { return "homs 1.0.0"; }

}  // namespace homs
