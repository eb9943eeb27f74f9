#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "homs/cells.hpp"
#include "homs/expression.hpp"
#include "homs/materials.hpp"
#include "homs/mesh.hpp"

namespace homs {

/// Everything a pipeline run needs. Defaults reproduce the porous-media example.
struct RunConfig {
    double eps = 0.125;
    int n_macro = 64;
    int n_cell = 32;
    int n_fine = 256;
    DiagonalPattern pattern = DiagonalPattern::uniform;

    double dt = 0.02;
    double t_end = 1.0;

    ScalarField q = 1e5;
    ScalarField g1 = 10.0;
    ScalarField g2 = 10.0;
    ScalarField bc = 10.0;

    MaterialSpec materials = example1_materials();

    double solver_tol = 1e-10;
    bool strict_signs = true;
    bool k2bar_uses_M2 = false;

    std::string output_dir = "homs_out";
    std::vector<double> vtk_times;
    int thinning = 1;
    int threads = 1;
    std::vector<double> sweep_eps;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// k with eps = 1/k.
    int periods() const;
    /// round(t_end / dt).
    int num_steps() const;

    CellOptions cell_options() const;

    /// Stable "key=value" lines covering every setting; used for echoes and cache keys.
    std::string canonical() const;
    /// Subset of canonical() that determines the cell solutions.
    std::string cell_key() const;
    /// Subset that determines the fine reference trajectory.
    std::string reference_key() const;
};

/// Parses "# comment" / "key = value" lines on top of `base`. Unknown keys and malformed
/// values throw ConfigError. The result is validated.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Applies one key=value setting without validating the whole config.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies every "key = value" line of a stream without validating; `source` labels errors.
void apply_settings(RunConfig& config, std::istream& in, const std::string& source = "config");

/// "1/8", "0.125", "1e-3".
double parse_number(const std::string& text);

}  // namespace homs
