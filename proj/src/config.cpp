#include "homs/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "homs/error.hpp"
#include "homs/io.hpp"

namespace homs {

namespace {

std::vector<std::string> tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    double d = 0.0;
    try {
        d = parse_number(v);
    } catch (const InvalidArgument&) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        return parse_number(v);
    } catch (const InvalidArgument&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& t : tokens(v)) out.push_back(parse_real(key, t));
    return out;
}

ScalarField parse_field(const std::string& key, const std::string& v) {
    try {
        return ScalarField::parse(v);
    } catch (const InvalidArgument& e) {
        throw ConfigError(key, e.what());
    }
}

Tensor2 parse_tensor(const std::string& key, const std::string& v) {
    const auto parts = tokens(v);
    if (parts.size() == 1) return Tensor2::isotropic(parse_real(key, parts[0]));
    if (parts.size() == 3) return {parse_real(key, parts[0]), parse_real(key, parts[1]), parse_real(key, parts[2])};
    throw ConfigError(key, "expected a scalar or 'kxx kxy kyy'");
}

std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
}

void set_material(MaterialSpec& m, const std::string& key, const std::string& value) {
    // material.<name><l>.<phase>
    const auto parts = split(key, '.');
    if (parts.size() != 3 || parts[1].size() < 2) throw ConfigError(key, "unknown key");
    const std::string name = parts[1].substr(0, parts[1].size() - 1);
    const char lc = parts[1].back();
    if (lc != '1' && lc != '2') throw ConfigError(key, "unknown key");
    const int l = lc - '1';
    Phase p;
    if (parts[2] == "matrix") p = Phase::matrix;
    else if (parts[2] == "inclusion") p = Phase::inclusion;
    else throw ConfigError(key, "phase must be 'matrix' or 'inclusion'");
    if (name == "c") m.capacity[l][p] = parse_real(key, value);
    else if (name == "k") m.permeability[l][p] = parse_tensor(key, value);
    else if (name == "Q") m.exchange[l][p] = parse_real(key, value);
    else throw ConfigError(key, "unknown key");
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    const auto slash = t.find('/');
    if (slash == std::string::npos) return parse_double(t);
    const double num = parse_double(t.substr(0, slash));
    const double den = parse_double(t.substr(slash + 1));
    if (den == 0.0) throw InvalidArgument("division by zero in '" + t + "'");
    return num / den;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (value.empty()) throw ConfigError(key, "missing value");

    if (key == "eps") c.eps = parse_real(key, value);
    else if (key == "mesh.n_macro") c.n_macro = parse_int(key, value);
    else if (key == "mesh.n_cell") c.n_cell = parse_int(key, value);
    else if (key == "mesh.n_fine") c.n_fine = parse_int(key, value);
    else if (key == "mesh.pattern") {
        if (value == "uniform") c.pattern = DiagonalPattern::uniform;
        else if (value == "symmetric") c.pattern = DiagonalPattern::symmetric;
        else throw ConfigError(key, "expected 'uniform' or 'symmetric'");
    } else if (key == "dt") c.dt = parse_real(key, value);
    else if (key == "t_end") c.t_end = parse_real(key, value);
    else if (key == "q") c.q = parse_field(key, value);
    else if (key == "g1") c.g1 = parse_field(key, value);
    else if (key == "g2") c.g2 = parse_field(key, value);
    else if (key == "g") c.g1 = c.g2 = parse_field(key, value);
    else if (key == "bc") c.bc = parse_field(key, value);
    else if (key == "geometry.kind") {
        auto& g = c.materials.geometry;
        if (value == "none") g.kind = InclusionSpec::Kind::none;
        else if (value == "disk") g.kind = InclusionSpec::Kind::disk;
        else if (value == "axis_cross") g.kind = InclusionSpec::Kind::axis_cross;
        else if (value == "stripes") g.kind = InclusionSpec::Kind::stripes;
        else throw ConfigError(key, "expected none, disk, axis_cross or stripes");
    } else if (key == "geometry.radius") c.materials.geometry.radius = parse_real(key, value);
    else if (key == "geometry.half_width") c.materials.geometry.half_width = parse_real(key, value);
    else if (key == "geometry.direction") c.materials.geometry.direction = parse_int(key, value);
    else if (key == "geometry.center") {
        const auto v = parse_list(key, value);
        if (v.size() != 2) throw ConfigError(key, "expected two coordinates");
        c.materials.geometry.center = {v[0], v[1]};
    } else if (key.rfind("material.", 0) == 0) set_material(c.materials, key, value);
    else if (key == "solver.tol") c.solver_tol = parse_real(key, value);
    else if (key == "flags.k2bar_uses_M2") c.k2bar_uses_M2 = parse_bool(key, value);
    else if (key == "flags.strict_signs") c.strict_signs = parse_bool(key, value);
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "output.vtk_times") c.vtk_times = parse_list(key, value);
    else if (key == "output.thinning") c.thinning = parse_int(key, value);
    else if (key == "threads") c.threads = parse_int(key, value);
    else if (key == "sweep.eps") c.sweep_eps = parse_list(key, value);
    else throw ConfigError(key, "unknown key");
}

void apply_settings(RunConfig& config, std::istream& in, const std::string& source) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    apply_settings(base, in);
    base.validate();
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    return parse_config(in, std::move(base));
}

int RunConfig::periods() const { return static_cast<int>(std::lround(1.0 / eps)); }

int RunConfig::num_steps() const { return static_cast<int>(std::lround(t_end / dt)); }

void RunConfig::validate() const {
    if (!(eps > 0.0) || !(eps <= 0.5)) throw ConfigError("eps", "must satisfy 0 < eps <= 1/2");
    const double k = 1.0 / eps;
    if (std::abs(k - std::round(k)) > 1e-9 * k) throw ConfigError("eps", "must be 1/k for an integer k >= 2");
    if (n_macro < 1) throw ConfigError("mesh.n_macro", "must be positive");
    if (n_cell < 2) throw ConfigError("mesh.n_cell", "must be at least 2");
    if (n_fine < 1) throw ConfigError("mesh.n_fine", "must be positive");
    if (n_fine % periods() != 0) throw ConfigError("mesh.n_fine", "must be divisible by 1/eps");
    if (pattern == DiagonalPattern::symmetric && (n_cell % 2 != 0 || n_macro % 2 != 0 || n_fine % 2 != 0))
        throw ConfigError("mesh.pattern", "symmetric pattern needs even subdivisions");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
    if (!(t_end >= dt * (1.0 - 1e-12)) || !std::isfinite(t_end)) throw ConfigError("t_end", "must be at least dt");
    if (std::abs(num_steps() * dt - t_end) > 1e-9 * t_end)
        throw ConfigError("t_end", "must be an integer multiple of dt");
    if (!(solver_tol > 0.0) || solver_tol > 1e-4) throw ConfigError("solver.tol", "must lie in (0, 1e-4]");
    if (thinning < 1) throw ConfigError("output.thinning", "must be positive");
    if (threads < 1) throw ConfigError("threads", "must be positive");
    for (double t : vtk_times)
        if (t < 0.0 || t > t_end + 1e-12) throw ConfigError("output.vtk_times", "times must lie in [0, t_end]");
    for (double e : sweep_eps) {
        const double ks = 1.0 / e;
        if (!(e > 0.0) || e > 0.5 || std::abs(ks - std::round(ks)) > 1e-9 * ks)
            throw ConfigError("sweep.eps", "entries must be 1/k for integers k >= 2");
    }
    try {
        materials.validate();
    } catch (const InvalidMaterial& e) {
        const std::string what = e.what();
        const auto space = what.find(' ');
        if (space == std::string::npos) throw ConfigError("material", what);
        throw ConfigError(what.substr(0, space), what.substr(space + 1));
    } catch (const InvalidArgument& e) {
        throw ConfigError("geometry", e.what());
    }
}

CellOptions RunConfig::cell_options() const {
    CellOptions o;
    o.rel_tol = solver_tol;
    o.strict_signs = strict_signs;
    o.k2bar_uses_M2 = k2bar_uses_M2;
    return o;
}

std::string RunConfig::cell_key() const {
    std::ostringstream os;
    os << "mesh.n_cell=" << n_cell << "\n"
       << "mesh.pattern=" << (pattern == DiagonalPattern::uniform ? "uniform" : "symmetric") << "\n"
       << "materials=" << materials.canonical() << "\n"
       << "solver.tol=" << format_double(solver_tol) << "\n"
       << "flags.strict_signs=" << strict_signs << "\n"
       << "flags.k2bar_uses_M2=" << k2bar_uses_M2 << "\n";
    return os.str();
}

std::string RunConfig::reference_key() const {
    std::ostringstream os;
    os << "eps=" << format_double(eps) << "\n"
       << "mesh.n_fine=" << n_fine << "\n"
       << "mesh.pattern=" << (pattern == DiagonalPattern::uniform ? "uniform" : "symmetric") << "\n"
       << "dt=" << format_double(dt) << "\n"
       << "t_end=" << format_double(t_end) << "\n"
       << "q=" << q.text() << "\ng1=" << g1.text() << "\ng2=" << g2.text() << "\nbc=" << bc.text() << "\n"
       << "materials=" << materials.canonical() << "\n"
       << "solver.tol=" << format_double(solver_tol) << "\n";
    return os.str();
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << reference_key() << cell_key() << "mesh.n_macro=" << n_macro << "\n"
       << "output.dir=" << output_dir << "\n"
       << "output.vtk_times=" << list_text(vtk_times) << "\n"
       << "output.thinning=" << thinning << "\n"
       << "threads=" << threads << "\n"
       << "sweep.eps=" << list_text(sweep_eps) << "\n";
    return os.str();
}

}  // namespace homs
