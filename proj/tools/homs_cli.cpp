// Command-line driver for the multiscale pipeline.
//
//   homs_cli <command> [--config FILE] [--set key=value ...] [--out DIR] [--threads N] [--no-cache]
//
// Exit codes: 0 success, 2 configuration, 3 linear solver, 4 blow-up, 5 I/O, 1 anything else.

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "homs/config.hpp"
#include "homs/error.hpp"
#include "homs/io.hpp"
#include "homs/macro_solver.hpp"
#include "homs/metrics.hpp"
#include "homs/pipeline.hpp"
#include "homs/reconstruct.hpp"
#include "homs/reference.hpp"

namespace fs = std::filesystem;
using namespace homs;

namespace {

enum ExitCode { ok = 0, generic = 1, config_error = 2, solver_error = 3, blowup_error = 4, io_error = 5 };

struct Options {
    std::string config_path;
    std::vector<std::string> settings;
    std::string out_dir;
    int threads = 0;
    bool no_cache = false;
};

RunConfig resolve_config(const Options& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("", "cannot read config file '" + opt.config_path + "'");
        apply_settings(cfg, in, opt.config_path);
    }
    for (const auto& s : opt.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (opt.threads > 0) cfg.threads = opt.threads;
    cfg.validate();
    Eigen::setNbThreads(cfg.threads);
    return cfg;
}

CacheSettings cache_for(const Options& opt, const RunConfig& cfg) {
    if (opt.no_cache) return {};
    return CacheSettings::from_environment((fs::path(cfg.output_dir) / "cache").string());
}

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); }

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    writer(out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%07.4f", t);
    return buf;
}

// Snapshot times: the configured ones snapped to the time grid, or the final time.
std::vector<double> snapshot_times(const RunConfig& cfg, const MacroTrajectory& traj) {
    std::vector<double> out;
    for (double t : cfg.vtk_times) {
        const auto k = static_cast<std::size_t>(std::lround(t / cfg.dt));
        if (k < traj.size()) out.push_back(traj.times[k]);
    }
    if (out.empty()) out.push_back(traj.times.back());
    return out;
}

void add_effective_files(const RunConfig& cfg, const EffectiveCoefficients& eff, RunManifest& manifest) {
    const std::string path = out_path(cfg, "effective.csv");
    write_file(path, [&](std::ostream& o) { write_effective_csv(o, eff); });
    manifest.files.push_back(path);
}

void print_effective(const EffectiveCoefficients& e) {
    for (int l = 0; l < 2; ++l) {
        std::cout << "continuum " << l + 1 << ": c*=" << format_double(e.c_star[l])
                  << " kappa*=[" << format_double(e.kappa_star[l][0][0]) << " " << format_double(e.kappa_star[l][0][1])
                  << "; " << format_double(e.kappa_star[l][1][0]) << " " << format_double(e.kappa_star[l][1][1])
                  << "] Q*=" << format_double(e.q_star[l]) << "\n";
    }
}

void finish(const RunConfig& cfg, RunManifest& manifest) {
    const std::string path = out_path(cfg, "manifest.csv");
    manifest.files.push_back(path);
    manifest.write(path);
    std::cout << "wrote " << path << "\n";
}

int cmd_cells(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const CellStage st = run_cell_stage(cfg, cache_for(opt, cfg));
    RunManifest m;
    m.config_echo = cfg.canonical();
    m.eff = st.eff;
    m.stage_seconds = {{"cells", st.cells_seconds}, {"homogenize", st.homogenize_seconds}};
    m.notes = {{"cells_cached", st.cached ? "1" : "0"}};

    const std::string archive = out_path(cfg, "cells.txt");
    write_file(archive, [&](std::ostream& o) { write_cell_archive(o, st.cells); });
    m.files.push_back(archive);
    add_effective_files(cfg, st.eff, m);
    const auto fields = st.cells.fields();
    const std::string vtk = out_path(cfg, "cells.vtk");
    write_vtk(vtk, st.cell_mesh, fields, "cell functions");
    m.files.push_back(vtk);
    std::cout << fields.size() << " cell fields" << (st.cached ? " (cached)" : "") << "\n";
    print_effective(st.eff);
    finish(cfg, m);
    return ok;
}

int cmd_homogenize(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const auto start = std::chrono::steady_clock::now();
    const Mesh cell_mesh =
        build_unit_square_mesh(cfg.n_cell, cfg.materials.geometry, MeshOptions{cfg.pattern, 1.0});
    const CellSolutions first = solve_first_order(cell_mesh, cfg.materials, cfg.cell_options());
    const EffectiveCoefficients eff = compute_effective(cell_mesh, cfg.materials, first, cfg.cell_options());
    RunManifest m;
    m.config_echo = cfg.canonical();
    m.eff = eff;
    m.stage_seconds = {
        {"homogenize", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    add_effective_files(cfg, eff, m);
    print_effective(eff);
    finish(cfg, m);
    return ok;
}

int cmd_macro(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const CellStage st = run_cell_stage(cfg, cache_for(opt, cfg));
    const Mesh macro = build_unit_square_mesh(cfg.n_macro, InclusionSpec::none(), MeshOptions{cfg.pattern, 1.0});
    const auto start = std::chrono::steady_clock::now();
    const MacroTrajectory traj = solve_homogenized(cfg, st.eff, macro);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunManifest m;
    m.config_echo = cfg.canonical();
    m.eff = st.eff;
    m.stage_seconds = {{"cells", st.cells_seconds}, {"homogenize", st.homogenize_seconds}, {"macro", secs}};
    add_effective_files(cfg, st.eff, m);
    const std::string summary = out_path(cfg, "macro_summary.csv");
    write_file(summary, [&](std::ostream& o) { write_trajectory_summary(o, traj); });
    m.files.push_back(summary);
    const std::string archive = out_path(cfg, "macro_trajectory.txt");
    write_file(archive, [&](std::ostream& o) { write_trajectory_archive(o, traj); });
    m.files.push_back(archive);
    for (double t : snapshot_times(cfg, traj)) {
        const auto& u = traj.u[traj.index_of(t)];
        const std::vector<NamedField> f{{"u1_homogenized", {u[0].data(), static_cast<std::size_t>(u[0].size())}},
                                        {"u2_homogenized", {u[1].data(), static_cast<std::size_t>(u[1].size())}}};
        const std::string vtk = out_path(cfg, "macro_" + time_tag(t) + ".vtk");
        write_vtk(vtk, macro, f, "homogenized solution at t=" + format_double(t));
        m.files.push_back(vtk);
    }
    std::cout << "macro solve: " << traj.size() - 1 << " steps, " << format_double(secs) << " s\n";
    finish(cfg, m);
    return ok;
}

int cmd_reference(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ReferenceStage st = run_reference_stage(cfg, cache_for(opt, cfg));
    RunManifest m;
    m.config_echo = cfg.canonical();
    m.stage_seconds = {{"reference", st.seconds}};
    m.notes = {{"reference_cached", st.cached ? "1" : "0"}};
    const std::string summary = out_path(cfg, "reference_summary.csv");
    write_file(summary, [&](std::ostream& o) { write_trajectory_summary(o, st.trajectory); });
    m.files.push_back(summary);
    for (double t : snapshot_times(cfg, st.trajectory)) {
        const auto& u = st.trajectory.u[st.trajectory.index_of(t)];
        const std::vector<NamedField> f{{"u1_reference", {u[0].data(), static_cast<std::size_t>(u[0].size())}},
                                        {"u2_reference", {u[1].data(), static_cast<std::size_t>(u[1].size())}}};
        const std::string vtk = out_path(cfg, "reference_" + time_tag(t) + ".vtk");
        write_vtk(vtk, st.fine_mesh, f, "reference solution at t=" + format_double(t));
        m.files.push_back(vtk);
    }
    std::cout << "reference solve: " << st.trajectory.size() - 1 << " steps, " << format_double(st.seconds) << " s"
              << (st.cached ? " (cached)" : "") << "\n";
    finish(cfg, m);
    return ok;
}

std::vector<NamedField> expansion_fields(const std::array<MultiscaleField, 3>& f, const FieldPair* reference,
                                         std::vector<std::string>& names) {
    names.clear();
    std::vector<const Vector*> data;
    for (int l = 0; l < 2; ++l) {
        for (const auto& mf : f) {
            names.push_back("u" + std::to_string(l + 1) + "_" + order_name(mf.order));
            data.push_back(&mf.u[l]);
        }
        if (reference) {
            names.push_back("u" + std::to_string(l + 1) + "_reference");
            data.push_back(&(*reference)[l]);
        }
    }
    std::vector<NamedField> out;
    for (std::size_t i = 0; i < names.size(); ++i)
        out.push_back({names[i], {data[i]->data(), static_cast<std::size_t>(data[i]->size())}});
    return out;
}

int cmd_reconstruct(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const CellStage st = run_cell_stage(cfg, cache_for(opt, cfg));
    const Mesh macro = build_unit_square_mesh(cfg.n_macro, InclusionSpec::none(), MeshOptions{cfg.pattern, 1.0});
    auto start = std::chrono::steady_clock::now();
    const MacroTrajectory traj = solve_homogenized(cfg, st.eff, macro);
    const double macro_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Mesh fine = build_fine_mesh(cfg);

    start = std::chrono::steady_clock::now();
    const Reconstructor rec(macro, st.cell_mesh, fine, cfg.eps);
    RunManifest m;
    m.config_echo = cfg.canonical();
    m.eff = st.eff;
    for (double t : snapshot_times(cfg, traj)) {
        const ExpansionTerms terms = rec.terms(traj, t, st.cells, true);
        const std::array<MultiscaleField, 3> f{Reconstructor::combine(terms, Order::homogenized, cfg.eps),
                                               Reconstructor::combine(terms, Order::foms, cfg.eps),
                                               Reconstructor::combine(terms, Order::homs, cfg.eps)};
        std::vector<std::string> names;
        const auto fields = expansion_fields(f, nullptr, names);
        const std::string vtk = out_path(cfg, "reconstruction_" + time_tag(t) + ".vtk");
        write_vtk(vtk, fine, fields, "multiscale reconstruction at t=" + format_double(t));
        m.files.push_back(vtk);
    }
    const double rec_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m.stage_seconds = {{"cells", st.cells_seconds},
                       {"homogenize", st.homogenize_seconds},
                       {"macro", macro_secs},
                       {"reconstruct", rec_secs}};
    finish(cfg, m);
    return ok;
}

void write_comparison_outputs(const RunConfig& cfg, const ComparisonResult& r, RunManifest& m) {
    m.config_echo = cfg.canonical();
    m.eff = r.cell.eff;
    m.stage_seconds = {{"cells", r.times.cells},         {"homogenize", r.times.homogenize},
                       {"macro", r.times.macro},         {"reconstruct", r.times.reconstruct},
                       {"pipeline", r.times.pipeline()}, {"reference", r.times.reference}};
    m.notes = {{"cells_cached", r.cell.cached ? "1" : "0"}, {"reference_cached", r.reference.cached ? "1" : "0"}};
    add_effective_files(cfg, r.cell.eff, m);
    const std::string errors = out_path(cfg, "errors.csv");
    write_file(errors, [&](std::ostream& o) { write_error_csv(o, r.errors); });
    m.files.push_back(errors);

    const Reconstructor rec(r.macro_mesh, r.cell.cell_mesh, r.reference.fine_mesh, cfg.eps);
    for (double t : snapshot_times(cfg, r.macro)) {
        const ExpansionTerms terms = rec.terms(r.macro, t, r.cell.cells, true);
        const std::array<MultiscaleField, 3> f{Reconstructor::combine(terms, Order::homogenized, cfg.eps),
                                               Reconstructor::combine(terms, Order::foms, cfg.eps),
                                               Reconstructor::combine(terms, Order::homs, cfg.eps)};
        std::vector<std::string> names;
        const auto& ref = r.reference.trajectory.u[r.reference.trajectory.index_of(t)];
        const auto fields = expansion_fields(f, &ref, names);
        const std::string vtk = out_path(cfg, "compare_" + time_tag(t) + ".vtk");
        write_vtk(vtk, r.reference.fine_mesh, fields, "solutions at t=" + format_double(t));
        m.files.push_back(vtk);
    }
}

void print_final_errors(const ErrorSeries& s) {
    const std::size_t k = s.size() - 1;
    std::cout << "t=" << format_double(s.times[k]) << "\n";
    for (int l = 0; l < 2; ++l) {
        for (int o = 0; o < 3; ++o)
            std::cout << "  Lerr" << l + 1 << o << "=" << format_double(s.lerr[l][o][k]) << "  Herr" << l + 1 << o
                      << "=" << format_double(s.herr[l][o][k]) << "\n";
    }
}

int cmd_compare(const Options& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ComparisonResult r = run_comparison(cfg, cache_for(opt, cfg));
    RunManifest m;
    write_comparison_outputs(cfg, r, m);
    print_final_errors(r.errors);
    std::cout << "pipeline " << format_double(r.times.pipeline()) << " s, reference "
              << format_double(r.times.reference) << " s\n";
    finish(cfg, m);
    return ok;
}

int cmd_sweep(const Options& opt, std::vector<double> eps_list) {
    const RunConfig base = resolve_config(opt);
    if (eps_list.empty()) eps_list = base.sweep_eps;
    if (eps_list.size() < 2) throw ConfigError("sweep.eps", "needs at least two values");
    struct Row {
        double eps;
        double homs, foms, hom;
    };
    std::vector<Row> rows;
    RunManifest top;
    top.config_echo = base.canonical();
    for (double e : eps_list) {
        RunConfig cfg = with_eps(base, e);
        cfg.output_dir = (fs::path(base.output_dir) / ("eps_" + std::to_string(cfg.periods()))).string();
        const ComparisonResult r = run_comparison(cfg, cache_for(opt, cfg));
        RunManifest m;
        write_comparison_outputs(cfg, r, m);
        finish(cfg, m);
        top.files.push_back(out_path(cfg, "manifest.csv"));
        rows.push_back({e, error_functional(r.errors, Order::homs), error_functional(r.errors, Order::foms),
                        error_functional(r.errors, Order::homogenized)});
        std::cout << "eps=1/" << cfg.periods() << " HOMS error functional " << format_double(rows.back().homs) << "\n";
    }
    const std::string summary = out_path(base, "sweep_summary.csv");
    write_file(summary, [&](std::ostream& o) {
        o << "eps_coarse,eps_fine,E_homs_coarse,E_homs_fine,ratio_homs,ratio_foms,ratio_homogenized\n";
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const Row& a = rows[i - 1];
            const Row& b = rows[i];
            o << format_double(a.eps) << "," << format_double(b.eps) << "," << format_double(a.homs) << ","
              << format_double(b.homs) << "," << format_double(a.homs / b.homs) << ","
              << format_double(a.foms / b.foms) << "," << format_double(a.hom / b.hom) << "\n";
        }
    });
    top.files.push_back(summary);
    for (std::size_t i = 1; i < rows.size(); ++i)
        std::cout << "ratio eps " << format_double(rows[i - 1].eps) << " -> " << format_double(rows[i].eps) << ": "
                  << format_double(rows[i - 1].homs / rows[i].homs) << "\n";
    finish(base, top);
    return ok;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const InvalidMaterial& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const SolverFailure& e) {
        std::cerr << "linear solver failure: " << e.what() << "\n";
        return solver_error;
    } catch (const BlowupError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return blowup_error;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return generic;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher-order multiscale solver for two-continuum diffusion with exchange"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    Options opt;
    std::vector<double> sweep_eps;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config_path, "key = value configuration file");
        sub->add_option("-s,--set", opt.settings, "override one setting, e.g. --set eps=1/8")->take_all();
        sub->add_option("-o,--out", opt.out_dir, "output directory (overrides output.dir)");
        sub->add_option("-j,--threads", opt.threads, "thread cap")->check(CLI::PositiveNumber);
        sub->add_flag("--no-cache", opt.no_cache, "ignore and do not write cached cell and reference results");
    };

    auto* cells = app.add_subcommand("cells", "solve all cell problems; write archive, VTK and coefficients");
    auto* hom = app.add_subcommand("homogenize", "first-order cells and effective coefficients only");
    auto* macro = app.add_subcommand("macro", "solve the homogenized two-continuum system");
    auto* ref = app.add_subcommand("reference", "solve the original problem on the fine mesh");
    auto* rec = app.add_subcommand("reconstruct", "first- and second-order reconstructions on the fine mesh");
    auto* cmp = app.add_subcommand("compare", "full pipeline against the reference: errors, timings, snapshots");
    auto* sweep = app.add_subcommand("sweep-eps", "compare runs for several periods and report error ratios");
    for (auto* s : {cells, hom, macro, ref, rec, cmp, sweep}) add_common(s);
    sweep->add_option("--eps", sweep_eps, "periods to compare (default: sweep.eps)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    if (*cells) return run_guarded([&] { return cmd_cells(opt); });
    if (*hom) return run_guarded([&] { return cmd_homogenize(opt); });
    if (*macro) return run_guarded([&] { return cmd_macro(opt); });
    if (*ref) return run_guarded([&] { return cmd_reference(opt); });
    if (*rec) return run_guarded([&] { return cmd_reconstruct(opt); });
    if (*cmp) return run_guarded([&] { return cmd_compare(opt); });
    if (*sweep) return run_guarded([&] { return cmd_sweep(opt, sweep_eps); });
    return generic;
}
