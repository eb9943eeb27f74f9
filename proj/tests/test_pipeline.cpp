#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "homs/error.hpp"
#include "homs/pipeline.hpp"

using namespace homs;
namespace fs = std::filesystem;

namespace {

RunConfig tiny() {
    RunConfig c;
    c.eps = 0.25;
    c.n_cell = 8;
    c.n_macro = 8;
    c.n_fine = 32;
    c.dt = 0.1;
    c.t_end = 0.3;
    return c;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("homs_pipeline_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Pipeline, CellStageCacheHitIsIdentical) {
    const fs::path dir = scratch("cells");
    CacheSettings cache{dir.string()};
    CellStage a = run_cell_stage(tiny(), cache);
    EXPECT_FALSE(a.cached);
    CellStage b = run_cell_stage(tiny(), cache);
    EXPECT_TRUE(b.cached);
    auto fa = a.cells.fields(), fb = b.cells.fields();
    ASSERT_EQ(fa.size(), 26u);
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t k = 0; k < fa.size(); ++k)
        for (std::size_t i = 0; i < fa[k].values.size(); ++i) ASSERT_EQ(fa[k].values[i], fb[k].values[i]);
    for (int l = 0; l < 2; ++l) {
        EXPECT_EQ(a.eff.kappa_star[l], b.eff.kappa_star[l]);
        EXPECT_EQ(a.eff.q_star[l], b.eff.q_star[l]);
        EXPECT_EQ(a.eff.kbar1[l], b.eff.kbar1[l]);
    }
    std::size_t archives = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        EXPECT_EQ(e.path().extension(), ".txt");
        ++archives;
    }
    EXPECT_EQ(archives, 1u);

    // A setting that changes the cell problems misses the cache.
    RunConfig other = tiny();
    other.materials.exchange[0].matrix = 3.0;
    EXPECT_FALSE(run_cell_stage(other, cache).cached);
    fs::remove_all(dir);
}

TEST(Pipeline, ReferenceStageCache) {
    const fs::path dir = scratch("reference");
    CacheSettings cache{dir.string()};
    ReferenceStage a = run_reference_stage(tiny(), cache);
    ReferenceStage b = run_reference_stage(tiny(), cache);
    EXPECT_FALSE(a.cached);
    EXPECT_TRUE(b.cached);
    ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
    for (std::size_t k = 0; k < a.trajectory.size(); ++k)
        for (int l = 0; l < 2; ++l) EXPECT_EQ(a.trajectory.u[k][l], b.trajectory.u[k][l]);
    RunConfig other = tiny();
    other.dt = 0.05;
    EXPECT_FALSE(run_reference_stage(other, cache).cached);
    fs::remove_all(dir);
}

TEST(Pipeline, DisabledCacheWritesNothing) {
    CacheSettings none;
    EXPECT_FALSE(none.enabled());
    CellStage s = run_cell_stage(tiny(), none);
    EXPECT_FALSE(s.cached);
    EXPECT_GE(s.cells_seconds, 0.0);
}

TEST(Pipeline, CacheDirectoryFromEnvironment) {
    ::setenv("HOMS_CACHE_DIR", "/tmp/somewhere", 1);
    EXPECT_EQ(CacheSettings::from_environment("fallback").directory, "/tmp/somewhere");
    ::unsetenv("HOMS_CACHE_DIR");
    EXPECT_EQ(CacheSettings::from_environment("fallback").directory, "fallback");
}

TEST(Pipeline, ComparisonProducesConsistentResults) {
    ComparisonResult r = run_comparison(tiny());
    EXPECT_EQ(r.macro.size(), 4u);
    EXPECT_EQ(r.reference.trajectory.size(), 4u);
    EXPECT_EQ(r.errors.size(), 3u);
    r.errors.check_finite();
    EXPECT_GE(r.times.cells, 0.0);
    EXPECT_GE(r.times.reference, 0.0);
    EXPECT_DOUBLE_EQ(r.times.pipeline(), r.times.cells + r.times.homogenize + r.times.macro + r.times.reconstruct);
    // Deterministic numeric output.
    ComparisonResult again = run_comparison(tiny());
    for (int l = 0; l < 2; ++l)
        for (int o = 0; o < 3; ++o) EXPECT_EQ(r.errors.lerr[l][o], again.errors.lerr[l][o]);
}

TEST(Pipeline, WithEpsKeepsResolutionPerPeriod) {
    RunConfig c = tiny();  // 8 fine cells per period
    RunConfig half = with_eps(c, 0.125);
    EXPECT_EQ(half.n_fine, 64);
    EXPECT_EQ(half.eps, 0.125);
    EXPECT_EQ(half.n_cell, c.n_cell);
    EXPECT_THROW(with_eps(c, 0.3), ConfigError);
}

TEST(Pipeline, ManifestRows) {
    const fs::path dir = scratch("manifest");
    RunManifest m;
    m.config_echo = "eps=0.125\ngeometry=disk(0.5,0.5)\n";
    EffectiveCoefficients eff;
    eff.c_star = {1.0, 2.0};
    m.eff = eff;
    m.stage_seconds = {{"cells", 0.5}};
    m.notes = {{"cache", "hit"}};
    m.files = {"/x/y/errors.csv"};
    m.write((dir / "manifest.csv").string());
    const std::string text = slurp(dir / "manifest.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "section,key,value");
    EXPECT_NE(text.find(std::string("version,homs,") + version_string()), std::string::npos);
    EXPECT_NE(text.find("config,eps,0.125"), std::string::npos);
    EXPECT_NE(text.find("config,geometry,disk(0.5;0.5)"), std::string::npos);
    EXPECT_NE(text.find("effective,l2.c_star,2"), std::string::npos);
    EXPECT_NE(text.find("seconds,cells,0.5"), std::string::npos);
    EXPECT_NE(text.find("note,cache,hit"), std::string::npos);
    EXPECT_NE(text.find("file,errors.csv,/x/y/errors.csv"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Pipeline, UnwritableCacheIsAnIoError) {
    CacheSettings cache{"/proc/homs_no_such_dir"};
    EXPECT_THROW(run_cell_stage(tiny(), cache), IoError);
}
