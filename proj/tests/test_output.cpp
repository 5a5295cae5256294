#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "btb/experiments.hpp"

using namespace btb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_run() {
    ExperimentConfig cfg = section7_config(1.5);
    cfg.grid.cells_per_axis = {6, 6};
    cfg.t_end = 5 * 4e-5;
    cfg.snapshot_steps = {0, 5};
    return cfg;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("btb_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Output, DiagnosticsHeader) {
    EXPECT_EQ(diagnostics_header(3),
              "step,time,mass_1,mass_2,mass_3,entropy,diff_dissipation,nonlocal_dissipation,entropy_residual,"
              "min_density,max_velocity_inf");
}

TEST(Output, SeventeenSignificantDigits) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(4e-5), "4.0000000000000003e-05");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Output, SnapshotLayout) {
    const Grid g(GridSpec{2, {0.0, 0.0}, {1.0, 1.0}, {2, 3}});
    std::vector<ScalarField> u{ScalarField::LinSpaced(6, 0, 5), ScalarField::Constant(6, 1.0)};
    const std::string csv = snapshot_csv(g, u);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 7u);
    EXPECT_EQ(lines[0], "x,y,u_1,u_2,u_sum");
    // x outer, y inner: second row is (ix=0, iy=1) = cell 2
    EXPECT_EQ(lines[2].substr(0, lines[2].find(',', lines[2].find(',') + 1)),
              format_number(0.25) + "," + format_number(0.5));
    EXPECT_NE(lines[2].find("," + format_number(2.0) + "," + format_number(1.0) + "," + format_number(3.0)),
              std::string::npos);
}

TEST(Output, SnapshotFilename) {
    EXPECT_EQ(snapshot_filename(1.5, 250), "snap_beta1.5_step250.csv");
    EXPECT_EQ(snapshot_filename(0.5, 15), "snap_beta0.5_step15.csv");
}

TEST(Output, RunOutputsAreDeterministic) {
    const auto a = run_simulation(small_run());
    const auto b = run_simulation(small_run());
    const fs::path d1 = scratch("det1");
    const fs::path d2 = scratch("det2");
    const auto f1 = write_outputs(a, d1);
    const auto f2 = write_outputs(b, d2);
    ASSERT_EQ(f1.size(), 3u);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        EXPECT_EQ(f1[i].filename(), f2[i].filename());
        EXPECT_EQ(slurp(f1[i]), slurp(f2[i]));
    }
    const std::string diag = slurp(d1 / "diagnostics_beta1.5.csv");
    EXPECT_EQ(std::count(diag.begin(), diag.end(), '\n'), 7);
    const std::string snap = slurp(d1 / "snap_beta1.5_step5.csv");
    EXPECT_EQ(std::count(snap.begin(), snap.end(), '\n'), 37);
}

TEST(Output, WriteFailureNamesPath) {
    const fs::path d = scratch("io");
    write_text(d / "file", "x");
    try {
        write_text(d / "file" / "nested.csv", "y");
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("file"), std::string::npos) << e.what();
    }
}
