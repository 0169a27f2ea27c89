#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "stabhom/cli.hpp"
#include "stabhom/homotopies.hpp"
#include "stabhom/lyapunov.hpp"

using namespace stabhom;
using namespace stabhom::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stabhom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(Command cmd, const std::string& name, Overrides ov = {}, std::optional<fs::path> config = std::nullopt) {
    RunSpec spec;
    spec.command = cmd;
    spec.example_name = name;
    spec.output_dir = dir_;
    spec.overrides = ov;
    spec.config_file = config;
    out_.str("");
    err_.str("");
    return execute(spec, out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, ListNamesEveryExample) {
  EXPECT_EQ(run(Command::List, ""), kExitPass);
  for (const auto& ex : registry()) EXPECT_NE(out_.str().find(ex.name), std::string::npos) << ex.name;
  EXPECT_EQ(count_lines(out_.str()), static_cast<int>(registry().size()));
}

TEST_F(CliTest, RunEx33WritesPerSliceMargins) {
  Overrides ov;
  ov.s_steps = 21;
  ASSERT_EQ(run(Command::RunExample, "ex3_3", ov), kExitPass) << err_.str();
  const std::string margins = slurp(dir_ / "ex3_3" / "margins.csv");
  EXPECT_EQ(count_lines(margins), 22);
  EXPECT_EQ(margins.substr(0, margins.find('\n')), "check,s,worst_margin,verdict");
  EXPECT_TRUE(fs::exists(dir_ / "ex3_3" / "report.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "ex3_3" / "warp_grid.csv"));
  EXPECT_NE(out_.str().find("status: pass"), std::string::npos);
}

TEST_F(CliTest, RotationFamilyFailsWithWitness) {
  EXPECT_EQ(run(Command::RunExample, "rotation_family"), kExitFail);
  EXPECT_NE(out_.str().find("verdict: fail"), std::string::npos);
  EXPECT_NE(out_.str().find("witness_0:"), std::string::npos);
}

TEST_F(CliTest, VerifyTreatsNegativeControlAsExpected) {
  EXPECT_EQ(run(Command::Verify, "rotation_family"), kExitPass);
  EXPECT_NE(out_.str().find("result: as expected"), std::string::npos);
  EXPECT_EQ(run(Command::Verify, "ex1_1"), kExitPass);
}

TEST_F(CliTest, ExitCodesForErrors) {
  EXPECT_EQ(run(Command::RunExample, "missing"), kExitUnknown);
  EXPECT_EQ(run(Command::Verify, "missing"), kExitUnknown);
  EXPECT_EQ(run(Command::ExportFrames, "missing"), kExitUnknown);
  EXPECT_EQ(run(Command::ExportFrames, "ex4_1"), kExitError);
  Overrides bad;
  bad.rel_tol = -1.0;
  EXPECT_EQ(run(Command::RunExample, "canonical", bad), kExitError);
}

TEST_F(CliTest, RunIsDeterministic) {
  ASSERT_EQ(run(Command::RunExample, "ex4_1"), kExitPass);
  const std::string a = slurp(dir_ / "ex4_1" / "disturbed.csv");
  const std::string ra = slurp(dir_ / "ex4_1" / "report.txt");
  ASSERT_EQ(run(Command::RunExample, "ex4_1"), kExitPass);
  EXPECT_EQ(a, slurp(dir_ / "ex4_1" / "disturbed.csv"));
  EXPECT_EQ(ra, slurp(dir_ / "ex4_1" / "report.txt"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "t,x1,x2,d1,d2");
}

TEST_F(CliTest, ExportInvexFramesAsGraphs) {
  Overrides ov;
  ov.s_steps = 4;
  ASSERT_EQ(run(Command::ExportFrames, "ex3_4_invex", ov), kExitPass) << err_.str();
  for (int k = 0; k < 4; ++k) {
    const fs::path f = dir_ / "ex3_4_invex" / "frames" / ("frame_00" + std::to_string(k) + ".svg");
    ASSERT_TRUE(fs::exists(f));
    const std::string svg = slurp(f);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
  EXPECT_NE(slurp(dir_ / "ex3_4_invex" / "frames" / "frame_001.svg").find("s = 0.3333"), std::string::npos);
}

TEST_F(CliTest, ExportSphereAndPlanarFrames) {
  Overrides ov;
  ov.s_steps = 4;
  ASSERT_EQ(run(Command::ExportFrames, "ex3_7_X", ov), kExitPass) << err_.str();
  EXPECT_EQ(count_lines(out_.str()), 4);
  const std::string svg = slurp(dir_ / "ex3_7_X" / "frames" / "frame_002.svg");
  EXPECT_NE(svg.find("<circle"), std::string::npos);
  EXPECT_NE(svg.find("&gt;"), std::string::npos);
  ASSERT_EQ(run(Command::ExportFrames, "ex1_1", ov), kExitPass);
  const std::string planar = slurp(dir_ / "ex1_1" / "frames" / "frame_000.svg");
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = planar.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
  EXPECT_EQ(polylines, 64u);
}

TEST_F(CliTest, ThreeDimensionalNonSpherePathIsUnsupported) {
  const auto path = straight_line(make_field("-x", 3, [](const Vec& x) -> Vec { return -x; }),
                                  quadratic_pair([](const Vec& x) { return 0.5 * x.squaredNorm(); }));
  try {
    (void)export_frames(path, false, nullptr, 4, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDimension);
  }
}

TEST_F(CliTest, ConfigSectionsAndOverrides) {
  const fs::path ini = dir_ / "run.ini";
  std::ofstream(ini) << "[default]\nsamples = 512\ns_steps = 5\n\n[ex3_3]\ns_steps = 9\nrel_tol = 1e-8\n";
  auto o = load_options(ini, "ex3_3", {});
  EXPECT_EQ(o.samples, 512);
  EXPECT_EQ(o.s_steps, 9);
  EXPECT_DOUBLE_EQ(o.cfg.rel_tol, 1e-8);
  EXPECT_EQ(load_options(ini, "canonical", {}).s_steps, 5);
  Overrides ov;
  ov.s_steps = 3;
  EXPECT_EQ(load_options(ini, "ex3_3", ov).s_steps, 3);

  std::ofstream(ini) << "[default]\nbogus = 1\n";
  EXPECT_THROW((void)load_options(ini, "ex3_3", {}), Error);
  EXPECT_EQ(run(Command::RunExample, "canonical", {}, ini), kExitError);
  std::ofstream(ini) << "[default]\nsamples = many\n";
  EXPECT_THROW((void)load_options(ini, "ex3_3", {}), Error);
}

TEST_F(CliTest, ConfigDisturbanceKind) {
  const fs::path ini = dir_ / "iss.ini";
  std::ofstream(ini) << "[ex4_1]\ndisturbance_kind = sinusoid\ndisturbance_amplitude = 2\n";
  EXPECT_EQ(run(Command::RunExample, "ex4_1", {}, ini), kExitPass) << err_.str();
  std::ofstream(ini) << "[ex4_1]\ndisturbance_kind = chirp\n";
  EXPECT_EQ(run(Command::RunExample, "ex4_1", {}, ini), kExitError);
}

TEST(OutputDir, FlagThenEnvThenDefault) {
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(std::nullopt), fs::path("stabhom_out"));
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  EXPECT_EQ(resolve_output_dir(std::nullopt), fs::path("/tmp/from_env"));
  EXPECT_EQ(resolve_output_dir(std::string("flag_dir")), fs::path("flag_dir"));
  ::unsetenv(kOutputDirEnv);
}

TEST(Outcome, PassRequiresEveryExpectation) {
  Outcome o;
  o.checks.push_back({"a", Certificate{}, false});
  EXPECT_TRUE(outcome_passes(o));
  o.checks.push_back({"b", Certificate{}, true});
  EXPECT_FALSE(outcome_passes(o));
}
