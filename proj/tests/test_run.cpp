#include "sawsle/cli.hpp"
#include "sawsle/run.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sawsle;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sawsle_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kSmallConfig = R"(
# small run used by several tests
domain = half-plane
N = 200
iterations = 20000
burn_in = 1000
seeds = 3, 4
observable = theta_e l=0.1 d=0,0.5
observable = xf l=0.1
observable = pass_right l=0.1
batches = 10
)";

int simulate_into(const fs::path& dir, const std::vector<std::string>& extra, std::string* err_text = nullptr) {
  const auto cfg_file = dir.string() + ".cfg";
  std::ofstream(cfg_file) << kSmallConfig;
  std::vector<std::string> overrides{"output=" + dir.string()};
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  std::ostringstream out, err;
  const int rc = cli::cmd_simulate(cfg_file, overrides, out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

std::vector<std::string> csv_names() {
  return {"theta_e_half-plane_l0.1_d0.csv", "theta_e_half-plane_l0.1_d0.5.csv", "xf_half-plane_l0.1.csv",
          "pass_right_half-plane_l0.1.csv"};
}

}  // namespace

TEST(Config, ParsesKeysAndExpandsObservables) {
  const auto cfg = parse_config_string(kSmallConfig);
  EXPECT_EQ(cfg.domain, Domain::HalfPlane);
  EXPECT_EQ(cfg.n, 200);
  EXPECT_EQ(cfg.iterations, 20000u);
  EXPECT_EQ(cfg.burn_in, 1000u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
  ASSERT_EQ(cfg.observables.size(), 4u);
  EXPECT_EQ(cfg.observables[1].id(), "theta_e_half-plane_l0.1_d0.5");
  EXPECT_EQ(cfg.observables[3].theta_grid.size(), 99u);
  EXPECT_EQ(cfg.batches, 10u);
  EXPECT_EQ(cfg.flush_threshold, 32u);
  EXPECT_EQ(cfg.profile, SiteProfile::Piecewise);
}

TEST(Config, OverridesReplaceValuesAndObservableList) {
  const auto cfg = parse_config_string(kSmallConfig, {"N=1e3", "observable=ye l=0.005,0.01", "iterations=5"});
  EXPECT_EQ(cfg.n, 1000);
  EXPECT_EQ(cfg.iterations, 5u);
  ASSERT_EQ(cfg.observables.size(), 2u);
  EXPECT_EQ(cfg.observables[0].id(), "ye_half-plane_l0.005");
  const auto twice = parse_config_string(kSmallConfig, {"observable=ye l=0.01", "observable=xe l=0.01"});
  EXPECT_EQ(twice.observables.size(), 2u);
}

TEST(Config, DescribeRoundTrips) {
  const auto cfg = parse_config_string(kSmallConfig, {"profile=uniform", "stride=3"});
  const auto again = parse_config_string(describe(cfg));
  EXPECT_EQ(describe(again), describe(cfg));
  EXPECT_EQ(fingerprint(again), fingerprint(cfg));
}

TEST(Config, Errors) {
  auto bad = [](const std::vector<std::string>& o) {
    EXPECT_THROW(parse_config_string(kSmallConfig, o), ConfigError) << o.front();
  };
  bad({"N=1"});
  bad({"seeds=1,1"});
  bad({"observable=xe l=0"});
  bad({"observable=xe l=-0.1"});
  bad({"observable=xe"});
  bad({"observable=zeta l=0.1"});
  bad({"observable=theta_e l=0.1 d=1"});
  bad({"domain=cut-plane", "observable=theta_e l=0.1 d=0.5"});
  bad({"observable=xe l=0.1 d=0.5"});
  bad({"observable=xe l=0.1 grid=0.5"});
  bad({"observable=xe l=0.1", "observable=xe l=0.1"});
  bad({"colour=blue"});
  bad({"N=abc"});
  bad({"iterations=1.5"});
  bad({"profile=fancy"});
  bad({"domain=torus"});
  bad({"stride=0"});
  bad({"batches=1"});
  bad({"flush_threshold=0"});
  bad({"resume=maybe"});
  EXPECT_THROW(parse_config_string("domain = half-plane\nN = 100\n"), ConfigError);  // no observables
  EXPECT_THROW(parse_config_string("just some words\n"), ConfigError);
}

TEST(Config, FingerprintIgnoresPlumbingKeys) {
  const auto a = parse_config_string(kSmallConfig);
  const auto b = parse_config_string(kSmallConfig, {"output=elsewhere", "threads=7", "checkpoint_interval=9"});
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_NE(fingerprint(a), fingerprint(parse_config_string(kSmallConfig, {"N=201"})));
}

TEST(ExactCommand, Examples) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_exact("ye", 0.0, "0,1", out, err), 0);
  std::istringstream ye(out.str());
  std::string line, last;
  while (std::getline(ye, line)) last = line;
  EXPECT_EQ(std::stod(last.substr(last.find(',') + 1)), 1.0 - std::pow(2.0, -5.0 / 16.0));

  const auto pr = cli::exact_values(ObservableKind::PassRight, 0.0, cli::parse_grid("0,pi/2,pi"));
  EXPECT_EQ(pr, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(cli::exact_values(ObservableKind::ThetaE, 0.0, {0.0, 1.0}), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(cli::exact_values(ObservableKind::ThetaE, 0.5, {0.5})[0], sle::cdf_theta_e(0.5, 0.5));
  EXPECT_EQ(cli::exact_values(ObservableKind::Xe, 0.0, {0.0})[0], sle::cdf_xe(0.0));
}

TEST(ExactCommand, Errors) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_exact("zeta", 0.0, "", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("ye", 0.0, "-1", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("theta_e", 1.5, "0.5", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("xe", 0.5, "0.5", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("pass_right", 0.0, "4", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("xe", 0.0, "abc", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_exact("xe", 0.0, "", out, err), 0);  // default grid
}

TEST(AngleParsing, Forms) {
  const double pi = std::numbers::pi;
  EXPECT_EQ(cli::parse_angle_number("pi"), pi);
  EXPECT_EQ(cli::parse_angle_number("pi/2"), pi / 2);
  EXPECT_EQ(cli::parse_angle_number("3pi/4"), 3 * pi / 4);
  EXPECT_EQ(cli::parse_angle_number("0.25*pi"), 0.25 * pi);
  EXPECT_EQ(cli::parse_angle_number("1.5"), 1.5);
  EXPECT_THROW(cli::parse_angle_number("pi*2"), ConfigError);
}

TEST(UnfoldCheckCommand, Examples) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_unfold_check(1, "half-plane", out, err), 0);
  EXPECT_NE(out.str().find("\n1,1,0,0,0\n"), std::string::npos);
  std::ostringstream out2;
  ASSERT_EQ(cli::cmd_unfold_check(1, "cut-plane", out2, err), 0);
  EXPECT_NE(out2.str().find("\n1,3,"), std::string::npos);
  std::ostringstream out3;
  ASSERT_EQ(cli::cmd_unfold_check(10, "half-plane", out3, err), 0);
  EXPECT_NE(out3.str().find("\n10,6199,"), std::string::npos);
  EXPECT_EQ(cli::cmd_unfold_check(15, "half-plane", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_unfold_check(0, "half-plane", out, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_unfold_check(3, "disk", out, err), cli::kConfigError);
}

TEST(Simulate, WritesCsvsAndReport) {
  const auto dir = fresh_dir("basic");
  ASSERT_EQ(simulate_into(dir, {}), 0);
  for (const auto& name : csv_names()) {
    std::ifstream is(dir / name);
    ASSERT_TRUE(is) << name;
    const auto c = read_csv(is);
    EXPECT_FALSE(c.grid.empty());
    EXPECT_TRUE(std::is_sorted(c.empirical.begin(), c.empirical.end()) || name.rfind("pass_right", 0) == 0);
    EXPECT_EQ(c.meta("N"), "200");
    EXPECT_EQ(c.meta("seed"), "3,4");
    EXPECT_FALSE(c.meta("acceptance_rate").empty());
    EXPECT_FALSE(c.meta("censored").empty());
    EXPECT_NE(c.meta("error_method").find("batch means"), std::string::npos);
    for (std::size_t k = 0; k < c.grid.size(); ++k) EXPECT_DOUBLE_EQ(c.diff[k], c.empirical[k] - c.exact[k]);
  }
  const auto report = slurp(dir / "report.txt");
  EXPECT_NE(report.find("acceptance_rate"), std::string::npos);
  EXPECT_NE(report.find("wall_seconds"), std::string::npos);
  EXPECT_NE(report.find("flush_threshold = 32"), std::string::npos);
  EXPECT_NE(report.find("censor_fraction"), std::string::npos);
}

TEST(Simulate, DeterministicAcrossRunsAndThreadCounts) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
  ASSERT_EQ(simulate_into(a, {"threads=1"}), 0);
  ASSERT_EQ(simulate_into(b, {"threads=1"}), 0);
  ASSERT_EQ(simulate_into(c, {"threads=2"}), 0);
  for (const auto& name : csv_names()) {
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(c / name)) << name;
  }
}

TEST(Simulate, CheckpointResumeIsBitIdentical) {
  const auto plain = fresh_dir("ckpt_plain"), cut = fresh_dir("ckpt_cut");
  ASSERT_EQ(simulate_into(plain, {}), 0);
  ASSERT_EQ(simulate_into(cut, {"checkpoint_interval=3001", "halt_after=7777"}), 0);
  EXPECT_TRUE(fs::exists(cut / "checkpoint_3.txt"));
  EXPECT_FALSE(fs::exists(cut / csv_names()[0]));
  ASSERT_EQ(simulate_into(cut, {"checkpoint_interval=3001", "halt_after=15000"}), 0);
  ASSERT_EQ(simulate_into(cut, {"checkpoint_interval=3001"}), 0);
  for (const auto& name : csv_names()) EXPECT_EQ(slurp(plain / name), slurp(cut / name)) << name;
  EXPECT_NE(slurp(cut / "report.txt").find("resumed"), std::string::npos);
}

TEST(Simulate, CheckpointFromOtherConfigIsRejected) {
  const auto dir = fresh_dir("ckpt_mismatch");
  ASSERT_EQ(simulate_into(dir, {"checkpoint_interval=1000", "halt_after=2000"}), 0);
  std::string err;
  EXPECT_EQ(simulate_into(dir, {"checkpoint_interval=1000", "N=300"}, &err), cli::kConfigError);
  EXPECT_NE(err.find("different configuration"), std::string::npos);
  EXPECT_EQ(simulate_into(dir, {"checkpoint_interval=1000", "N=300", "resume=false"}), 0);
}

TEST(Simulate, ZeroIterationsWritesEmptyCurvesWithWarning) {
  const auto dir = fresh_dir("zero");
  std::string err;
  ASSERT_EQ(simulate_into(dir, {"iterations=0"}, &err), 0);
  EXPECT_NE(err.find("warning"), std::string::npos);
  std::ifstream is(dir / csv_names()[0]);
  const auto c = read_csv(is);
  ASSERT_FALSE(c.grid.empty());
  EXPECT_TRUE(std::isnan(c.empirical[0]));
  EXPECT_FALSE(std::isnan(c.exact[0]));
  EXPECT_EQ(c.meta("samples"), "0");
}

TEST(Simulate, ConfigAndOutputErrors) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_simulate("/nonexistent/file.cfg", {}, out, err), cli::kConfigError);
  const auto dir = fresh_dir("blocked");
  fs::create_directories(dir.parent_path());
  std::ofstream(dir) << "a file, not a directory";
  EXPECT_EQ(simulate_into(dir / "sub", {}), cli::kConfigError);
  EXPECT_EQ(simulate_into(fresh_dir("bad_n"), {"N=1"}), cli::kConfigError);
  fs::remove(dir);
}

TEST(Simulate, StrideAndRunLengthWeightsAgreeWithPerIterationRecording) {
  // Reference: measure after every step of an identical chain.
  auto cfg = parse_config_string(kSmallConfig, {"seeds=9", "iterations=3000", "burn_in=0", "stride=2",
                                                "observable=yf l=0.1", "observable=pass_right l=0.1"});
  cfg.output = fresh_dir("stride").string();
  const auto res = simulate(cfg);
  PivotChain chain(cfg.domain, cfg.n, 9, ChainOptions{cfg.profile, cfg.flush_threshold});
  CdfAccumulator yf(cfg.observables[0].id(), grid_for(cfg.observables[0]), batch_size_for(cfg));
  CdfAccumulator pr(cfg.observables[1].id(), grid_for(cfg.observables[1]), batch_size_for(cfg),
                    CdfAccumulator::Mode::Profile);
  for (std::uint64_t t = 1; t <= 3000; ++t) {
    chain.step();
    if (t % 2) continue;
    yf.record(measure(chain, cfg.observables[0]));
    pr.record_profile(pass_right(chain, cfg.observables[1].scale(cfg.n), cfg.observables[1].theta_grid));
  }
  EXPECT_EQ(res.merged[0], yf);
  EXPECT_EQ(res.merged[1], pr);
}

TEST(CompareCommand, RediffAndTwoSample) {
  const auto dir = fresh_dir("compare");
  ASSERT_EQ(simulate_into(dir, {}), 0);
  const auto file = (dir / csv_names()[0]).string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_compare(file, "", 0.0, 1.0, out, err), 0);
  EXPECT_EQ(out.str(), slurp(file));
  std::ostringstream out2;
  ASSERT_EQ(cli::cmd_compare(file, file, 0.1, 0.9, out2, err), 0);
  EXPECT_NE(out2.str().find("# max_abs_diff: 0\n"), std::string::npos);
  std::ostringstream out3;
  EXPECT_EQ(cli::cmd_compare(file, (dir / csv_names()[2]).string(), 0.0, 1.0, out3, err), cli::kConfigError);
  EXPECT_EQ(cli::cmd_compare("/nonexistent.csv", "", 0.0, 1.0, out3, err), cli::kConfigError);
}
