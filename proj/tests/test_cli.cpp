#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fermsim/cli.hpp"

namespace fermsim::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fermsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(CliTest, RunIsDeterministic) {
  RunConfig config;
  config.preset = "fig3";
  config.t_max = 2.0;
  config.dt_out = 0.5;
  std::ostringstream err;
  config.out = (dir_ / "a.csv").string();
  ASSERT_EQ(cmd_run(config, err), kSuccess) << err.str();
  config.out = (dir_ / "b.csv").string();
  ASSERT_EQ(cmd_run(config, err), kSuccess) << err.str();
  const std::string a = slurp(dir_ / "a.csv");
  EXPECT_EQ(a, slurp(dir_ / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "t,n1,n2,n3,n4,n5,p_1001,p_0110,p_1010,p_0101,concurrence,linear_entropy,trace_dev,min_eig");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 6);
}

TEST_F(CliTest, SmallModelDropsTwoQubitColumns) {
  std::ofstream(dir_ / "one.model") << "sites 1\nreservoir src 1 1 1 1\n";
  RunConfig config;
  config.model_path = (dir_ / "one.model").string();
  config.t_max = 1.0;
  config.dt_out = 0.5;
  config.out = (dir_ / "one.csv").string();
  std::ostringstream err;
  ASSERT_EQ(cmd_run(config, err), kSuccess) << err.str();
  const std::string csv = slurp(dir_ / "one.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,n1,linear_entropy,trace_dev,min_eig");

  config.observables = ObservableSet::parse("concurrence");
  EXPECT_EQ(cmd_run(config, err), kUsage);
  config.observables = ObservableSet::parse("occupations");
  ASSERT_EQ(cmd_run(config, err), kSuccess);
  EXPECT_EQ(slurp(dir_ / "one.csv").substr(0, 5), "t,n1\n");
}

TEST_F(CliTest, ExitCodes) {
  RunConfig config;
  config.model_path = (dir_ / "missing.model").string();
  config.t_max = 1.0;
  config.dt_out = 0.1;
  config.out = (dir_ / "x.csv").string();
  std::ostringstream err;
  EXPECT_EQ(cmd_run(config, err), kModel);
  EXPECT_NE(err.str().find("missing.model"), std::string::npos);

  std::ofstream(dir_ / "bad.model") << "sites 2\nreservoir r 1 1 1 1.5\n";
  config.model_path = (dir_ / "bad.model").string();
  err.str("");
  EXPECT_EQ(cmd_run(config, err), kModel);
  EXPECT_NE(err.str().find("line 2"), std::string::npos);

  config.model_path.clear();
  config.preset = "nope";
  EXPECT_EQ(cmd_run(config, err), kUsage);
  config.preset = "fig3";
  config.t_max = -1.0;
  EXPECT_EQ(cmd_run(config, err), kUsage);
  EXPECT_THROW(ObservableSet::parse("occupations,spin"), std::invalid_argument);
}

TEST_F(CliTest, ProbeCouplingOverride) {
  RunConfig config;
  config.preset = "fig5_sweep";
  config.probe_coupling = 2.5;
  const ModelSpec spec = resolve_model(config);
  int found = 0;
  for (const auto& term : spec.terms)
    if (term.kind == TermKind::density_density && term.site_a == 1 && term.site_b == 5) {
      EXPECT_EQ(term.strength, 2.5);
      ++found;
    }
  EXPECT_EQ(found, 1);
}

TEST_F(CliTest, SweepWritesOneFilePerCoupling) {
  EXPECT_EQ(sweep_file_name(0.0), "up_0.csv");
  EXPECT_EQ(sweep_file_name(1.5), "up_1.5.csv");
  SweepConfig config;
  config.probe_couplings = {0.0, 1.0};
  config.out_dir = (dir_ / "sweep").string();
  config.t_max = 1.0;
  config.dt_out = 0.5;
  std::ostringstream err;
  ASSERT_EQ(cmd_sweep(config, err), kSuccess) << err.str();
  EXPECT_TRUE(fs::exists(dir_ / "sweep" / "up_0.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sweep" / "up_1.csv"));
  EXPECT_NE(slurp(dir_ / "sweep" / "up_0.csv"), slurp(dir_ / "sweep" / "up_1.csv"));
}

TEST(CliCheck, AllGroupsPass) {
  std::ostringstream out;
  EXPECT_EQ(cmd_check(out), kSuccess) << out.str();
  EXPECT_NE(out.str().find("all checks passed"), std::string::npos);
}

}  // namespace
}  // namespace fermsim::cli
