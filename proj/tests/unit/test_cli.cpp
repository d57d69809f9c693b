#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "support/run.hpp"
#include "tagfeed/text.hpp"

namespace fs = std::filesystem;
using testsupport::quoted;
using testsupport::run;

namespace {

const std::string kCli = TAGFEED_CLI_PATH;
const std::string kAssets = TAGFEED_ASSET_DIR;
const std::string kTestData = TAGFEED_TEST_DATA;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tagfeed_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  testsupport::RunResult cli(const std::string& args) const {
    return run("cd " + quoted(dir_.string()) + " && " + quoted(kCli) + " " + args);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpForEverySubcommand) {
  EXPECT_EQ(cli("--help").exit_code, 0);
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"ingest-check", {"--input", "--list"}},
      {"tag", {"--input", "--mapping-k", "--mapping-a", "--out"}},
      {"report", {"--tags", "--input", "--students", "--all-students", "--backend", "--out-dir", "--template", "--model"}},
      {"eval-stats", {"--input", "--low-threshold", "--out", "--plot", "--discarded"}},
      {"synth", {"--out", "--seed", "--profile", "--students", "--attempts", "--mode"}},
  };
  for (const auto& [sub, flags] : expected) {
    auto r = cli(sub + " --help");
    EXPECT_EQ(r.exit_code, 0) << sub;
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << sub << " " << f;
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli("").exit_code, 2);
  EXPECT_EQ(cli("frobnicate").exit_code, 2);
  EXPECT_EQ(cli("tag").exit_code, 2);
  EXPECT_EQ(cli("report --tags x.csv --backend carrier-pigeon").exit_code, 2);
}

TEST_F(CliTest, EvalStatsOnSurveyFixture) {
  auto r = cli("eval-stats --input " + quoted(kTestData + "/survey_63.csv") + " --plot box.svg --discarded dropped.csv");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "valid=32 low=3 perfect=28");
  EXPECT_NE(r.out.find("dimension,n,mean"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "box.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "dropped.csv"));
}

TEST_F(CliTest, SynthTagReport) {
  ASSERT_EQ(cli("synth --out attempts.csv --students 30 --seed 9").exit_code, 0);
  auto check = cli("ingest-check --input attempts.csv");
  EXPECT_EQ(check.exit_code, 0);
  EXPECT_EQ(check.out.rfind("accepted=", 0), 0u);

  auto tag = cli("tag --input attempts.csv --mapping-k " + quoted(kAssets + "/knowledge_map.tsv") + " --mapping-a " +
                 quoted(kAssets + "/ability_map.tsv") + " --out student_tag.csv");
  ASSERT_EQ(tag.exit_code, 0);
  std::ifstream in(path("student_tag.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 31);

  auto rep = cli("report --tags student_tag.csv --students s0001,s0002 --backend mock");
  EXPECT_EQ(rep.exit_code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "reports" / "report_s0001.md"));
  EXPECT_TRUE(fs::exists(dir_ / "reports" / "report_s0002.meta.json"));
}

TEST_F(CliTest, ReportForSampleStudent) {
  std::ofstream(path("student_tag.csv")) << "2965,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  auto r = cli("report --tags student_tag.csv --students 2965 --backend mock");
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_TRUE(fs::exists(dir_ / "reports" / "report_2965.md"));
  auto md = tagfeed::text::read_file(path("reports/report_2965.md"));
  EXPECT_NE(md.find("Correctly and quickly on easy questions."), std::string::npos);
}

TEST_F(CliTest, PartialFailureExitCode) {
  std::ofstream(path("student_tag.csv")) << "2965,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  auto r = cli("report --tags student_tag.csv --students 2965,4242 --backend mock");
  EXPECT_EQ(r.exit_code, 7);
  EXPECT_NE(r.out.find("reports=1 failures=1"), std::string::npos);
}

TEST_F(CliTest, ErrorExitCodes) {
  EXPECT_EQ(cli("ingest-check --input missing.csv").exit_code, 3);
  std::ofstream(path("bad.conf")) << "adequate_threshold = 0.5\nstruggling_threshold = 0.6\n";
  EXPECT_EQ(cli("--config bad.conf eval-stats --input " + quoted(kTestData + "/survey_63.csv")).exit_code, 4);
  std::ofstream(path("short.csv")) << "student_id,question_id\ns,q\n";
  EXPECT_EQ(cli("tag --input short.csv").exit_code, 5);
  ::unsetenv("TAGFEED_API_KEY");
  std::ofstream(path("student_tag.csv")) << "2965,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  EXPECT_EQ(cli("report --tags student_tag.csv --students 2965 --backend http").exit_code, 6);
}
