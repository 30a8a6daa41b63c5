#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fedsynth/cli.hpp"
#include "fedsynth/io.hpp"

using namespace fedsynth;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("fedsynth_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string read(const std::string& name) const {
    const auto b = io::read_file_bytes(dir_ / name);
    return {b.begin(), b.end()};
  }
  void make_data() {
    const auto r = cli({"make-blobs", "--out", path("train.csv"), "--test-out", path("test.csv"), "--K", "3",
                        "--per-class", "20", "--dim", "4", "--test-per-class", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::filesystem::path dir_;
};

const std::vector<std::string> kCalibrate{"calibrate", "--epsilon", "10", "--l", "4", "--N", "60000",
                                          "--K", "10", "--T", "60000"};

}  // namespace

TEST(CliBasics, NoSubcommandIsParseError) {
  const auto r = cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: parse:", 0), 0u) << r.err;
}

TEST(CliBasics, UnknownFlagAndBadValues) {
  auto args = kCalibrate;
  args.push_back("--bogus");
  EXPECT_EQ(cli(args).code, 2);
  args = kCalibrate;
  args[2] = "ten";
  const auto r = cli(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--epsilon"), std::string::npos) << r.err;
  args = kCalibrate;
  args.insert(args.end(), {"--mode", "gossip"});
  EXPECT_EQ(cli(args).code, 2);
}

TEST(CliBasics, HelpExitsZero) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("calibrate"), std::string::npos);
}

TEST(CliCalibrate, PrintsReportThatAccountReproduces) {
  const auto r = cli(kCalibrate);
  ASSERT_EQ(r.code, 0) << r.err;
  const double eps = std::stod(value(r.out, "epsilon"));
  EXPECT_LE(eps, 10.0);
  EXPECT_GE(eps, 9.9);
  EXPECT_EQ(value(r.out, "mode"), "fed-cape");
  EXPECT_EQ(value(r.out, "T"), "60000");
  const std::string tau = value(r.out, "tau_g");
  const auto a = cli({"account", "--tau-g", tau, "--l", "4", "--N", "60000", "--K", "10", "--T", "60000"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(value(a.out, "epsilon"), value(r.out, "epsilon"));
  EXPECT_EQ(value(a.out, "alpha_star"), value(r.out, "alpha_star"));
}

TEST(CliCalibrate, InfinityIsNonPrivate) {
  auto args = kCalibrate;
  args[2] = "inf";
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value(r.out, "epsilon"), "inf");
  EXPECT_EQ(value(r.out, "tau_g"), "0");
}

TEST(CliCalibrate, UnreachableTargetIsCalibrationError) {
  auto args = kCalibrate;
  args[2] = "0.0001";
  const auto r = cli(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: calibration:", 0), 0u) << r.err;
}

TEST(CliCalibrate, InvalidConfigurationExitsTwo) {
  auto args = kCalibrate;
  args[10] = "60001";  // K does not divide T
  const auto r = cli(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: config:", 0), 0u) << r.err;
}

TEST(CliAccount, ZeroNoiseIsRejected) {
  const auto r = cli({"account", "--tau-g", "0", "--l", "4", "--N", "600", "--K", "10", "--T", "600"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("non-private"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigFileGivesDefaultsAndFlagsWin) {
  io::write_file_atomic(dir_ / "run.cfg", std::string("# defaults\nepsilon = 1\nl=4\nN=60000\nK=10\nT=60000\n"));
  const auto from_file = cli({"calibrate", "--config", path("run.cfg")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_LE(std::stod(value(from_file.out, "epsilon")), 1.0);
  EXPECT_GE(std::stod(value(from_file.out, "epsilon")), 0.99);
  const auto overridden = cli({"calibrate", "--config", path("run.cfg"), "--epsilon", "10"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_GE(std::stod(value(overridden.out, "epsilon")), 9.9);
  EXPECT_EQ(cli({"calibrate", "--config", path("absent.cfg")}).code, 2);
  io::write_file_atomic(dir_ / "bad.cfg", std::string("epsilon\n"));
  EXPECT_EQ(cli({"calibrate", "--config", path("bad.cfg")}).code, 2);
}

TEST_F(Cli, ReportFiles) {
  auto args = kCalibrate;
  args.insert(args.end(), {"--report", path("r.txt"), "--rdp-csv", path("rdp.csv"), "--alpha-max", "50"});
  ASSERT_EQ(cli(args).code, 0);
  EXPECT_NE(read("r.txt").find("epsilon="), std::string::npos);
  const std::string curve = read("rdp.csv");
  EXPECT_EQ(curve.rfind("alpha,rdp\n3,", 0), 0u) << curve.substr(0, 40);
  EXPECT_NE(curve.find("\n50,"), std::string::npos);
}

TEST_F(Cli, MakeBlobsGenerateEvaluateRoundTrip) {
  make_data();
  EXPECT_NE(read("train.csv").find('\n'), std::string::npos);
  const auto g = cli({"generate", "--data", path("train.csv"), "--mode", "fed-cape", "--epsilon", "10", "--l", "2",
                      "--T", "30", "--S", "3", "--out", path("syn.bin")});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(value(g.out, "records"), "30");
  EXPECT_EQ(value(g.out, "clients"), "3");
  const auto syn = io::read_binary_synthetic(dir_ / "syn.bin");
  EXPECT_EQ(syn.size(), 30u);
  EXPECT_EQ(syn.dim, 4u);

  const auto e = cli({"evaluate", "--synthetic", path("syn.bin"), "--test", path("test.csv"), "--train",
                      path("train.csv"), "--baseline", "train", "--epochs", "5"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(value(e.out, "n_synthetic"), "30");
  EXPECT_EQ(value(e.out, "n_test"), "30");
  EXPECT_FALSE(value(e.out, "utility_ratio").empty());

  const auto c = cli({"generate", "--data", path("train.csv"), "--mode", "non-private", "--l", "1", "--T", "30",
                      "--out", path("syn.csv")});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(io::read_csv_dataset(dir_ / "syn.csv").size(), 30u);
}

TEST_F(Cli, GenerateIsDeterministicAcrossThreadCounts) {
  make_data();
  const std::vector<std::string> base{"generate", "--data", path("train.csv"), "--tau-g", "2", "--l", "3",
                                      "--T", "60", "--S", "4", "--block-slots", "16"};
  auto a = base;
  a.insert(a.end(), {"--threads", "1", "--out", path("a.bin")});
  auto b = base;
  b.insert(b.end(), {"--threads", "4", "--out", path("b.bin")});
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  EXPECT_EQ(read("a.bin"), read("b.bin"));
}

TEST_F(Cli, GenerateErrors) {
  make_data();
  const auto not_divisible = cli({"generate", "--data", path("train.csv"), "--epsilon", "1", "--l", "1", "--T",
                                  "30", "--S", "7", "--out", path("x.bin")});
  EXPECT_EQ(not_divisible.code, 2);
  EXPECT_NE(not_divisible.err.find("mode=fed-cape"), std::string::npos) << not_divisible.err;

  const auto missing = cli({"generate", "--data", path("nope.csv"), "--epsilon", "1", "--l", "1", "--T", "30",
                            "--out", path("x.bin")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.rfind("error: io:", 0), 0u) << missing.err;

  const auto both = cli({"generate", "--data", path("train.csv"), "--epsilon", "1", "--tau-g", "1", "--l", "1",
                         "--T", "30", "--out", path("x.bin")});
  EXPECT_EQ(both.code, 2);
  const auto neither = cli({"generate", "--data", path("train.csv"), "--l", "1", "--T", "30", "--out", path("x.bin")});
  EXPECT_EQ(neither.code, 2);

  const auto unknown_format = cli({"generate", "--data", path("train.dat"), "--epsilon", "1", "--l", "1", "--T",
                                   "30", "--out", path("x.bin")});
  EXPECT_EQ(unknown_format.code, 2);
  EXPECT_EQ(unknown_format.err.rfind("error: format:", 0), 0u) << unknown_format.err;
  EXPECT_FALSE(std::filesystem::exists(dir_ / "x.bin"));
}

TEST_F(Cli, SweepWritesCsv) {
  make_data();
  const auto r = cli({"sweep", "--train", path("train.csv"), "--test", path("test.csv"), "--modes",
                      "centralized,fed-cape", "--l", "1,2", "--S", "3", "--epsilon", "5,inf", "--T", "30",
                      "--epochs", "3", "--out", path("sweep.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value(r.out, "rows"), "8");
  EXPECT_EQ(value(r.out, "computed"), "8");
  EXPECT_EQ(value(r.out, "failed"), "0");
  const auto again = cli({"sweep", "--train", path("train.csv"), "--test", path("test.csv"), "--modes",
                          "centralized,fed-cape", "--l", "1,2", "--S", "3", "--epsilon", "5,inf", "--T", "30",
                          "--epochs", "3", "--out", path("sweep.csv")});
  EXPECT_EQ(value(again.out, "computed"), "0");
  EXPECT_EQ(cli({"sweep", "--train", path("train.csv"), "--test", path("test.csv"), "--l", "", "--epsilon", "1",
                 "--T", "30", "--out", path("s2.csv")})
                .code,
            2);
}
