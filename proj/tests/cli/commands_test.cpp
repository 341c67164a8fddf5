#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "commands.hpp"
#include "lognnet/dataset.hpp"
#include "support/synthetic.hpp"

using namespace lognnet;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lognnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = (dir_ / "toy.csv").string();
    save_csv(data_, synth::separable_dataset(60, 2, 5));
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string report_path() const {
    const std::string s = out_.str();
    const auto at = s.find("report: ");
    if (at == std::string::npos) return {};
    return s.substr(at + 8, s.find('\n', at) - at - 8);
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::string data_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, FootprintReport) {
  ASSERT_EQ(run({"footprint", "--shape", "51:50:20:2", "--bytes", "4", "--out", dir_.string()}), 0)
      << err_.str();
  auto j = nlohmann::json::parse(slurp(report_path()));
  EXPECT_EQ(j["result"]["reservoir_bytes"], 10400);
  EXPECT_EQ(j["result"]["total_bytes"], 15152);
  EXPECT_EQ(j["manifest"]["command"], "footprint");
  EXPECT_EQ(j["schema_version"], 1);
}

TEST_F(Cli, EmptySelectionIsUsageError) {
  EXPECT_EQ(run({"subset", "--dataset", data_, "--registry", "custom", "--fs", ""}), 2);
  const std::string err = err_.str();
  EXPECT_EQ(err.rfind("error: code=usage message=", 0), 0u) << err;
  EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run({"cv", "--bogus"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"cv", "--registry", "rbv9"}), 2);
}

TEST_F(Cli, SchemaErrorExitCode) {
  EXPECT_EQ(run({"threshold", "--dataset", data_, "--registry", "rbv1"}), 4);
  EXPECT_NE(err_.str().find("code=schema"), std::string::npos);
}

TEST_F(Cli, MissingFileIsIoError) {
  EXPECT_EQ(run({"threshold", "--dataset", (dir_ / "nope.csv").string(), "--registry", "rbv1"}),
            11);
}

TEST_F(Cli, CrossValidationIsByteIdentical) {
  const std::vector<std::string> args{"cv",      "--dataset", data_,  "--registry",
                                      "custom",  "--shape",   "3:10:5:2", "--epochs",
                                      "5",       "--seed",    "7",    "--out",
                                      dir_.string()};
  ASSERT_EQ(run(args), 0) << err_.str();
  const auto first_path = report_path();
  const auto first = slurp(first_path);
  fs::remove(first_path);
  ASSERT_EQ(run(args), 0);
  EXPECT_EQ(report_path(), first_path);
  EXPECT_EQ(slurp(report_path()), first);
  auto j = nlohmann::json::parse(first);
  EXPECT_TRUE(j["result"]["cv"].contains("accuracy_pooled"));
  EXPECT_EQ(j["manifest"]["generator"]["source"], "table4");
}

TEST_F(Cli, ReplayReproducesReport) {
  ASSERT_EQ(run({"subset", "--dataset", data_, "--registry", "custom", "--fr", "2", "--epochs",
                 "4", "--out", dir_.string()}),
            0)
      << err_.str();
  const auto original = report_path();
  const auto saved = (dir_ / "saved.json").string();
  fs::rename(original, saved);
  ASSERT_EQ(run({"replay", saved}), 0) << err_.str();
  EXPECT_EQ(report_path(), original);
  EXPECT_EQ(slurp(original), slurp(saved));

  // Another directory changes only the recorded directory, not the name.
  ASSERT_EQ(run({"replay", saved, "--out", (dir_ / "again").string()}), 0) << err_.str();
  EXPECT_EQ(fs::path(report_path()).filename(), fs::path(original).filename());
}

TEST_F(Cli, EnvironmentOverridesDefaults) {
  setenv("LOGNNET_EPOCHS", "3", 1);
  const int rc = run({"cv", "--dataset", data_, "--registry", "custom", "--shape", "3:6:3:2",
                      "--out", dir_.string()});
  unsetenv("LOGNNET_EPOCHS");
  ASSERT_EQ(rc, 0) << err_.str();
  auto j = nlohmann::json::parse(slurp(report_path()));
  EXPECT_EQ(j["manifest"]["options"]["epochs"], 3);
}

TEST_F(Cli, ThresholdAndHistogramFiles) {
  ASSERT_EQ(run({"threshold", "--dataset", data_, "--registry", "custom", "--out", dir_.string()}),
            0)
      << err_.str();
  auto stem = fs::path(report_path()).stem().string();
  EXPECT_TRUE(fs::exists(dir_ / (stem + ".csv")));
  ASSERT_EQ(run({"hist", "--dataset", data_, "--registry", "custom", "--feature", "1,3",
                 "--bin-size", "0.1", "--out", dir_.string()}),
            0)
      << err_.str();
  stem = fs::path(report_path()).stem().string();
  EXPECT_TRUE(fs::exists(dir_ / (stem + "-hist-1.csv")));
  EXPECT_TRUE(fs::exists(dir_ / (stem + "-hist-3.csv")));
  EXPECT_EQ(run({"hist", "--dataset", data_, "--registry", "custom"}), 2);
}

TEST_F(Cli, SweepWritesEpochTable) {
  ASSERT_EQ(run({"cv", "--dataset", data_, "--registry", "custom", "--shape", "3:6:3:2",
                 "--sweep-epochs", "1,3", "--out", dir_.string()}),
            0)
      << err_.str();
  const auto stem = fs::path(report_path()).stem().string();
  const auto csv = slurp((dir_ / (stem + "-epochs.csv")).string());
  EXPECT_EQ(csv.rfind("epochs,accuracy_pooled,accuracy_mean_of_folds\n1,", 0), 0u);
}

TEST_F(Cli, BinaryExitStatus) {
  const std::string cmd = std::string(LOGNNET_CLI_PATH) + " subset --fs '' >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
