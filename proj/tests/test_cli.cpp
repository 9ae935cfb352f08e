#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "occfluct/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using occfluct::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("occfluct_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    model_ = write("model.json", R"({"states": ["a", "b"], "rates": [["a", "b", 2.0], ["b", "a", 1.0]],
                                    "energies": {"a": 0.0, "b": -0.6931471805599453}})");
    rho_ = write("rho.json", R"({"a": 0.3333333333333333, "b": 0.6666666666666667})");
    half_ = write("half.json", R"({"a": 0.5, "b": 0.5})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  fs::path dir_;
  std::string model_, rho_, half_;
};

const char* kFamily = R"({
  "states": ["0", "1", "2"],
  "rates": [["0", "1", 0.7788007830714049], ["1", "0", 1.2840254166877414],
            ["1", "2", 0.7046880897187134], ["2", "1", 1.4190675485932573],
            ["2", "0", 1.8221188003905089], ["0", "2", 0.5488116360940264]],
  "k1": [["0", "1", 0.7788007830714049], ["1", "0", -0.6420127083438707],
         ["1", "2", 0.7046880897187134], ["2", "1", -0.7095337742966287],
         ["2", "0", 1.8221188003905089], ["0", "2", -0.2744058180470132]],
  "f1": {"0": 1.0, "1": -1.0, "2": 0.3},
  "eps_grid": [0.1, 0.01, 0.001]
})";

}  // namespace

TEST_F(CliTest, StationaryPrintsRho) {
  const auto r = call({"stationary", "--model", model_});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["rho"]["a"].get<double>(), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(doc["detailed_balance"].get<bool>());
}

TEST_F(CliTest, DvAtStationaryLawIsZero) {
  const auto r = call({"dv", "--model", model_, "--mu", rho_});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_LE(std::abs(doc["I"].get<double>()), 1e-10);
  EXPECT_TRUE(doc["interior"].get<bool>());
  EXPECT_TRUE(doc["g_star"].is_object());
}

TEST_F(CliTest, DvTwoStateValueWithSeventeenDigits) {
  const auto r = call({"dv", "--model", model_, "--mu", half_, "--gauge", "b"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["I"].get<double>(), std::pow(1.0 - std::sqrt(0.5), 2), 1e-13);
  EXPECT_NE(r.out.find("\"I\": 0.0857864376"), std::string::npos) << r.out;
}

TEST_F(CliTest, DvBoundaryHasNullMaximizer) {
  const std::string point = write("point.json", R"({"a": 1.0})");
  const auto r = call({"dv", "--model", model_, "--mu", point});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["I"].get<double>(), 2.0, 1e-14);
  EXPECT_TRUE(doc["g_star"].is_null());
  EXPECT_FALSE(doc["interior"].get<bool>());
}

TEST_F(CliTest, EntropyProductionAndInfinity) {
  auto r = call({"ep", "--model", model_, "--mu", half_});
  ASSERT_EQ(r.code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_NEAR(doc["sigma"].get<double>(), 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(doc["sigma_S"].get<double>() + doc["sigma_R"].get<double>(), doc["sigma"].get<double>(), 1e-15);

  const std::string point = write("point.json", R"({"a": 1.0})");
  r = call({"ep", "--model", model_, "--mu", point});
  ASSERT_EQ(r.code, 0) << r.err;
  doc = json::parse(r.out);
  EXPECT_EQ(doc["sigma"], "inf");

  const std::string bare = write("bare.json", R"({"states": ["a", "b"], "rates": [["a", "b", 1.0], ["b", "a", 1.0]]})");
  r = call({"ep", "--model", bare});
  ASSERT_EQ(r.code, 0) << r.err;
  doc = json::parse(r.out);
  EXPECT_EQ(doc["sigma"].get<double>(), 0.0);
  EXPECT_TRUE(doc["sigma_S"].is_null());
}

TEST_F(CliTest, ScanCsvColumnContract) {
  const std::string fam = write("fam.json", kFamily);
  const auto r = call({"scan", "--family", fam});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "eps,I,Q,diff,diff_over_eps2,I_over_eps2,Q_over_eps2");
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    EXPECT_NEAR(v[3], v[1] - v[2], 1e-18);
  }
  EXPECT_EQ(rows, 3);
  EXPECT_NE(r.err.find("recentered"), std::string::npos);
}

TEST_F(CliTest, ScanJsonIsParseable) {
  const std::string fam = write("fam.json", kFamily);
  const auto r = call({"scan", "--family", fam, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[1]["eps"].get<double>(), 0.01);
}

TEST_F(CliTest, OuAndCircuit) {
  auto r = call({"ou", "--gamma", "1", "--beta", "1", "--drive", "0", "--mean", "0.3", "--var", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_NEAR(doc["I"].get<double>(), 0.0225, 1e-16);
  EXPECT_NEAR(doc["identity_residual"].get<double>(), 0.0, 1e-16);

  r = call({"ou", "--gamma", "1", "--beta", "1", "--drive", "1", "--parity", "odd", "--mean", "1.5", "--var", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  doc = json::parse(r.out);
  EXPECT_LE(std::abs(doc["identity_residual"].get<double>()), 1e-12);

  const std::string sweep = (dir_ / "sweep.csv").string();
  r = call({"circuit", "--R", "2", "--L", "1", "--emf", "1", "--beta", "1", "--jbar", "1", "--sweep-out", sweep,
            "--points", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  doc = json::parse(r.out);
  EXPECT_NEAR(doc["Ibar"].get<double>(), 0.125, 1e-16);
  EXPECT_NEAR(doc["Ibar_numerical"].get<double>(), 0.125, 1e-8);
  std::ifstream in(sweep);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 6);
}

TEST_F(CliTest, SimulateIsSeedDeterministic) {
  const std::vector<std::string> args{"simulate", "--model", model_, "--T", "50", "--samples", "8", "--seed", "3"};
  const auto a = call(args);
  const auto b = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const json doc = json::parse(a.out);
  EXPECT_EQ(doc["occupation"].size(), 8u);
  auto other = args;
  other.back() = "4";
  EXPECT_NE(call(other).out, a.out);

  const std::string V = write("v.json", R"({"a": 0.1, "b": -0.05})");
  const auto fk = call({"simulate", "--model", model_, "--T", "20", "--samples", "100", "--seed", "1", "--V", V});
  ASSERT_EQ(fk.code, 0) << fk.err;
  const json f = json::parse(fk.out);
  EXPECT_TRUE(f.contains("lambda_hat"));
  EXPECT_TRUE(f.contains("perron_eigenvalue"));
}

TEST_F(CliTest, ExitCodeMatrix) {
  const std::string missing = (dir_ / "nope.json").string();
  auto r = call({"dv", "--model", missing, "--mu", half_});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos);

  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
  r = call({"dv", "--model", model_});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stationary"), std::string::npos);  // grammar printed
  EXPECT_EQ(call({"scan", "--family", model_, "--format", "xml"}).code, 2);

  const std::string garbage = write("garbage.json", "{not json");
  EXPECT_EQ(call({"stationary", "--model", garbage}).code, 2);
  const std::string reducible = write("red.json", R"({"states": ["a", "b"], "rates": [["a", "b", 1.0]]})");
  EXPECT_EQ(call({"stationary", "--model", reducible}).code, 2);
  const std::string badmu = write("badmu.json", R"({"a": 0.9, "b": 0.9})");
  EXPECT_EQ(call({"dv", "--model", model_, "--mu", badmu}).code, 2);
  EXPECT_EQ(call({"ou", "--gamma", "-1", "--beta", "1", "--drive", "0", "--mean", "0", "--var", "1"}).code, 2);

  const std::string huge = write("huge.json", R"({"a": 100.0, "b": -100.0})");
  EXPECT_EQ(call({"simulate", "--model", model_, "--T", "200", "--samples", "50", "--seed", "1", "--V", huge}).code, 3);

  EXPECT_EQ(call({"stationary", "--model", model_}).code, 0);
}

TEST(CliBinary, ReturnsExitCodes) {
  const std::string bin = OCCFLUCT_BINARY;
  const int ok = std::system((bin + " ou --gamma 1 --beta 1 --drive 0 --mean 0 --var 1 > /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(ok), 0);
  const int bad = std::system((bin + " dv --model /nonexistent/m.json --mu x.json 2> /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(bad), 2);
}

TEST(FormatNumber, SeventeenDigitsAndInfinity) {
  using occfluct::cli::format_number;
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}
