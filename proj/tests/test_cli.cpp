#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dualgap/cli.hpp"

using namespace dualgap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dualgap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kTwoPoint = R"({"space": {"points": ["a", "b"], "dist": [[0, 1], [1, 0]]},
 "P": [0.5, 0.5], "Q": [0.8, 0.2]})";

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli::run({"frobnicate"}), cli::kInputError);
  EXPECT_EQ(cli::run({"verify", "--suite", "theorem1"}), cli::kInputError);  // no seed
  EXPECT_EQ(cli::run({"genbounds", "--dist", "two-point"}), cli::kInputError);
  EXPECT_EQ(cli::run({"--help"}), cli::kOk);
  EXPECT_EQ(cli::run({"ot", "--input", path("missing.json")}), cli::kInputError);
}

TEST_F(Cli, MalformedJsonNamesTheLine) {
  const auto in = write("bad.json", "{\n  \"P\": [0.5, 0.5],\n  \"Q\": [0.5 0.5]\n}\n");
  testing::internal::CaptureStderr();
  EXPECT_EQ(cli::run({"ot", "--input", in, "--quiet"}), cli::kInputError);
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find(in + ":3"), std::string::npos) << err;
}

TEST_F(Cli, InvalidDistributionIsAnInputError) {
  const auto in = write("p.json", R"({"dist": [[0, 1], [1, 0]], "P": [0.7, 0.7], "Q": [0.5, 0.5]})");
  EXPECT_EQ(cli::run({"ot", "--input", in, "--quiet", "--out", path("o.json")}), cli::kInputError);
}

TEST_F(Cli, TwoPointTransport) {
  const auto in = write("tp.json", kTwoPoint);
  for (const char* method : {"primal", "dual"}) {
    const auto out = path(std::string(method) + ".json");
    ASSERT_EQ(cli::run({"ot", "--input", in, "--method", method, "--out", out, "--quiet"}), cli::kOk);
    const json j = json::parse(slurp(out));
    EXPECT_EQ(j["schema_version"], cli::kSchemaVersion);
    EXPECT_EQ(j["command"], "ot");
    EXPECT_NEAR(j["results"]["value"].get<double>(), 0.3, 1e-12);
    EXPECT_TRUE(j["summary"]["pass"].get<bool>());
    EXPECT_TRUE(j.contains("timing"));
  }
  const auto sk = path("sk.json");
  ASSERT_EQ(cli::run({"ot", "--input", in, "--method", "sinkhorn", "--epsilon", "0.01", "--out", sk, "--quiet"}),
            cli::kOk);
  EXPECT_GE(json::parse(slurp(sk))["results"]["value"].get<double>(), 0.3 - 1e-9);
}

TEST_F(Cli, ObjectiveKinds) {
  const auto in = write("obj.json", R"({"space": {"points": ["a", "b"], "metric": "discrete"},
    "P_X": [0.5, 0.5], "P_G": [0.8, 0.2], "P_Z": [0.8, 0.2], "G": [0, 1]})");
  const auto out = path("o.json");
  ASSERT_EQ(cli::run({"objective", "--input", in, "--kind", "fgan", "--f", "tv", "--lambda", "1", "--out", out,
                      "--quiet", "--no-timing"}),
            cli::kOk);
  const json j = json::parse(slurp(out));
  EXPECT_FALSE(j.contains("timing"));
  EXPECT_NEAR(j["results"]["value"].get<double>(), 0.3, 1e-6);
  ASSERT_EQ(cli::run({"objective", "--input", in, "--kind", "wae", "--f", "tv", "--lambda", "1", "--out", out,
                      "--quiet"}),
            cli::kOk);
  EXPECT_NEAR(json::parse(slurp(out))["results"]["value"].get<double>(), 0.3, 1e-6);
  EXPECT_EQ(cli::run({"objective", "--input", in, "--kind", "fgan", "--f", "nope", "--lambda", "1", "--out", out,
                      "--quiet"}),
            cli::kInputError);
}

TEST_F(Cli, VerifyIsDeterministic) {
  const auto a = path("a.json"), b = path("b.json");
  const std::vector<std::string> base = {"verify", "--suite", "theorem1", "--instances", "1", "--seed", "7",
                                         "--g-kind", "identity", "--quiet", "--no-timing", "--out"};
  auto args = base;
  args.push_back(a);
  ASSERT_EQ(cli::run(args), cli::kOk);
  args.back() = b;
  ASSERT_EQ(cli::run(args), cli::kOk);
  EXPECT_EQ(slurp(a), slurp(b));
  const json j = json::parse(slurp(a));
  EXPECT_EQ(j["config"]["seed"], 7);
  EXPECT_EQ(j["results"].size(), 1u);
}

TEST_F(Cli, GenboundsCsv) {
  const auto out = path("g.csv");
  ASSERT_EQ(cli::run({"genbounds", "--dist", "two-point", "--ns", "10,100", "--trials", "3", "--seed", "1",
                      "--out", out, "--quiet"}),
            cli::kOk);
  const std::string csv = slurp(out);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "n,trial,ipm,bound_term");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(cli::run({"genbounds", "--dist", "two-point", "--ns", "100,10", "--seed", "1", "--out", out,
                      "--quiet"}),
            cli::kInputError);
}

TEST(CliSerialization, RateCurveFormat) {
  RateCurve c;
  EXPECT_EQ(cli::rate_curve_csv(c), "n,trial,ipm,bound_term\n");
  c.rows.push_back({10, 0, 0.1, 1.0 / 3});
  EXPECT_EQ(cli::rate_curve_csv(c), "n,trial,ipm,bound_term\n10,0,0.10000000000000001,0.33333333333333331\n");
}

TEST(CliSerialization, NanIsRejected) {
  TheoremReport r;
  r.suite = "x";
  InstanceRecord rec;
  rec.values["a"] = std::numeric_limits<double>::infinity();
  r.instances.push_back(rec);
  EXPECT_NE(cli::theorem_report_json(r).find("null"), std::string::npos);
  r.instances[0].values["b"] = std::nan("");
  EXPECT_THROW(cli::theorem_report_json(r), std::domain_error);
}

TEST_F(Cli, Brenier) {
  const auto atoms = write("atoms.csv", "x,y\n1,0\n-1,0\n");
  const auto weights = write("w.csv", "0.25\n0.75\n");
  const auto out = path("b.json");
  ASSERT_EQ(cli::run({"brenier", "--atoms", atoms, "--weights", weights, "--domain", "box:-1,1,-1,1", "--seed",
                      "3", "--out", out, "--quiet"}),
            cli::kOk);
  const json j = json::parse(slurp(out));
  EXPECT_NEAR(j["results"]["h"][1].get<double>(), 1, 2e-2);
  EXPECT_TRUE(j["results"]["pushforward_pass"].get<bool>());
  const auto bad = write("bad.csv", "1,0\n-1,zero\n");
  testing::internal::CaptureStderr();
  EXPECT_EQ(cli::run({"brenier", "--atoms", bad, "--weights", weights, "--domain", "box:-1,1,-1,1", "--seed",
                      "3", "--out", out, "--quiet"}),
            cli::kInputError);
  EXPECT_NE(testing::internal::GetCapturedStderr().find(bad + ":2"), std::string::npos);
}

TEST_F(Cli, Executable) {
  const char* bin = std::getenv("DUALGAP_BIN");
  if (!bin) GTEST_SKIP() << "DUALGAP_BIN not set";
  const auto in = write("tp.json", kTwoPoint);
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string b = std::string("'") + bin + "'";
  EXPECT_EQ(status(b + " ot --input '" + in + "'"), 0);
  EXPECT_EQ(status(b + " nonsense"), 2);
  EXPECT_EQ(status(b + " verify --suite theorem1"), 2);
  EXPECT_EQ(status(b + " verify --suite theorem1 --instances 1 --seed 7 --g-kind identity --out '" +
                   path("v.json") + "'"),
            0);
  EXPECT_EQ(json::parse(slurp(path("v.json")))["command"], "verify");
}
