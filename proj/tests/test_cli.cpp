/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "exchbound/cli.hpp"

using namespace exchbound;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& s) {
  std::istringstream is(s);
  std::string line, out;
  while (std::getline(is, line)) {
    if (line.find("timestamp") != std::string::npos) continue;
    out += line + "\n";
  }
  return out;
}

std::string models_dir() {
  const char* env = std::getenv("EXCHBOUND_MODELS_DIR");
  return env != nullptr ? env : "models";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("exchbound_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kTwoBernoulli = R"({"type": "finite", "atoms": [
  {"weight": 0.5, "component": {"kind": "bernoulli", "p": 0.2}},
  {"weight": 0.5, "component": {"kind": "bernoulli", "p": 0.8}}]})";

}  // namespace

TEST_F(CliTest, BoundsSymmetricWindows) {
  const auto o = run({"bounds", "--mu-plus", "0.8", "--mu-minus", "0.2", "--m", "100", "--t", "0.1"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("upper: valid=true"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("lower: valid=true"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("hoeffding=0.1353352832366127"), std::string::npos) << o.out;
}

TEST_F(CliTest, BoundsFlagsOutOfWindow) {
  const auto o = run({"bounds", "--mu-plus", "0.95", "--mu-minus", "0.2", "--m", "100", "--t", "0.1"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("upper: valid=false"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("lower: valid=true"), std::string::npos) << o.out;
}

TEST_F(CliTest, BoundsDiracSummary) {
  const auto o = run({"bounds", "--mu-plus", "0.5", "--mu-minus", "0.5", "--m", "50", "--t", "0.2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string e4 = "hoeffding=" + io::format_double(std::exp(-4.0));
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 3);
  std::size_t pos = o.out.find(e4);
  ASSERT_NE(pos, std::string::npos) << o.out;
  EXPECT_NE(o.out.find(e4, pos + 1), std::string::npos) << o.out;
}

TEST_F(CliTest, BoundsInvalidArguments) {
  EXPECT_EQ(run({"bounds", "--mu-plus", "0.2", "--mu-minus", "0.8", "--m", "10", "--t", "0.1"}).code, 2);
  EXPECT_EQ(run({"bounds", "--mu-plus", "0.8", "--mu-minus", "0.2", "--m", "10", "--t", "-1"}).code, 2);
  EXPECT_EQ(run({"bounds", "--mu-plus", "0.8", "--mu-minus", "0.2", "--m", "0", "--t", "0.1"}).code, 2);
  EXPECT_EQ(run({"bounds", "--mu-plus", "x"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, SimulateTwoBernoulli) {
  const auto model = write("two.json", kTwoBernoulli);
  const auto o = run({"simulate", "--model", model, "--m", "2", "--t", "0.15", "--side", "upper",
                      "--reps", "1000000", "--seed", "42", "--out", path("r.csv")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto report = io::parse_csv(slurp(path("r.csv")));
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_NEAR(report.rows[0].value, 0.34, 0.002);
  EXPECT_NEAR(report.rows[0].hoeffding, 0.9139, 1e-4);
  EXPECT_EQ(report.rows[0].model_id, "two");
  EXPECT_EQ(report.metadata.master_seed, 42u);
  EXPECT_NE(o.out.find("p_hat="), std::string::npos);
}

TEST_F(CliTest, SimulateMalformedWeights) {
  const auto model = write("bad.json", R"({"type": "finite", "atoms": [
      {"weight": 0.5, "component": {"kind": "bernoulli", "p": 0.2}},
      {"weight": 0.4, "component": {"kind": "bernoulli", "p": 0.8}}]})");
  const auto o = run({"simulate", "--model", model, "--m", "2", "--t", "0.15"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("atoms[*].weight"), std::string::npos) << o.err;
}

TEST_F(CliTest, SimulateIoFailures) {
  EXPECT_EQ(run({"simulate", "--model", path("missing.json"), "--m", "2", "--t", "0.1"}).code, 3);
  const auto model = write("two.json", kTwoBernoulli);
  const auto o = run({"simulate", "--model", model, "--m", "2", "--t", "0.1", "--reps", "100",
                      "--out", path("no/such/dir/r.csv")});
  EXPECT_EQ(o.code, 3);
  EXPECT_FALSE(fs::exists(path("no/such/dir/r.csv.tmp")));
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const auto model = write("two.json", kTwoBernoulli);
  for (const char* fmt : {"csv", "json"}) {
    std::vector<std::string> args{"simulate", "--model", model, "--m", "7", "--t", "0.1",
                                  "--side", "lower", "--reps", "20000", "--seed", "5",
                                  "--format", fmt};
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(strip_timestamp(a.out), strip_timestamp(b.out));
  }
}

TEST_F(CliTest, VerifyDefaultSuitePasses) {
  const auto o = run({"verify", "--reps", "20000"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = io::parse_csv(o.out);
  EXPECT_EQ(r.rows.size(), 5u * 2 * 2 * 2);
  for (const auto& row : r.rows) EXPECT_FALSE(row.violation);
}

TEST_F(CliTest, VerifyCorruptedBoundFails) {
  EXPECT_EQ(run({"verify", "--reps", "20000", "--bound-scale", "0.01"}).code, 1);
}

TEST_F(CliTest, VerifyFormatsCarryTheSameRows) {
  const std::vector<std::string> base{"verify", "--models-dir", models_dir(), "--m-grid", "5,40",
                                      "--t-grid", "0.05,0.15", "--reps", "5000", "--seed", "3"};
  auto csv_args = base, json_args = base;
  csv_args.insert(csv_args.end(), {"--format", "csv", "--out", path("r.csv")});
  json_args.insert(json_args.end(), {"--format", "json", "--out", path("r.json")});
  ASSERT_EQ(run(csv_args).code, 0);
  ASSERT_EQ(run(json_args).code, 0);
  auto a = io::parse_csv(slurp(path("r.csv"))).rows;
  auto b = io::parse_json(slurp(path("r.json"))).rows;
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GT(a.size(), 0u);
  // Multiset equality: compare canonical encodings after sorting.
  auto canon = [](const std::vector<SweepRow>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
      io::Report one;
      one.rows = {r};
      const auto csv = io::to_csv(one);
      out.push_back(csv.substr(csv.rfind('\n', csv.size() - 2) + 1));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(canon(a), canon(b));
}

TEST_F(CliTest, VerifyModelFilesAndErrors) {
  const auto model = write("two.json", kTwoBernoulli);
  const auto o = run({"verify", "--model", model, "--m-grid", "10", "--t-grid", "0.1",
                      "--side", "upper", "--format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = io::parse_json(o.out);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].model_id, "two");
  EXPECT_EQ(r.rows[0].method, "binomial_closed_form");
  EXPECT_EQ(run({"verify", "--models-dir", path("nope")}).code, 3);
  EXPECT_EQ(run({"verify", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"verify", "--side", "sideways"}).code, 2);
}

TEST_F(CliTest, CiExamples) {
  const auto o = run({"ci", "--m", "200", "--delta", "0.05"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("t=0.08654091913011"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("0.90000000000000002"), std::string::npos) << o.out;
  EXPECT_NE(run({"ci", "--m", "13", "--delta", "1"}).out.find("t=0\n"), std::string::npos);
  const auto out800 = run({"ci", "--m", "800", "--delta", "0.05"}).out;
  const double t800 = io::parse_double(out800.substr(2, out800.find('\n') - 2));
  EXPECT_NEAR(t800, 0.5 * 0.0865409191301142669, 1e-15);
  EXPECT_EQ(run({"ci", "--m", "10", "--delta", "0"}).code, 2);
  EXPECT_EQ(run({"ci", "--m", "10", "--delta", "1.5"}).code, 2);
  EXPECT_EQ(run({"ci", "--m", "0", "--delta", "0.1"}).code, 2);
}

TEST_F(CliTest, Histogram) {
  const auto model = write("pm.json", R"({"type": "finite", "atoms": [
      {"weight": 0.5, "component": {"kind": "pointmass", "c": 0}},
      {"weight": 0.5, "component": {"kind": "pointmass", "c": 1}}]})");
  const auto o = run({"histogram", "--model", model, "--m", "100", "--reps", "2000", "--bins", "10"});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream is(o.out);
  std::string line;
  std::vector<std::string> data;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("bin_low", 0) != 0) data.push_back(line);
  }
  ASSERT_EQ(data.size(), 10u);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = io::detail::split_csv_line(data[i]);
    const auto c = std::stoull(f[2]);
    total += c;
    if (i != 0 && i != 9) {
      EXPECT_EQ(c, 0u);
    }
  }
  EXPECT_EQ(total, 2000u);

  const auto js = run({"histogram", "--model", model, "--m", "5", "--reps", "100", "--format", "json"});
  ASSERT_EQ(js.code, 0);
  EXPECT_EQ(nlohmann::json::parse(js.out).at("bins").size(), 50u);
  EXPECT_EQ(run({"histogram", "--model", model, "--m", "5", "--bins", "1"}).code, 2);
}

TEST_F(CliTest, ThreadsFromEnvironment) {
  ::setenv("EXCHBOUND_THREADS", "2", 1);
  const auto a = run({"verify", "--reps", "3000", "--monte-carlo-only", "--m-grid", "10"});
  ::setenv("EXCHBOUND_THREADS", "1", 1);
  const auto b = run({"verify", "--reps", "3000", "--monte-carlo-only", "--m-grid", "10"});
  ::setenv("EXCHBOUND_THREADS", "zero", 1);
  EXPECT_EQ(run({"verify", "--reps", "10"}).code, 2);
  ::unsetenv("EXCHBOUND_THREADS");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(strip_timestamp(a.out), strip_timestamp(b.out));
}
