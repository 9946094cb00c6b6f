// Copyright 2026 The idrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "idrisk/report.h"
#include "test_support.h"

namespace idrisk {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir(
        ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    args.insert(args.begin(), "idrisk");
    return cli::Run(args, out_, err_);
  }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // CE-like original plus three synthetic files, Income synthesized.
  void MakeInputs() {
    ASSERT_EQ(Run({"generate", "--n", "200", "--seed", "1", "--out",
                   P("o.csv")}),
              0)
        << err_.str();
    ASSERT_EQ(Run({"synthesize", "--orig", P("o.csv"), "--visit", "Income",
                   "--m", "3", "--seed", "2", "--out", P("syn")}),
              0)
        << err_.str();
    for (int k = 1; k <= 3; ++k) {
      const std::string name = "syn_00" + std::to_string(k) + ".csv";
      fs::copy_file(dir_ / "syn" / "synthetic" / name,
                    dir_ / ("s_" + std::to_string(k) + ".csv"));
    }
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(Run({"generate", "--n", "1000", "--seed", "1", "--out", P("a.csv")}),
            0);
  ASSERT_EQ(Run({"generate", "--n", "1000", "--seed", "1", "--out", P("b.csv")}),
            0);
  EXPECT_EQ(Slurp(dir_ / "a.csv"), Slurp(dir_ / "b.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a.schema.json"));
  const Dataset loaded = LoadCsv(dir_ / "a.csv", LoadSchema(dir_ / "a.schema.json"));
  EXPECT_EQ(loaded, GenerateCeLike(1000, 1));
}

TEST_F(CliTest, EvaluateWritesMatricesAndSummary) {
  MakeInputs();
  ASSERT_EQ(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"),
                 "--known", "Age,Urban,Marital", "--synvars", "Income", "--r",
                 "0.1", "--out", P("out")}),
            0)
      << err_.str();
  for (const char* f : {"risk/c.csv", "risk/t.csv", "risk/ir.csv",
                        "risk/summary.json", "utility/utility.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  EXPECT_THAT(out_.str(), HasSubstr("file_risk"));
  EXPECT_THAT(out_.str(), HasSubstr("s_3.csv"));
  EXPECT_EQ(Slurp(dir_ / "out" / "risk" / "ir.csv").substr(0, 17),
            "syn_1,syn_2,syn_3");

  // Same numbers as the library.
  const Dataset orig = LoadCsv(dir_ / "o.csv", LoadSchema(dir_ / "o.schema.json"));
  std::vector<Dataset> syn;
  for (int k = 1; k <= 3; ++k) {
    syn.push_back(LoadCsv(dir_ / ("s_" + std::to_string(k) + ".csv"),
                          orig.schema()));
  }
  const RiskResult r = EvaluateFast(
      orig, syn,
      RiskConfig::WithUniformRadius(orig.schema(), {"Age", "Urban", "Marital"},
                                    {"Income"}, 0.1));
  const auto summary =
      nlohmann::json::parse(Slurp(dir_ / "out" / "risk" / "summary.json"));
  EXPECT_EQ(summary["file_risk"].get<std::vector<double>>(), r.file_risk);
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
  MakeInputs();
  const std::vector<std::string> args = {
      "evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"), "--known",
      "Age,Urban,Marital", "--synvars", "Income", "--r", "0.05"};
  auto with_out = [&](const std::string& o) {
    auto a = args;
    a.push_back("--out");
    a.push_back(P(o));
    return a;
  };
  ASSERT_EQ(Run(with_out("x")), 0);
  ASSERT_EQ(Run(with_out("y")), 0);
  for (const char* f : {"risk/ir.csv", "risk/summary.json", "risk/result.json",
                        "utility/utility.json"}) {
    EXPECT_EQ(Slurp(dir_ / "x" / f), Slurp(dir_ / "y" / f)) << f;
  }
}

TEST_F(CliTest, DirectoryAndPerVariableRadii) {
  MakeInputs();
  ASSERT_EQ(Run({"evaluate", "--orig", P("o.csv"), "--syn",
                 P("syn/synthetic"), "--known", "Age,Urban", "--synvars",
                 "Income", "--radius", "Age=0.1,Income=0.2", "--no-utility",
                 "--out", P("out")}),
            0)
      << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "out" / "utility"));
}

TEST_F(CliTest, ScalarAndMapRadiusConflict) {
  MakeInputs();
  EXPECT_EQ(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"),
                 "--known", "Age", "--synvars", "Income", "--r", "0.1",
                 "--radius", "Income=0.1"}),
            2);
  EXPECT_THAT(err_.str(), HasSubstr("--r"));
  EXPECT_THAT(err_.str(), HasSubstr("--radius"));
  EXPECT_THAT(err_.str(), HasSubstr("usage"));
}

TEST_F(CliTest, ErrorsNameTheField) {
  MakeInputs();
  EXPECT_NE(Run({"evaluate", "--bogus"}), 0);
  EXPECT_THAT(err_.str(), HasSubstr("--bogus"));

  EXPECT_NE(Run({"evaluate", "--syn", P("s_*.csv"), "--known", "Age",
                 "--synvars", "Income", "--r", "0.1"}),
            0);
  EXPECT_THAT(err_.str(), HasSubstr("--orig"));

  EXPECT_NE(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("nothing_*.csv"),
                 "--known", "Age", "--synvars", "Income", "--r", "0.1"}),
            0);
  EXPECT_THAT(err_.str(), HasSubstr("--syn"));

  EXPECT_NE(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"),
                 "--known", "Agee", "--synvars", "Income", "--r", "0.1"}),
            0);
  EXPECT_THAT(err_.str(), HasSubstr("Agee"));

  EXPECT_NE(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"),
                 "--known", "Age", "--synvars", "Income"}),
            0);
  EXPECT_THAT(err_.str(), HasSubstr("--r"));

  EXPECT_NE(Run({"evaluate", "--orig", P("o.csv"), "--syn", P("s_*.csv"),
                 "--known", "Age", "--synvars", "Income", "--r", "-1"}),
            0);
  EXPECT_THAT(err_.str(), HasSubstr("radius for 'Age'"));

  EXPECT_NE(Run({"generate", "--n", "0", "--out", P("z.csv")}), 0);
  EXPECT_NE(Run({}), 0);
  EXPECT_NE(Run({"mstudy", "--n", "50", "--repetitions", "1"}), 0);
  EXPECT_THAT(err_.str(), HasSubstr("repetitions"));
  EXPECT_NE(Run({"sweep", "--n", "50", "--known-radius", "wide"}), 0);
  EXPECT_THAT(err_.str(), HasSubstr("--known-radius"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  MakeInputs();
  {
    std::ofstream cfg(dir_ / "cfg.json");
    cfg << nlohmann::json{{"command", "evaluate"},
                          {"orig", P("o.csv")},
                          {"syn", {P("s_*.csv")}},
                          {"known", {"Age", "Urban", "Marital"}},
                          {"synvars", {"Income"}},
                          {"r", 0.3},
                          {"no_utility", true},
                          {"out", P("cfgout")}}
               .dump();
  }
  ASSERT_EQ(Run({"--config", P("cfg.json")}), 0) << err_.str();
  auto summary = nlohmann::json::parse(
      Slurp(dir_ / "cfgout" / "risk" / "summary.json"));
  EXPECT_EQ(summary["radii"]["Income"], 0.3);

  ASSERT_EQ(Run({"evaluate", "--config", P("cfg.json"), "--r", "0.05"}), 0)
      << err_.str();
  summary = nlohmann::json::parse(
      Slurp(dir_ / "cfgout" / "risk" / "summary.json"));
  EXPECT_EQ(summary["radii"]["Income"], 0.05);
  EXPECT_EQ(summary["radii"]["Age"], 0.05);

  {
    std::ofstream cfg(dir_ / "map.json");
    cfg << nlohmann::json{{"orig", P("o.csv")},
                          {"syn", {P("s_*.csv")}},
                          {"known", {"Age"}},
                          {"synvars", {"Income"}},
                          {"r", {{"Age", 0.1}, {"Income", 0.25}}},
                          {"no_utility", true},
                          {"out", P("mapout")}}
               .dump();
  }
  ASSERT_EQ(Run({"evaluate", "--config", P("map.json")}), 0) << err_.str();
  summary = nlohmann::json::parse(
      Slurp(dir_ / "mapout" / "risk" / "summary.json"));
  EXPECT_EQ(summary["radii"]["Income"], 0.25);

  std::ofstream(dir_ / "bad.json") << "{not json";
  EXPECT_EQ(Run({"evaluate", "--config", P("bad.json")}), 2);
  EXPECT_THAT(err_.str(), HasSubstr("--config"));
}

TEST_F(CliTest, ExperimentCommands) {
  ASSERT_EQ(Run({"sweep", "--n", "150", "--m", "2", "--scenarios", "S1,S3",
                 "--svg", "--out", P("e")}),
            0)
      << err_.str();
  EXPECT_THAT(out_.str(), HasSubstr("S3: maximizing radius"));
  ASSERT_EQ(Run({"scenarios", "--n", "150", "--m", "2", "--radius", "0.1",
                 "--svg", "--out", P("e")}),
            0)
      << err_.str();
  EXPECT_THAT(out_.str(), HasSubstr("S4 (r = 10.0%)"));
  ASSERT_EQ(Run({"mstudy", "--n", "120", "--m-values", "1,2",
                 "--repetitions", "3", "--svg", "--out", P("e")}),
            0)
      << err_.str();
  for (const char* f : {"sweep.json", "sweep.csv", "sweep.svg",
                        "scenarios.json", "scenarios.csv", "scenarios.svg",
                        "mstudy.json", "mstudy.csv", "mstudy.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / "e" / "experiments" / f)) << f;
  }
  const auto arms = nlohmann::json::parse(
      Slurp(dir_ / "e" / "experiments" / "mstudy.json"));
  EXPECT_EQ(arms.size(), 2u);
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(Run({"--help"}), 0);
  EXPECT_THAT(out_.str(), HasSubstr("evaluate"));
}

TEST(ReportTest, SchemaJsonRoundTrip) {
  const Schema s = GenerateCeLike(5, 1).schema();
  EXPECT_EQ(SchemaFromJson(ToJson(s)), s);
  EXPECT_THROW(SchemaFromJson(nlohmann::json::parse(R"({"variables": 3})")),
               DataError);
}

TEST(ReportTest, RiskJsonHasMatrices) {
  const auto six = testing::SixRecords();
  const std::vector<Dataset> syn = {six.syn};
  const auto j = ToJson(EvaluateFast(six.orig, syn, six.config));
  EXPECT_EQ(j["ir"][0][0], 0.5);
  EXPECT_EQ(j["c"][1][0], 1);
  EXPECT_EQ(j["file_risk"][0], 4.0);
}

}  // namespace
}  // namespace idrisk
