#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int status;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mata_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CommandResult run(const std::string& args) const {
    const std::string out = path("stdout.txt");
    const std::string cmd = std::string(MATA_CLI_PATH) + " " + args + " > " + out + " 2> " + path("stderr.txt");
    const int rc = std::system(cmd.c_str());
    return {rc, read(out)};
  }

  static std::string read(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

const char* kGraphs =
    "{\"id\":\"a\",\"nodes\":[\"A\",\"B\",\"A\"],\"edges\":[[0,1,\"\"],[1,2,\"\"]]}\n"
    "{\"id\":\"b\",\"nodes\":[\"A\",\"B\",\"C\",\"A\"],\"edges\":[[0,1,\"\"],[1,2,\"\"],[2,3,\"\"],[0,3,\"\"]]}\n";

}  // namespace

TEST_F(CliTest, SelfPairHasZeroDistanceAndEmptyPath) {
  write("g.jsonl", kGraphs);
  const auto r = run("--format json ged --graphs " + path("g.jsonl") + " --g1 a --g2 a --method exact");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("distance").get<int>(), 0);
  EXPECT_DOUBLE_EQ(j.at("sim").get<double>(), 1.0);
  EXPECT_TRUE(j.at("edit_path").empty());
  EXPECT_FALSE(j.contains("elapsed_ms"));
}

TEST_F(CliTest, MethodsBoundExactFromAbove) {
  write("g.jsonl", kGraphs);
  const auto exact = run("--format json ged --graphs " + path("g.jsonl") + " --g1 a --g2 b --method exact");
  ASSERT_EQ(exact.status, 0);
  const int d = nlohmann::json::parse(exact.out).at("distance").get<int>();
  EXPECT_EQ(d, 4);
  for (const std::string m : {"beam", "hungarian", "vj"}) {
    const auto r = run("--format json ged --graphs " + path("g.jsonl") + " --g1 a --g2 b --method " + m);
    ASSERT_EQ(r.status, 0) << m;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GE(j.at("distance").get<int>(), d) << m;
    EXPECT_EQ(static_cast<int>(j.at("edit_path").size()), j.at("distance").get<int>()) << m;
  }
}

TEST_F(CliTest, TextOutputAndTiming) {
  write("g.jsonl", kGraphs);
  const auto r = run("ged --graphs " + path("g.jsonl") + " --g1 a --g2 b");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("distance"), std::string::npos);
  const auto t = run("--format json --timing ged --graphs " + path("g.jsonl") + " --g1 a --g2 b");
  EXPECT_TRUE(nlohmann::json::parse(t.out).contains("elapsed_ms"));
}

TEST_F(CliTest, PerfectPredictionsScoreFullAccuracy) {
  write("g.jsonl", kGraphs);
  write("l.jsonl",
        "{\"g1\":\"a\",\"g2\":\"b\",\"split\":\"test\",\"ged\":4,\"sim\":0.4,\"matching\":[0,1,2],\"producer\":\"EXACT\"}\n"
        "{\"g1\":\"a\",\"g2\":\"a\",\"split\":\"test\",\"ged\":0,\"sim\":1.0,\"matching\":[0,1,2],\"producer\":\"EXACT\"}\n");
  write("p.jsonl", "{\"g1\":\"a\",\"g2\":\"b\",\"distance\":4}\n{\"g1\":\"a\",\"g2\":\"a\",\"distance\":0}\n");
  const auto r = run("metrics --graphs " + path("g.jsonl") + " --labels " + path("l.jsonl") + " --predictions " +
                     path("p.jsonl"));
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("ACC (%)     100.00"), std::string::npos) << r.out;
  const auto j = run("--format json metrics --graphs " + path("g.jsonl") + " --labels " + path("l.jsonl") +
                     " --predictions " + path("p.jsonl"));
  const auto report = nlohmann::json::parse(j.out);
  EXPECT_DOUBLE_EQ(report.at("acc").get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(report.at("mae").get<double>(), 0.0);
}

TEST_F(CliTest, BadInputsExitNonzero) {
  write("g.jsonl", kGraphs);
  EXPECT_NE(run("ged --graphs " + path("g.jsonl") + " --g1 a --g2 b --method magic").status, 0);
  EXPECT_NE(run("ged --graphs " + path("g.jsonl") + " --g1 a --g2 zz").status, 0);
  EXPECT_NE(run("ged --graphs " + path("missing.jsonl") + " --g1 a --g2 b").status, 0);
  EXPECT_NE(run("--format xml ged --graphs " + path("g.jsonl") + " --g1 a --g2 b").status, 0);
  // mata without candidates or a checkpoint
  EXPECT_NE(run("--k 1 ged --graphs " + path("g.jsonl") + " --g1 a --g2 b --method mata").status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST_F(CliTest, PipelineIsByteReproducible) {
  auto pipeline = [&](const std::string& tag) {
    const std::string g = path(tag + "g.jsonl"), p = path(tag + "p.jsonl"), l = path(tag + "l.jsonl");
    const std::string ck = path(tag + "m.json"), log = path(tag + "log.jsonl"), c = path(tag + "c.jsonl");
    const std::string d = path(tag + "d.jsonl");
    EXPECT_EQ(run("--seed 3 gen --count 12 --min-nodes 3 --max-nodes 5 --pairs 30 --graphs-out " + g +
                  " --pairs-out " + p)
                  .status,
              0);
    EXPECT_EQ(run("label --graphs " + g + " --pairs " + p + " --out " + l).status, 0);
    EXPECT_EQ(run("--seed 3 train --graphs " + g + " --pairs " + l + " --out " + ck + " --log " + log +
                  " --epochs 3 --hidden 8 --batch-size 8")
                  .status,
              0);
    EXPECT_EQ(run("--checkpoint " + ck + " --k 2 infer --graphs " + g + " --pairs " + l + " --out " + c).status, 0);
    EXPECT_EQ(run("--k 2 ged --graphs " + g + " --pairs " + l + " --method mata --candidates " + c + " --out " + d)
                  .status,
              0);
    std::string all;
    for (const auto& f : {g, p, l, ck, log, c, d}) all += read(f) + "\n--\n";
    return all;
  };
  const auto a = pipeline("x");
  const auto b = pipeline("y");
  EXPECT_EQ(a, b);
  EXPECT_GT(a.size(), 200u);
}
