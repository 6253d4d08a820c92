#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "karmats/csv.hpp"
#include "karmats/document.hpp"
#include "karmats/editlog.hpp"

using namespace karmats;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(KARMATS_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& bytes) { std::ofstream(p, std::ios::binary) << bytes; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("karmats_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write(dir_ / "g.dscp.json", save_graph(gen::mixed_graph()));
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesSeriesAndSidecar) {
  write(dir_ / "sim.json", R"({"length": 30, "seed": 2})");
  const auto r = run("simulate " + path("g.dscp.json") + " " + path("sim.json") + " -o " + path("run"));
  ASSERT_EQ(r.code, 0);
  const auto frame = import_series(slurp(dir_ / "run.series.csv"), slurp(dir_ / "run.series.meta.json"));
  EXPECT_EQ(frame.length(), 30u);
  EXPECT_EQ(frame.meta.seed, 2u);
}

TEST_F(CliTest, BenchThenEvalPerfectEstimate) {
  write(dir_ / "suite.json", R"({"structure": "cycle", "replicates": 2, "seed": 5, "series_lengths": [40]})");
  ASSERT_EQ(run("bench " + path("suite.json") + " -o " + path("suite") + " -j 1").code, 0);
  ASSERT_TRUE(fs::exists(dir_ / "suite" / "manifest.json"));
  const auto graph = path("suite/rep001.dscp.json");
  const auto r = run("eval " + graph + " " + graph + " --lag-window 1");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["f1"], 1.0);
  EXPECT_EQ(j["sid"]["sid"], 0);
}

TEST_F(CliTest, EvalDiscoveryEdgeList) {
  write(dir_ / "est.csv", "source,target,lag\ntemperature,alarm,0\n");
  const auto r = run("eval " + path("g.dscp.json") + " " + path("est.csv") + " --format edge-list");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["windowed"]["tp"].size(), 1u);
}

TEST_F(CliTest, FidelityOfFrameWithItself) {
  write(dir_ / "sim.json", R"({"length": 200, "seed": 4})");
  ASSERT_EQ(run("simulate " + path("g.dscp.json") + " " + path("sim.json") + " -o " + path("a")).code, 0);
  const auto r = run("fidelity " + path("a.series.csv") + " " + path("a.series.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(r.out)["cosine"].get<double>(), 1.0);
}

TEST_F(CliTest, ConvertRoundTrips) {
  ASSERT_EQ(run("convert " + path("g.dscp.json") + " " + path("g.editlog.jsonl")).code, 0);
  ASSERT_EQ(run("convert " + path("g.editlog.jsonl") + " " + path("back.dscp.json")).code, 0);
  EXPECT_EQ(slurp(dir_ / "back.dscp.json"), slurp(dir_ / "g.dscp.json"));
}

TEST_F(CliTest, ErrorsExitNonZeroWithLocation) {
  write(dir_ / "bad.dscp.json", R"({"format_version": "karmats.dscp/1", "variables": [{"name": "x", "kind": 3}]})");
  write(dir_ / "sim.json", R"({"length": 5})");
  const std::string cmd = std::string(KARMATS_CLI_PATH) + " simulate " + path("bad.dscp.json") + " " +
                          path("sim.json") + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  std::string err;
  char buf[512];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) err.append(buf, n);
  const int status = pclose(p);
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_NE(err.find("/variables/0/kind"), std::string::npos) << err;
  EXPECT_NE(run("simulate " + path("missing.json") + " " + path("sim.json")).code, 0);
  EXPECT_NE(run("frobnicate").code, 0);
}
