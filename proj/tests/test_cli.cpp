// Copyright 2026 The fairrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#ifndef FAIRRANK_CLI_PATH
#error "FAIRRANK_CLI_PATH must point at the fairrank binary"
#endif

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  std::string cmd = std::string(FAIRRANK_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json parse_single(const std::string& text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  EXPECT_FALSE(j.is_discarded()) << text;
  return j;
}

std::map<std::string, std::string> contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = buf.str();
  }
  return out;
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / "fairrank_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
  }
  static void TearDownTestSuite() { fs::remove_all(root); }
  static std::string p(const std::string& leaf) { return (root / leaf).string(); }
  static fs::path root;
};
fs::path CliPipeline::root;

TEST(Cli, VersionAndHelp) {
  auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("1.0.0"), std::string::npos);
  EXPECT_EQ(run("--help").code, 0);
  for (const char* sub : {"prepare", "segment", "rank", "rerank", "evaluate", "sweep", "run", "stats"}) {
    EXPECT_EQ(run(std::string(sub) + " --help").code, 0) << sub;
    EXPECT_EQ(run(std::string(sub) + " --version").code, 0) << sub;
  }
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("stats --no-such-flag").code, 1);
  EXPECT_EQ(run("rerank --k 0").code, 1);
}

TEST_F(CliPipeline, StagesChainAndEmitJson) {
  auto prep = run("prepare --synthetic --users 150 --items 100 --min-degree 10 --max-degree 40 --kcore 5 "
                  "--seed 3 --json --out " + p("data"));
  ASSERT_EQ(prep.code, 0) << prep.out;
  auto pj = parse_single(prep.out);
  EXPECT_EQ(pj["status"], "ok");
  EXPECT_GT(pj["train"].get<int>(), 0);

  auto seg = run("segment --data " + p("data") + " --out " + p("groups") + " --json");
  ASSERT_EQ(seg.code, 0);
  EXPECT_EQ(parse_single(seg.out)["advantaged_items"], 20);

  ASSERT_EQ(run("rank --data " + p("data") + " --ranker itemknn --n 40 --out " + p("scores.tsv")).code, 0);

  auto rr = run("rerank --mode CP --lambda1 0.05 --lambda2 0.05 --k 10 --data " + p("data") + " --groups " +
                p("groups") + " --scores " + p("scores.tsv") + " --out " + p("cp.tsv") + " --json");
  ASSERT_EQ(rr.code, 0) << rr.out;
  EXPECT_EQ(parse_single(rr.out)["mode"], "CP");
  EXPECT_TRUE(fs::exists(p("cp.tsv")));
  EXPECT_TRUE(fs::exists(p("cp.tsv.json")));

  // --k 0 with otherwise valid inputs is still a usage error
  EXPECT_EQ(run("rerank --k 0 --data " + p("data") + " --groups " + p("groups") + " --scores " +
                p("scores.tsv")).code, 1);

  ASSERT_EQ(run("rerank --mode N --data " + p("data") + " --groups " + p("groups") + " --scores " +
                p("scores.tsv") + " --out " + p("n.tsv")).code, 0);
  ASSERT_EQ(run("evaluate --data " + p("data") + " --groups " + p("groups") + " --lists " + p("n.tsv") +
                " --out " + p("n.json")).code, 0);
  auto ev = run("evaluate --json --data " + p("data") + " --groups " + p("groups") + " --lists " + p("cp.tsv") +
                " --reference " + p("n.json") + " --out " + p("cp.json"));
  ASSERT_EQ(ev.code, 0);
  auto report = parse_single(ev.out)["report"];
  EXPECT_EQ(report["mode"], "CP");
  EXPECT_FALSE(report["delta_pct"].is_null());
  EXPECT_NEAR(report["mcpf"].get<double>(),
              0.5 * report["dpf"].get<double>() + 0.5 * report["dcf"].get<double>(), 1e-12);

  auto sw = run("sweep --json --data " + p("data") + " --groups " + p("groups") + " --scores " + p("scores.tsv") +
                " --grid 0,0.05,0.1 --out " + p("sweep.tsv"));
  ASSERT_EQ(sw.code, 0);
  EXPECT_EQ(parse_single(sw.out)["rows"], 3);

  auto st = run("stats --json --data " + p("data"));
  ASSERT_EQ(st.code, 0);
  EXPECT_GT(parse_single(st.out)["stats"]["sparsity"].get<double>(), 0.0);
}

TEST_F(CliPipeline, DataErrorsExitTwo) {
  {
    std::ofstream bad(p("bad.csv"));
    bad << "u1,i1,1\nu2\n";
  }
  auto r = run("prepare --json --input " + p("bad.csv") + " --out " + p("bad"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(parse_single(r.out)["exit_code"], 2);
  EXPECT_EQ(run("segment --data " + p("missing_dir")).code, 2);
  {
    std::ofstream scores(p("garbage_scores.tsv"));
    scores << "not a score file\n";
  }
  ASSERT_EQ(run("prepare --synthetic --users 60 --items 50 --max-degree 30 --kcore 3 --out " + p("d2")).code, 0);
  ASSERT_EQ(run("segment --data " + p("d2") + " --out " + p("g2")).code, 0);
  EXPECT_EQ(run("rerank --data " + p("d2") + " --groups " + p("g2") + " --scores " + p("garbage_scores.tsv") +
                " --out " + p("x.tsv")).code, 2);
}

TEST_F(CliPipeline, RunTwiceIsIdentical) {
  nlohmann::json cfg = {
      {"datasets", {{{"name", "zipf"}, {"kcore", 5},
                     {"synthetic", {{"users", 120}, {"items", 90}, {"min_degree", 10}, {"max_degree", 40}}}}}},
      {"rankers", {{{"type", "mostpop"}, {"N", 30}}, {{"type", "itemknn"}, {"N", 30}}}},
      {"rerank", {{"modes", {"N", "C", "P", "CP"}}, {"lambda1", {0.05}}, {"lambda2", {0.05, 0.2}}}}};
  {
    std::ofstream f(p("exp.json"));
    f << cfg.dump(2);
  }
  auto a = run("run --config " + p("exp.json") + " --out " + p("run_a") + " --json");
  auto b = run("run --config " + p("exp.json") + " --jobs 2 --out " + p("run_b"));
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(parse_single(a.out)["reports"], 2 * (1 + 1 + 2 + 2));
  auto ca = contents(p("run_a")), cb = contents(p("run_b"));
  ca.erase("config.json");
  cb.erase("config.json");
  EXPECT_EQ(ca, cb);
}

TEST_F(CliPipeline, OutputDirectoryFromEnvironment) {
  auto env_root = root / "envout";
  std::string cmd = "FAIRRANK_OUTPUT_DIR=" + env_root.string() + " " + std::string(FAIRRANK_CLI_PATH) +
                    " prepare --synthetic --users 60 --items 50 --max-degree 30 --kcore 3 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env_root / "dataset" / "manifest.json"));
}

}  // namespace
