// Copyright 2026 The editaudit Authors.
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
#include <fstream>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "editaudit/server.hpp"
#include "editaudit/tsv.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace editaudit {
namespace {

using nlohmann::json;

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(AUDIT_BINARY) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  EXPECT_NE(p, nullptr);
  std::string out;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string last_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  return s.substr(s.rfind('\n', end) + 1, end - s.rfind('\n', end));
}

struct CliFixture : ::testing::Test {
  testing::TempDir dir;
  std::filesystem::path dataset;
  std::filesystem::path fixture;

  void SetUp() override {
    fixture = dir / "fx";
    ASSERT_EQ(run("fixture --edits 3000 --pages 150 --seed 11 --out-dir " + q(fixture)).status, 0);
    dataset = dir / "ds.bin";
    ASSERT_EQ(run("ingest --edits " + q(fixture / "edits.tsv") + " --predictions " + q(fixture / "predictions.tsv") +
                  " --out " + q(dataset))
                  .status,
              0);
    std::filesystem::create_directories(dir / "ann");
  }
};

TEST_F(CliFixture, UsageErrorsExitTwo) {
  EXPECT_EQ(run("ingest --edits " + q(dir / "missing.tsv") + " --predictions " + q(fixture / "predictions.tsv") +
                " --out " + q(dir / "x.bin"))
                .status,
            2);
  EXPECT_EQ(run("report --dataset " + q(dataset) + " --annotations " + q(dir / "ann") +
                " --filter '{oops' --bucket UnexpectedRevert")
                .status,
            2);
  EXPECT_EQ(run("report --dataset " + q(dataset) + " --annotations " + q(dir / "ann") +
                " --filter '{}' --bucket Sideways")
                .status,
            2);
  EXPECT_EQ(run("report --dataset " + q(dataset) + " --annotations " + q(dir / "ann") +
                " --filter '{}' --bucket UnexpectedRevert --auditor nobody")
                .status,
            2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("").status, 2);
}

TEST_F(CliFixture, RuntimeFailuresExitOne) {
  EXPECT_EQ(run("ingest --edits " + q(fixture / "edits.tsv") + " --predictions " + q(fixture / "predictions.tsv") +
                " --out " + q(dir / "no" / "such" / "dir" / "x.bin"))
                .status,
            1);
  testing::write_file(dir / "bad.bin", "garbage\n");
  EXPECT_EQ(run("report --dataset " + q(dir / "bad.bin") + " --annotations " + q(dir / "ann") +
                " --filter '{}' --bucket UnexpectedRevert")
                .status,
            1);
}

TEST_F(CliFixture, IngestReport) {
  const auto normal = run("ingest --edits " + q(fixture / "edits.tsv") + " --predictions " +
                          q(fixture / "predictions.tsv") + " --out " + q(dir / "a.bin"));
  ASSERT_EQ(normal.status, 0);
  EXPECT_NE(normal.out.find("records:               3000"), std::string::npos) << normal.out;
  EXPECT_EQ(normal.out.find("reverted:              0\n"), std::string::npos);
  const auto none = run("ingest --edits " + q(fixture / "edits.tsv") + " --predictions " +
                        q(fixture / "predictions.tsv") + " --out " + q(dir / "b.bin") + " --window 0");
  ASSERT_EQ(none.status, 0);
  EXPECT_NE(none.out.find("reverted:              0\n"), std::string::npos) << none.out;
}

TEST(Cli, FixtureIsDeterministic) {
  testing::TempDir dir;
  ASSERT_EQ(run("fixture --edits 1500 --pages 60 --seed 5 --out-dir " + q(dir / "a")).status, 0);
  ASSERT_EQ(run("fixture --edits 1500 --pages 60 --seed 5 --out-dir " + q(dir / "b")).status, 0);
  ASSERT_EQ(run("fixture --edits 1500 --pages 60 --seed 6 --out-dir " + q(dir / "c")).status, 0);
  for (const char* f : {"edits.tsv", "predictions.tsv", "diffs.ndjson", "truth.tsv", "ground_truth.json"}) {
    EXPECT_EQ(testing::read_file(dir / "a" / f), testing::read_file(dir / "b" / f)) << f;
  }
  EXPECT_NE(testing::read_file(dir / "a" / "edits.tsv"), testing::read_file(dir / "c" / "edits.tsv"));
}

TEST(Cli, SinglePageFixture) {
  testing::TempDir dir;
  ASSERT_EQ(run("fixture --edits 400 --pages 1 --seed 2 --out-dir " + q(dir.path())).status, 0);
  std::ifstream in(dir / "edits.tsv");
  auto edits = parse_edits(in).rows;
  std::sort(edits.begin(), edits.end(),
            [](const RawEdit& a, const RawEdit& b) { return std::tie(a.timestamp, a.rev_id) < std::tie(b.timestamp, b.rev_id); });
  std::set<PageId> pages;
  for (const auto& e : edits) pages.insert(e.page_id);
  EXPECT_EQ(pages.size(), 1u);
  UnixSeconds end = 0;
  for (const auto& e : edits) end = std::max(end, e.timestamp);
  const RevertOptions opts;
  const auto got = detect_all_reverts(edits, opts, end);
  const auto want = oracle::reverts(edits, opts.window_seconds, opts.radius, opts.count_self_reverts, end);
  std::size_t reverted = 0;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    ASSERT_EQ(got[i].reverted, want[i].reverted) << i;
    ASSERT_EQ(got[i].reverting_rev_id, want[i].by) << i;
    reverted += got[i].reverted;
  }
  EXPECT_GT(reverted, 0u);
  const auto r = run("ingest --edits " + q(dir / "edits.tsv") + " --predictions " + q(dir / "predictions.tsv") +
                     " --out " + q(dir / "ds.bin"));
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("reverted:              " + std::to_string(reverted) + "\n"), std::string::npos) << r.out;
}

TEST_F(CliFixture, ReportMatchesService) {
  ServiceConfig config;
  config.dataset_path = dataset;
  config.annotations_path = dir / "ann";
  config.write_rate_limit = 0;
  config.fsync = false;
  auto service = make_service(config);
  ApiRequest create;
  create.method = "POST";
  create.path = "/api/auditors";
  create.body = R"({"display_name":"cli"})";
  const auto auditor = json::parse(service->handle(create).body);
  const std::string auth = "Bearer " + auditor["token"].get<std::string>();

  ApiRequest list;
  list.path = "/api/edits";
  list.authorization = auth;
  list.params = {{"bucket", "UnexpectedConsensus"}, {"n", "12"}, {"filter", "{}"}};
  const auto batch = json::parse(service->handle(list).body)["edits"];
  ASSERT_EQ(batch.size(), 12u);
  int i = 0;
  for (const auto& e : batch) {
    ApiRequest post;
    post.method = "POST";
    post.path = "/api/annotations";
    post.authorization = auth;
    post.body = json{{"rev_id", e["rev_id"]}, {"label", std::string(i++ % 3 == 0 ? "damaging" : "not_damaging")}}.dump();
    ASSERT_EQ(service->handle(post).status, 201);
  }

  ApiRequest summary;
  summary.path = "/api/summary";
  summary.authorization = auth;
  summary.params = {{"bucket", "UnexpectedConsensus"}, {"filter", "{}"}};
  const auto served = service->handle(summary);
  ASSERT_EQ(served.status, 200);

  const std::string base = "report --dataset " + q(dataset) + " --annotations " + q(dir / "ann") +
                           " --bucket UnexpectedConsensus --filter '{}' --format json";
  const auto mine = run(base + " --auditor " + auditor["auditor_id"].get<std::string>());
  ASSERT_EQ(mine.status, 0);
  // Same bytes, not just the same values.
  EXPECT_EQ(mine.out, served.body + "\n");
  EXPECT_EQ(json::parse(mine.out)["n_model_error"], 8);

  const auto both = run("report --dataset " + q(dataset) + " --annotations " + q(dir / "ann" / "annotations.ndjson") +
                        " --bucket UnexpectedConsensus --filter '{}'");
  ASSERT_EQ(both.status, 0);
  EXPECT_NE(both.out.find("UnexpectedConsensus"), std::string::npos);
  EXPECT_EQ(json::parse(last_line(both.out)), json::parse(served.body));

  const auto cmp = run(base + " --compare-filter '{}'");
  ASSERT_EQ(cmp.status, 0);
  const auto c = json::parse(cmp.out);
  EXPECT_EQ(c["rate_diff"], 0.0);
  EXPECT_EQ(c["p_value"], 1.0);
}

TEST_F(CliFixture, ReportWithoutLabels) {
  const auto r = run("report --dataset " + q(dataset) + " --annotations " + q(dir / "ann") +
                     " --bucket UnexpectedRevert --filter '{}' --format json");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["n_labeled"], 0);
  EXPECT_FALSE(j["rate_defined"].get<bool>());
}

}  // namespace
}  // namespace editaudit
