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

#include <atomic>
#include <future>
#include <random>
#include <thread>

#include "editaudit/diff.hpp"
#include "editaudit/wiki_client.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace editaudit {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    out.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
    if (nl == std::string::npos) return out;
    start = nl + 1;
  }
}

std::size_t line_count(const std::string& joined) { return lines_of(joined).size(); }

TEST(Diff, Examples) {
  EXPECT_EQ(compute_diff("a\nb", "a\nb"), (std::vector<DiffOp>{{DiffOpKind::Equal, "a\nb"}}));
  EXPECT_EQ(compute_diff("a\nb", "a\nc"), (std::vector<DiffOp>{{DiffOpKind::Equal, "a"},
                                                              {DiffOpKind::Delete, "b"},
                                                              {DiffOpKind::Insert, "c"}}));
  EXPECT_EQ(compute_diff("", ""), (std::vector<DiffOp>{{DiffOpKind::Equal, ""}}));
  EXPECT_EQ(apply_diff("", compute_diff("", "x\ny")), "x\ny");
}

TEST(Diff, RandomPairsRoundTripWithMinimalEdits) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> alphabet = {"alpha", "beta", "gamma", "", "delta", "x"};
  auto random_text = [&] {
    const auto n = rng() % 12;
    std::string t;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) t += '\n';
      t += alphabet[rng() % alphabet.size()];
    }
    if (rng() % 5 == 0) t += '\n';
    return t;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto before = random_text();
    const auto after = random_text();
    const auto ops = compute_diff(before, after);
    ASSERT_EQ(apply_diff(before, ops), after) << i;
    std::size_t changed = 0;
    for (const auto& op : ops) {
      if (op.op != DiffOpKind::Equal) changed += line_count(op.text);
    }
    const auto a = lines_of(before), b = lines_of(after);
    ASSERT_EQ(changed, a.size() + b.size() - 2 * oracle::lcs_length(a, b)) << i;
  }
}

TEST(Diff, ApplyRejectsMismatchedOps) {
  EXPECT_THROW(apply_diff("a\nb", {{DiffOpKind::Equal, "a\nc"}}), InvalidArgument);
}

TEST(Excerpt, CapsAtFourKilobytes) {
  const std::string small(4096, 'a');
  EXPECT_EQ(excerpt(small), small);
  const std::string big(5000, 'b');
  const auto cut = excerpt(big);
  EXPECT_EQ(cut.size(), 4096u);
  EXPECT_TRUE(cut.ends_with(kTruncationMarker));
  // Never splits a UTF-8 sequence.
  std::string utf;
  while (utf.size() < 5000) utf += "\xe2\x82\xac";
  const auto u = excerpt(utf);
  EXPECT_LE(u.size(), 4096u);
  EXPECT_EQ((u.size() - kTruncationMarker.size()) % 3, 0u);
}

/// Transport that fails the test if touched.
struct ForbiddenTransport : Transport {
  std::atomic<int> calls{0};
  HttpResponse get(const std::string&) override {
    ++calls;
    ADD_FAILURE() << "network used in offline mode";
    throw TransportError("forbidden");
  }
};

/// Scripted upstream: answers with the given statuses in order, then 200.
struct StubTransport : Transport {
  std::vector<int> statuses;
  std::atomic<int> calls{0};
  std::string last_path;
  std::chrono::milliseconds delay{0};

  HttpResponse get(const std::string& path) override {
    const int n = calls++;
    last_path = path;
    if (delay.count()) std::this_thread::sleep_for(delay);
    if (n < static_cast<int>(statuses.size())) {
      if (statuses[n] < 0) throw TransportError("connection refused");
      if (statuses[n] != 200) return HttpResponse{statuses[n], "{}"};
    }
    return HttpResponse{200, R"({"batchcomplete":true,"query":{"pages":[{"pageid":1,"ns":0,"title":"T","revisions":[)"
                             R"({"revid":10,"parentid":0,"slots":{"main":{"contentmodel":"wikitext","content":"a\nb"}}},)"
                             R"({"revid":11,"parentid":10,"slots":{"main":{"contentmodel":"wikitext","content":"a\nc"}}}]}]}})"};
  }
};

WikiClient::Options live_options(std::shared_ptr<Transport> transport, std::vector<std::chrono::milliseconds>* slept) {
  WikiClient::Options o;
  o.parent_of = [](RevId r) -> std::optional<RevId> {
    if (r == 11) return 10;
    if (r == 10) return 0;
    return std::nullopt;
  };
  o.transport = std::move(transport);
  o.sleep = [slept](std::chrono::milliseconds d) {
    if (slept) slept->push_back(d);
  };
  return o;
}

TEST(WikiClient, FixtureModeNeverUsesTheNetwork) {
  auto fixtures = std::make_shared<FixtureDiffStore>();
  fixtures->add(11, "a\nb", "a\nc");
  auto forbidden = std::make_shared<ForbiddenTransport>();
  auto options = live_options(forbidden, nullptr);
  options.fixtures = fixtures;
  WikiClient client(options);
  const auto doc = client.get_diff(11);
  EXPECT_EQ(doc.source, DiffSource::Fixture);
  EXPECT_EQ(apply_diff(doc.before_excerpt, doc.diff_ops), doc.after_excerpt);
  EXPECT_THROW(client.get_diff(10), NotFound);
  EXPECT_THROW(client.get_diff(999), NotFound);
  EXPECT_EQ(forbidden->calls, 0);
}

TEST(WikiClient, FixtureFileFromGenerator) {
  const auto& f = testing::default_fixture();
  const FixtureDiffStore store(f.diffs);
  for (std::size_t i = 0; i < f.corpus.edits.size(); i += 97) {
    const auto* texts = store.find(f.corpus.edits[i].rev_id);
    ASSERT_NE(texts, nullptr);
    EXPECT_EQ(*texts, f.corpus.texts[i]);
  }
}

TEST(WikiClient, LiveFetchIsCachedInMemoryAndOnDisk) {
  testing::TempDir dir;
  auto stub = std::make_shared<StubTransport>();
  auto options = live_options(stub, nullptr);
  options.cache_dir = dir / "cache";
  {
    WikiClient client(options);
    const auto doc = client.get_diff(11);
    EXPECT_EQ(doc.source, DiffSource::Upstream);
    EXPECT_EQ(doc.before_excerpt, "a\nb");
    EXPECT_EQ(doc.after_excerpt, "a\nc");
    EXPECT_EQ(stub->last_path,
              "/w/api.php?action=query&prop=revisions&revids=10%7C11&rvprop=ids%7Ccontent&rvslots=main"
              "&format=json&formatversion=2");
    EXPECT_EQ(client.get_diff(11).source, DiffSource::Cache);
    EXPECT_EQ(stub->calls, 1);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "cache" / "11.json"));
  WikiClient restarted(options);
  const auto doc = restarted.get_diff(11);
  EXPECT_EQ(doc.source, DiffSource::Cache);
  EXPECT_EQ(doc.diff_ops, compute_diff("a\nb", "a\nc"));
  EXPECT_EQ(stub->calls, 1);
}

TEST(WikiClient, RetriesWithBackoffThenUnavailable) {
  std::vector<std::chrono::milliseconds> slept;
  auto flaky = std::make_shared<StubTransport>();
  flaky->statuses = {503, -1};
  WikiClient client(live_options(flaky, &slept));
  EXPECT_EQ(client.get_diff(11).source, DiffSource::Upstream);
  EXPECT_EQ(flaky->calls, 3);
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(250),
                                                            std::chrono::milliseconds(1000)}));

  auto down = std::make_shared<StubTransport>();
  down->statuses = {500, 502, 503, 200};
  WikiClient failing(live_options(down, nullptr));
  EXPECT_THROW(failing.get_diff(11), Unavailable);
  EXPECT_EQ(down->calls, 3);

  auto missing = std::make_shared<StubTransport>();
  missing->statuses = {404};
  WikiClient not_found(live_options(missing, nullptr));
  EXPECT_THROW(not_found.get_diff(11), NotFound);
  EXPECT_EQ(missing->calls, 1);
}

TEST(WikiClient, ConcurrentMissesCoalesce) {
  auto slow = std::make_shared<StubTransport>();
  slow->delay = std::chrono::milliseconds(200);
  WikiClient client(live_options(slow, nullptr));
  std::vector<std::future<DiffDoc>> results;
  for (int i = 0; i < 8; ++i) results.push_back(std::async(std::launch::async, [&] { return client.get_diff(11); }));
  for (auto& r : results) EXPECT_EQ(r.get().after_excerpt, "a\nc");
  EXPECT_EQ(slow->calls, 1);
}

TEST(WikiClient, PageCreationHasEmptyBefore) {
  auto stub = std::make_shared<StubTransport>();
  WikiClient client(live_options(stub, nullptr));
  const auto doc = client.get_diff(10);
  EXPECT_EQ(doc.before_excerpt, "");
  EXPECT_EQ(doc.after_excerpt, "a\nb");
}

TEST(DiffDoc, JsonRoundTrip) {
  const auto doc = make_diff_doc(5, "x\ny", "x\nz\ny", DiffSource::Upstream);
  EXPECT_EQ(diff_doc_from_json(to_json(doc)).diff_ops, doc.diff_ops);
  EXPECT_EQ(to_json(doc)["diff_ops"].dump(),
            R"([{"op":"equal","text":"x"},{"op":"insert","text":"z"},{"op":"equal","text":"y"}])");
}

}  // namespace
}  // namespace editaudit
