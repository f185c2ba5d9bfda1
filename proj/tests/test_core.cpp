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

#include <map>
#include <random>
#include <set>

#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/index.hpp"
#include "editaudit/query.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace editaudit {
namespace {

TEST(ClassifyFocus, QuadrantExamples) {
  EXPECT_EQ(classify_focus(0.92, false, 0.5), FocusBucket::UnexpectedConsensus);
  EXPECT_EQ(classify_focus(0.08, true, 0.5), FocusBucket::UnexpectedRevert);
  EXPECT_EQ(classify_focus(0.5, true, 0.5), FocusBucket::ExpectedRevert);
  EXPECT_EQ(classify_focus(0.1, false, 0.5), FocusBucket::ExpectedConsensus);
}

TEST(ClassifyFocus, ExhaustiveGridMatchesTable) {
  for (int pi = 0; pi <= 100; ++pi) {
    for (bool reverted : {true, false}) {
      for (int ti = 1; ti <= 9; ++ti) {
        const double p = pi / 100.0, t = ti / 10.0;
        ASSERT_EQ(classify_focus(p, reverted, t), oracle::focus(p, reverted, t)) << p << " " << t;
      }
    }
  }
}

TEST(ClassifyFocus, MonotoneInScore) {
  for (bool reverted : {true, false}) {
    bool damaging_seen = false;
    for (int pi = 0; pi <= 1000; ++pi) {
      const auto b = classify_focus(pi / 1000.0, reverted, 0.37);
      const bool damaging = b == FocusBucket::UnexpectedConsensus || b == FocusBucket::ExpectedRevert;
      if (damaging_seen) {
        EXPECT_TRUE(damaging);
      }
      damaging_seen = damaging_seen || damaging;
    }
  }
}

TEST(ClassifyFocus, BucketNames) {
  for (auto b : kAllBuckets) EXPECT_EQ(parse_bucket(to_string(b)), b);
  EXPECT_FALSE(parse_bucket("unexpectedrevert"));
}

EditRecord record(int ns, bool bot) {
  EditRecord r;
  r.edit.page_namespace = ns;
  r.edit.editor_is_bot = bot;
  return r;
}

TEST(Filter, DefaultAndEmpty) {
  EXPECT_FALSE(matches(default_filter(), record(0, true)));
  EXPECT_TRUE(matches(default_filter(), record(0, false)));
  EXPECT_FALSE(matches(default_filter(), record(1, false)));
  EXPECT_TRUE(matches(FilterSpec{}, record(1, true)));
}

TEST(Filter, CategoriesAndEditSize) {
  EditRecord r;
  r.edit.page_categories = {"History", "Science"};
  r.edit.byte_delta = -300;
  FilterSpec f;
  f.categories_any = std::set<std::string>{"Art", "Science"};
  EXPECT_TRUE(matches(f, r));
  f.categories_any = std::set<std::string>{"Art"};
  EXPECT_FALSE(matches(f, r));
  FilterSpec size;
  size.abs_edit_size_min = 250;
  EXPECT_TRUE(matches(size, r));
  size.abs_edit_size_max = 299;
  EXPECT_FALSE(matches(size, r));
}

TEST(Filter, CanonicalJsonAndFingerprint) {
  const auto f = parse_filter(R"({"bot":"no","namespaces":[4,0,0],"minor":"any","page_size_min":null})");
  EXPECT_EQ(canonical_string(f), R"({"bot":"no","namespaces":[0,4]})");
  const auto g = parse_filter(R"({"namespaces":[0,4],"bot":"no"})");
  EXPECT_EQ(fingerprint(f), fingerprint(g));
  EXPECT_NE(fingerprint(f), fingerprint(default_filter()));
  EXPECT_EQ(canonical_string(FilterSpec{}), "{}");
  // FNV-1a 64 of "{}".
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : std::string("{}")) h = (h ^ c) * 0x100000001b3ULL;
  EXPECT_EQ(fingerprint(FilterSpec{}), h);
  EXPECT_EQ(fingerprint_hex(0xabcULL), "0000000000000abc");
}

TEST(Filter, StrictParsing) {
  EXPECT_THROW(parse_filter("{"), InvalidArgument);
  EXPECT_THROW(parse_filter("[]"), InvalidArgument);
  EXPECT_THROW(parse_filter(R"({"colour":"red"})"), InvalidArgument);
  EXPECT_THROW(parse_filter(R"({"bot":true})"), InvalidArgument);
  EXPECT_THROW(parse_filter(R"({"page_size_min":10,"page_size_max":5})"), InvalidArgument);
  EXPECT_THROW(parse_filter(R"({"namespaces":[6000]})"), InvalidArgument);
  EXPECT_THROW(parse_filter(R"({"editor_edit_count_max":"7"})"), InvalidArgument);
}

TEST(Filter, JsonRoundTripOnRandomSpecs) {
  const auto& f = testing::default_fixture();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto spec = testing::random_filter(rng, *f.dataset);
    EXPECT_EQ(filter_from_json(to_json(spec)), spec);
    EXPECT_EQ(parse_filter(canonical_string(spec)), spec);
  }
}

TEST(Filter, AddingAConstraintNeverEnlargesTheMatchSet) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    auto spec = testing::random_filter(rng, *f.dataset);
    const auto before = index.evaluate(spec).count();
    if (spec.registered == TriState::Any) spec.registered = TriState::Yes;
    if (!spec.editor_edit_count_max) spec.editor_edit_count_max = 5000;
    EXPECT_LE(index.evaluate(spec).count(), before);
  }
}

TEST(DatasetIndex, EqualsLinearScanOnRandomFilters) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  const auto records = f.dataset->records();
  std::mt19937_64 rng(42);
  std::size_t nonempty = 0;
  for (int i = 0; i < 100; ++i) {
    const auto spec = testing::random_filter(rng, *f.dataset);
    std::vector<std::uint32_t> want;
    for (std::uint32_t k = 0; k < records.size(); ++k) {
      if (oracle::filter_accepts(spec, records[k])) want.push_back(k);
    }
    ASSERT_EQ(index.evaluate(spec).positions(), want) << canonical_string(spec);
    nonempty += !want.empty() && want.size() < records.size();
  }
  EXPECT_GT(nonempty, 30u);
}

TEST(DatasetIndex, BucketsPartitionNonCensoredRecords) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  std::map<FocusBucket, std::size_t> want;
  std::size_t censored = 0;
  for (const auto& r : f.dataset->records()) {
    if (r.revert.censored) {
      ++censored;
      continue;
    }
    ++want[oracle::focus(r.damaging_prob, r.revert.reverted, 0.5)];
  }
  std::size_t sum = 0;
  for (auto b : kAllBuckets) {
    EXPECT_EQ(index.bucket_members(b).count(), want[b]) << to_string(b);
    sum += index.bucket_members(b).count();
  }
  EXPECT_EQ(index.censored().count(), censored);
  EXPECT_EQ(sum + censored, f.dataset->size());
}

/// Dataset with `eligible` reverted low-score records among `total`.
Dataset small_dataset(std::size_t total, std::size_t eligible) {
  std::vector<EditRecord> records;
  for (std::size_t i = 0; i < total; ++i) {
    EditRecord r;
    r.edit = testing::make_edit(static_cast<RevId>(i + 1), 1, static_cast<UnixSeconds>(i), 1);
    r.damaging_prob = i < eligible ? 0.1 : 0.9;
    r.revert.rev_id = r.edit.rev_id;
    r.revert.reverted = i < eligible;
    records.push_back(r);
  }
  return Dataset(std::move(records), {});
}

TEST(Query, SameRequestSameRecords) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  SampleRequest req;
  req.filter = default_filter();
  req.bucket = FocusBucket::UnexpectedRevert;
  req.n = 10;
  req.seed = 99;
  const auto a = query(index, req);
  const auto b = query(index, req);
  ASSERT_EQ(a.records.size(), 10u);
  EXPECT_EQ(a.records, b.records);
  req.seed = 100;
  EXPECT_NE(query(index, req).records, a.records);
}

TEST(Query, CountsPartitionTheFilteredSet) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    SampleRequest req;
    req.filter = testing::random_filter(rng, *f.dataset);
    req.n = 0;
    const auto res = query(index, req);
    EXPECT_TRUE(res.records.empty());
    std::size_t sum = 0;
    for (auto c : res.counts) sum += c;
    EXPECT_EQ(sum, res.filtered_total - res.censored_excluded);
  }
}

TEST(Query, ReturnsEveryQualifyingRecordWhenFewerThanN) {
  const auto ds = small_dataset(1000, 12);
  std::size_t by_scan = 0;
  for (const auto& r : ds.records()) {
    by_scan += oracle::focus(r.damaging_prob, r.revert.reverted, 0.5) == FocusBucket::UnexpectedRevert;
  }
  ASSERT_EQ(by_scan, 12u);
  const DatasetIndex index(ds, 0.5);
  SampleRequest req;
  req.bucket = FocusBucket::UnexpectedRevert;
  req.n = 500;
  const auto res = query(index, req);
  EXPECT_EQ(res.records.size(), 12u);
  EXPECT_FALSE(res.next_cursor);
  std::set<RevId> ids;
  for (const auto* r : res.records) ids.insert(r->rev_id());
  EXPECT_EQ(ids.size(), 12u);
}

TEST(Query, SamplingIsUniform) {
  const auto ds = small_dataset(40, 10);
  const DatasetIndex index(ds, 0.5);
  std::map<RevId, int> draws;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    SampleRequest req;
    req.bucket = FocusBucket::UnexpectedRevert;
    req.n = 1;
    req.seed = seed;
    ++draws[query(index, req).records.at(0)->rev_id()];
  }
  ASSERT_EQ(draws.size(), 10u);
  for (const auto& [id, count] : draws) {
    EXPECT_GE(count, 140) << id;
    EXPECT_LE(count, 260) << id;
  }
}

TEST(Query, CursorPagesCoverThePoolWithoutRepeats) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  SampleRequest req;
  req.bucket = FocusBucket::UnexpectedConsensus;
  req.n = 37;
  req.seed = 11;
  std::set<RevId> seen;
  std::size_t pages = 0;
  std::size_t expected = 0;
  while (true) {
    const auto res = query(index, req);
    expected = res.counts[bucket_index(FocusBucket::UnexpectedConsensus)];
    for (const auto* r : res.records) {
      EXPECT_TRUE(seen.insert(r->rev_id()).second);
      EXPECT_FALSE(r->revert.censored);
      EXPECT_EQ(classify_focus(r->damaging_prob, r->revert.reverted, 0.5), FocusBucket::UnexpectedConsensus);
    }
    ++pages;
    if (!res.next_cursor) break;
    req.cursor = res.next_cursor;
  }
  EXPECT_EQ(seen.size(), expected);
  EXPECT_EQ(pages, (expected + 36) / 37);

  // A single large page yields the same sequence as the paginated walk.
  SampleRequest whole = req;
  whole.cursor.reset();
  whole.n = 500;
  const auto all = query(index, whole);
  std::set<RevId> all_ids;
  for (const auto* r : all.records) all_ids.insert(r->rev_id());
  EXPECT_EQ(all_ids, seen);
}

TEST(Query, RejectsBadRequests) {
  const auto& f = testing::default_fixture();
  const DatasetIndex index(*f.dataset, 0.5);
  SampleRequest req;
  req.n = 501;
  EXPECT_THROW(query(index, req), InvalidArgument);
  req.n = 5;
  req.cursor = "zz.1";
  EXPECT_THROW(query(index, req), InvalidArgument);
  req.cursor.reset();
  const auto first = query(index, req);
  ASSERT_TRUE(first.next_cursor);
  SampleRequest other = req;
  other.seed = 1234;
  other.cursor = first.next_cursor;
  EXPECT_THROW(query(index, other), InvalidArgument);
}

}  // namespace
}  // namespace editaudit
