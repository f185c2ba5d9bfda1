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

#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "editaudit/store.hpp"
#include "support.hpp"

namespace editaudit {
namespace {

AnnotationStore::Options fast_options() {
  AnnotationStore::Options o;
  o.sync = false;
  o.clock = [] { return UnixSeconds{1600000000}; };
  return o;
}

TEST(Store, CreateAndAuthenticate) {
  testing::TempDir dir;
  AnnotationStore store(dir.path(), fast_options());
  const auto a = store.create_auditor("sam");
  const auto b = store.create_auditor("sam");
  EXPECT_NE(a.auditor.auditor_id, b.auditor.auditor_id);
  EXPECT_EQ(a.auditor.auditor_id.rfind("aud_", 0), 0u);
  EXPECT_EQ(a.token.size(), 32u);
  EXPECT_EQ(store.authenticate(a.token), a.auditor.auditor_id);
  EXPECT_FALSE(store.authenticate("nope"));
  EXPECT_THROW(store.create_auditor(""), InvalidArgument);
  EXPECT_THROW(store.create_auditor(std::string(65, 'x')), InvalidArgument);
  EXPECT_NO_THROW(store.create_auditor(std::string(64, 'x')));
  // Tokens are never written in the clear.
  EXPECT_EQ(testing::read_file(dir / kAuditorsFile).find(a.token), std::string::npos);
}

TEST(Store, RelabelSupersedes) {
  testing::TempDir dir;
  AnnotationStore store(dir.path(), fast_options());
  const auto id = store.create_auditor("kim").auditor.auditor_id;
  const auto first = store.record_annotation(id, 10, Label::Damaging, FocusBucket::UnexpectedRevert, 1);
  EXPECT_FALSE(first.superseded);
  EXPECT_FALSE(first.annotation.superseded_by);
  const auto second = store.record_annotation(id, 10, Label::NotDamaging, FocusBucket::UnexpectedRevert, 1, "oops");
  EXPECT_EQ(second.superseded, first.annotation.annotation_id);
  const auto live = store.live_annotations(id);
  ASSERT_EQ(live.size(), 1u);
  EXPECT_EQ(live[0].label, Label::NotDamaging);
  EXPECT_EQ(live[0].note, "oops");
  const auto all = store.all_annotations();
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].superseded_by, second.annotation.annotation_id);
}

TEST(Store, Errors) {
  testing::TempDir dir;
  auto options = fast_options();
  options.rev_exists = [](RevId r) { return r < 100; };
  AnnotationStore store(dir.path(), options);
  const auto id = store.create_auditor("kim").auditor.auditor_id;
  EXPECT_THROW(store.record_annotation("aud_0000000000000000", 1, Label::Skip, FocusBucket::UnexpectedRevert, 0),
               AuthError);
  EXPECT_THROW(store.record_annotation(id, 100, Label::Skip, FocusBucket::UnexpectedRevert, 0), NotFound);
  EXPECT_THROW(store.record_annotation(id, 1, Label::Skip, FocusBucket::UnexpectedRevert, 0, std::string(1001, 'n')),
               InvalidArgument);
  // 1000 multi-byte characters are within the limit.
  std::string note;
  for (int i = 0; i < 1000; ++i) note += "\xc3\xa9";
  EXPECT_NO_THROW(store.record_annotation(id, 1, Label::Skip, FocusBucket::UnexpectedRevert, 0, note));
  EXPECT_THROW(store.annotation_history("aud_ffffffffffffffff"), AuthError);
}

TEST(Store, HistoryCounts) {
  testing::TempDir dir;
  AnnotationStore store(dir.path(), fast_options());
  const auto id = store.create_auditor("kim").auditor.auditor_id;
  EXPECT_TRUE(store.annotation_history(id).annotations.empty());
  for (RevId r = 1; r <= 3; ++r) store.record_annotation(id, r, Label::Damaging, FocusBucket::UnexpectedRevert, 0);
  for (RevId r = 4; r <= 5; ++r) store.record_annotation(id, r, Label::Skip, FocusBucket::UnexpectedRevert, 0);
  const auto h = store.annotation_history(id);
  EXPECT_EQ(h.annotations.size(), 5u);
  EXPECT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts.at(FocusBucket::UnexpectedRevert).at(Label::Damaging), 3u);
  EXPECT_EQ(h.counts.at(FocusBucket::UnexpectedRevert).at(Label::Skip), 2u);
  EXPECT_EQ(to_json(h)["counts"].dump(), R"({"UnexpectedRevert":{"damaging":3,"skip":2}})");
}

struct Op {
  std::size_t auditor;
  RevId rev;
  Label label;
  FocusBucket bucket;
};

std::vector<Op> random_ops(std::mt19937_64& rng, std::size_t n, std::size_t auditors) {
  std::vector<Op> ops;
  for (std::size_t i = 0; i < n; ++i) {
    ops.push_back(Op{rng() % auditors, static_cast<RevId>(1 + rng() % 60),
                     std::array{Label::Damaging, Label::NotDamaging, Label::Skip}[rng() % 3], kAllBuckets[rng() % 4]});
  }
  return ops;
}

// Live set by direct definition: the last op of each (auditor, rev) wins.
std::map<std::pair<std::string, RevId>, std::pair<Label, AnnotationId>> expected_live(
    const std::vector<Op>& ops, std::size_t prefix, const std::vector<std::string>& ids) {
  std::map<std::pair<std::string, RevId>, std::pair<Label, AnnotationId>> out;
  for (std::size_t i = 0; i < prefix; ++i) out[{ids[ops[i].auditor], ops[i].rev}] = {ops[i].label, i + 1};
  return out;
}

std::map<std::pair<std::string, RevId>, std::pair<Label, AnnotationId>> actual_live(const AnnotationStore& store) {
  std::map<std::pair<std::string, RevId>, std::pair<Label, AnnotationId>> out;
  for (const auto& a : store.live_annotations()) {
    EXPECT_TRUE(out.emplace(std::pair{a.auditor_id, a.rev_id}, std::pair{a.label, a.annotation_id}).second)
        << "two live labels for " << a.auditor_id << " on " << a.rev_id;
  }
  return out;
}

TEST(Store, ReplayReproducesLiveSet) {
  testing::TempDir dir;
  std::mt19937_64 rng(77);
  const auto ops = random_ops(rng, 1000, 4);
  std::vector<std::string> ids;
  {
    AnnotationStore store(dir.path(), fast_options());
    for (int i = 0; i < 4; ++i) ids.push_back(store.create_auditor("a" + std::to_string(i)).auditor.auditor_id);
    for (const auto& op : ops) store.record_annotation(ids[op.auditor], op.rev, op.label, op.bucket, 0);
    EXPECT_EQ(actual_live(store), expected_live(ops, ops.size(), ids));
  }
  const std::string log_before = testing::read_file(dir / kAnnotationsFile);
  AnnotationStore reopened(dir.path(), fast_options());
  EXPECT_EQ(actual_live(reopened), expected_live(ops, ops.size(), ids));
  EXPECT_EQ(reopened.all_annotations().size(), 1000u);
  EXPECT_EQ(testing::read_file(dir / kAnnotationsFile), log_before);
  for (const auto& id : ids) {
    const auto h = reopened.annotation_history(id);
    std::map<FocusBucket, std::map<Label, std::size_t>> recount;
    for (const auto& a : h.annotations) ++recount[a.bucket][a.label];
    EXPECT_EQ(h.counts, recount);
  }
}

TEST(Store, TornTailIsCutAndWritesResume) {
  testing::TempDir dir;
  std::string id;
  {
    AnnotationStore store(dir.path(), fast_options());
    id = store.create_auditor("kim").auditor.auditor_id;
    store.record_annotation(id, 1, Label::Damaging, FocusBucket::UnexpectedRevert, 0);
    store.record_annotation(id, 2, Label::Damaging, FocusBucket::UnexpectedRevert, 0);
  }
  const auto path = dir / kAnnotationsFile;
  const auto full = testing::read_file(path);
  std::filesystem::resize_file(path, full.size() - 10);
  AnnotationStore store(dir.path(), fast_options());
  EXPECT_GT(store.torn_bytes_recovered(), 0u);
  ASSERT_EQ(store.live_annotations().size(), 1u);
  const auto again = store.record_annotation(id, 2, Label::Skip, FocusBucket::UnexpectedRevert, 0);
  EXPECT_EQ(again.annotation.annotation_id, 2);
  AnnotationStore reread(dir.path(), fast_options());
  EXPECT_EQ(reread.live_annotations().size(), 2u);
  EXPECT_EQ(reread.torn_bytes_recovered(), 0u);
}

TEST(Store, ReadOnlyNeverTouchesFiles) {
  testing::TempDir dir;
  {
    AnnotationStore store(dir.path(), fast_options());
    const auto id = store.create_auditor("kim").auditor.auditor_id;
    store.record_annotation(id, 1, Label::Damaging, FocusBucket::UnexpectedRevert, 0);
  }
  const auto path = dir / kAnnotationsFile;
  const auto full = testing::read_file(path);
  std::filesystem::resize_file(path, full.size() - 3);
  auto options = fast_options();
  options.read_only = true;
  const AnnotationStore store(dir.path(), options);
  EXPECT_EQ(std::filesystem::file_size(path), full.size() - 3);
  EXPECT_TRUE(store.live_annotations().empty());
  EXPECT_THROW(AnnotationStore(dir / "missing", options), IoError);
}

TEST(Store, CorruptMiddleLineIsFatal) {
  testing::TempDir dir;
  {
    AnnotationStore store(dir.path(), fast_options());
    const auto id = store.create_auditor("kim").auditor.auditor_id;
    store.record_annotation(id, 1, Label::Damaging, FocusBucket::UnexpectedRevert, 0);
  }
  testing::write_file(dir / kAnnotationsFile, "{not json\n" + testing::read_file(dir / kAnnotationsFile));
  EXPECT_THROW(AnnotationStore(dir.path(), fast_options()), ParseError);
}

TEST(Store, AnnotationJsonShape) {
  Annotation a;
  a.annotation_id = 3;
  a.auditor_id = "aud_0123456789abcdef";
  a.rev_id = 9;
  a.label = Label::NotDamaging;
  a.filter_fingerprint = 0x1234;
  a.bucket = FocusBucket::UnexpectedConsensus;
  a.created_at = 5;
  EXPECT_EQ(to_json(a).dump(),
            R"({"annotation_id":3,"auditor_id":"aud_0123456789abcdef","bucket":"UnexpectedConsensus",)"
            R"("created_at":5,"filter_fingerprint":"0000000000001234","label":"not_damaging","note":null,)"
            R"("rev_id":9,"superseded_by":null})");
  EXPECT_EQ(annotation_from_json(to_json(a)), a);
}

}  // namespace
}  // namespace editaudit
