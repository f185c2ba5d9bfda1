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

// Shared helpers for the test binaries.

#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "editaudit/dataset.hpp"
#include "editaudit/edit.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/fixture.hpp"
#include "editaudit/ingest.hpp"

namespace editaudit::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path() / "editaudit-XXXXXX";
    std::string tmpl = base.string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
}

inline std::string hash_of(int symbol) {
  // 40 hex chars; symbol picks one of a small alphabet.
  std::string h(40, '0');
  const std::string digits = "0123456789abcdef";
  h[38] = digits[(symbol / 16) % 16];
  h[39] = digits[symbol % 16];
  return h;
}

inline RawEdit make_edit(RevId rev, PageId page, UnixSeconds t, int hash_symbol, std::string editor = "Alice") {
  RawEdit e;
  e.rev_id = rev;
  e.page_id = page;
  e.page_title = "Page_" + std::to_string(page);
  e.timestamp = t;
  e.editor_name = std::move(editor);
  e.content_hash = hash_of(hash_symbol);
  return e;
}

/// The default 10,000-edit fixture, generated and ingested once per process.
struct FixtureFiles {
  TempDir dir;
  FixtureCorpus corpus;
  std::filesystem::path edits, predictions, diffs, truth, ground_truth;
  std::shared_ptr<const Dataset> dataset;
};

inline std::unique_ptr<FixtureFiles> build_fixture(const FixtureOptions& options) {
  auto f = std::make_unique<FixtureFiles>();
  f->corpus = generate_fixture(options);
  write_fixture(f->corpus, f->dir.path());
  f->edits = f->dir / kFixtureEditsFile;
  f->predictions = f->dir / kFixturePredictionsFile;
  f->diffs = f->dir / kFixtureDiffsFile;
  f->truth = f->dir / kFixtureTruthFile;
  f->ground_truth = f->dir / kFixtureGroundTruthFile;
  IngestOptions ingest;
  ingest.reverts = options.reverts;
  f->dataset = std::make_shared<const Dataset>(run_ingest(f->edits, f->predictions, ingest).dataset);
  return f;
}

inline const FixtureFiles& default_fixture() {
  static const auto f = build_fixture(FixtureOptions{});
  return *f;
}

/// A FilterSpec with a random subset of constraints, with bounds drawn from
/// values that occur in `ds` so that match sets are neither always empty nor
/// always everything.
inline FilterSpec random_filter(std::mt19937_64& rng, const Dataset& ds) {
  const auto records = ds.records();
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto sample = [&]() -> const RawEdit& {
    return records[std::uniform_int_distribution<std::size_t>(0, records.size() - 1)(rng)].edit;
  };
  auto range = [&](auto field, std::optional<std::int64_t>& lo, std::optional<std::int64_t>& hi) {
    std::int64_t a = field(sample()), b = field(sample());
    if (a > b) std::swap(a, b);
    if (coin(0.6)) lo = a;
    if (coin(0.6)) hi = b;
  };
  auto tri = [&] { return std::array{TriState::Any, TriState::Yes, TriState::No}[rng() % 3]; };
  FilterSpec f;
  if (coin(0.3)) {
    std::set<int> ns;
    const auto k = 1 + rng() % 3;
    for (std::size_t i = 0; i < k; ++i) ns.insert(sample().page_namespace);
    if (coin(0.2)) ns.insert(5999);
    f.namespaces = ns;
  }
  if (coin(0.3)) {
    std::set<std::string> cats;
    const auto k = 1 + rng() % 2;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& c = sample().page_categories;
      cats.insert(c.empty() ? std::string("No_such_category") : c[rng() % c.size()]);
    }
    f.categories_any = cats;
  }
  if (coin(0.3)) range([](const RawEdit& e) { return e.page_size_before; }, f.page_size_min, f.page_size_max);
  if (coin(0.3)) {
    range([](const RawEdit& e) { return e.byte_delta < 0 ? -e.byte_delta : e.byte_delta; }, f.abs_edit_size_min,
          f.abs_edit_size_max);
  }
  if (coin(0.4)) f.minor = tri();
  if (coin(0.4)) f.registered = tri();
  if (coin(0.4)) f.bot = tri();
  if (coin(0.3)) {
    range([](const RawEdit& e) { return e.editor_edit_count_at_time; }, f.editor_edit_count_min,
          f.editor_edit_count_max);
  }
  if (coin(0.2)) {
    range([](const RawEdit& e) { return e.editor_account_age_at_time; }, f.editor_account_age_min,
          f.editor_account_age_max);
  }
  return f;
}

}  // namespace editaudit::testing
