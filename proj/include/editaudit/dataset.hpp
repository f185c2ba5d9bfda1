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

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "editaudit/edit.hpp"
#include "editaudit/error.hpp"
#include "editaudit/reverts.hpp"

namespace editaudit {

struct JoinReport {
  std::size_t records = 0;
  std::size_t edits_unmatched = 0;        // edits with no prediction (dropped)
  std::size_t predictions_unmatched = 0;  // predictions with no edit

  friend bool operator==(const JoinReport&, const JoinReport&) = default;
};

/// Immutable joined corpus, sorted by rev_id.
class Dataset {
 public:
  struct Provenance {
    std::int64_t revert_window_seconds = kDefaultRevertWindowSeconds;
    int revert_radius = kDefaultRevertRadius;
    UnixSeconds observation_end = 0;
    JoinReport join;

    friend bool operator==(const Provenance&, const Provenance&) = default;
  };

  Dataset() = default;
  Dataset(std::vector<EditRecord> records, Provenance provenance)
      : records_(std::move(records)), provenance_(provenance) {
    std::sort(records_.begin(), records_.end(),
              [](const EditRecord& a, const EditRecord& b) { return a.rev_id() < b.rev_id(); });
    for (std::size_t i = 1; i < records_.size(); ++i) {
      if (records_[i - 1].rev_id() == records_[i].rev_id()) {
        throw ContractViolation("dataset: duplicate rev_id " + std::to_string(records_[i].rev_id()));
      }
    }
  }

  std::span<const EditRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const Provenance& provenance() const { return provenance_; }

  const EditRecord* find(RevId rev_id) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), rev_id,
                               [](const EditRecord& r, RevId id) { return r.rev_id() < id; });
    return it != records_.end() && it->rev_id() == rev_id ? &*it : nullptr;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<EditRecord> records_;
  Provenance provenance_;
};

struct JoinResult {
  std::vector<EditRecord> records;
  JoinReport report;
};

/// Inner join of edits and predictions, decorated with revert outcomes.
/// Duplicate rev_ids in any input are fatal; every edit needs a status.
inline JoinResult join_dataset(std::span<const RawEdit> edits, std::span<const Prediction> predictions,
                               std::span<const RevertStatus> statuses) {
  auto check_unique = [](auto&& range, const char* what) {
    std::unordered_set<RevId> seen;
    seen.reserve(range.size());
    for (const auto& item : range) {
      if (!seen.insert(item.rev_id).second) {
        throw ContractViolation(std::string("join: duplicate rev_id ") + std::to_string(item.rev_id) + " in " +
                                what);
      }
    }
  };
  check_unique(edits, "edits");
  check_unique(predictions, "predictions");
  check_unique(statuses, "revert statuses");

  std::unordered_map<RevId, const Prediction*> by_rev;
  by_rev.reserve(predictions.size());
  for (const auto& p : predictions) by_rev.emplace(p.rev_id, &p);
  std::unordered_map<RevId, const RevertStatus*> status_by_rev;
  status_by_rev.reserve(statuses.size());
  for (const auto& s : statuses) status_by_rev.emplace(s.rev_id, &s);

  JoinResult out;
  std::size_t matched_predictions = 0;
  for (const auto& e : edits) {
    auto st = status_by_rev.find(e.rev_id);
    if (st == status_by_rev.end()) {
      throw ContractViolation("join: no revert status for rev_id " + std::to_string(e.rev_id));
    }
    auto p = by_rev.find(e.rev_id);
    if (p == by_rev.end()) {
      ++out.report.edits_unmatched;
      continue;
    }
    ++matched_predictions;
    out.records.push_back(EditRecord{e, p->second->damaging_prob, p->second->model_version, *st->second});
  }
  out.report.records = out.records.size();
  out.report.predictions_unmatched = predictions.size() - matched_predictions;
  return out;
}

// Binary dataset file: 8-byte magic, one version byte, provenance, records.
// All integers little-endian.
inline constexpr std::array<char, 8> kDatasetMagic = {'E', 'D', 'A', 'U', 'D', 'S', 'E', 'T'};
inline constexpr std::uint8_t kDatasetVersion = 1;

namespace dataset_detail {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u64(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint8_t u8() {
    char c;
    if (!in_.get(c)) throw ParseError("dataset: truncated file");
    return static_cast<std::uint8_t>(c);
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), 8)) throw ParseError("dataset: truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = u64();
    if (n > (1u << 24)) throw ParseError("dataset: implausible string length");
    std::string s(n, '\0');
    if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw ParseError("dataset: truncated file");
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace dataset_detail

inline void write_dataset(std::ostream& out, const Dataset& ds) {
  dataset_detail::Writer w(out);
  out.write(kDatasetMagic.data(), kDatasetMagic.size());
  w.u8(kDatasetVersion);
  const auto& prov = ds.provenance();
  w.i64(prov.revert_window_seconds);
  w.i64(prov.revert_radius);
  w.i64(prov.observation_end);
  w.u64(prov.join.records);
  w.u64(prov.join.edits_unmatched);
  w.u64(prov.join.predictions_unmatched);
  w.u64(ds.size());
  for (const auto& r : ds.records()) {
    const auto& e = r.edit;
    w.i64(e.rev_id);
    w.i64(e.parent_rev_id);
    w.i64(e.page_id);
    w.i64(e.page_namespace);
    w.str(e.page_title);
    w.u64(e.page_categories.size());
    for (const auto& c : e.page_categories) w.str(c);
    w.i64(e.page_size_before);
    w.i64(e.byte_delta);
    w.u8(e.is_minor);
    w.i64(e.timestamp);
    w.str(e.editor_name);
    w.u8(e.editor_is_registered);
    w.u8(e.editor_is_bot);
    w.i64(e.editor_edit_count_at_time);
    w.i64(e.editor_account_age_at_time);
    w.str(e.content_hash);
    w.f64(r.damaging_prob);
    w.str(r.model_version);
    const auto& s = r.revert;
    w.u8(static_cast<std::uint8_t>((s.reverted ? 1 : 0) | (s.is_self_revert ? 2 : 0) | (s.censored ? 4 : 0) |
                                   (s.reverting_rev_id ? 8 : 0) | (s.seconds_to_revert ? 16 : 0)));
    w.i64(s.reverting_rev_id.value_or(0));
    w.i64(s.seconds_to_revert.value_or(0));
  }
  if (!out) throw IoError("dataset: write failed");
}

inline Dataset read_dataset(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kDatasetMagic) {
    throw ParseError("dataset: bad magic number (not a dataset file)");
  }
  dataset_detail::Reader r(in);
  const auto version = r.u8();
  if (version != kDatasetVersion) {
    throw ParseError("dataset: unsupported format version " + std::to_string(version));
  }
  Dataset::Provenance prov;
  prov.revert_window_seconds = r.i64();
  prov.revert_radius = static_cast<int>(r.i64());
  prov.observation_end = r.i64();
  prov.join.records = r.u64();
  prov.join.edits_unmatched = r.u64();
  prov.join.predictions_unmatched = r.u64();
  const auto count = r.u64();
  std::vector<EditRecord> records;
  records.reserve(std::min<std::uint64_t>(count, 1u << 24));
  for (std::uint64_t i = 0; i < count; ++i) {
    EditRecord rec;
    auto& e = rec.edit;
    e.rev_id = r.i64();
    e.parent_rev_id = r.i64();
    e.page_id = r.i64();
    e.page_namespace = static_cast<int>(r.i64());
    e.page_title = r.str();
    const auto ncat = r.u64();
    for (std::uint64_t c = 0; c < ncat; ++c) e.page_categories.push_back(r.str());
    e.page_size_before = r.i64();
    e.byte_delta = r.i64();
    e.is_minor = r.u8() != 0;
    e.timestamp = r.i64();
    e.editor_name = r.str();
    e.editor_is_registered = r.u8() != 0;
    e.editor_is_bot = r.u8() != 0;
    e.editor_edit_count_at_time = r.i64();
    e.editor_account_age_at_time = r.i64();
    e.content_hash = r.str();
    rec.damaging_prob = r.f64();
    rec.model_version = r.str();
    const auto flags = r.u8();
    rec.revert.rev_id = e.rev_id;
    rec.revert.reverted = flags & 1;
    rec.revert.is_self_revert = flags & 2;
    rec.revert.censored = flags & 4;
    const auto reverting = r.i64();
    const auto seconds = r.i64();
    if (flags & 8) rec.revert.reverting_rev_id = reverting;
    if (flags & 16) rec.revert.seconds_to_revert = seconds;
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(records), prov);
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace editaudit
