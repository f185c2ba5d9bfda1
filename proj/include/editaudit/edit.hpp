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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "editaudit/timeutil.hpp"

namespace editaudit {

using RevId = std::int64_t;
using PageId = std::int64_t;

/// One revision as read from the edits file.
struct RawEdit {
  RevId rev_id = 0;
  RevId parent_rev_id = 0;  // 0 = page creation
  PageId page_id = 0;
  int page_namespace = 0;
  std::string page_title;
  std::vector<std::string> page_categories;  // sorted, unique
  std::int64_t page_size_before = 0;
  std::int64_t byte_delta = 0;
  bool is_minor = false;
  UnixSeconds timestamp = 0;
  std::string editor_name;
  bool editor_is_registered = false;
  bool editor_is_bot = false;
  std::int64_t editor_edit_count_at_time = 0;
  std::int64_t editor_account_age_at_time = 0;
  std::string content_hash;  // 40 lowercase hex chars

  friend bool operator==(const RawEdit&, const RawEdit&) = default;
};

/// Model score for one revision. 0 = least likely damaging, 1 = most likely.
struct Prediction {
  RevId rev_id = 0;
  double damaging_prob = 0.0;
  std::string model_version;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct RevertStatus {
  RevId rev_id = 0;
  bool reverted = false;
  std::optional<RevId> reverting_rev_id;
  std::optional<std::int64_t> seconds_to_revert;
  bool is_self_revert = false;
  // Not reverted, and the observation window had not fully elapsed when the
  // data ends, so "not reverted" is not yet a settled outcome.
  bool censored = false;

  friend bool operator==(const RevertStatus&, const RevertStatus&) = default;
};

/// Joined view: edit metadata, model score, and community outcome.
struct EditRecord {
  RawEdit edit;
  double damaging_prob = 0.0;
  std::string model_version;
  RevertStatus revert;

  RevId rev_id() const { return edit.rev_id; }
  std::int64_t abs_edit_size() const { return edit.byte_delta < 0 ? -edit.byte_delta : edit.byte_delta; }

  friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

inline bool is_valid_content_hash(const std::string& h) {
  if (h.size() != 40) return false;
  for (char c : h) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

inline constexpr int kMaxNamespace = 5999;

}  // namespace editaudit
