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
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "editaudit/edit.hpp"
#include "editaudit/error.hpp"

namespace editaudit {

inline constexpr std::int64_t kDefaultRevertWindowSeconds = 31'536'000;  // 365 days
inline constexpr int kDefaultRevertRadius = 15;

struct RevertOptions {
  std::int64_t window_seconds = kDefaultRevertWindowSeconds;
  int radius = kDefaultRevertRadius;
  // When false, an edit undone by its own author is left unreverted (and may
  // still be reverted later by someone else).
  bool count_self_reverts = true;
};

inline bool edit_order_less(const RawEdit& a, const RawEdit& b) {
  return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.rev_id < b.rev_id;
}

/// Identity-revert detection over one page history.
///
/// `page_edits` must share a page_id and be sorted by (timestamp, rev_id).
/// An edit R reverts every edit strictly between itself and the most recent
/// earlier revision O (at most `radius` revisions back) with the same content
/// hash, as long as R lands within (0, window] seconds after the reverted
/// edit. The first reverting edit wins. The output is parallel to the input.
inline std::vector<RevertStatus> detect_reverts(std::span<const RawEdit> page_edits, const RevertOptions& options) {
  const std::size_t n = page_edits.size();
  std::vector<RevertStatus> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].rev_id = page_edits[i].rev_id;
    if (i > 0) {
      if (page_edits[i].page_id != page_edits[0].page_id) {
        throw ContractViolation("detect_reverts: edits span more than one page");
      }
      if (!edit_order_less(page_edits[i - 1], page_edits[i])) {
        throw ContractViolation("detect_reverts: page history not sorted by (timestamp, rev_id)");
      }
    }
  }
  if (options.radius <= 0 || options.window_seconds <= 0) return out;

  const auto radius = static_cast<std::size_t>(options.radius);
  std::unordered_map<std::string_view, std::size_t> last_seen;
  last_seen.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const RawEdit& reverting = page_edits[j];
    auto it = last_seen.find(reverting.content_hash);
    if (it != last_seen.end() && j - it->second <= radius) {
      for (std::size_t i = it->second + 1; i < j; ++i) {
        RevertStatus& status = out[i];
        if (status.reverted) continue;
        const std::int64_t dt = reverting.timestamp - page_edits[i].timestamp;
        if (dt <= 0 || dt > options.window_seconds) continue;
        const bool self = page_edits[i].editor_name == reverting.editor_name;
        if (self && !options.count_self_reverts) continue;
        status.reverted = true;
        status.reverting_rev_id = reverting.rev_id;
        status.seconds_to_revert = dt;
        status.is_self_revert = self;
      }
    }
    last_seen[reverting.content_hash] = j;
  }
  return out;
}

/// Marks unreverted edits whose full observation window extends past
/// `observation_end` as censored.
inline void apply_censoring(std::span<const RawEdit> edits, std::span<RevertStatus> statuses,
                            UnixSeconds observation_end, std::int64_t window_seconds) {
  for (std::size_t i = 0; i < edits.size(); ++i) {
    statuses[i].censored = !statuses[i].reverted && observation_end - edits[i].timestamp < window_seconds;
  }
}

/// Runs detection on every page of a corpus. The result is parallel to
/// `edits` (input order). When `observation_end` is absent the latest edit
/// timestamp is used for censoring.
inline std::vector<RevertStatus> detect_all_reverts(std::span<const RawEdit> edits, const RevertOptions& options,
                                                    std::optional<UnixSeconds> observation_end = std::nullopt) {
  std::vector<std::size_t> order(edits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (edits[a].page_id != edits[b].page_id) return edits[a].page_id < edits[b].page_id;
    return edit_order_less(edits[a], edits[b]);
  });

  std::vector<RevertStatus> result(edits.size());
  std::vector<RawEdit> page;
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start;
    page.clear();
    while (end < order.size() && edits[order[end]].page_id == edits[order[start]].page_id) {
      page.push_back(edits[order[end]]);
      ++end;
    }
    auto statuses = detect_reverts(page, options);
    for (std::size_t k = 0; k < statuses.size(); ++k) result[order[start + k]] = std::move(statuses[k]);
    start = end;
  }

  UnixSeconds end_time = 0;
  if (observation_end) {
    end_time = *observation_end;
  } else {
    for (const auto& e : edits) end_time = std::max(end_time, e.timestamp);
  }
  apply_censoring(edits, result, end_time, options.window_seconds);
  return result;
}

}  // namespace editaudit
