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

#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "editaudit/annotation.hpp"
#include "editaudit/dataset.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/summary.hpp"

// Slice summaries shared by the HTTP service and the offline report command,
// so both produce byte-identical JSON for the same inputs.

namespace editaudit {

/// Labels of live annotations recorded in `bucket` on records matching `filter`.
inline std::vector<Label> slice_labels(const Dataset& dataset, std::span<const Annotation> live,
                                       const FilterSpec& filter, FocusBucket bucket) {
  std::vector<Label> labels;
  for (const auto& a : live) {
    if (!a.live() || a.bucket != bucket) continue;
    const auto* record = dataset.find(a.rev_id);
    // Censored edits belong to no bucket population.
    if (record && !record->revert.censored && matches(filter, *record)) labels.push_back(a.label);
  }
  return labels;
}

inline AuditSummary summarize_slice(const Dataset& dataset, std::span<const Annotation> live,
                                    const FilterSpec& filter, FocusBucket bucket, double alpha) {
  const auto labels = slice_labels(dataset, live, filter, bucket);
  return summarize(bucket, labels, filter, alpha);
}

/// Throws InsufficientData when either slice has no labeled edits.
inline GroupComparison compare_slices(const Dataset& dataset, std::span<const Annotation> live,
                                      const FilterSpec& filter_a, const FilterSpec& filter_b, FocusBucket bucket,
                                      double alpha) {
  return compare(summarize_slice(dataset, live, filter_a, bucket, alpha),
                 summarize_slice(dataset, live, filter_b, bucket, alpha));
}

inline std::string format_rate(const AuditSummary& s) {
  if (!s.rate) return "undefined (no labeled edits)";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f (%lld/%lld), %g%% CI [%.4f, %.4f]", *s.rate,
                static_cast<long long>(s.n_model_error), static_cast<long long>(s.n_labeled), 100 * (1 - s.alpha),
                s.ci->low, s.ci->high);
  return buf;
}

inline std::string render_text(const AuditSummary& s) {
  std::ostringstream out;
  out << "bucket:        " << to_string(s.bucket) << "\n"
      << "filter:        " << canonical_string(s.filter) << "\n"
      << "labeled:       " << s.n_labeled << " (skipped " << s.n_skipped << ")\n"
      << "model errors:  " << s.n_model_error << " " << to_string(s.error_kind) << "\n"
      << "error rate:    " << format_rate(s) << "\n";
  return out.str();
}

inline std::string render_text(const GroupComparison& c) {
  std::ostringstream out;
  out << "group A\n" << render_text(c.a) << "group B\n" << render_text(c.b);
  char buf[160];
  std::snprintf(buf, sizeof buf, "difference:    %+.4f, CI [%+.4f, %+.4f]\np-value:       %.6g (%s)\n", c.rate_diff,
                c.diff_ci_low, c.diff_ci_high, c.p_value, std::string(to_string(c.method)).c_str());
  out << buf;
  return out.str();
}

}  // namespace editaudit
