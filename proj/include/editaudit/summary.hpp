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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "editaudit/annotation.hpp"
#include "editaudit/error.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/stats.hpp"

namespace editaudit {

inline constexpr double kDefaultAlpha = 0.05;

enum class ErrorKind { FalsePositive, FalseNegative };

constexpr std::string_view to_string(ErrorKind k) {
  return k == ErrorKind::FalsePositive ? "FalsePositive" : "FalseNegative";
}

/// Buckets where the model predicted damaging can only hold false positives;
/// the others only false negatives.
constexpr ErrorKind error_kind_for(FocusBucket b) {
  return b == FocusBucket::UnexpectedConsensus || b == FocusBucket::ExpectedRevert ? ErrorKind::FalsePositive
                                                                                  : ErrorKind::FalseNegative;
}

/// True when an auditor's label shows the model was wrong for an edit in `b`.
constexpr bool is_model_error(FocusBucket b, Label label) {
  if (label == Label::Skip) return false;
  return error_kind_for(b) == ErrorKind::FalsePositive ? label == Label::NotDamaging : label == Label::Damaging;
}

struct AuditSummary {
  FilterSpec filter;
  FocusBucket bucket = FocusBucket::UnexpectedRevert;
  std::int64_t n_labeled = 0;
  std::int64_t n_skipped = 0;
  std::int64_t n_model_error = 0;
  ErrorKind error_kind = ErrorKind::FalseNegative;
  double alpha = kDefaultAlpha;
  // Present only when n_labeled > 0. rate is n_model_error / n_labeled.
  std::optional<double> rate;
  std::optional<stats::Interval> ci;

  bool rate_defined() const { return rate.has_value(); }
};

enum class CompareMethod { TwoProportionZ, FisherExact };

constexpr std::string_view to_string(CompareMethod m) {
  return m == CompareMethod::TwoProportionZ ? "two_proportion_z" : "fisher_exact";
}

struct GroupComparison {
  AuditSummary a;
  AuditSummary b;
  double rate_diff = 0.0;
  double diff_ci_low = 0.0;
  double diff_ci_high = 0.0;
  double p_value = 1.0;
  CompareMethod method = CompareMethod::TwoProportionZ;
};

/// Per-bucket misclassification estimate. Skips are counted but excluded from
/// the denominator.
inline AuditSummary summarize(FocusBucket bucket, std::span<const Label> labels, const FilterSpec& filter,
                              double alpha = kDefaultAlpha) {
  stats::z_critical(alpha);  // validates alpha
  AuditSummary s;
  s.filter = filter;
  s.bucket = bucket;
  s.alpha = alpha;
  s.error_kind = error_kind_for(bucket);
  for (Label l : labels) {
    if (l == Label::Skip) {
      ++s.n_skipped;
      continue;
    }
    ++s.n_labeled;
    if (is_model_error(bucket, l)) ++s.n_model_error;
  }
  if (s.n_labeled > 0) {
    s.rate = static_cast<double>(s.n_model_error) / static_cast<double>(s.n_labeled);
    s.ci = stats::wilson_interval(s.n_model_error, s.n_labeled, alpha);
  }
  return s;
}

/// Compares two slices' error rates. Uses the pooled two-proportion z-test
/// unless any cell of the 2x2 (error, correct) table is below 5, in which
/// case Fisher's exact test. The difference interval is the unpooled normal
/// approximation at a's alpha.
inline GroupComparison compare(const AuditSummary& a, const AuditSummary& b) {
  if (a.error_kind != b.error_kind) {
    throw InvalidArgument("compare: cannot compare a false-positive rate with a false-negative rate");
  }
  if (a.n_labeled < 1 || b.n_labeled < 1) throw InsufficientData("compare: both groups need labeled edits");
  GroupComparison out;
  out.a = a;
  out.b = b;
  const double pa = static_cast<double>(a.n_model_error) / static_cast<double>(a.n_labeled);
  const double pb = static_cast<double>(b.n_model_error) / static_cast<double>(b.n_labeled);
  out.rate_diff = pa - pb;
  const double z = stats::z_critical(a.alpha);
  const double se = std::sqrt(pa * (1 - pa) / static_cast<double>(a.n_labeled) +
                              pb * (1 - pb) / static_cast<double>(b.n_labeled));
  out.diff_ci_low = std::max(-1.0, out.rate_diff - z * se);
  out.diff_ci_high = std::min(1.0, out.rate_diff + z * se);

  const stats::Table2x2 table{a.n_model_error, a.n_labeled - a.n_model_error, b.n_model_error,
                              b.n_labeled - b.n_model_error};
  if (table.min_cell() < 5) {
    out.method = CompareMethod::FisherExact;
    out.p_value = stats::fisher_exact_two_sided(table);
  } else {
    out.method = CompareMethod::TwoProportionZ;
    out.p_value = stats::two_proportion_z(a.n_model_error, a.n_labeled, b.n_model_error, b.n_labeled).second;
  }
  return out;
}

inline nlohmann::json to_json(const AuditSummary& s) {
  nlohmann::json j;
  j["filter"] = to_json(s.filter);
  j["filter_fingerprint"] = fingerprint_hex(fingerprint(s.filter));
  j["bucket"] = to_string(s.bucket);
  j["n_labeled"] = s.n_labeled;
  j["n_skipped"] = s.n_skipped;
  j["n_model_error"] = s.n_model_error;
  j["error_kind"] = to_string(s.error_kind);
  j["alpha"] = s.alpha;
  j["rate_defined"] = s.rate_defined();
  j["rate"] = s.rate ? nlohmann::json(*s.rate) : nlohmann::json(nullptr);
  j["ci_low"] = s.ci ? nlohmann::json(s.ci->low) : nlohmann::json(nullptr);
  j["ci_high"] = s.ci ? nlohmann::json(s.ci->high) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const GroupComparison& c) {
  nlohmann::json j;
  j["a"] = to_json(c.a);
  j["b"] = to_json(c.b);
  j["rate_diff"] = c.rate_diff;
  j["diff_ci_low"] = c.diff_ci_low;
  j["diff_ci_high"] = c.diff_ci_high;
  j["p_value"] = c.p_value;
  j["method"] = to_string(c.method);
  return j;
}

}  // namespace editaudit
