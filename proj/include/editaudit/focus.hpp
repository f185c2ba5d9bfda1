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

#include <array>
#include <optional>
#include <string_view>

namespace editaudit {

/// Quadrant crossing the model's prediction with the community outcome.
enum class FocusBucket {
  UnexpectedRevert,     // predicted non-damaging, reverted
  UnexpectedConsensus,  // predicted damaging, not reverted
  ExpectedRevert,       // predicted damaging, reverted
  ExpectedConsensus,    // predicted non-damaging, not reverted
};

inline constexpr std::array<FocusBucket, 4> kAllBuckets = {
    FocusBucket::UnexpectedRevert, FocusBucket::UnexpectedConsensus, FocusBucket::ExpectedRevert,
    FocusBucket::ExpectedConsensus};

inline constexpr double kDefaultThreshold = 0.5;

/// p >= threshold counts as predicted damaging.
constexpr FocusBucket classify_focus(double damaging_prob, bool reverted, double threshold) {
  const bool predicted_damaging = damaging_prob >= threshold;
  if (reverted) return predicted_damaging ? FocusBucket::ExpectedRevert : FocusBucket::UnexpectedRevert;
  return predicted_damaging ? FocusBucket::UnexpectedConsensus : FocusBucket::ExpectedConsensus;
}

constexpr bool is_revert_bucket(FocusBucket b) {
  return b == FocusBucket::UnexpectedRevert || b == FocusBucket::ExpectedRevert;
}

constexpr bool is_unexpected(FocusBucket b) {
  return b == FocusBucket::UnexpectedRevert || b == FocusBucket::UnexpectedConsensus;
}

constexpr std::string_view to_string(FocusBucket b) {
  switch (b) {
    case FocusBucket::UnexpectedRevert:
      return "UnexpectedRevert";
    case FocusBucket::UnexpectedConsensus:
      return "UnexpectedConsensus";
    case FocusBucket::ExpectedRevert:
      return "ExpectedRevert";
    case FocusBucket::ExpectedConsensus:
      return "ExpectedConsensus";
  }
  return "";
}

constexpr std::optional<FocusBucket> parse_bucket(std::string_view name) {
  for (auto b : kAllBuckets) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

constexpr std::size_t bucket_index(FocusBucket b) { return static_cast<std::size_t>(b); }

}  // namespace editaudit
