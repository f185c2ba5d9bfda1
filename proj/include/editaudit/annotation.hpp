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
#include <string_view>

#include "editaudit/edit.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/timeutil.hpp"

namespace editaudit {

/// An auditor's judgment. `skip` records that the auditor looked but did not
/// decide; it never enters a rate denominator.
enum class Label { Damaging, NotDamaging, Skip };

constexpr std::string_view to_string(Label l) {
  switch (l) {
    case Label::Damaging:
      return "damaging";
    case Label::NotDamaging:
      return "not_damaging";
    case Label::Skip:
      return "skip";
  }
  return "";
}

constexpr std::optional<Label> parse_label(std::string_view s) {
  if (s == "damaging") return Label::Damaging;
  if (s == "not_damaging") return Label::NotDamaging;
  if (s == "skip") return Label::Skip;
  return std::nullopt;
}

using AnnotationId = std::uint64_t;

struct Annotation {
  AnnotationId annotation_id = 0;
  std::string auditor_id;
  RevId rev_id = 0;
  Label label = Label::Skip;
  std::uint64_t filter_fingerprint = 0;
  FocusBucket bucket = FocusBucket::UnexpectedRevert;
  std::optional<std::string> note;
  UnixSeconds created_at = 0;
  std::optional<AnnotationId> superseded_by;

  bool live() const { return !superseded_by.has_value(); }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Auditor {
  std::string auditor_id;
  std::string display_name;
  UnixSeconds created_at = 0;

  friend bool operator==(const Auditor&, const Auditor&) = default;
};

}  // namespace editaudit
