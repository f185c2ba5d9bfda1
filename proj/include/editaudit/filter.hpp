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
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "editaudit/edit.hpp"
#include "editaudit/error.hpp"

namespace editaudit {

enum class TriState { Any, Yes, No };

constexpr bool tri_matches(TriState t, bool value) {
  return t == TriState::Any || (t == TriState::Yes) == value;
}

/// Declarative predicate over article, edit and editor attributes. Absent
/// fields do not constrain; the default-constructed spec matches everything.
struct FilterSpec {
  std::optional<std::set<int>> namespaces;
  std::optional<std::set<std::string>> categories_any;
  std::optional<std::int64_t> page_size_min, page_size_max;
  std::optional<std::int64_t> abs_edit_size_min, abs_edit_size_max;
  TriState minor = TriState::Any;
  TriState registered = TriState::Any;
  TriState bot = TriState::Any;
  std::optional<std::int64_t> editor_edit_count_min, editor_edit_count_max;
  std::optional<std::int64_t> editor_account_age_min, editor_account_age_max;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

inline bool matches(const FilterSpec& f, const EditRecord& r) {
  const RawEdit& e = r.edit;
  auto in_range = [](std::int64_t v, const std::optional<std::int64_t>& lo, const std::optional<std::int64_t>& hi) {
    return (!lo || v >= *lo) && (!hi || v <= *hi);
  };
  if (f.namespaces && !f.namespaces->contains(e.page_namespace)) return false;
  if (f.categories_any) {
    const bool any = std::any_of(e.page_categories.begin(), e.page_categories.end(),
                                 [&](const std::string& c) { return f.categories_any->contains(c); });
    if (!any) return false;
  }
  return in_range(e.page_size_before, f.page_size_min, f.page_size_max) &&
         in_range(r.abs_edit_size(), f.abs_edit_size_min, f.abs_edit_size_max) &&
         tri_matches(f.minor, e.is_minor) && tri_matches(f.registered, e.editor_is_registered) &&
         tri_matches(f.bot, e.editor_is_bot) &&
         in_range(e.editor_edit_count_at_time, f.editor_edit_count_min, f.editor_edit_count_max) &&
         in_range(e.editor_account_age_at_time, f.editor_account_age_min, f.editor_account_age_max);
}

/// "All human edits on mainspace articles".
inline FilterSpec default_filter() {
  FilterSpec f;
  f.namespaces = std::set<int>{0};
  f.bot = TriState::No;
  return f;
}

inline constexpr std::int64_t kNewcomerMaxEdits = 100;

/// Registered editors with at most 100 edits at the time of the edit.
inline FilterSpec newcomer_filter() {
  FilterSpec f;
  f.registered = TriState::Yes;
  f.editor_edit_count_max = kNewcomerMaxEdits;
  return f;
}

inline FilterSpec experienced_filter() {
  FilterSpec f;
  f.registered = TriState::Yes;
  f.editor_edit_count_min = kNewcomerMaxEdits + 1;
  return f;
}

inline void validate(const FilterSpec& f) {
  auto check = [](const std::optional<std::int64_t>& lo, const std::optional<std::int64_t>& hi, const char* name) {
    if (lo && hi && *lo > *hi) throw InvalidArgument(std::string("filter: ") + name + " min exceeds max");
  };
  check(f.page_size_min, f.page_size_max, "page_size");
  check(f.abs_edit_size_min, f.abs_edit_size_max, "abs_edit_size");
  check(f.editor_edit_count_min, f.editor_edit_count_max, "editor_edit_count");
  check(f.editor_account_age_min, f.editor_account_age_max, "editor_account_age");
  if (f.namespaces) {
    for (int ns : *f.namespaces) {
      if (ns < 0 || ns > kMaxNamespace) throw InvalidArgument("filter: namespace out of range");
    }
  }
}

namespace filter_detail {

constexpr std::string_view tri_name(TriState t) {
  switch (t) {
    case TriState::Yes:
      return "yes";
    case TriState::No:
      return "no";
    case TriState::Any:
      break;
  }
  return "any";
}

inline TriState parse_tri(const nlohmann::json& v, std::string_view key) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "any") return TriState::Any;
    if (s == "yes") return TriState::Yes;
    if (s == "no") return TriState::No;
  }
  throw InvalidArgument("filter: " + std::string(key) + " must be \"any\", \"yes\" or \"no\"");
}

inline std::int64_t parse_int(const nlohmann::json& v, std::string_view key) {
  if (!v.is_number_integer()) throw InvalidArgument("filter: " + std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace filter_detail

/// Canonical JSON form: absent and "any" fields omitted, keys and sets sorted.
inline nlohmann::json to_json(const FilterSpec& f) {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* key, const std::optional<std::int64_t>& v) {
    if (v) j[key] = *v;
  };
  auto put_tri = [&](const char* key, TriState t) {
    if (t != TriState::Any) j[key] = filter_detail::tri_name(t);
  };
  if (f.namespaces) j["namespaces"] = *f.namespaces;
  if (f.categories_any) j["categories_any"] = *f.categories_any;
  put("page_size_min", f.page_size_min);
  put("page_size_max", f.page_size_max);
  put("abs_edit_size_min", f.abs_edit_size_min);
  put("abs_edit_size_max", f.abs_edit_size_max);
  put_tri("minor", f.minor);
  put_tri("registered", f.registered);
  put_tri("bot", f.bot);
  put("editor_edit_count_min", f.editor_edit_count_min);
  put("editor_edit_count_max", f.editor_edit_count_max);
  put("editor_account_age_min", f.editor_account_age_min);
  put("editor_account_age_max", f.editor_account_age_max);
  return j;
}

/// Strict parse: unknown keys, wrong types and min > max are errors. JSON null
/// is treated as absent.
inline FilterSpec filter_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("filter: expected a JSON object");
  FilterSpec f;
  for (const auto& [key, v] : j.items()) {
    if (v.is_null()) continue;
    if (key == "namespaces") {
      if (!v.is_array()) throw InvalidArgument("filter: namespaces must be an array");
      std::set<int> s;
      for (const auto& x : v) s.insert(static_cast<int>(filter_detail::parse_int(x, key)));
      f.namespaces = std::move(s);
    } else if (key == "categories_any") {
      if (!v.is_array()) throw InvalidArgument("filter: categories_any must be an array");
      std::set<std::string> s;
      for (const auto& x : v) {
        if (!x.is_string()) throw InvalidArgument("filter: categories_any must hold strings");
        s.insert(x.get<std::string>());
      }
      f.categories_any = std::move(s);
    } else if (key == "page_size_min") {
      f.page_size_min = filter_detail::parse_int(v, key);
    } else if (key == "page_size_max") {
      f.page_size_max = filter_detail::parse_int(v, key);
    } else if (key == "abs_edit_size_min") {
      f.abs_edit_size_min = filter_detail::parse_int(v, key);
    } else if (key == "abs_edit_size_max") {
      f.abs_edit_size_max = filter_detail::parse_int(v, key);
    } else if (key == "minor") {
      f.minor = filter_detail::parse_tri(v, key);
    } else if (key == "registered") {
      f.registered = filter_detail::parse_tri(v, key);
    } else if (key == "bot") {
      f.bot = filter_detail::parse_tri(v, key);
    } else if (key == "editor_edit_count_min") {
      f.editor_edit_count_min = filter_detail::parse_int(v, key);
    } else if (key == "editor_edit_count_max") {
      f.editor_edit_count_max = filter_detail::parse_int(v, key);
    } else if (key == "editor_account_age_min") {
      f.editor_account_age_min = filter_detail::parse_int(v, key);
    } else if (key == "editor_account_age_max") {
      f.editor_account_age_max = filter_detail::parse_int(v, key);
    } else {
      throw InvalidArgument("filter: unknown field '" + key + "'");
    }
  }
  validate(f);
  return f;
}

inline FilterSpec parse_filter(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw InvalidArgument("filter: malformed JSON");
  }
  return filter_from_json(j);
}

inline std::string canonical_string(const FilterSpec& f) { return to_json(f).dump(); }

/// 64-bit FNV-1a over the canonical serialization.
inline std::uint64_t fingerprint(const FilterSpec& f) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_string(f)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

}  // namespace editaudit
