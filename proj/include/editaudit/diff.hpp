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
#include <string>
#include <string_view>
#include <vector>

#include "editaudit/error.hpp"

namespace editaudit {

enum class DiffOpKind { Equal, Insert, Delete };

constexpr std::string_view to_string(DiffOpKind k) {
  switch (k) {
    case DiffOpKind::Equal:
      return "equal";
    case DiffOpKind::Insert:
      return "insert";
    case DiffOpKind::Delete:
      return "delete";
  }
  return "";
}

/// A run of whole lines, joined by '\n' without a trailing newline. An op
/// always covers at least one line, so "" is one empty line.
struct DiffOp {
  DiffOpKind op = DiffOpKind::Equal;
  std::string text;

  friend bool operator==(const DiffOp&, const DiffOp&) = default;
};

namespace diff_detail {

// "a\nb\n" -> {"a", "b", ""}: k newlines always give k + 1 lines, so joining
// with '\n' restores the text exactly.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      return lines;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
}

inline void push(std::vector<DiffOp>& ops, DiffOpKind kind, std::string_view line) {
  if (!ops.empty() && ops.back().op == kind) {
    ops.back().text.push_back('\n');
    ops.back().text.append(line);
  } else {
    ops.push_back(DiffOp{kind, std::string(line)});
  }
}

}  // namespace diff_detail

/// Line-based diff with a longest-common-subsequence alignment, so the number
/// of inserted plus deleted lines is minimal. Within a changed region deletes
/// are emitted before inserts; consecutive ops of one kind are merged.
inline std::vector<DiffOp> compute_diff(std::string_view before, std::string_view after) {
  const auto a = diff_detail::split_lines(before);
  const auto b = diff_detail::split_lines(after);

  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  const std::size_t n = a.size() - prefix - suffix;
  const std::size_t m = b.size() - prefix - suffix;

  // lcs[i][j] = LCS length of a[prefix+i..] and b[prefix+j..] within the middle.
  std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = a[prefix + i] == b[prefix + j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }

  std::vector<DiffOp> ops;
  for (std::size_t k = 0; k < prefix; ++k) diff_detail::push(ops, DiffOpKind::Equal, a[k]);
  std::vector<std::string_view> deletes, inserts;
  auto flush = [&] {
    for (auto line : deletes) diff_detail::push(ops, DiffOpKind::Delete, line);
    for (auto line : inserts) diff_detail::push(ops, DiffOpKind::Insert, line);
    deletes.clear();
    inserts.clear();
  };
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[prefix + i] == b[prefix + j]) {
      flush();
      diff_detail::push(ops, DiffOpKind::Equal, a[prefix + i]);
      ++i;
      ++j;
    } else if (j == m || (i < n && at(i + 1, j) >= at(i, j + 1))) {
      deletes.push_back(a[prefix + i++]);
    } else {
      inserts.push_back(b[prefix + j++]);
    }
  }
  flush();
  for (std::size_t k = a.size() - suffix; k < a.size(); ++k) diff_detail::push(ops, DiffOpKind::Equal, a[k]);
  return ops;
}

/// Applies `ops` to `before`. Throws InvalidArgument if equal/delete runs do
/// not match `before`.
inline std::string apply_diff(std::string_view before, const std::vector<DiffOp>& ops) {
  const auto a = diff_detail::split_lines(before);
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (const auto& op : ops) {
    const auto lines = diff_detail::split_lines(op.text);
    if (op.op == DiffOpKind::Insert) {
      out.insert(out.end(), lines.begin(), lines.end());
      continue;
    }
    for (auto line : lines) {
      if (pos >= a.size() || a[pos] != line) throw InvalidArgument("apply_diff: ops do not match the base text");
      if (op.op == DiffOpKind::Equal) out.push_back(line);
      ++pos;
    }
  }
  if (pos != a.size()) throw InvalidArgument("apply_diff: ops do not consume the base text");
  std::string result;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k) result.push_back('\n');
    result.append(out[k]);
  }
  return result;
}

}  // namespace editaudit
