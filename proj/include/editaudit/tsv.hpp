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
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editaudit/edit.hpp"
#include "editaudit/error.hpp"
#include "editaudit/timeutil.hpp"

namespace editaudit {

inline constexpr std::array<std::string_view, 16> kEditColumns = {
    "rev_id",           "parent_rev_id",        "page_id",        "page_namespace",
    "page_title",       "page_categories",      "page_size_before", "byte_delta",
    "is_minor",         "timestamp",            "editor_name",    "editor_is_registered",
    "editor_is_bot",    "editor_edit_count_at_time", "editor_account_age_at_time", "content_hash"};

inline constexpr std::array<std::string_view, 3> kPredictionColumns = {"rev_id", "damaging_prob",
                                                                        "model_version"};

struct ParseOptions {
  // Any malformed row aborts the parse instead of being dropped.
  bool strict = false;
};

/// Rows parsed plus the number of rows dropped, keyed by reason.
template <typename Row>
struct ParseResult {
  std::vector<Row> rows;
  std::map<std::string, std::size_t> dropped;

  std::size_t total_dropped() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : dropped) n += count;
    return n;
  }
};

namespace tsv_detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline bool parse_bool(std::string_view s, bool& out) {
  if (s == "0") {
    out = false;
    return true;
  }
  if (s == "1") {
    out = true;
    return true;
  }
  return false;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class RowError {
 public:
  explicit RowError(std::string reason) : reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

template <typename Row, typename ParseRow>
ParseResult<Row> parse_table(std::istream& in, std::span<const std::string_view> columns,
                             const ParseOptions& options, ParseRow parse_row) {
  ParseResult<Row> result;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, '\t');
  if (!std::equal(header.begin(), header.end(), columns.begin(), columns.end())) {
    throw ParseError("malformed header: expected " + std::to_string(columns.size()) + " documented columns");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    try {
      if (fields.size() != columns.size()) throw RowError("bad_column_count");
      result.rows.push_back(parse_row(fields));
    } catch (const RowError& e) {
      if (options.strict) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.reason());
      }
      ++result.dropped[e.reason()];
    }
  }
  return result;
}

}  // namespace tsv_detail

/// Reads the 16-column edits TSV. Malformed rows are dropped and counted
/// unless `options.strict`, in which case they raise ParseError.
inline ParseResult<RawEdit> parse_edits(std::istream& in, const ParseOptions& options = {}) {
  using tsv_detail::RowError;
  return tsv_detail::parse_table<RawEdit>(
      in, kEditColumns, options, [](const std::vector<std::string_view>& f) {
        RawEdit e;
        auto integer = [](std::string_view s, std::int64_t& out) {
          if (!tsv_detail::parse_int(s, out)) throw RowError("bad_integer");
        };
        auto flag = [](std::string_view s, bool& out) {
          if (!tsv_detail::parse_bool(s, out)) throw RowError("bad_bool");
        };
        std::int64_t ns = 0;
        integer(f[0], e.rev_id);
        integer(f[1], e.parent_rev_id);
        integer(f[2], e.page_id);
        integer(f[3], ns);
        e.page_title = std::string(f[4]);
        if (!f[5].empty()) {
          for (auto tag : tsv_detail::split(f[5], '|')) {
            if (tag.empty()) throw RowError("bad_category");
            e.page_categories.emplace_back(tag);
          }
          std::sort(e.page_categories.begin(), e.page_categories.end());
          e.page_categories.erase(std::unique(e.page_categories.begin(), e.page_categories.end()),
                                  e.page_categories.end());
        }
        integer(f[6], e.page_size_before);
        integer(f[7], e.byte_delta);
        flag(f[8], e.is_minor);
        const auto ts = parse_iso8601(f[9]);
        if (!ts) throw RowError("bad_timestamp");
        e.timestamp = *ts;
        e.editor_name = std::string(f[10]);
        flag(f[11], e.editor_is_registered);
        flag(f[12], e.editor_is_bot);
        integer(f[13], e.editor_edit_count_at_time);
        integer(f[14], e.editor_account_age_at_time);
        e.content_hash = std::string(f[15]);

        if (e.rev_id <= 0 || e.parent_rev_id < 0 || e.page_id <= 0) throw RowError("bad_id");
        if (ns < 0 || ns > kMaxNamespace) throw RowError("bad_namespace");
        e.page_namespace = static_cast<int>(ns);
        if (e.page_size_before < 0 || e.editor_edit_count_at_time < 0 || e.editor_account_age_at_time < 0) {
          throw RowError("negative_value");
        }
        if (!is_valid_content_hash(e.content_hash)) throw RowError("bad_hash");
        return e;
      });
}

inline void write_edit_row(std::ostream& out, const RawEdit& e) {
  out << e.rev_id << '\t' << e.parent_rev_id << '\t' << e.page_id << '\t' << e.page_namespace << '\t'
      << e.page_title << '\t';
  for (std::size_t i = 0; i < e.page_categories.size(); ++i) {
    if (i) out << '|';
    out << e.page_categories[i];
  }
  out << '\t' << e.page_size_before << '\t' << e.byte_delta << '\t' << (e.is_minor ? 1 : 0) << '\t'
      << format_iso8601(e.timestamp) << '\t' << e.editor_name << '\t' << (e.editor_is_registered ? 1 : 0)
      << '\t' << (e.editor_is_bot ? 1 : 0) << '\t' << e.editor_edit_count_at_time << '\t'
      << e.editor_account_age_at_time << '\t' << e.content_hash << '\n';
}

/// Canonical serialization; the inverse of parse_edits for canonical files.
inline void serialize_edits(std::ostream& out, std::span<const RawEdit> edits) {
  for (std::size_t i = 0; i < kEditColumns.size(); ++i) {
    if (i) out << '\t';
    out << kEditColumns[i];
  }
  out << '\n';
  for (const auto& e : edits) write_edit_row(out, e);
}

inline ParseResult<Prediction> parse_predictions(std::istream& in, const ParseOptions& options = {}) {
  using tsv_detail::RowError;
  return tsv_detail::parse_table<Prediction>(
      in, kPredictionColumns, options, [](const std::vector<std::string_view>& f) {
        Prediction p;
        if (!tsv_detail::parse_int(f[0], p.rev_id) || p.rev_id <= 0) throw RowError("bad_id");
        if (!tsv_detail::parse_double(f[1], p.damaging_prob)) throw RowError("bad_probability");
        if (!(p.damaging_prob >= 0.0 && p.damaging_prob <= 1.0)) throw RowError("probability_out_of_range");
        p.model_version = std::string(f[2]);
        return p;
      });
}

inline void serialize_predictions(std::ostream& out, std::span<const Prediction> predictions) {
  out << "rev_id\tdamaging_prob\tmodel_version\n";
  for (const auto& p : predictions) {
    out << p.rev_id << '\t' << tsv_detail::format_double(p.damaging_prob) << '\t' << p.model_version << '\n';
  }
}

}  // namespace editaudit
