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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "editaudit/error.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/reverts.hpp"
#include "editaudit/summary.hpp"

namespace editaudit {

/// Service settings. Read from a flat TOML file (key = value, no tables).
struct ServiceConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path annotations_path;  // directory holding the two NDJSON logs
  double threshold = kDefaultThreshold;
  std::int64_t revert_window_seconds = kDefaultRevertWindowSeconds;
  int revert_radius = kDefaultRevertRadius;
  std::string listen_addr = "127.0.0.1:8080";
  std::optional<std::string> upstream_wiki_api_url;
  double alpha_default = kDefaultAlpha;
  std::optional<std::filesystem::path> fixture_diffs_path;
  std::optional<std::filesystem::path> diff_cache_dir;
  std::optional<std::filesystem::path> static_dir;
  // Annotation writes per second per token; 0 disables the limit.
  int write_rate_limit = 10;
  bool fsync = true;
};

namespace config_detail {

using Value = std::variant<std::string, std::int64_t, double, bool>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Value parse_value(const std::string& raw, std::size_t line_no) {
  auto fail = [&](const std::string& what) {
    return InvalidArgument("config line " + std::to_string(line_no) + ": " + what);
  };
  if (raw.empty()) throw fail("missing value");
  if (raw.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < raw.size() && raw[i] != '"'; ++i) {
      if (raw[i] == '\\' && i + 1 < raw.size()) {
        const char c = raw[++i];
        out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
      } else {
        out.push_back(raw[i]);
      }
    }
    if (i >= raw.size()) throw fail("unterminated string");
    const auto rest = trim(raw.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') throw fail("trailing characters after string");
    return out;
  }
  const auto value = trim(raw.substr(0, raw.find('#')));
  if (value == "true") return true;
  if (value == "false") return false;
  std::size_t used = 0;
  try {
    if (value.find_first_of(".eE") == std::string::npos) {
      const auto v = std::stoll(value, &used);
      if (used == value.size()) return static_cast<std::int64_t>(v);
    } else {
      const auto v = std::stod(value, &used);
      if (used == value.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw fail("unsupported value '" + value + "'");
}

}  // namespace config_detail

inline ServiceConfig parse_config(std::istream& in) {
  using config_detail::Value;
  std::map<std::string, std::pair<Value, std::size_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = config_detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') throw InvalidArgument("config line " + std::to_string(line_no) + ": tables are not supported");
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = config_detail::trim(t.substr(0, eq));
    if (entries.contains(key)) throw InvalidArgument("config: duplicate key " + key);
    entries.emplace(key, std::pair{config_detail::parse_value(config_detail::trim(t.substr(eq + 1)), line_no), line_no});
  }

  ServiceConfig c;
  auto str = [](const Value& v, const std::string& key) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    throw InvalidArgument("config: " + key + " must be a string");
  };
  auto integer = [](const Value& v, const std::string& key) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw InvalidArgument("config: " + key + " must be an integer");
  };
  auto real = [](const Value& v, const std::string& key) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw InvalidArgument("config: " + key + " must be a number");
  };
  for (const auto& [key, entry] : entries) {
    const Value& v = entry.first;
    if (key == "dataset_path") {
      c.dataset_path = str(v, key);
    } else if (key == "annotations_path") {
      c.annotations_path = str(v, key);
    } else if (key == "threshold") {
      c.threshold = real(v, key);
    } else if (key == "revert_window_seconds") {
      c.revert_window_seconds = integer(v, key);
    } else if (key == "revert_radius") {
      c.revert_radius = static_cast<int>(integer(v, key));
    } else if (key == "listen_addr") {
      c.listen_addr = str(v, key);
    } else if (key == "upstream_wiki_api_url") {
      c.upstream_wiki_api_url = str(v, key);
    } else if (key == "alpha_default") {
      c.alpha_default = real(v, key);
    } else if (key == "fixture_diffs_path") {
      c.fixture_diffs_path = str(v, key);
    } else if (key == "diff_cache_dir") {
      c.diff_cache_dir = str(v, key);
    } else if (key == "static_dir") {
      c.static_dir = str(v, key);
    } else if (key == "write_rate_limit") {
      c.write_rate_limit = static_cast<int>(integer(v, key));
    } else if (key == "fsync") {
      if (auto* b = std::get_if<bool>(&v)) {
        c.fsync = *b;
      } else {
        throw InvalidArgument("config: fsync must be true or false");
      }
    } else {
      throw InvalidArgument("config: unknown key '" + key + "' (line " + std::to_string(entry.second) + ")");
    }
  }
  if (c.dataset_path.empty()) throw InvalidArgument("config: dataset_path is required");
  if (c.annotations_path.empty()) throw InvalidArgument("config: annotations_path is required");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw InvalidArgument("config: threshold must lie in (0, 1)");
  if (!(c.alpha_default > 0.0 && c.alpha_default < 1.0)) throw InvalidArgument("config: alpha_default must lie in (0, 1)");
  if (c.revert_window_seconds < 0 || c.revert_radius < 0) throw InvalidArgument("config: negative revert settings");
  if (c.write_rate_limit < 0) throw InvalidArgument("config: write_rate_limit must be >= 0");
  return c;
}

inline ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  auto c = parse_config(in);
  // Relative paths are resolved against the config file's directory.
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(c.dataset_path);
  resolve(c.annotations_path);
  for (auto* opt : {&c.fixture_diffs_path, &c.diff_cache_dir, &c.static_dir}) {
    if (*opt) resolve(**opt);
  }
  return c;
}

}  // namespace editaudit
